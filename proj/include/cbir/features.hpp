#pragma once

#include <optional>
#include <string>

#include "cbir/color_histogram.hpp"
#include "cbir/image.hpp"
#include "cbir/texture.hpp"

namespace cbir {

/// What gets extracted per image. The GCH is always computed; LCH and
/// texture are optional families.
struct ExtractionConfig {
  QuantizationScheme scheme;
  GridSize grid;
  bool include_lch = true;
  bool include_texture = true;

  friend bool operator==(const ExtractionConfig&, const ExtractionConfig&) = default;
};

/// Throws kInvalidArgument for a bad scheme or an empty grid.
void validate(const ExtractionConfig& config);

struct FeatureVector {
  std::string id;
  std::string path;
  std::optional<std::string> label;
  ColorHistogram gch;
  std::optional<LocalColorHistogram> lch;
  std::optional<TextureMoments> texture;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Unlabeled feature vector with empty id and path.
FeatureVector extract_features(const RawImage& img, const ExtractionConfig& config);

}  // namespace cbir
