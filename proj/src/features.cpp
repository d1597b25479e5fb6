#include "cbir/features.hpp"

#include "cbir/error.hpp"

namespace cbir {

void validate(const ExtractionConfig& config) {
  validate(config.scheme);
  if (config.include_lch && (config.grid.rows == 0 || config.grid.cols == 0)) {
    throw Error(ErrorCode::kInvalidArgument, "LCH grid needs at least one row and one column");
  }
}

FeatureVector extract_features(const RawImage& img, const ExtractionConfig& config) {
  validate(config);
  FeatureVector fv;
  fv.gch = global_histogram(img, config.scheme);
  if (config.include_lch) fv.lch = local_histograms(img, config.grid, config.scheme);
  if (config.include_texture) fv.texture = texture_moments(gray_histogram(to_grayscale(img)));
  return fv;
}

}  // namespace cbir
