#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cbir/image.hpp"

namespace cbir {

/// Uniform per-axis HSV quantization. Bins are laid out hue-major:
/// index = h_idx * (s_bins * v_bins) + s_idx * v_bins + v_idx.
struct QuantizationScheme {
  std::size_t h_bins = 16;
  std::size_t s_bins = 4;
  std::size_t v_bins = 4;

  std::size_t bin_count() const noexcept { return h_bins * s_bins * v_bins; }
  bool valid() const noexcept { return h_bins >= 1 && s_bins >= 1 && v_bins >= 1; }

  friend bool operator==(const QuantizationScheme&, const QuantizationScheme&) = default;
};

/// Throws kInvalidArgument if any axis has zero bins.
void validate(const QuantizationScheme& scheme);

std::size_t quantize_hsv(const HsvColor& c, const QuantizationScheme& scheme) noexcept;

/// Centre of the bin's cell in (h, s, v). kIndexOutOfRange when index >= M.
HsvColor bin_representative(const QuantizationScheme& scheme, std::size_t index);

/// Normalized bin frequencies (sum 1) under a scheme.
struct ColorHistogram {
  QuantizationScheme scheme;
  std::vector<double> values;

  friend bool operator==(const ColorHistogram&, const ColorHistogram&) = default;
};

struct GridSize {
  std::size_t rows = 4;
  std::size_t cols = 4;

  std::size_t cells() const noexcept { return rows * cols; }
  friend bool operator==(const GridSize&, const GridSize&) = default;
};

/// One histogram per grid block, row-major.
struct LocalColorHistogram {
  GridSize grid;
  std::vector<ColorHistogram> blocks;

  friend bool operator==(const LocalColorHistogram&, const LocalColorHistogram&) = default;
};

/// Per-pixel bin indices of an image; shared by the global and local builders.
std::vector<std::size_t> bin_map(const RawImage& img, const QuantizationScheme& scheme);

ColorHistogram global_histogram(const RawImage& img, const QuantizationScheme& scheme);

/// Block (r, c) starts at pixel row r * floor(H / rows) and column
/// c * floor(W / cols); the last block on each axis absorbs the remainder.
/// kGridTooFine if rows > H or cols > W.
LocalColorHistogram local_histograms(const RawImage& img, GridSize grid,
                                     const QuantizationScheme& scheme);

/// Pixel extent [begin, end) of block `index` out of `count` along an axis of `length`.
struct BlockSpan {
  std::size_t begin;
  std::size_t end;
};
BlockSpan block_span(std::size_t length, std::size_t count, std::size_t index) noexcept;

}  // namespace cbir
