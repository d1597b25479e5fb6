#include "cbir/color_histogram.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cbir/error.hpp"

namespace cbir {

namespace {

std::size_t axis_index(double fraction, std::size_t bins) noexcept {
  if (!(fraction > 0.0)) return 0;
  const auto idx = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(bins)));
  return std::min(idx, bins - 1);
}

ColorHistogram count_region(std::span<const std::size_t> bins, std::size_t width,
                            const QuantizationScheme& scheme, BlockSpan rows, BlockSpan cols) {
  ColorHistogram hist{scheme, std::vector<double>(scheme.bin_count(), 0.0)};
  std::vector<std::size_t> counts(scheme.bin_count(), 0);
  for (std::size_t y = rows.begin; y < rows.end; ++y) {
    for (std::size_t x = cols.begin; x < cols.end; ++x) ++counts[bins[y * width + x]];
  }
  const std::size_t total = (rows.end - rows.begin) * (cols.end - cols.begin);
  if (total == 0) throw Error(ErrorCode::kEmptyImage, "histogram region has no pixels");
  const double denom = static_cast<double>(total);
  for (std::size_t m = 0; m < counts.size(); ++m) hist.values[m] = static_cast<double>(counts[m]) / denom;
  return hist;
}

}  // namespace

void validate(const QuantizationScheme& scheme) {
  if (!scheme.valid()) {
    throw Error(ErrorCode::kInvalidArgument,
                "quantization scheme needs at least one bin per axis, got " + std::to_string(scheme.h_bins) +
                    "," + std::to_string(scheme.s_bins) + "," + std::to_string(scheme.v_bins));
  }
}

std::size_t quantize_hsv(const HsvColor& c, const QuantizationScheme& scheme) noexcept {
  const std::size_t h = axis_index(c.h / kTwoPi, scheme.h_bins);
  const std::size_t s = axis_index(c.s, scheme.s_bins);
  const std::size_t v = axis_index(c.v, scheme.v_bins);
  return h * (scheme.s_bins * scheme.v_bins) + s * scheme.v_bins + v;
}

HsvColor bin_representative(const QuantizationScheme& scheme, std::size_t index) {
  if (index >= scheme.bin_count()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "bin " + std::to_string(index) + " outside [0, " + std::to_string(scheme.bin_count()) + ")");
  }
  const std::size_t v = index % scheme.v_bins;
  const std::size_t s = (index / scheme.v_bins) % scheme.s_bins;
  const std::size_t h = index / (scheme.v_bins * scheme.s_bins);
  return {(static_cast<double>(h) + 0.5) * kTwoPi / static_cast<double>(scheme.h_bins),
          (static_cast<double>(s) + 0.5) / static_cast<double>(scheme.s_bins),
          (static_cast<double>(v) + 0.5) / static_cast<double>(scheme.v_bins)};
}

std::vector<std::size_t> bin_map(const RawImage& img, const QuantizationScheme& scheme) {
  validate(scheme);
  std::vector<std::size_t> bins(img.pixel_count());
  const auto px = img.bytes();
  for (std::size_t i = 0; i < bins.size(); ++i) {
    bins[i] = quantize_hsv(rgb_to_hsv(px[3 * i], px[3 * i + 1], px[3 * i + 2]), scheme);
  }
  return bins;
}

ColorHistogram global_histogram(const RawImage& img, const QuantizationScheme& scheme) {
  if (img.empty()) throw Error(ErrorCode::kEmptyImage, "image has no pixels");
  const auto bins = bin_map(img, scheme);
  return count_region(bins, img.width(), scheme, {0, img.height()}, {0, img.width()});
}

BlockSpan block_span(std::size_t length, std::size_t count, std::size_t index) noexcept {
  const std::size_t step = length / count;
  const std::size_t begin = index * step;
  const std::size_t end = index + 1 == count ? length : begin + step;
  return {begin, end};
}

LocalColorHistogram local_histograms(const RawImage& img, GridSize grid,
                                     const QuantizationScheme& scheme) {
  if (img.empty()) throw Error(ErrorCode::kEmptyImage, "image has no pixels");
  if (grid.rows == 0 || grid.cols == 0) {
    throw Error(ErrorCode::kInvalidArgument, "grid needs at least one row and one column");
  }
  if (grid.rows > img.height() || grid.cols > img.width()) {
    throw Error(ErrorCode::kGridTooFine, "grid " + std::to_string(grid.rows) + "x" + std::to_string(grid.cols) +
                                             " is finer than image " + std::to_string(img.width()) + "x" +
                                             std::to_string(img.height()));
  }
  const auto bins = bin_map(img, scheme);
  LocalColorHistogram lch{grid, {}};
  lch.blocks.reserve(grid.cells());
  for (std::size_t r = 0; r < grid.rows; ++r) {
    const BlockSpan rows = block_span(img.height(), grid.rows, r);
    for (std::size_t c = 0; c < grid.cols; ++c) {
      lch.blocks.push_back(count_region(bins, img.width(), scheme, rows, block_span(img.width(), grid.cols, c)));
    }
  }
  return lch;
}

}  // namespace cbir
