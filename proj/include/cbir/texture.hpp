#pragma once

#include <array>
#include <cstddef>

#include "cbir/image.hpp"

namespace cbir {

inline constexpr std::size_t kGrayLevels = 256;

/// p(z) for z in 0..255.
struct GrayHistogram {
  std::array<double, kGrayLevels> p{};
};

/// Histogram-based intensity statistics.
///
/// smoothness uses the variance normalized by (L-1)^2 so that it stays
/// discriminative for 8-bit data; sigma and third_moment are reported in raw
/// intensity units. Entropy is in bits with 0 * log2(0) taken as 0.
struct TextureMoments {
  double mean = 0.0;
  double sigma = 0.0;
  double smoothness = 0.0;
  double third_moment = 0.0;
  double uniformity = 0.0;
  double entropy = 0.0;

  static constexpr std::size_t kSize = 6;
  std::array<double, kSize> as_array() const noexcept {
    return {mean, sigma, smoothness, third_moment, uniformity, entropy};
  }

  friend bool operator==(const TextureMoments&, const TextureMoments&) = default;
};

GrayHistogram gray_histogram(const GrayImage& img);
TextureMoments texture_moments(const GrayHistogram& hist) noexcept;

/// True when the moments satisfy their range invariants (sigma >= 0,
/// R in [0,1), U in [1/256, 1], e in [0, 8], all finite) within `tol`.
bool moments_valid(const TextureMoments& t, double tol = 1e-9) noexcept;

}  // namespace cbir
