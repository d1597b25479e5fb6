#include "cbir/texture.hpp"

#include <cmath>

#include "cbir/error.hpp"

namespace cbir {

GrayHistogram gray_histogram(const GrayImage& img) {
  const auto levels = img.levels();
  if (levels.empty()) throw Error(ErrorCode::kEmptyImage, "gray image has no pixels");
  std::array<std::size_t, kGrayLevels> counts{};
  for (const std::uint8_t z : levels) ++counts[z];
  GrayHistogram hist;
  const double n = static_cast<double>(levels.size());
  for (std::size_t z = 0; z < kGrayLevels; ++z) hist.p[z] = static_cast<double>(counts[z]) / n;
  return hist;
}

TextureMoments texture_moments(const GrayHistogram& hist) noexcept {
  constexpr double kMaxLevel = static_cast<double>(kGrayLevels - 1);
  TextureMoments t;
  for (std::size_t z = 0; z < kGrayLevels; ++z) t.mean += static_cast<double>(z) * hist.p[z];

  double variance = 0.0;
  for (std::size_t z = 0; z < kGrayLevels; ++z) {
    const double p = hist.p[z];
    if (p == 0.0) continue;
    const double d = static_cast<double>(z) - t.mean;
    variance += d * d * p;
    t.third_moment += d * d * d * p;
    t.uniformity += p * p;
    t.entropy -= p * std::log2(p);
  }
  t.sigma = std::sqrt(variance);
  const double normalized = variance / (kMaxLevel * kMaxLevel);
  t.smoothness = 1.0 - 1.0 / (1.0 + normalized);
  // -0.0 from a single-level histogram
  if (t.entropy == 0.0) t.entropy = 0.0;
  return t;
}

bool moments_valid(const TextureMoments& t, double tol) noexcept {
  for (const double v : t.as_array()) {
    if (!std::isfinite(v)) return false;
  }
  return t.sigma >= 0.0 && t.smoothness >= 0.0 && t.smoothness < 1.0 &&
         t.uniformity >= 1.0 / kGrayLevels - tol && t.uniformity <= 1.0 + tol && t.entropy >= -tol &&
         t.entropy <= 8.0 + tol && t.mean >= -tol && t.mean <= 255.0 + tol;
}

}  // namespace cbir
