#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "cbir/color_histogram.hpp"
#include "cbir/error.hpp"
#include "cbir/features.hpp"
#include "fixtures.hpp"

using namespace cbir;
using cbir::testing::random_image;
using cbir::testing::solid_image;

namespace {

const QuantizationScheme kDefault{16, 4, 4};

double mass(const ColorHistogram& h) { return std::accumulate(h.values.begin(), h.values.end(), 0.0); }

std::size_t nonzero_bins(const ColorHistogram& h) {
  return static_cast<std::size_t>(std::count_if(h.values.begin(), h.values.end(), [](double v) { return v != 0.0; }));
}

// Hue-major layout worked out independently of the implementation.
std::size_t layout(std::size_t h, std::size_t s, std::size_t v, const QuantizationScheme& q) {
  return (h * q.s_bins + s) * q.v_bins + v;
}

}  // namespace

TEST(QuantizeHsv, Examples) {
  EXPECT_EQ(quantize_hsv({0.0, 0.0, 0.0}, kDefault), 0u);
  EXPECT_EQ(quantize_hsv({0.0, 0.1, 0.9}, kDefault), 3u);
  // s = 1 and v = 1 clamp into the top bin.
  EXPECT_EQ(quantize_hsv({0.0, 1.0, 0.0}, kDefault), layout(0, 3, 0, kDefault));
  EXPECT_EQ(quantize_hsv({0.0, 1.0, 1.0}, kDefault), 15u);
  // Pure blue: h = 4pi/3 falls in hue cell floor(16 * 2/3) = 10.
  EXPECT_EQ(quantize_hsv(rgb_to_hsv(0, 0, 255), kDefault), layout(10, 3, 3, kDefault));
  EXPECT_EQ(quantize_hsv({kTwoPi - 1e-12, 0.5, 0.5}, kDefault), layout(15, 2, 2, kDefault));
}

TEST(QuantizeHsv, IndexBelowBinCount) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const QuantizationScheme odd{7, 3, 5};
  for (int i = 0; i < 10000; ++i) {
    const HsvColor c{unit(rng) * kTwoPi, unit(rng), unit(rng)};
    EXPECT_LT(quantize_hsv(c, odd), odd.bin_count());
  }
}

TEST(BinRepresentative, Examples) {
  const HsvColor c = bin_representative(kDefault, 0);
  EXPECT_NEAR(c.h, M_PI / 16.0, 1e-15);
  EXPECT_DOUBLE_EQ(c.s, 0.125);
  EXPECT_DOUBLE_EQ(c.v, 0.125);
  try {
    bin_representative(kDefault, 256);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIndexOutOfRange);
  }
}

TEST(BinRepresentative, LandsInItsOwnBin) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& scheme : {kDefault, QuantizationScheme{8, 3, 3}, QuantizationScheme{1, 1, 1}}) {
    for (std::size_t m = 0; m < scheme.bin_count(); ++m) EXPECT_EQ(quantize_hsv(bin_representative(scheme, m), scheme), m);
    for (int i = 0; i < 2000; ++i) {
      const HsvColor c{unit(rng) * kTwoPi, unit(rng), unit(rng)};
      const std::size_t m = quantize_hsv(c, scheme);
      EXPECT_EQ(quantize_hsv(bin_representative(scheme, m), scheme), m);
    }
  }
}

TEST(QuantizationScheme, ZeroAxisRejected) {
  EXPECT_THROW(validate(QuantizationScheme{0, 4, 4}), Error);
  EXPECT_THROW(global_histogram(solid_image(2, 2, {}), QuantizationScheme{16, 0, 4}), Error);
  EXPECT_EQ(kDefault.bin_count(), 256u);
}

TEST(GlobalHistogram, SolidImageIsOneBin) {
  const ColorHistogram h = global_histogram(solid_image(5, 3, {200, 40, 90}), kDefault);
  ASSERT_EQ(h.values.size(), 256u);
  EXPECT_EQ(nonzero_bins(h), 1u);
  EXPECT_EQ(*std::max_element(h.values.begin(), h.values.end()), 1.0);
}

TEST(GlobalHistogram, HalfRedHalfBlue) {
  RawImage img(4, 2);
  for (std::size_t x = 0; x < 4; ++x) {
    img.set(x, 0, {255, 0, 0});
    img.set(x, 1, {0, 0, 255});
  }
  const ColorHistogram h = global_histogram(img, kDefault);
  EXPECT_EQ(h.values[15], 0.5);
  EXPECT_EQ(h.values[175], 0.5);
  EXPECT_EQ(nonzero_bins(h), 2u);
}

TEST(GlobalHistogram, MassAndPermutationInvariance) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const RawImage img = random_image(17, 11, rng);
    const ColorHistogram h = global_histogram(img, kDefault);
    EXPECT_NEAR(mass(h), 1.0, 1e-9);
    EXPECT_TRUE(std::all_of(h.values.begin(), h.values.end(), [](double v) { return v >= 0.0; }));

    std::vector<std::size_t> order(img.pixel_count());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::uint8_t> shuffled(img.bytes().size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      std::copy_n(img.bytes().begin() + static_cast<std::ptrdiff_t>(3 * order[i]), 3, shuffled.begin() + static_cast<std::ptrdiff_t>(3 * i));
    }
    EXPECT_EQ(global_histogram(RawImage(img.width(), img.height(), shuffled), kDefault), h);
  }
}

TEST(GlobalHistogram, CoarseningSumsFineBins) {
  std::mt19937_64 rng(4);
  const RawImage img = random_image(40, 30, rng);
  const ColorHistogram fine = global_histogram(img, kDefault);
  for (const auto& coarse_scheme : {QuantizationScheme{8, 4, 4}, QuantizationScheme{16, 2, 2}, QuantizationScheme{4, 1, 2}}) {
    const ColorHistogram coarse = global_histogram(img, coarse_scheme);
    std::vector<double> merged(coarse_scheme.bin_count(), 0.0);
    const std::size_t fh = kDefault.h_bins / coarse_scheme.h_bins;
    const std::size_t fs = kDefault.s_bins / coarse_scheme.s_bins;
    const std::size_t fv = kDefault.v_bins / coarse_scheme.v_bins;
    for (std::size_t h = 0; h < kDefault.h_bins; ++h) {
      for (std::size_t s = 0; s < kDefault.s_bins; ++s) {
        for (std::size_t v = 0; v < kDefault.v_bins; ++v) {
          merged[layout(h / fh, s / fs, v / fv, coarse_scheme)] += fine.values[layout(h, s, v, kDefault)];
        }
      }
    }
    for (std::size_t m = 0; m < merged.size(); ++m) EXPECT_NEAR(coarse.values[m], merged[m], 1e-12) << m;
    EXPECT_NEAR(mass(coarse), 1.0, 1e-9);
  }
}

TEST(LocalHistograms, OneByOneGridEqualsGlobal) {
  std::mt19937_64 rng(5);
  const RawImage img = random_image(13, 9, rng);
  const LocalColorHistogram lch = local_histograms(img, {1, 1}, kDefault);
  ASSERT_EQ(lch.blocks.size(), 1u);
  EXPECT_EQ(lch.blocks[0], global_histogram(img, kDefault));
}

TEST(LocalHistograms, SolidQuadrants) {
  const Rgb colors[4] = {{255, 0, 0}, {0, 255, 0}, {0, 0, 255}, {255, 255, 255}};
  RawImage img(6, 4);
  for (std::size_t y = 0; y < 4; ++y) {
    for (std::size_t x = 0; x < 6; ++x) img.set(x, y, colors[(y / 2) * 2 + x / 3]);
  }
  const LocalColorHistogram lch = local_histograms(img, {2, 2}, kDefault);
  ASSERT_EQ(lch.blocks.size(), 4u);
  for (std::size_t b = 0; b < 4; ++b) {
    const auto& h = lch.blocks[b];
    EXPECT_EQ(nonzero_bins(h), 1u);
    EXPECT_EQ(h.values[quantize_hsv(rgb_to_hsv(colors[b]), kDefault)], 1.0);
  }
}

TEST(LocalHistograms, GridTooFine) {
  try {
    local_histograms(solid_image(4, 4, {}), {5, 5}, kDefault);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGridTooFine);
  }
  EXPECT_NO_THROW(local_histograms(solid_image(4, 4, {}), {4, 4}, kDefault));
}

TEST(LocalHistograms, PixelWeightedBlocksSumToGlobal) {
  std::mt19937_64 rng(6);
  const RawImage img = random_image(23, 17, rng);
  const GridSize grid{4, 3};
  const LocalColorHistogram lch = local_histograms(img, grid, kDefault);
  ASSERT_EQ(lch.blocks.size(), grid.cells());
  std::vector<double> weighted(kDefault.bin_count(), 0.0);
  std::size_t pixels = 0;
  for (std::size_t r = 0; r < grid.rows; ++r) {
    const BlockSpan rows = block_span(img.height(), grid.rows, r);
    for (std::size_t c = 0; c < grid.cols; ++c) {
      const BlockSpan cols = block_span(img.width(), grid.cols, c);
      const std::size_t n = (rows.end - rows.begin) * (cols.end - cols.begin);
      pixels += n;
      const auto& block = lch.blocks[r * grid.cols + c];
      EXPECT_NEAR(mass(block), 1.0, 1e-9);
      for (std::size_t m = 0; m < weighted.size(); ++m) weighted[m] += block.values[m] * static_cast<double>(n);
    }
  }
  EXPECT_EQ(pixels, img.pixel_count());
  const ColorHistogram global = global_histogram(img, kDefault);
  for (std::size_t m = 0; m < weighted.size(); ++m) {
    EXPECT_NEAR(weighted[m] / static_cast<double>(pixels), global.values[m], 1e-12);
  }
}

TEST(BlockSpan, LastBlockAbsorbsRemainder) {
  EXPECT_EQ(block_span(10, 3, 0).begin, 0u);
  EXPECT_EQ(block_span(10, 3, 0).end, 3u);
  EXPECT_EQ(block_span(10, 3, 1).begin, 3u);
  EXPECT_EQ(block_span(10, 3, 2).begin, 6u);
  EXPECT_EQ(block_span(10, 3, 2).end, 10u);
}

TEST(ExtractFeatures, SolidImage) {
  const ExtractionConfig config;
  const FeatureVector fv = extract_features(solid_image(16, 16, {10, 200, 30}), config);
  EXPECT_EQ(nonzero_bins(fv.gch), 1u);
  ASSERT_TRUE(fv.lch.has_value());
  ASSERT_EQ(fv.lch->blocks.size(), 16u);
  for (const auto& b : fv.lch->blocks) EXPECT_EQ(b, fv.gch);
  ASSERT_TRUE(fv.texture.has_value());
  EXPECT_EQ(fv.texture->sigma, 0.0);
  EXPECT_TRUE(fv.id.empty());
  EXPECT_FALSE(fv.label.has_value());
}

TEST(ExtractFeatures, OptionalFamiliesAndDeterminism) {
  std::mt19937_64 rng(7);
  const RawImage img = random_image(20, 20, rng);
  ExtractionConfig config;
  config.include_texture = false;
  const FeatureVector a = extract_features(img, config);
  EXPECT_FALSE(a.texture.has_value());
  EXPECT_TRUE(a.lch.has_value());
  EXPECT_EQ(extract_features(img, config), a);
  config.include_lch = false;
  EXPECT_FALSE(extract_features(img, config).lch.has_value());
}
