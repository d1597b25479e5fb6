#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>
#include <opencv2/imgcodecs.hpp>

#include "cbir/error.hpp"
#include "cbir/image.hpp"
#include "fixtures.hpp"

using namespace cbir;
using cbir::testing::random_image;
using cbir::testing::solid_image;

namespace {

// Independent decode path: OpenCV returns BGR, reorder to packed RGB.
std::vector<std::uint8_t> opencv_decode(const std::vector<std::uint8_t>& bytes, int& w, int& h) {
  const cv::Mat mat = cv::imdecode(cv::Mat(1, static_cast<int>(bytes.size()), CV_8UC1,
                                           const_cast<std::uint8_t*>(bytes.data())),
                                   cv::IMREAD_COLOR);
  w = mat.cols;
  h = mat.rows;
  std::vector<std::uint8_t> rgb;
  rgb.reserve(static_cast<std::size_t>(w * h * 3));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto px = mat.at<cv::Vec3b>(y, x);
      rgb.push_back(px[2]);
      rgb.push_back(px[1]);
      rgb.push_back(px[0]);
    }
  }
  return rgb;
}

std::vector<std::uint8_t> opencv_encode(const RawImage& img, const std::string& ext,
                                        const std::vector<int>& params = {}) {
  cv::Mat mat(static_cast<int>(img.height()), static_cast<int>(img.width()), CV_8UC3);
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      const Rgb c = img.at(x, y);
      mat.at<cv::Vec3b>(static_cast<int>(y), static_cast<int>(x)) = cv::Vec3b(c.b, c.g, c.r);
    }
  }
  std::vector<std::uint8_t> out;
  cv::imencode(ext, mat, out, params);
  return out;
}

RawImage two_by_two() {
  return RawImage(2, 2, {255, 0, 0, 0, 255, 0, 0, 0, 255, 10, 20, 30});
}

ErrorCode decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_image(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode_image accepted invalid data";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(DecodeImage, SingleBlackPixel) {
  const RawImage black(1, 1);
  for (const auto& bytes : {encode_png(black), encode_bmp(black), opencv_encode(black, ".png")}) {
    const RawImage img = decode_image(bytes);
    EXPECT_EQ(img.width(), 1u);
    EXPECT_EQ(img.height(), 1u);
    EXPECT_EQ(std::vector<std::uint8_t>(img.bytes().begin(), img.bytes().end()), (std::vector<std::uint8_t>{0, 0, 0}));
  }
}

TEST(DecodeImage, TwoByTwoFixtureMatchesIndependentDecoder) {
  const RawImage fixture = two_by_two();
  const std::vector<std::uint8_t> expected(fixture.bytes().begin(), fixture.bytes().end());
  for (const auto& bytes : {encode_png(fixture), encode_bmp(fixture)}) {
    EXPECT_EQ(decode_image(bytes), fixture);
    int w = 0;
    int h = 0;
    EXPECT_EQ(opencv_decode(bytes, w, h), expected);
    EXPECT_EQ(w, 2);
    EXPECT_EQ(h, 2);
  }
  // Files written by the other library decode to the same 12 bytes.
  EXPECT_EQ(decode_image(opencv_encode(fixture, ".png")), fixture);
  EXPECT_EQ(decode_image(opencv_encode(fixture, ".bmp")), fixture);
}

TEST(DecodeImage, JpegAgreesWithOpenCv) {
  std::mt19937_64 rng(3);
  const RawImage img = random_image(37, 21, rng);
  const auto jpeg = opencv_encode(img, ".jpg", {cv::IMWRITE_JPEG_QUALITY, 95});
  const RawImage ours = decode_image(jpeg);
  int w = 0;
  int h = 0;
  const auto theirs = opencv_decode(jpeg, w, h);
  ASSERT_EQ(ours.width(), static_cast<std::size_t>(w));
  ASSERT_EQ(ours.height(), static_cast<std::size_t>(h));
  int worst = 0;
  for (std::size_t i = 0; i < theirs.size(); ++i) worst = std::max(worst, std::abs(ours.bytes()[i] - theirs[i]));
  EXPECT_LE(worst, 1);
}

TEST(DecodeImage, PaletteAndTopDownBmp) {
  // 8-bit grayscale BMP written by OpenCV uses a palette.
  cv::Mat gray(3, 5, CV_8UC1);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 5; ++x) gray.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(40 * y + 7 * x);
  }
  std::vector<std::uint8_t> bmp;
  cv::imencode(".bmp", gray, bmp);
  const RawImage img = decode_image(bmp);
  ASSERT_EQ(img.width(), 5u);
  ASSERT_EQ(img.height(), 3u);
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 5; ++x) {
      const auto v = gray.at<std::uint8_t>(y, x);
      EXPECT_EQ(img.at(x, y), (Rgb{v, v, v}));
    }
  }

  // Negative height flips the row order.
  const RawImage fixture = two_by_two();
  auto bottom_up = encode_bmp(fixture);
  auto top_down = bottom_up;
  const std::int32_t neg = -2;
  std::memcpy(top_down.data() + 22, &neg, 4);
  const std::size_t stride = 8;
  std::copy(bottom_up.begin() + 54, bottom_up.begin() + 54 + stride, top_down.begin() + 54 + stride);
  std::copy(bottom_up.begin() + 54 + stride, bottom_up.begin() + 54 + 2 * stride, top_down.begin() + 54);
  EXPECT_EQ(decode_image(top_down), fixture);
}

TEST(DecodeImage, TruncatedFilesAreCorrupt) {
  std::mt19937_64 rng(11);
  const RawImage img = random_image(32, 32, rng);
  for (auto bytes : {encode_png(img), encode_bmp(img), opencv_encode(img, ".jpg")}) {
    bytes.resize(bytes.size() / 2);
    EXPECT_EQ(decode_error(bytes), ErrorCode::kCorruptData);
  }
}

TEST(DecodeImage, UnknownSignatureIsUnsupported) {
  EXPECT_EQ(decode_error({}), ErrorCode::kUnsupportedFormat);
  EXPECT_EQ(decode_error({'G', 'I', 'F', '8', '9', 'a', 0, 0}), ErrorCode::kUnsupportedFormat);
}

TEST(DecodeImage, Deterministic) {
  std::mt19937_64 rng(5);
  const auto bytes = encode_png(random_image(16, 9, rng));
  EXPECT_EQ(decode_image(bytes), decode_image(bytes));
}

TEST(ReadImage, MissingFileIsIoError) {
  try {
    read_image("/nonexistent/cbir/image.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

TEST(RgbToHsv, Examples) {
  const HsvColor red = rgb_to_hsv(255, 0, 0);
  EXPECT_EQ(red.h, 0.0);
  EXPECT_EQ(red.s, 1.0);
  EXPECT_EQ(red.v, 1.0);

  const HsvColor black = rgb_to_hsv(0, 0, 0);
  EXPECT_EQ(black.h, 0.0);
  EXPECT_EQ(black.s, 0.0);
  EXPECT_EQ(black.v, 0.0);

  const HsvColor gray = rgb_to_hsv(128, 128, 128);
  EXPECT_EQ(gray.h, 0.0);
  EXPECT_EQ(gray.s, 0.0);
  EXPECT_NEAR(gray.v, 128.0 / 255.0, 1e-12);
  EXPECT_NEAR(gray.v, 0.50196, 1e-5);

  EXPECT_NEAR(rgb_to_hsv(0, 0, 255).h, 4.0 * M_PI / 3.0, 1e-12);
  EXPECT_NEAR(rgb_to_hsv(0, 255, 0).h, 2.0 * M_PI / 3.0, 1e-12);
}

TEST(RgbToHsv, ExhaustiveRangeAndInverse) {
  int worst = 0;
  for (int r = 0; r < 256; ++r) {
    for (int g = 0; g < 256; ++g) {
      for (int b = 0; b < 256; ++b) {
        const auto c = rgb_to_hsv(static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                                  static_cast<std::uint8_t>(b));
        ASSERT_TRUE(c.h >= 0.0 && c.h < kTwoPi) << r << ',' << g << ',' << b;
        ASSERT_TRUE(c.s >= 0.0 && c.s <= 1.0);
        ASSERT_TRUE(c.v >= 0.0 && c.v <= 1.0);
        if (r == g && g == b) ASSERT_EQ(c.h, 0.0);
        const Rgb back = hsv_to_rgb(c);
        worst = std::max({worst, std::abs(back.r - r), std::abs(back.g - g), std::abs(back.b - b)});
      }
    }
  }
  EXPECT_LE(worst, 1);
}

TEST(ToGrayscale, Examples) {
  const GrayImage black = to_grayscale(solid_image(3, 2, {0, 0, 0}));
  EXPECT_TRUE(std::all_of(black.levels().begin(), black.levels().end(), [](auto z) { return z == 0; }));
  const GrayImage white = to_grayscale(solid_image(3, 2, {255, 255, 255}));
  EXPECT_TRUE(std::all_of(white.levels().begin(), white.levels().end(), [](auto z) { return z == 255; }));
  EXPECT_EQ(to_grayscale(solid_image(1, 1, {255, 0, 0})).at(0, 0), 76);
  EXPECT_EQ(std::lround(0.299 * 255), 76);
}

TEST(ToGrayscale, LevelWithinChannelRange) {
  std::mt19937_64 rng(17);
  const RawImage img = random_image(64, 64, rng);
  const GrayImage gray = to_grayscale(img);
  ASSERT_EQ(gray.width(), img.width());
  ASSERT_EQ(gray.height(), img.height());
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      const Rgb c = img.at(x, y);
      const auto z = gray.at(x, y);
      EXPECT_GE(z, std::min({c.r, c.g, c.b}));
      EXPECT_LE(z, std::max({c.r, c.g, c.b}));
      EXPECT_EQ(z, std::lround(std::floor(0.299 * c.r + 0.587 * c.g + 0.114 * c.b + 0.5 + 1e-9)));
    }
  }
}

TEST(RawImage, RejectsBadDimensions) {
  EXPECT_THROW(RawImage(0, 3), Error);
  EXPECT_THROW(RawImage(2, 2, std::vector<std::uint8_t>(11)), Error);
}

TEST(Thumbnail, LongestSideBounded) {
  const RawImage img = solid_image(300, 150, {1, 2, 3});
  const RawImage t = thumbnail(img, 128);
  EXPECT_EQ(t.width(), 128u);
  EXPECT_EQ(t.height(), 64u);
  EXPECT_EQ(t.at(10, 10), (Rgb{1, 2, 3}));
  EXPECT_EQ(thumbnail(solid_image(20, 10, {}), 128).width(), 20u);
}
