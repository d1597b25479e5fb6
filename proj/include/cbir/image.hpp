#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cbir {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Decoded 8-bit RGB raster, row-major, three bytes per pixel.
class RawImage {
 public:
  RawImage() = default;
  /// Zero-filled image. Throws kInvalidArgument for a zero dimension.
  RawImage(std::size_t width, std::size_t height);
  /// Takes ownership of a packed RGB buffer of width * height * 3 bytes.
  RawImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }
  bool empty() const noexcept { return pixel_count() == 0; }

  Rgb at(std::size_t x, std::size_t y) const noexcept {
    const std::size_t i = (y * width_ + x) * 3;
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
  }
  void set(std::size_t x, std::size_t y, Rgb c) noexcept {
    const std::size_t i = (y * width_ + x) * 3;
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
  }

  std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }

  friend bool operator==(const RawImage&, const RawImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Hue in radians [0, 2pi), saturation and value in [0, 1].
struct HsvColor {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;
};

class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> levels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::span<const std::uint8_t> levels() const noexcept { return levels_; }
  std::uint8_t at(std::size_t x, std::size_t y) const noexcept {
    return levels_[y * width_ + x];
  }

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> levels_;
};

/// Decodes a PNG, JPEG or BMP byte stream, detected by magic number.
/// Throws kUnsupportedFormat for any other signature and kCorruptData for
/// truncated or inconsistent files.
RawImage decode_image(std::span<const std::uint8_t> bytes);

/// Reads a file and decodes it. kIoError when the file cannot be read.
RawImage read_image(const std::string& path);

std::vector<std::uint8_t> encode_png(const RawImage& img);
std::vector<std::uint8_t> encode_bmp(const RawImage& img);

/// Hexcone conversion. Achromatic inputs map to h = 0, s = 0.
HsvColor rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;
inline HsvColor rgb_to_hsv(Rgb c) noexcept { return rgb_to_hsv(c.r, c.g, c.b); }

/// Inverse hexcone conversion, channels rounded to the nearest integer.
Rgb hsv_to_rgb(const HsvColor& c) noexcept;

/// Luma 0.299R + 0.587G + 0.114B, rounded half up.
std::uint8_t luma(Rgb c) noexcept;
GrayImage to_grayscale(const RawImage& img);

/// Nearest-neighbour downscale so the longest side is at most max_side.
/// Images already within bounds are returned unchanged.
RawImage thumbnail(const RawImage& img, std::size_t max_side);

}  // namespace cbir
