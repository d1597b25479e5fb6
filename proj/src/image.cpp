#include "cbir/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "cbir/error.hpp"

namespace cbir {

RawImage::RawImage(std::size_t width, std::size_t height)
    : RawImage(width, height, std::vector<std::uint8_t>(width * height * 3, 0)) {}

RawImage::RawImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be at least 1x1");
  }
  if (pixels_.size() != width * height * 3) {
    throw Error(ErrorCode::kInvalidArgument, "pixel buffer length does not match width*height*3");
  }
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> levels)
    : width_(width), height_(height), levels_(std::move(levels)) {
  if (levels_.size() != width * height) {
    throw Error(ErrorCode::kInvalidArgument, "level buffer length does not match width*height");
  }
}

namespace {

enum class Format { kPng, kJpeg, kBmp, kUnknown };

Format sniff(std::span<const std::uint8_t> b) {
  static constexpr std::array<std::uint8_t, 8> kPngMagic = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (b.size() >= 8 && std::equal(kPngMagic.begin(), kPngMagic.end(), b.begin())) return Format::kPng;
  if (b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF) return Format::kJpeg;
  if (b.size() >= 2 && b[0] == 'B' && b[1] == 'M') return Format::kBmp;
  return Format::kUnknown;
}

// ---------------------------------------------------------------------------
// PNG (libpng simplified API)

RawImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kCorruptData, "png: " + msg);
  }
  image.format = PNG_FORMAT_RGB;
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw Error(ErrorCode::kCorruptData, "png: zero dimension");
  }
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kCorruptData, "png: " + msg);
  }
  return RawImage(image.width, image.height, std::move(pixels));
}

// ---------------------------------------------------------------------------
// JPEG (libjpeg). Warnings such as "premature end of data" are fatal here:
// libjpeg would otherwise pad a truncated stream with gray rows.

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_fail(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_message(j_common_ptr cinfo, int level) {
  if (level < 0) jpeg_fail(cinfo);
}

// Kept free of non-trivial locals: longjmp must not skip destructors.
bool decode_jpeg_into(const std::uint8_t* data, std::size_t size, std::vector<std::uint8_t>& out,
                      std::size_t& width, std::size_t& height, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_fail;
  err.base.emit_message = jpeg_message;
  err.message[0] = '\0';
  if (setjmp(err.jump)) {
    std::snprintf(message, JMSG_LENGTH_MAX, "%s", err.message);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = cinfo.output_width;
  height = cinfo.output_height;
  out.resize(width * height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

RawImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint8_t> pixels;
  std::size_t width = 0;
  std::size_t height = 0;
  char message[JMSG_LENGTH_MAX] = {};
  if (!decode_jpeg_into(bytes.data(), bytes.size(), pixels, width, height, message)) {
    throw Error(ErrorCode::kCorruptData, std::string("jpeg: ") + message);
  }
  if (width == 0 || height == 0) throw Error(ErrorCode::kCorruptData, "jpeg: zero dimension");
  return RawImage(width, height, std::move(pixels));
}

// ---------------------------------------------------------------------------
// BMP: uncompressed 1/4/8/16/24/32 bpp and BI_BITFIELDS.

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : b_(b) {}

  std::uint32_t u16(std::size_t off) const {
    need(off, 2);
    return static_cast<std::uint32_t>(b_[off]) | (static_cast<std::uint32_t>(b_[off + 1]) << 8);
  }
  std::uint32_t u32(std::size_t off) const {
    need(off, 4);
    return static_cast<std::uint32_t>(b_[off]) | (static_cast<std::uint32_t>(b_[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b_[off + 2]) << 16) | (static_cast<std::uint32_t>(b_[off + 3]) << 24);
  }
  std::int32_t i32(std::size_t off) const { return static_cast<std::int32_t>(u32(off)); }
  std::uint8_t u8(std::size_t off) const {
    need(off, 1);
    return b_[off];
  }
  void need(std::size_t off, std::size_t n) const {
    if (off > b_.size() || n > b_.size() - off) throw Error(ErrorCode::kCorruptData, "bmp: truncated");
  }

 private:
  std::span<const std::uint8_t> b_;
};

struct Channel {
  std::uint32_t mask = 0;
  int shift = 0;
  std::uint32_t max = 0;

  static Channel from_mask(std::uint32_t mask) {
    Channel c{mask, 0, 0};
    if (mask == 0) return c;
    while (((mask >> c.shift) & 1U) == 0) ++c.shift;
    c.max = mask >> c.shift;
    return c;
  }
  std::uint8_t extract(std::uint32_t px) const {
    if (mask == 0) return 0;
    const std::uint32_t v = (px & mask) >> shift;
    return static_cast<std::uint8_t>((v * 255 + max / 2) / max);
  }
};

RawImage decode_bmp(std::span<const std::uint8_t> bytes) {
  const ByteReader rd(bytes);
  constexpr std::size_t kInfo = 14;
  const std::uint32_t data_offset = rd.u32(10);
  const std::uint32_t dib_size = rd.u32(kInfo);

  std::int64_t width = 0;
  std::int64_t height = 0;
  std::uint32_t bpp = 0;
  std::uint32_t compression = 0;
  std::uint32_t palette_size = 0;
  std::size_t palette_entry = 4;
  if (dib_size == 12) {
    width = rd.u16(kInfo + 4);
    height = static_cast<std::int16_t>(rd.u16(kInfo + 6));
    bpp = rd.u16(kInfo + 10);
    palette_entry = 3;
  } else if (dib_size >= 40) {
    width = rd.i32(kInfo + 4);
    height = rd.i32(kInfo + 8);
    bpp = rd.u16(kInfo + 14);
    compression = rd.u32(kInfo + 16);
    palette_size = rd.u32(kInfo + 32);
  } else {
    throw Error(ErrorCode::kCorruptData, "bmp: unknown header size " + std::to_string(dib_size));
  }
  constexpr std::uint32_t kBiRgb = 0;
  constexpr std::uint32_t kBiBitfields = 3;
  if (compression != kBiRgb && compression != kBiBitfields) {
    throw Error(ErrorCode::kUnsupportedFormat, "bmp: compressed bitmaps are not supported");
  }
  const bool top_down = height < 0;
  height = top_down ? -height : height;
  if (width <= 0 || height <= 0 || width > (1 << 16) || height > (1 << 16)) {
    throw Error(ErrorCode::kCorruptData, "bmp: invalid dimensions");
  }

  Channel red;
  Channel green;
  Channel blue;
  if (bpp == 16 || bpp == 32) {
    if (compression == kBiBitfields) {
      // Masks follow a 40-byte header directly, or live inside V4/V5 headers.
      const std::size_t mask_off = kInfo + 40;
      red = Channel::from_mask(rd.u32(mask_off));
      green = Channel::from_mask(rd.u32(mask_off + 4));
      blue = Channel::from_mask(rd.u32(mask_off + 8));
    } else if (bpp == 16) {
      red = Channel::from_mask(0x7C00);
      green = Channel::from_mask(0x03E0);
      blue = Channel::from_mask(0x001F);
    } else {
      red = Channel::from_mask(0x00FF0000);
      green = Channel::from_mask(0x0000FF00);
      blue = Channel::from_mask(0x000000FF);
    }
  } else if (compression == kBiBitfields) {
    throw Error(ErrorCode::kCorruptData, "bmp: bitfields require 16 or 32 bpp");
  }

  std::vector<Rgb> palette;
  if (bpp == 1 || bpp == 4 || bpp == 8) {
    const std::uint32_t count = palette_size == 0 ? (1U << bpp) : std::min(palette_size, 1U << bpp);
    const std::size_t pal_off = kInfo + dib_size;
    rd.need(pal_off, count * palette_entry);
    palette.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::size_t o = pal_off + i * palette_entry;
      palette.push_back({rd.u8(o + 2), rd.u8(o + 1), rd.u8(o)});
    }
  } else if (bpp != 16 && bpp != 24 && bpp != 32) {
    throw Error(ErrorCode::kUnsupportedFormat, "bmp: unsupported bit depth " + std::to_string(bpp));
  }

  const auto w = static_cast<std::size_t>(width);
  const auto h = static_cast<std::size_t>(height);
  const std::size_t stride = ((w * bpp + 31) / 32) * 4;
  rd.need(data_offset, stride * h);

  RawImage img(w, h);
  for (std::size_t row = 0; row < h; ++row) {
    const std::size_t y = top_down ? row : h - 1 - row;
    const std::size_t base = data_offset + row * stride;
    for (std::size_t x = 0; x < w; ++x) {
      Rgb c;
      switch (bpp) {
        case 24: {
          const std::size_t o = base + x * 3;
          c = {bytes[o + 2], bytes[o + 1], bytes[o]};
          break;
        }
        case 32: {
          const std::uint32_t px = rd.u32(base + x * 4);
          c = {red.extract(px), green.extract(px), blue.extract(px)};
          break;
        }
        case 16: {
          const std::uint32_t px = rd.u16(base + x * 2);
          c = {red.extract(px), green.extract(px), blue.extract(px)};
          break;
        }
        default: {
          const std::size_t bit = x * bpp;
          const std::uint8_t byte = bytes[base + bit / 8];
          const unsigned shift = 8 - bpp - (bit % 8);
          const std::size_t idx = (byte >> shift) & ((1U << bpp) - 1);
          if (idx >= palette.size()) throw Error(ErrorCode::kCorruptData, "bmp: palette index out of range");
          c = palette[idx];
          break;
        }
      }
      img.set(x, y, c);
    }
  }
  return img;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  put_u16(out, v & 0xFFFF);
  put_u16(out, v >> 16);
}

}  // namespace

RawImage decode_image(std::span<const std::uint8_t> bytes) {
  switch (sniff(bytes)) {
    case Format::kPng: return decode_png(bytes);
    case Format::kJpeg: return decode_jpeg(bytes);
    case Format::kBmp: return decode_bmp(bytes);
    case Format::kUnknown: break;
  }
  throw Error(ErrorCode::kUnsupportedFormat, "unrecognized image signature");
}

RawImage read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIoError, "read failed for " + path);
  return decode_image(bytes);
}

std::vector<std::uint8_t> encode_png(const RawImage& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.bytes().data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoError, std::string("png encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.bytes().data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoError, std::string("png encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> encode_bmp(const RawImage& img) {
  const std::size_t stride = ((img.width() * 24 + 31) / 32) * 4;
  const std::size_t data_size = stride * img.height();
  std::vector<std::uint8_t> out;
  out.reserve(54 + data_size);
  out.push_back('B');
  out.push_back('M');
  put_u32(out, static_cast<std::uint32_t>(54 + data_size));
  put_u32(out, 0);
  put_u32(out, 54);
  put_u32(out, 40);
  put_u32(out, static_cast<std::uint32_t>(img.width()));
  put_u32(out, static_cast<std::uint32_t>(img.height()));
  put_u16(out, 1);
  put_u16(out, 24);
  put_u32(out, 0);
  put_u32(out, static_cast<std::uint32_t>(data_size));
  put_u32(out, 2835);
  put_u32(out, 2835);
  put_u32(out, 0);
  put_u32(out, 0);
  for (std::size_t row = 0; row < img.height(); ++row) {
    const std::size_t y = img.height() - 1 - row;
    std::size_t written = 0;
    for (std::size_t x = 0; x < img.width(); ++x) {
      const Rgb c = img.at(x, y);
      out.push_back(c.b);
      out.push_back(c.g);
      out.push_back(c.r);
      written += 3;
    }
    for (; written < stride; ++written) out.push_back(0);
  }
  return out;
}

HsvColor rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  const int max = std::max({r, g, b});
  const int min = std::min({r, g, b});
  const int delta = max - min;
  HsvColor out;
  out.v = max / 255.0;
  if (max == 0 || delta == 0) return out;
  out.s = static_cast<double>(delta) / max;
  double sector = 0.0;
  if (max == r) {
    sector = static_cast<double>(g - b) / delta;
    if (sector < 0.0) sector += 6.0;
  } else if (max == g) {
    sector = 2.0 + static_cast<double>(b - r) / delta;
  } else {
    sector = 4.0 + static_cast<double>(r - g) / delta;
  }
  out.h = sector * (kTwoPi / 6.0);
  if (out.h >= kTwoPi) out.h -= kTwoPi;
  return out;
}

Rgb hsv_to_rgb(const HsvColor& c) noexcept {
  const double chroma = c.v * c.s;
  const double sector = c.h / (kTwoPi / 6.0);
  const double x = chroma * (1.0 - std::abs(std::fmod(sector, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(sector) % 6) {
    case 0: r = chroma; g = x; break;
    case 1: r = x; g = chroma; break;
    case 2: g = chroma; b = x; break;
    case 3: g = x; b = chroma; break;
    case 4: r = x; b = chroma; break;
    default: r = chroma; b = x; break;
  }
  const double m = c.v - chroma;
  auto to8 = [m](double ch) {
    return static_cast<std::uint8_t>(std::clamp(std::lround((ch + m) * 255.0), 0L, 255L));
  };
  return {to8(r), to8(g), to8(b)};
}

std::uint8_t luma(Rgb c) noexcept {
  // Integer form of 0.299/0.587/0.114 keeps rounding exact.
  const unsigned sum = 299U * c.r + 587U * c.g + 114U * c.b;
  return static_cast<std::uint8_t>((sum + 500U) / 1000U);
}

GrayImage to_grayscale(const RawImage& img) {
  std::vector<std::uint8_t> levels(img.pixel_count());
  const auto px = img.bytes();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    levels[i] = luma({px[3 * i], px[3 * i + 1], px[3 * i + 2]});
  }
  return GrayImage(img.width(), img.height(), std::move(levels));
}

RawImage thumbnail(const RawImage& img, std::size_t max_side) {
  const std::size_t longest = std::max(img.width(), img.height());
  if (longest <= max_side || max_side == 0) return img;
  const std::size_t tw = std::max<std::size_t>(1, img.width() * max_side / longest);
  const std::size_t th = std::max<std::size_t>(1, img.height() * max_side / longest);
  RawImage out(tw, th);
  for (std::size_t y = 0; y < th; ++y) {
    const std::size_t sy = std::min(img.height() - 1, (2 * y + 1) * img.height() / (2 * th));
    for (std::size_t x = 0; x < tw; ++x) {
      const std::size_t sx = std::min(img.width() - 1, (2 * x + 1) * img.width() / (2 * tw));
      out.set(x, y, img.at(sx, sy));
    }
  }
  return out;
}

}  // namespace cbir
