#include "dreamer/image_io.hpp"

#include "dreamer/types.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string_view>

namespace dreamer {

std::uint8_t to_byte(double x) {
  const double clamped = std::clamp(x, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(255.0 * clamped));
}

std::vector<std::uint8_t> encode_ppm(const Rgb8Image& image) {
  const std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.data.begin(), image.data.end());
  return out;
}

namespace {

void png_append(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_fail(png_structp, png_const_charp message) { throw std::runtime_error(message); }

void png_warn_ignore(png_structp, png_const_charp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(const Rgb8Image& image) {
  if (image.width < 1 || image.height < 1) throw InvalidInput("cannot encode an empty image");
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn_ignore);
  if (png == nullptr) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  try {
    png_set_write_fn(png, &out, png_append, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
    for (int v = 0; v < image.height; ++v)
      rows[static_cast<std::size_t>(v)] = const_cast<png_bytep>(image.pixel(0, v));
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
  return out;
}

ImageFormat format_from_name(const std::string& name) {
  if (name == "png") return ImageFormat::kPng;
  if (name == "ppm") return ImageFormat::kPpm;
  throw InvalidInput("unknown image format '" + name + "' (expected png or ppm)");
}

void write_image(const Rgb8Image& image, const std::filesystem::path& path, ImageFormat format) {
  const std::vector<std::uint8_t> bytes = format == ImageFormat::kPng ? encode_png(image) : encode_ppm(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Rgb8Image tile_row(const std::vector<Rgb8Image>& frames) {
  if (frames.empty()) throw InvalidInput("tile_row needs at least one frame");
  const int w = frames.front().width;
  const int h = frames.front().height;
  Rgb8Image out(w * static_cast<int>(frames.size()), h);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].width != w || frames[i].height != h) throw InvalidInput("tile_row frames differ in size");
    for (int v = 0; v < h; ++v)
      std::copy_n(frames[i].pixel(0, v), static_cast<std::size_t>(w) * 3,
                  out.pixel(static_cast<int>(i) * w, v));
  }
  return out;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  static constexpr std::string_view kAlphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t n = bytes[i] << 16;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t n = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += '=';
  }
  return out;
}

}  // namespace dreamer
