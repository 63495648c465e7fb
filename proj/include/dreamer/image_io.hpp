#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dreamer {

/// Packed 8-bit RGB raster, row-major, top-left origin.
struct Rgb8Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width * height * 3

  Rgb8Image() = default;
  Rgb8Image(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t* pixel(int u, int v) { return data.data() + (static_cast<std::size_t>(v) * width + u) * 3; }
  const std::uint8_t* pixel(int u, int v) const {
    return data.data() + (static_cast<std::size_t>(v) * width + u) * 3;
  }
};

/// Quantizes a [0,1] channel value as round(255 * x).
std::uint8_t to_byte(double x);

std::vector<std::uint8_t> encode_ppm(const Rgb8Image& image);
std::vector<std::uint8_t> encode_png(const Rgb8Image& image);

enum class ImageFormat { kPng, kPpm };

ImageFormat format_from_name(const std::string& name);
void write_image(const Rgb8Image& image, const std::filesystem::path& path, ImageFormat format);

/// Horizontal strip of equally sized images, left to right.
Rgb8Image tile_row(const std::vector<Rgb8Image>& frames);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);

}  // namespace dreamer
