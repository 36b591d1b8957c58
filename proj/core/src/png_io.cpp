#include "rmnet/png_io.hpp"

#include <png.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "rmnet/errors.hpp"

namespace rmnet {
namespace {

struct PngImage {
  png_image image{};
  PngImage() {
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
};

std::vector<std::uint8_t> decode(const std::filesystem::path& path, png_uint_32 format, int* h,
                                 int* w, bool* was_color) {
  PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + png.image.message);
  }
  if (was_color) *was_color = (png.image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.image.format = format;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
    throw IoError("cannot decode PNG " + path.string() + ": " + png.image.message);
  }
  *h = static_cast<int>(png.image.height);
  *w = static_cast<int>(png.image.width);
  return buffer;
}

void encode(const std::filesystem::path& path, const std::uint8_t* pixels, int h, int w,
            png_uint_32 format) {
  PngImage png;
  png.image.width = static_cast<png_uint_32>(w);
  png.image.height = static_cast<png_uint_32>(h);
  png.image.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png.image, nullptr, &size, 0, pixels, 0, nullptr)) {
    throw IoError("cannot encode PNG " + path.string() + ": " + png.image.message);
  }
  std::vector<std::uint8_t> bytes(size);
  if (!png_image_write_to_memory(&png.image, bytes.data(), &size, 0, pixels, 0, nullptr)) {
    throw IoError("cannot encode PNG " + path.string() + ": " + png.image.message);
  }
  bytes.resize(size);
  write_file_bytes(path, bytes);
}

std::uint8_t to_byte(float v) {
  const float r = std::nearbyint(v);
  return static_cast<std::uint8_t>(r < 0.0f ? 0.0f : (r > 255.0f ? 255.0f : r));
}

}  // namespace

Image read_png_rgb(const std::filesystem::path& path) {
  int h = 0;
  int w = 0;
  const auto rgb = decode(path, PNG_FORMAT_RGB, &h, &w, nullptr);
  std::vector<float> planar(static_cast<std::size_t>(3) * h * w);
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  for (std::size_t p = 0; p < hw; ++p) {
    for (int c = 0; c < 3; ++c) planar[c * hw + p] = rgb[3 * p + c];
  }
  return Image::from_planar(h, w, ValueRange::unit_8bit, std::move(planar));
}

GrayImage read_png_gray(const std::filesystem::path& path, bool* was_color) {
  bool color = false;
  int h = 0;
  int w = 0;
  const auto rgb = decode(path, PNG_FORMAT_RGB, &h, &w, &color);
  GrayImage out{h, w, std::vector<std::uint8_t>(static_cast<std::size_t>(h) * w)};
  for (std::size_t p = 0; p < out.values.size(); ++p) {
    if (color) {
      const double y = 0.299 * rgb[3 * p] + 0.587 * rgb[3 * p + 1] + 0.114 * rgb[3 * p + 2];
      out.values[p] = static_cast<std::uint8_t>(std::lround(y));
    } else {
      out.values[p] = rgb[3 * p];
    }
  }
  if (was_color) *was_color = color;
  return out;
}

void write_png_rgb(const std::filesystem::path& path, const Image& img) {
  const Image eight = to_8bit_range(img);
  const std::size_t hw = static_cast<std::size_t>(eight.height()) * eight.width();
  std::vector<std::uint8_t> rgb(3 * hw);
  auto v = eight.values();
  for (std::size_t p = 0; p < hw; ++p) {
    for (int c = 0; c < 3; ++c) rgb[3 * p + c] = to_byte(v[c * hw + p]);
  }
  encode(path, rgb.data(), eight.height(), eight.width(), PNG_FORMAT_RGB);
}

void write_png_gray(const std::filesystem::path& path, const GrayImage& img) {
  if (img.values.size() != static_cast<std::size_t>(img.height) * img.width) {
    throw ShapeError("write_png_gray: value count does not match dimensions");
  }
  encode(path, img.values.data(), img.height, img.width, PNG_FORMAT_GRAY);
}

void write_png_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  GrayImage g{mask.height(), mask.width(), std::vector<std::uint8_t>(mask.size())};
  auto v = mask.values();
  for (std::size_t i = 0; i < v.size(); ++i) g.values[i] = v[i] ? 255 : 0;
  write_png_gray(path, g);
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!f) throw IoError("cannot open " + path.string() + " for writing: " + std::strerror(errno));
  errno = 0;
  const std::size_t written = std::fwrite(bytes.data(), 1, bytes.size(), f.get());
  if (written != bytes.size() || std::fflush(f.get()) != 0) {
    const int err = errno;
    if (err == ENOSPC) throw DiskFullError("disk full while writing " + path.string());
    throw IoError("short write to " + path.string() + ": " + std::strerror(err));
  }
  std::FILE* raw = f.release();
  if (std::fclose(raw) != 0) {
    if (errno == ENOSPC) throw DiskFullError("disk full while writing " + path.string());
    throw IoError("cannot close " + path.string());
  }
}

}  // namespace rmnet
