#include "rmnet/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rmnet/errors.hpp"

namespace rmnet {

const char* to_string(ValueRange r) {
  return r == ValueRange::unit_8bit ? "unit_8bit" : "model";
}

float range_min(ValueRange r) { return r == ValueRange::unit_8bit ? 0.0f : -1.0f; }
float range_max(ValueRange r) { return r == ValueRange::unit_8bit ? 255.0f : 1.0f; }

Image::Image(int height, int width, ValueRange range, float fill)
    : height_(height), width_(width), range_(range) {
  if (height <= 0 || width <= 0) throw InvalidArgument("image dimensions must be positive");
  if (fill < range_min(range) || fill > range_max(range)) {
    throw ValueRangeError("image fill value outside declared range");
  }
  values_.assign(static_cast<std::size_t>(3) * height * width, fill);
}

Image Image::from_planar(int height, int width, ValueRange range, std::vector<float> values) {
  if (height <= 0 || width <= 0) throw InvalidArgument("image dimensions must be positive");
  if (values.size() != static_cast<std::size_t>(3) * height * width) {
    throw ShapeError("image: expected " + std::to_string(3 * height * width) + " values, got " +
                     std::to_string(values.size()));
  }
  Image img;
  img.height_ = height;
  img.width_ = width;
  img.range_ = range;
  img.values_ = std::move(values);
  img.check_range();
  return img;
}

void Image::check_range() const {
  const float lo = range_min(range_);
  const float hi = range_max(range_);
  for (float v : values_) {
    if (!(v >= lo && v <= hi)) {
      throw ValueRangeError("image value " + std::to_string(v) + " outside " +
                            to_string(range_) + " range");
    }
  }
}

BinaryMask::BinaryMask(int height, int width, std::uint8_t fill)
    : height_(height), width_(width) {
  if (height <= 0 || width <= 0) throw InvalidArgument("mask dimensions must be positive");
  if (fill > 1) throw InvalidArgument("mask fill must be 0 or 1");
  values_.assign(static_cast<std::size_t>(height) * width, fill);
}

BinaryMask BinaryMask::from_values(int height, int width, std::vector<std::uint8_t> values) {
  if (height <= 0 || width <= 0) throw InvalidArgument("mask dimensions must be positive");
  if (values.size() != static_cast<std::size_t>(height) * width) {
    throw ShapeError("mask: value count does not match dimensions");
  }
  if (std::any_of(values.begin(), values.end(), [](std::uint8_t v) { return v > 1; })) {
    throw InvalidArgument("mask values must be 0 or 1");
  }
  BinaryMask m;
  m.height_ = height;
  m.width_ = width;
  m.values_ = std::move(values);
  return m;
}

void HoleRatioBucket::validate() const {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
    throw InvalidArgument("hole-ratio bucket must satisfy 0 <= lo < hi <= 1, got [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

std::string HoleRatioBucket::label() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f-%.2f", lo, hi);
  return buf;
}

Image to_model_range(const Image& img) {
  if (img.range() == ValueRange::model) return img;
  std::vector<float> v(img.values().begin(), img.values().end());
  for (float& x : v) x = std::clamp(x / 127.5f - 1.0f, -1.0f, 1.0f);
  return Image::from_planar(img.height(), img.width(), ValueRange::model, std::move(v));
}

Image to_8bit_range(const Image& img) {
  if (img.range() == ValueRange::unit_8bit) return img;
  std::vector<float> v(img.values().begin(), img.values().end());
  for (float& x : v) x = std::clamp((x + 1.0f) * 127.5f, 0.0f, 255.0f);
  return Image::from_planar(img.height(), img.width(), ValueRange::unit_8bit, std::move(v));
}

Tensor images_to_tensor(std::span<const Image> images) {
  if (images.empty()) throw InvalidArgument("images_to_tensor: empty batch");
  const int h = images[0].height();
  const int w = images[0].width();
  Tensor t(static_cast<int>(images.size()), 3, h, w);
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].height() != h || images[i].width() != w) {
      throw ShapeError("images_to_tensor: images differ in size");
    }
    std::copy(images[i].values().begin(), images[i].values().end(), t.sample(static_cast<int>(i)));
  }
  return t;
}

Image tensor_to_image(const Tensor& batch, int index, ValueRange range) {
  if (batch.c() != 3) throw ShapeError("tensor_to_image: expected 3 channels, got " + batch.shape_string());
  if (index < 0 || index >= batch.n()) throw InvalidArgument("tensor_to_image: index out of range");
  const std::size_t count = static_cast<std::size_t>(3) * batch.h() * batch.w();
  std::vector<float> v(batch.sample(index), batch.sample(index) + count);
  return Image::from_planar(batch.h(), batch.w(), range, std::move(v));
}

Tensor masks_to_tensor(std::span<const BinaryMask> masks) {
  if (masks.empty()) throw InvalidArgument("masks_to_tensor: empty batch");
  const int h = masks[0].height();
  const int w = masks[0].width();
  Tensor t(static_cast<int>(masks.size()), 1, h, w);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (masks[i].height() != h || masks[i].width() != w) {
      throw ShapeError("masks_to_tensor: masks differ in size");
    }
    std::transform(masks[i].values().begin(), masks[i].values().end(),
                   t.sample(static_cast<int>(i)), [](std::uint8_t v) { return v ? 1.0f : 0.0f; });
  }
  return t;
}

}  // namespace rmnet
