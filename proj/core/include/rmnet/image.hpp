#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rmnet/tensor.hpp"

namespace rmnet {

// Declared interval an image's values live in.
enum class ValueRange {
  unit_8bit,  // [0, 255]
  model,      // [-1, 1]
};

const char* to_string(ValueRange r);
float range_min(ValueRange r);
float range_max(ValueRange r);

// H x W x 3 real-valued image, stored channel-planar (RGB planes).
class Image {
 public:
  Image() = default;
  Image(int height, int width, ValueRange range, float fill = 0.0f);
  // Takes ownership of 3*h*w planar values; throws ValueRangeError if any
  // value falls outside `range`.
  static Image from_planar(int height, int width, ValueRange range, std::vector<float> values);

  int height() const { return height_; }
  int width() const { return width_; }
  static constexpr int channels() { return 3; }
  ValueRange range() const { return range_; }
  std::size_t size() const { return values_.size(); }

  float at(int c, int y, int x) const { return values_[index(c, y, x)]; }
  float& at(int c, int y, int x) { return values_[index(c, y, x)]; }
  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }
  const float* plane(int c) const { return values_.data() + index(c, 0, 0); }

  // Throws ValueRangeError when a value is outside the declared range or not finite.
  void check_range() const;

  bool operator==(const Image& other) const = default;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int height_ = 0;
  int width_ = 0;
  ValueRange range_ = ValueRange::model;
  std::vector<float> values_;
};

// Single-channel {0,1} grid: 1 = visible pixel, 0 = hole.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width, std::uint8_t fill = 1);
  // Throws InvalidArgument unless every value is 0 or 1.
  static BinaryMask from_values(int height, int width, std::vector<std::uint8_t> values);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  std::uint8_t at(int y, int x) const { return values_[index(y, x)]; }
  void set(int y, int x, bool visible) { values_[index(y, x)] = visible ? 1 : 0; }
  std::span<const std::uint8_t> values() const { return values_; }

  bool operator==(const BinaryMask& other) const = default;

 private:
  std::size_t index(int y, int x) const { return static_cast<std::size_t>(y) * width_ + x; }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> values_;
};

// Single-channel 8-bit raster as decoded from a mask file.
struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> values;

  std::uint8_t at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

// Hole-to-image ratio interval [lo, hi] with 0 <= lo < hi <= 1.
struct HoleRatioBucket {
  double lo = 0.0;
  double hi = 1.0;

  void validate() const;
  bool contains(double ratio) const { return ratio >= lo && ratio <= hi; }
  std::string label() const;
};

// x / 127.5 - 1 for 8-bit images; identity on model-range input.
Image to_model_range(const Image& img);
// (x + 1) * 127.5, clamped into [0, 255]; identity on 8-bit input.
Image to_8bit_range(const Image& img);

// Stacks equally sized images into an N x 3 x H x W batch.
Tensor images_to_tensor(std::span<const Image> images);
Image tensor_to_image(const Tensor& batch, int index, ValueRange range);
// N x 1 x H x W batch of 0.0/1.0 values.
Tensor masks_to_tensor(std::span<const BinaryMask> masks);

}  // namespace rmnet
