#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rmnet {

// Dense float32 batch in NCHW layout.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w, float fill = 0.0f);

  int n() const { return n_; }
  int c() const { return c_; }
  int h() const { return h_; }
  int w() const { return w_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }
  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }

  // Pointer to the h*w plane of sample `n`, channel `c`.
  float* plane(int n, int c) { return data_.data() + plane_offset(n, c); }
  const float* plane(int n, int c) const { return data_.data() + plane_offset(n, c); }
  // Pointer to the c*h*w block of sample `n`.
  float* sample(int n) { return plane(n, 0); }
  const float* sample(int n) const { return plane(n, 0); }

  float& at(int n, int c, int y, int x) { return data_[index(n, c, y, x)]; }
  float at(int n, int c, int y, int x) const { return data_[index(n, c, y, x)]; }

  bool same_shape(const Tensor& other) const {
    return n_ == other.n_ && c_ == other.c_ && h_ == other.h_ && w_ == other.w_;
  }
  std::string shape_string() const;

  void fill(float v);
  bool all_finite() const;

  // Copies samples [first, first + count) into a new tensor.
  Tensor slice(int first, int count) const;

 private:
  std::size_t plane_offset(int n, int c) const {
    return (static_cast<std::size_t>(n) * c_ + c) * static_cast<std::size_t>(h_) * w_;
  }
  std::size_t index(int n, int c, int y, int x) const {
    return plane_offset(n, c) + static_cast<std::size_t>(y) * w_ + x;
  }

  int n_ = 0;
  int c_ = 0;
  int h_ = 0;
  int w_ = 0;
  std::vector<float> data_;
};

// Throws ShapeError naming `what` when the two shapes differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

// Channel concatenation of two batches with equal n/h/w.
Tensor concat_channels(const Tensor& a, const Tensor& b);

}  // namespace rmnet
