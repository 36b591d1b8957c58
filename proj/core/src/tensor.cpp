#include "rmnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "rmnet/errors.hpp"

namespace rmnet {

Tensor::Tensor(int n, int c, int h, int w, float fill)
    : n_(n), c_(c), h_(h), w_(w) {
  if (n < 0 || c < 0 || h < 0 || w < 0) {
    throw InvalidArgument("negative tensor dimension");
  }
  data_.assign(static_cast<std::size_t>(n) * c * h * w, fill);
}

std::string Tensor::shape_string() const {
  return "[" + std::to_string(n_) + "x" + std::to_string(c_) + "x" + std::to_string(h_) +
         "x" + std::to_string(w_) + "]";
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

Tensor Tensor::slice(int first, int count) const {
  if (first < 0 || count < 0 || first + count > n_) {
    throw InvalidArgument("tensor slice out of range");
  }
  Tensor out(count, c_, h_, w_);
  const std::size_t per = static_cast<std::size_t>(c_) * h_ * w_;
  if (per > 0 && count > 0) {
    std::memcpy(out.data(), data_.data() + first * per, count * per * sizeof(float));
  }
  return out;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w()) {
    throw ShapeError("concat_channels: " + a.shape_string() + " vs " + b.shape_string());
  }
  Tensor out(a.n(), a.c() + b.c(), a.h(), a.w());
  const std::size_t pa = static_cast<std::size_t>(a.c()) * a.h() * a.w();
  const std::size_t pb = static_cast<std::size_t>(b.c()) * b.h() * b.w();
  for (int i = 0; i < a.n(); ++i) {
    std::copy_n(a.sample(i), pa, out.sample(i));
    std::copy_n(b.sample(i), pb, out.sample(i) + pa);
  }
  return out;
}

}  // namespace rmnet
