#include "rmnet/mask_algebra.hpp"

#include <algorithm>

#include "rmnet/errors.hpp"

namespace rmnet {
namespace {

void require_dims(const Image& img, const BinaryMask& m, const char* op) {
  if (img.height() != m.height() || img.width() != m.width()) {
    throw ShapeError(std::string(op) + ": image is " + std::to_string(img.height()) + "x" +
                     std::to_string(img.width()) + " but mask is " + std::to_string(m.height()) +
                     "x" + std::to_string(m.width()));
  }
}

// out[c,p] = (m[p] == keep_value) ? img[c,p] : 0
Image select_by_mask(const Image& img, const BinaryMask& m, std::uint8_t keep_value) {
  Image out(img.height(), img.width(), img.range(), 0.0f);
  const auto mv = m.values();
  const std::size_t hw = mv.size();
  auto src = img.values();
  auto dst = out.values();
  for (int c = 0; c < 3; ++c) {
    for (std::size_t p = 0; p < hw; ++p) {
      dst[c * hw + p] = mv[p] == keep_value ? src[c * hw + p] : 0.0f;
    }
  }
  return out;
}

void require_mask_batch(const Tensor& images, const Tensor& masks, const char* op) {
  if (masks.c() != 1 || masks.n() != images.n() || masks.h() != images.h() ||
      masks.w() != images.w()) {
    throw ShapeError(std::string(op) + ": images " + images.shape_string() + " vs masks " +
                     masks.shape_string());
  }
}

Tensor select_batch(const Tensor& images, const Tensor& masks, bool keep_visible, const char* op) {
  require_mask_batch(images, masks, op);
  Tensor out(images.n(), images.c(), images.h(), images.w());
  const std::size_t hw = static_cast<std::size_t>(images.h()) * images.w();
  for (int n = 0; n < images.n(); ++n) {
    const float* m = masks.plane(n, 0);
    for (int c = 0; c < images.c(); ++c) {
      const float* src = images.plane(n, c);
      float* dst = out.plane(n, c);
      for (std::size_t p = 0; p < hw; ++p) {
        const bool visible = m[p] != 0.0f;
        dst[p] = visible == keep_visible ? src[p] : 0.0f;
      }
    }
  }
  return out;
}

}  // namespace

BinaryMask reverse_mask(const BinaryMask& m) {
  std::vector<std::uint8_t> v(m.values().begin(), m.values().end());
  for (auto& x : v) x = static_cast<std::uint8_t>(1 - x);
  return BinaryMask::from_values(m.height(), m.width(), std::move(v));
}

Image apply_mask(const Image& img, const BinaryMask& m) {
  require_dims(img, m, "apply_mask");
  return select_by_mask(img, m, 1);
}

Image masked_prediction(const Image& pred, const BinaryMask& m) {
  require_dims(pred, m, "masked_prediction");
  return select_by_mask(pred, m, 0);
}

Image composite(const Image& ground, const Image& pred, const BinaryMask& m) {
  require_dims(ground, m, "composite");
  require_dims(pred, m, "composite");
  if (ground.range() != pred.range()) {
    throw ValueRangeError(std::string("composite: value ranges differ (") +
                          to_string(ground.range()) + " vs " + to_string(pred.range()) + ")");
  }
  Image out = ground;
  const auto mv = m.values();
  const std::size_t hw = mv.size();
  auto p = pred.values();
  auto dst = out.values();
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < hw; ++i) {
      if (mv[i] == 0) dst[c * hw + i] = p[c * hw + i];
    }
  }
  return out;
}

double hole_ratio(const BinaryMask& m) {
  const auto v = m.values();
  if (v.empty()) return 0.0;
  const auto zeros = std::count(v.begin(), v.end(), std::uint8_t{0});
  return static_cast<double>(zeros) / static_cast<double>(v.size());
}

Tensor apply_mask(const Tensor& images, const Tensor& masks) {
  return select_batch(images, masks, true, "apply_mask");
}

Tensor apply_reverse_mask(const Tensor& images, const Tensor& masks) {
  return select_batch(images, masks, false, "apply_reverse_mask");
}

Tensor composite(const Tensor& ground, const Tensor& pred, const Tensor& masks) {
  require_same_shape(ground, pred, "composite");
  require_mask_batch(ground, masks, "composite");
  Tensor out = ground;
  const std::size_t hw = static_cast<std::size_t>(ground.h()) * ground.w();
  for (int n = 0; n < ground.n(); ++n) {
    const float* m = masks.plane(n, 0);
    for (int c = 0; c < ground.c(); ++c) {
      const float* p = pred.plane(n, c);
      float* dst = out.plane(n, c);
      for (std::size_t i = 0; i < hw; ++i) {
        if (m[i] == 0.0f) dst[i] = p[i];
      }
    }
  }
  return out;
}

}  // namespace rmnet
