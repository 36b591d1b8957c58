#include "rmnet/resize.hpp"

#include <algorithm>
#include <cmath>

#include "rmnet/errors.hpp"

namespace rmnet {
namespace {

struct AreaWeight {
  int src;
  double weight;
};

// For each output index, the source indices overlapping its footprint.
std::vector<std::vector<AreaWeight>> area_weights(int in_size, int out_size) {
  std::vector<std::vector<AreaWeight>> table(out_size);
  const double scale = static_cast<double>(in_size) / out_size;
  for (int o = 0; o < out_size; ++o) {
    const double begin = o * scale;
    const double end = (o + 1) * scale;
    const int first = static_cast<int>(std::floor(begin));
    const int last = std::min(in_size - 1, static_cast<int>(std::ceil(end)) - 1);
    for (int i = first; i <= last; ++i) {
      const double overlap = std::min(end, i + 1.0) - std::max(begin, static_cast<double>(i));
      if (overlap > 0.0) table[o].push_back({i, overlap / scale});
    }
  }
  return table;
}

}  // namespace

std::vector<double> area_resize_plane(std::span<const double> src, int height, int width,
                                      int out_height, int out_width) {
  if (height <= 0 || width <= 0 || out_height <= 0 || out_width <= 0) {
    throw InvalidArgument("area_resize: dimensions must be positive");
  }
  if (src.size() != static_cast<std::size_t>(height) * width) {
    throw ShapeError("area_resize: plane size does not match dimensions");
  }
  const auto wx = area_weights(width, out_width);
  const auto wy = area_weights(height, out_height);

  std::vector<double> rows(static_cast<std::size_t>(height) * out_width, 0.0);
  for (int y = 0; y < height; ++y) {
    const double* in = src.data() + static_cast<std::size_t>(y) * width;
    double* out = rows.data() + static_cast<std::size_t>(y) * out_width;
    for (int ox = 0; ox < out_width; ++ox) {
      double s = 0.0;
      for (const auto& t : wx[ox]) s += t.weight * in[t.src];
      out[ox] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(out_height) * out_width, 0.0);
  for (int oy = 0; oy < out_height; ++oy) {
    double* dst = out.data() + static_cast<std::size_t>(oy) * out_width;
    for (const auto& t : wy[oy]) {
      const double* r = rows.data() + static_cast<std::size_t>(t.src) * out_width;
      for (int ox = 0; ox < out_width; ++ox) dst[ox] += t.weight * r[ox];
    }
  }
  return out;
}

Image area_resize(const Image& img, int out_height, int out_width) {
  if (img.height() == out_height && img.width() == out_width) return img;
  const std::size_t hw = static_cast<std::size_t>(img.height()) * img.width();
  const std::size_t ohw = static_cast<std::size_t>(out_height) * out_width;
  std::vector<float> values(3 * ohw);
  const float lo = range_min(img.range());
  const float hi = range_max(img.range());
  for (int c = 0; c < 3; ++c) {
    std::vector<double> plane(img.plane(c), img.plane(c) + hw);
    const auto resized = area_resize_plane(plane, img.height(), img.width(), out_height, out_width);
    for (std::size_t i = 0; i < ohw; ++i) {
      values[c * ohw + i] = std::clamp(static_cast<float>(resized[i]), lo, hi);
    }
  }
  return Image::from_planar(out_height, out_width, img.range(), std::move(values));
}

}  // namespace rmnet
