#include "rmnet/layers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

#include "rmnet/errors.hpp"

namespace rmnet::nn {
namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

// Maps output positions to source indices for one kernel tap; -1 marks zero padding.
struct TapIndex {
  int out_size = 0;
  std::vector<int> src;  // [tap][out]

  int at(int tap, int o) const { return src[static_cast<std::size_t>(tap) * out_size + o]; }
};

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

TapIndex make_tap_index(int in_size, int out_size, int kernel, int stride, int dilation,
                        int pad_before, PadMode mode) {
  TapIndex idx;
  idx.out_size = out_size;
  idx.src.resize(static_cast<std::size_t>(kernel) * out_size);
  for (int k = 0; k < kernel; ++k) {
    for (int o = 0; o < out_size; ++o) {
      int s = o * stride - pad_before + k * dilation;
      if (s < 0 || s >= in_size) {
        s = mode == PadMode::reflect ? reflect_index(s, in_size) : -1;
      }
      idx.src[static_cast<std::size_t>(k) * out_size + o] = s;
    }
  }
  return idx;
}

struct ConvGeometry {
  int out_h;
  int out_w;
  TapIndex rows;
  TapIndex cols;
};

ConvGeometry conv_geometry(const ConvConfig& cfg, int h, int w) {
  const auto& p = cfg.padding;
  const int span_h = cfg.dilation * (cfg.kernel_h - 1) + 1;
  const int span_w = cfg.dilation * (cfg.kernel_w - 1) + 1;
  const int padded_h = h + p.top + p.bottom;
  const int padded_w = w + p.left + p.right;
  if (padded_h < span_h || padded_w < span_w) {
    throw ShapeError("conv2d: input " + std::to_string(h) + "x" + std::to_string(w) +
                     " smaller than kernel span");
  }
  ConvGeometry g;
  g.out_h = (padded_h - span_h) / cfg.stride + 1;
  g.out_w = (padded_w - span_w) / cfg.stride + 1;
  g.rows = make_tap_index(h, g.out_h, cfg.kernel_h, cfg.stride, cfg.dilation, p.top, p.mode);
  g.cols = make_tap_index(w, g.out_w, cfg.kernel_w, cfg.stride, cfg.dilation, p.left, p.mode);
  return g;
}

// cols[(ci*kh + ky)*kw + kx][oy*out_w + ox] = x[ci][row(ky,oy)][col(kx,ox)]
void im2col(const float* x, int channels, int h, int w, const ConvConfig& cfg,
            const ConvGeometry& g, float* cols) {
  const std::size_t P = static_cast<std::size_t>(g.out_h) * g.out_w;
  for (int ci = 0; ci < channels; ++ci) {
    const float* plane = x + static_cast<std::size_t>(ci) * h * w;
    for (int ky = 0; ky < cfg.kernel_h; ++ky) {
      for (int kx = 0; kx < cfg.kernel_w; ++kx) {
        float* dst = cols + ((static_cast<std::size_t>(ci) * cfg.kernel_h + ky) * cfg.kernel_w + kx) * P;
        const int* cmap = &g.cols.src[static_cast<std::size_t>(kx) * g.out_w];
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int sy = g.rows.at(ky, oy);
          float* drow = dst + static_cast<std::size_t>(oy) * g.out_w;
          if (sy < 0) {
            std::fill_n(drow, g.out_w, 0.0f);
            continue;
          }
          const float* srow = plane + static_cast<std::size_t>(sy) * w;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int sx = cmap[ox];
            drow[ox] = sx < 0 ? 0.0f : srow[sx];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates column gradients back onto the input grid.
void col2im(const float* cols, int channels, int h, int w, const ConvConfig& cfg,
            const ConvGeometry& g, float* dx) {
  const std::size_t P = static_cast<std::size_t>(g.out_h) * g.out_w;
  for (int ci = 0; ci < channels; ++ci) {
    float* plane = dx + static_cast<std::size_t>(ci) * h * w;
    for (int ky = 0; ky < cfg.kernel_h; ++ky) {
      for (int kx = 0; kx < cfg.kernel_w; ++kx) {
        const float* src = cols + ((static_cast<std::size_t>(ci) * cfg.kernel_h + ky) * cfg.kernel_w + kx) * P;
        const int* cmap = &g.cols.src[static_cast<std::size_t>(kx) * g.out_w];
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int sy = g.rows.at(ky, oy);
          if (sy < 0) continue;
          const float* srow = src + static_cast<std::size_t>(oy) * g.out_w;
          float* drow = plane + static_cast<std::size_t>(sy) * w;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int sx = cmap[ox];
            if (sx >= 0) drow[sx] += srow[ox];
          }
        }
      }
    }
  }
}

const Parameter& param_at(const ParameterSet& params, std::size_t i, const char* layer) {
  if (i >= params.size()) {
    throw ShapeError(std::string(layer) + ": parameter set does not match network layout");
  }
  return params[i];
}

}  // namespace

Padding Padding::same(int kernel, int dilation, PadMode mode) {
  const int total = dilation * (kernel - 1);
  return Padding{total / 2, total - total / 2, total / 2, total - total / 2, mode};
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(ParameterSet& layout, const std::string& name, ConvConfig cfg) : cfg_(cfg) {
  if (cfg.in_channels <= 0 || cfg.out_channels <= 0 || cfg.kernel_h <= 0 || cfg.kernel_w <= 0 ||
      cfg.stride <= 0 || cfg.dilation <= 0) {
    throw InvalidArgument("conv2d " + name + ": invalid configuration");
  }
  weight_ = layout.add(name + ".weight",
                       {cfg.out_channels, cfg.in_channels, cfg.kernel_h, cfg.kernel_w});
  bias_ = layout.add(name + ".bias", {cfg.out_channels});
}

Tensor Conv2d::forward(const ParameterSet& params, const Tensor& x, LayerCache* cache) const {
  if (x.c() != cfg_.in_channels) {
    throw ShapeError("conv2d: expected " + std::to_string(cfg_.in_channels) +
                     " input channels, got " + x.shape_string());
  }
  const auto& weight = param_at(params, weight_, "conv2d");
  const auto& bias = param_at(params, bias_, "conv2d");
  const ConvGeometry g = conv_geometry(cfg_, x.h(), x.w());
  const int K = fan_in();
  const int P = g.out_h * g.out_w;

  Tensor y(x.n(), cfg_.out_channels, g.out_h, g.out_w);
  std::vector<float> cols(static_cast<std::size_t>(K) * P);
  ConstMatMap W(weight.values.data(), cfg_.out_channels, K);
  Eigen::Map<const Eigen::VectorXf> b(bias.values.data(), cfg_.out_channels);
  for (int n = 0; n < x.n(); ++n) {
    im2col(x.sample(n), x.c(), x.h(), x.w(), cfg_, g, cols.data());
    MatMap Y(y.sample(n), cfg_.out_channels, P);
    Y.noalias() = W * ConstMatMap(cols.data(), K, P);
    Y.colwise() += b;
  }
  if (cache) cache->input = x;
  return y;
}

Tensor Conv2d::backward(const ParameterSet& params, const LayerCache& cache,
                        const Tensor& grad_out, ParameterSet* grads) const {
  const Tensor& x = cache.input;
  const auto& weight = param_at(params, weight_, "conv2d");
  const ConvGeometry g = conv_geometry(cfg_, x.h(), x.w());
  const int K = fan_in();
  const int P = g.out_h * g.out_w;
  if (grad_out.n() != x.n() || grad_out.c() != cfg_.out_channels || grad_out.h() != g.out_h ||
      grad_out.w() != g.out_w) {
    throw ShapeError("conv2d backward: unexpected gradient shape " + grad_out.shape_string());
  }

  Tensor dx(x.n(), x.c(), x.h(), x.w());
  std::vector<float> cols(static_cast<std::size_t>(K) * P);
  std::vector<float> dcols(static_cast<std::size_t>(K) * P);
  ConstMatMap W(weight.values.data(), cfg_.out_channels, K);
  for (int n = 0; n < x.n(); ++n) {
    ConstMatMap dY(grad_out.sample(n), cfg_.out_channels, P);
    if (grads) {
      im2col(x.sample(n), x.c(), x.h(), x.w(), cfg_, g, cols.data());
      MatMap dW((*grads)[weight_].values.data(), cfg_.out_channels, K);
      dW.noalias() += dY * ConstMatMap(cols.data(), K, P).transpose();
      // Fixed-order sums: Eigen's vectorised reductions depend on buffer alignment.
      float* db = (*grads)[bias_].values.data();
      for (int o = 0; o < cfg_.out_channels; ++o) {
        const float* row = grad_out.sample(n) + static_cast<std::size_t>(o) * P;
        double acc = 0.0;
        for (int p = 0; p < P; ++p) acc += row[p];
        db[o] += static_cast<float>(acc);
      }
    }
    MatMap dC(dcols.data(), K, P);
    dC.noalias() = W.transpose() * dY;
    col2im(dcols.data(), x.c(), x.h(), x.w(), cfg_, g, dx.sample(n));
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(ParameterSet& layout, const std::string& name, int in_features, int out_features)
    : in_(in_features), out_(out_features) {
  if (in_features <= 0 || out_features <= 0) {
    throw InvalidArgument("linear " + name + ": invalid configuration");
  }
  weight_ = layout.add(name + ".weight", {out_features, in_features});
  bias_ = layout.add(name + ".bias", {out_features});
}

Tensor Linear::forward(const ParameterSet& params, const Tensor& x, LayerCache* cache) const {
  if (x.c() * x.h() * x.w() != in_) {
    throw ShapeError("linear: expected " + std::to_string(in_) + " features, got " +
                     x.shape_string());
  }
  const auto& weight = param_at(params, weight_, "linear");
  const auto& bias = param_at(params, bias_, "linear");
  Tensor y(x.n(), out_, 1, 1);
  // Plain loops keep the summation order independent of buffer alignment.
  for (int n = 0; n < x.n(); ++n) {
    const float* xs = x.sample(n);
    for (int o = 0; o < out_; ++o) {
      const float* w = weight.values.data() + static_cast<std::size_t>(o) * in_;
      double acc = 0.0;
      for (int i = 0; i < in_; ++i) acc += static_cast<double>(w[i]) * xs[i];
      y.sample(n)[o] = static_cast<float>(acc + bias.values[o]);
    }
  }
  if (cache) cache->input = x;
  return y;
}

Tensor Linear::backward(const ParameterSet& params, const LayerCache& cache,
                        const Tensor& grad_out, ParameterSet* grads) const {
  const Tensor& x = cache.input;
  const auto& weight = param_at(params, weight_, "linear");
  Tensor dx(x.n(), x.c(), x.h(), x.w());
  for (int o = 0; o < out_; ++o) {
    const float* w = weight.values.data() + static_cast<std::size_t>(o) * in_;
    double db = 0.0;
    for (int n = 0; n < x.n(); ++n) {
      const float g = grad_out.sample(n)[o];
      db += g;
      const float* xs = x.sample(n);
      float* dxs = dx.sample(n);
      if (grads) {
        float* dw = (*grads)[weight_].values.data() + static_cast<std::size_t>(o) * in_;
        for (int i = 0; i < in_; ++i) dw[i] += g * xs[i];
      }
      for (int i = 0; i < in_; ++i) dxs[i] += g * w[i];
    }
    if (grads) (*grads)[bias_].values[o] += static_cast<float>(db);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Element-wise activations

Tensor LeakyRelu::forward(const ParameterSet&, const Tensor& x, LayerCache* cache) const {
  Tensor y = x;
  for (float& v : y.values()) v = v > 0.0f ? v : slope_ * v;
  if (cache) cache->input = x;
  return y;
}

Tensor LeakyRelu::backward(const ParameterSet&, const LayerCache& cache, const Tensor& grad_out,
                           ParameterSet*) const {
  Tensor dx = grad_out;
  auto in = cache.input.values();
  auto d = dx.values();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(in[i] > 0.0f)) d[i] *= slope_;
  }
  return dx;
}

Tensor Tanh::forward(const ParameterSet&, const Tensor& x, LayerCache* cache) const {
  Tensor y = x;
  for (float& v : y.values()) v = std::tanh(v);
  if (cache) cache->output = y;
  return y;
}

Tensor Tanh::backward(const ParameterSet&, const LayerCache& cache, const Tensor& grad_out,
                      ParameterSet*) const {
  Tensor dx = grad_out;
  auto y = cache.output.values();
  auto d = dx.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 1.0f - y[i] * y[i];
  return dx;
}

// ---------------------------------------------------------------------------
// Pooling and resizing

Tensor MaxPool2::forward(const ParameterSet&, const Tensor& x, LayerCache* cache) const {
  const int oh = x.h() / 2;
  const int ow = x.w() / 2;
  if (oh == 0 || ow == 0) throw ShapeError("max_pool_2x2: input too small " + x.shape_string());
  Tensor y(x.n(), x.c(), oh, ow);
  std::vector<std::uint32_t> argmax;
  if (cache) argmax.resize(y.size());
  std::size_t k = 0;
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const float* in = x.plane(n, c);
      float* out = y.plane(n, c);
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox, ++k) {
          std::uint32_t best = static_cast<std::uint32_t>((2 * oy) * x.w() + 2 * ox);
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
              const auto idx = static_cast<std::uint32_t>((2 * oy + dy) * x.w() + 2 * ox + dx);
              if (in[idx] > in[best]) best = idx;
            }
          }
          out[oy * ow + ox] = in[best];
          if (cache) argmax[k] = best;
        }
      }
    }
  }
  if (cache) {
    cache->input = Tensor(x.n(), x.c(), x.h(), x.w());  // shape only; values unused
    cache->argmax = std::move(argmax);
  }
  return y;
}

Tensor MaxPool2::backward(const ParameterSet&, const LayerCache& cache, const Tensor& grad_out,
                          ParameterSet*) const {
  const Tensor& shape = cache.input;
  Tensor dx(shape.n(), shape.c(), shape.h(), shape.w());
  const std::size_t per_plane = static_cast<std::size_t>(grad_out.h()) * grad_out.w();
  std::size_t k = 0;
  for (int n = 0; n < grad_out.n(); ++n) {
    for (int c = 0; c < grad_out.c(); ++c) {
      const float* g = grad_out.plane(n, c);
      float* d = dx.plane(n, c);
      for (std::size_t i = 0; i < per_plane; ++i, ++k) d[cache.argmax[k]] += g[i];
    }
  }
  return dx;
}

namespace {

struct ResizeTap {
  int i0;
  int i1;
  float w1;  // weight of i1; i0 gets 1 - w1
};

std::vector<ResizeTap> bilinear_taps(int in_size, int out_size) {
  std::vector<ResizeTap> taps(out_size);
  const double scale = static_cast<double>(in_size) / out_size;
  for (int o = 0; o < out_size; ++o) {
    double src = (o + 0.5) * scale - 0.5;
    if (src < 0.0) src = 0.0;
    int i0 = static_cast<int>(std::floor(src));
    if (i0 > in_size - 1) i0 = in_size - 1;
    const int i1 = std::min(i0 + 1, in_size - 1);
    taps[o] = ResizeTap{i0, i1, static_cast<float>(src - i0)};
  }
  return taps;
}

}  // namespace

Tensor UpsampleBilinear2::forward(const ParameterSet&, const Tensor& x, LayerCache* cache) const {
  const int oh = x.h() * 2;
  const int ow = x.w() * 2;
  const auto ty = bilinear_taps(x.h(), oh);
  const auto tx = bilinear_taps(x.w(), ow);
  Tensor y(x.n(), x.c(), oh, ow);
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const float* in = x.plane(n, c);
      float* out = y.plane(n, c);
      for (int oy = 0; oy < oh; ++oy) {
        const float* r0 = in + static_cast<std::size_t>(ty[oy].i0) * x.w();
        const float* r1 = in + static_cast<std::size_t>(ty[oy].i1) * x.w();
        const float wy = ty[oy].w1;
        for (int ox = 0; ox < ow; ++ox) {
          const auto& t = tx[ox];
          const float top = r0[t.i0] + t.w1 * (r0[t.i1] - r0[t.i0]);
          const float bot = r1[t.i0] + t.w1 * (r1[t.i1] - r1[t.i0]);
          out[oy * ow + ox] = top + wy * (bot - top);
        }
      }
    }
  }
  if (cache) cache->input = Tensor(x.n(), x.c(), x.h(), x.w());
  return y;
}

Tensor UpsampleBilinear2::backward(const ParameterSet&, const LayerCache& cache,
                                   const Tensor& grad_out, ParameterSet*) const {
  const Tensor& shape = cache.input;
  const auto ty = bilinear_taps(shape.h(), grad_out.h());
  const auto tx = bilinear_taps(shape.w(), grad_out.w());
  Tensor dx(shape.n(), shape.c(), shape.h(), shape.w());
  for (int n = 0; n < shape.n(); ++n) {
    for (int c = 0; c < shape.c(); ++c) {
      const float* g = grad_out.plane(n, c);
      float* d = dx.plane(n, c);
      for (int oy = 0; oy < grad_out.h(); ++oy) {
        float* r0 = d + static_cast<std::size_t>(ty[oy].i0) * shape.w();
        float* r1 = d + static_cast<std::size_t>(ty[oy].i1) * shape.w();
        const float wy = ty[oy].w1;
        for (int ox = 0; ox < grad_out.w(); ++ox) {
          const auto& t = tx[ox];
          const float v = g[oy * grad_out.w() + ox];
          const float top = v * (1.0f - wy);
          const float bot = v * wy;
          r0[t.i0] += top * (1.0f - t.w1);
          r0[t.i1] += top * t.w1;
          r1[t.i0] += bot * (1.0f - t.w1);
          r1[t.i1] += bot * t.w1;
        }
      }
    }
  }
  return dx;
}

Tensor GlobalAvgPool::forward(const ParameterSet&, const Tensor& x, LayerCache* cache) const {
  Tensor y(x.n(), x.c(), 1, 1);
  const std::size_t hw = static_cast<std::size_t>(x.h()) * x.w();
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const float* p = x.plane(n, c);
      double s = 0.0;
      for (std::size_t i = 0; i < hw; ++i) s += p[i];
      y.at(n, c, 0, 0) = static_cast<float>(s / static_cast<double>(hw));
    }
  }
  if (cache) cache->input = Tensor(x.n(), x.c(), x.h(), x.w());
  return y;
}

Tensor GlobalAvgPool::backward(const ParameterSet&, const LayerCache& cache,
                               const Tensor& grad_out, ParameterSet*) const {
  const Tensor& shape = cache.input;
  Tensor dx(shape.n(), shape.c(), shape.h(), shape.w());
  const std::size_t hw = static_cast<std::size_t>(shape.h()) * shape.w();
  for (int n = 0; n < shape.n(); ++n) {
    for (int c = 0; c < shape.c(); ++c) {
      std::fill_n(dx.plane(n, c), hw, grad_out.at(n, c, 0, 0) / static_cast<float>(hw));
    }
  }
  return dx;
}

ChannelAffine::ChannelAffine(float scale, std::vector<int> source, std::vector<float> offset)
    : scale_(scale), source_(std::move(source)), offset_(std::move(offset)) {
  if (source_.size() != offset_.size()) throw InvalidArgument("channel_affine: size mismatch");
}

Tensor ChannelAffine::forward(const ParameterSet&, const Tensor& x, LayerCache* cache) const {
  const int channels = static_cast<int>(source_.size());
  Tensor y(x.n(), channels, x.h(), x.w());
  const std::size_t hw = static_cast<std::size_t>(x.h()) * x.w();
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < channels; ++c) {
      if (source_[c] < 0 || source_[c] >= x.c()) {
        throw ShapeError("channel_affine: input has " + std::to_string(x.c()) + " channels");
      }
      const float* in = x.plane(n, source_[c]);
      float* out = y.plane(n, c);
      for (std::size_t i = 0; i < hw; ++i) out[i] = scale_ * in[i] + offset_[c];
    }
  }
  if (cache) cache->input = Tensor(x.n(), x.c(), x.h(), x.w());
  return y;
}

Tensor ChannelAffine::backward(const ParameterSet&, const LayerCache& cache,
                               const Tensor& grad_out, ParameterSet*) const {
  const Tensor& shape = cache.input;
  Tensor dx(shape.n(), shape.c(), shape.h(), shape.w());
  const std::size_t hw = static_cast<std::size_t>(shape.h()) * shape.w();
  for (int n = 0; n < shape.n(); ++n) {
    for (std::size_t c = 0; c < source_.size(); ++c) {
      const float* g = grad_out.plane(n, static_cast<int>(c));
      float* d = dx.plane(n, source_[c]);
      for (std::size_t i = 0; i < hw; ++i) d[i] += scale_ * g[i];
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Sequential

Tensor Sequential::forward(const ParameterSet& params, const Tensor& x, Trace* trace) const {
  if (trace) trace->caches.assign(layers_.size(), LayerCache{});
  Tensor h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i]->forward(params, h, trace ? &trace->caches[i] : nullptr);
    if (!h.all_finite()) {
      throw NonFiniteError("non-finite activation at layer " + std::to_string(i) + " (" +
                           layers_[i]->kind() + ")");
    }
  }
  return h;
}

Tensor Sequential::backward(const ParameterSet& params, const Trace& trace,
                            const Tensor& grad_out, ParameterSet* grads) const {
  if (trace.caches.size() != layers_.size()) {
    throw InvalidArgument("backward: trace does not belong to this network");
  }
  Tensor g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = layers_[i]->backward(params, trace.caches[i], g, grads);
  }
  return g;
}

void init_fan_in_uniform(Parameter& weight, int fan_in, float gain, Rng& rng) {
  const double bound = gain * std::sqrt(3.0 / fan_in);
  for (float& v : weight.values) v = static_cast<float>(rng.uniform(-bound, bound));
}

}  // namespace rmnet::nn
