#include "rmnet/parameters.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>

#include "rmnet/errors.hpp"
#include "rmnet/hashing.hpp"

namespace rmnet {

std::size_t ParameterSet::add(std::string name, std::vector<int> shape) {
  if (find(name)) throw InvalidArgument("duplicate parameter name: " + name);
  std::size_t count = 1;
  for (int d : shape) {
    if (d <= 0) throw InvalidArgument("non-positive dimension in parameter " + name);
    count *= static_cast<std::size_t>(d);
  }
  params_.push_back(Parameter{std::move(name), std::move(shape), std::vector<float>(count, 0.0f)});
  return params_.size() - 1;
}

std::optional<std::size_t> ParameterSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return std::nullopt;
}

Parameter& ParameterSet::get(std::string_view name) {
  auto i = find(name);
  if (!i) throw InvalidArgument("no parameter named " + std::string(name));
  return params_[*i];
}

const Parameter& ParameterSet::get(std::string_view name) const {
  auto i = find(name);
  if (!i) throw InvalidArgument("no parameter named " + std::string(name));
  return params_[*i];
}

std::size_t ParameterSet::scalar_count() const {
  return std::accumulate(params_.begin(), params_.end(), std::size_t{0},
                         [](std::size_t acc, const Parameter& p) { return acc + p.count(); });
}

bool ParameterSet::all_finite() const {
  return std::all_of(params_.begin(), params_.end(), [](const Parameter& p) {
    return std::all_of(p.values.begin(), p.values.end(), [](float v) { return std::isfinite(v); });
  });
}

float ParameterSet::max_abs() const {
  float m = 0.0f;
  for (const auto& p : params_) {
    for (float v : p.values) m = std::max(m, std::abs(v));
  }
  return m;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  for (const auto& p : params_) out.add(p.name, p.shape);
  return out;
}

void ParameterSet::set_zero() {
  for (auto& p : params_) std::fill(p.values.begin(), p.values.end(), 0.0f);
}

bool ParameterSet::identical(const ParameterSet& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& a = params_[i];
    const auto& b = other.params_[i];
    if (a.name != b.name || a.shape != b.shape || a.values.size() != b.values.size()) return false;
    if (!a.values.empty() &&
        std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(float)) != 0) {
      return false;
    }
  }
  return true;
}

std::string ParameterSet::digest() const {
  static_assert(std::endian::native == std::endian::little,
                "parameter digests assume a little-endian host");
  Sha256 h;
  for (const auto& p : params_) {
    h.update(p.name);
    h.update(std::string_view("\0", 1));
    for (int d : p.shape) h.update(std::to_string(d) + ",");
    h.update(std::as_bytes(std::span(p.values)));
  }
  return h.hex_digest();
}

}  // namespace rmnet
