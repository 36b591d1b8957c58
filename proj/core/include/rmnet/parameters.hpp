#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rmnet {

// One named float32 tensor, stored row-major.
struct Parameter {
  std::string name;
  std::vector<int> shape;
  std::vector<float> values;

  std::size_t count() const { return values.size(); }
};

// Ordered collection of named tensors: the learned weights of a network, or
// their gradients / optimizer moments when built with zeros_like().
class ParameterSet {
 public:
  // Adds a zero-filled tensor and returns its index. Names are unique.
  std::size_t add(std::string name, std::vector<int> shape);

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }

  std::optional<std::size_t> find(std::string_view name) const;
  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;

  // Total number of scalars across all tensors.
  std::size_t scalar_count() const;
  bool all_finite() const;
  // Largest |w| over every scalar; 0 for an empty set.
  float max_abs() const;

  ParameterSet zeros_like() const;
  void set_zero();
  // True when names, shapes, and values all match exactly (bitwise for values).
  bool identical(const ParameterSet& other) const;
  // SHA-256 over names, shapes, and little-endian values.
  std::string digest() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<Parameter> params_;
};

}  // namespace rmnet
