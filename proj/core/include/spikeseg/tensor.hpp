#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "spikeseg/errors.hpp"

namespace spikeseg {

// Dense row-major N-d array. Once produced by an op the value buffer is
// treated as immutable; only `grad` may be filled in later. No implicit
// broadcasting: shapes are checked on every op.
template <class S>
class TensorT {
 public:
  using scalar_type = S;

  std::vector<int> shape;
  std::vector<S> data;
  bool requires_grad = false;
  std::vector<S> grad;  // empty until a backward pass touches this tensor

  TensorT() = default;
  explicit TensorT(std::vector<int> shp, S fill = S(0))
      : shape(std::move(shp)), data(numel(shape), fill) {}

  static std::size_t numel(const std::vector<int>& shp) {
    std::size_t n = 1;
    for (int d : shp) {
      if (d <= 0) throw ShapeError("tensor dimension must be positive, got " + std::to_string(d));
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

  std::size_t size() const { return data.size(); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  bool is_scalar() const { return data.size() == 1; }

  S& at(std::size_t i) { return data[i]; }
  S at(std::size_t i) const { return data[i]; }

  // [B,C,H,W] addressing for the conv stack
  std::size_t index4(int b, int c, int y, int x) const {
    return ((static_cast<std::size_t>(b) * shape[1] + c) * shape[2] + y) * shape[3] + x;
  }

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), S(0));
  }

  void zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), S(0));
  }

  bool all_finite() const {
    for (S v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }
};

template <class S>
using TensorPtrT = std::shared_ptr<TensorT<S>>;

using Tensor = TensorT<float>;
using TensorPtr = TensorPtrT<float>;

template <class S>
TensorPtrT<S> make_tensor(std::vector<int> shape, bool requires_grad = false) {
  auto t = std::make_shared<TensorT<S>>(std::move(shape));
  t->requires_grad = requires_grad;
  return t;
}

template <class S>
TensorPtrT<S> make_tensor(std::vector<int> shape, std::vector<S> values,
                          bool requires_grad = false) {
  auto t = std::make_shared<TensorT<S>>(std::move(shape));
  if (values.size() != t->size())
    throw ShapeError("value count " + std::to_string(values.size()) +
                     " does not match shape volume " + std::to_string(t->size()));
  t->data = std::move(values);
  t->requires_grad = requires_grad;
  return t;
}

template <class S>
TensorPtrT<S> full_like_shape(std::vector<int> shape, S value) {
  auto t = std::make_shared<TensorT<S>>(std::move(shape), value);
  return t;
}

inline std::string shape_str(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

inline bool same_shape(const std::vector<int>& a, const std::vector<int>& b) {
  return a == b;
}

inline void require_shape(bool cond, const std::string& what) {
  if (!cond) throw ShapeError(what);
}

}  // namespace spikeseg
