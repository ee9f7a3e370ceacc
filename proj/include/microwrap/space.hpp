#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>

#include "microwrap/errors.hpp"
#include "microwrap/tensor.hpp"

namespace microwrap {

/// Elementwise-bounded set of tensors with a fixed shape and dtype.
class Box {
 public:
  Box(Tensor low, Tensor high) : low_(std::move(low)), high_(std::move(high)) {
    if (low_.empty() || low_.shape() != high_.shape()) {
      throw InvalidParam("box bounds must share a non-empty shape");
    }
    if (low_.dtype() != high_.dtype()) throw InvalidParam("box bounds must share a dtype");
    for (std::size_t i = 0; i < low_.size(); ++i) {
      // Negated form also rejects NaN bounds.
      if (!(low_.get(i) <= high_.get(i))) {
        throw InvalidParam("box low exceeds high at element " + std::to_string(i));
      }
    }
  }

  /// Box whose every element shares the same bounds.
  static Box uniform(Dtype dtype, Shape shape, double low, double high) {
    return Box(Tensor::full(dtype, shape, low), Tensor::full(dtype, shape, high));
  }

  const Tensor& low() const noexcept { return low_; }
  const Tensor& high() const noexcept { return high_; }
  const Shape& shape() const noexcept { return low_.shape(); }
  Dtype dtype() const noexcept { return low_.dtype(); }
  std::size_t size() const noexcept { return low_.size(); }

  bool bounded() const {
    for (std::size_t i = 0; i < low_.size(); ++i) {
      if (!std::isfinite(low_.get(i)) || !std::isfinite(high_.get(i))) return false;
    }
    return true;
  }

  bool contains(const Tensor& x) const {
    if (x.shape() != shape() || x.dtype() != dtype()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = x.get(i);
      if (!(low_.get(i) <= v && v <= high_.get(i))) return false;
    }
    return true;
  }

  friend bool operator==(const Box& a, const Box& b) { return a.low_ == b.low_ && a.high_ == b.high_; }

 private:
  Tensor low_;
  Tensor high_;
};

class Discrete {
 public:
  explicit Discrete(std::int64_t n) : n_(n) {
    if (n < 1) throw InvalidParam("discrete space needs n >= 1, got " + std::to_string(n));
  }

  std::int64_t n() const noexcept { return n_; }
  bool contains(std::int64_t a) const noexcept { return a >= 0 && a < n_; }

  friend bool operator==(const Discrete&, const Discrete&) = default;

 private:
  std::int64_t n_;
};

using Space = std::variant<Box, Discrete>;

/// An action is either a discrete index or a tensor.
using Action = std::variant<std::int64_t, Tensor>;

inline bool is_box(const Space& s) { return std::holds_alternative<Box>(s); }
inline bool is_discrete(const Space& s) { return std::holds_alternative<Discrete>(s); }

inline std::string describe(const Space& s) {
  if (const auto* d = std::get_if<Discrete>(&s)) return "Discrete(" + std::to_string(d->n()) + ")";
  const auto& b = std::get<Box>(s);
  return "Box" + shape_str(b.shape()) + " " + std::string(dtype_name(b.dtype()));
}

/// Membership test for tensors. A Discrete space contains single-element
/// integer tensors holding a valid index.
inline bool space_contains(const Space& space, const Tensor& value) {
  if (const auto* box = std::get_if<Box>(&space)) return box->contains(value);
  const auto& d = std::get<Discrete>(space);
  if (value.size() != 1 || is_floating(value.dtype())) return false;
  return d.contains(static_cast<std::int64_t>(value.get(0)));
}

inline bool space_contains(const Space& space, std::int64_t value) {
  if (const auto* d = std::get_if<Discrete>(&space)) return d->contains(value);
  return false;
}

inline bool space_contains(const Space& space, const Action& action) {
  return std::visit([&](const auto& a) { return space_contains(space, a); }, action);
}

inline std::string describe(const Action& a) {
  if (const auto* i = std::get_if<std::int64_t>(&a)) return std::to_string(*i);
  const auto& t = std::get<Tensor>(a);
  return "tensor" + shape_str(t.shape()) + " " + std::string(dtype_name(t.dtype()));
}

/// Largest and smallest values representable by a dtype, as doubles.
inline double dtype_lowest(Dtype d) {
  switch (d) {
    case Dtype::u8:
      return 0.0;
    case Dtype::i32:
      return std::numeric_limits<std::int32_t>::min();
    default:
      return -std::numeric_limits<double>::infinity();
  }
}

inline double dtype_highest(Dtype d) {
  switch (d) {
    case Dtype::u8:
      return 255.0;
    case Dtype::i32:
      return std::numeric_limits<std::int32_t>::max();
    default:
      return std::numeric_limits<double>::infinity();
  }
}

}  // namespace microwrap
