#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "microwrap/errors.hpp"

namespace microwrap {

enum class Dtype : std::uint8_t { u8, i32, f32, f64 };

using Shape = std::vector<std::size_t>;

inline std::string_view dtype_name(Dtype d) {
  switch (d) {
    case Dtype::u8:
      return "u8";
    case Dtype::i32:
      return "i32";
    case Dtype::f32:
      return "f32";
    case Dtype::f64:
      return "f64";
  }
  return "?";
}

inline Dtype parse_dtype(std::string_view name) {
  if (name == "u8") return Dtype::u8;
  if (name == "i32") return Dtype::i32;
  if (name == "f32") return Dtype::f32;
  if (name == "f64") return Dtype::f64;
  throw InvalidParam("unknown dtype '" + std::string(name) + "'");
}

inline bool is_floating(Dtype d) { return d == Dtype::f32 || d == Dtype::f64; }

inline std::size_t dtype_size(Dtype d) {
  switch (d) {
    case Dtype::u8:
      return 1;
    case Dtype::i32:
    case Dtype::f32:
      return 4;
    case Dtype::f64:
      return 8;
  }
  return 0;
}

template <class T>
constexpr Dtype dtype_of() {
  if constexpr (std::is_same_v<T, std::uint8_t>) {
    return Dtype::u8;
  } else if constexpr (std::is_same_v<T, std::int32_t>) {
    return Dtype::i32;
  } else if constexpr (std::is_same_v<T, float>) {
    return Dtype::f32;
  } else {
    static_assert(std::is_same_v<T, double>, "unsupported element type");
    return Dtype::f64;
  }
}

/// Converts a double into element type T.
///
/// Integers: NaN becomes 0, otherwise truncate toward zero and clamp to the
/// representable range. f32: finite values beyond the f32 range clamp to
/// +/-FLT_MAX; infinities and NaN pass through.
template <class T>
T saturate_cast(double v) {
  if constexpr (std::is_integral_v<T>) {
    if (std::isnan(v)) return T{0};
    const double t = std::trunc(v);
    constexpr auto lo = static_cast<double>(std::numeric_limits<T>::min());
    constexpr auto hi = static_cast<double>(std::numeric_limits<T>::max());
    if (t <= lo) return std::numeric_limits<T>::min();
    if (t >= hi) return std::numeric_limits<T>::max();
    return static_cast<T>(t);
  } else if constexpr (std::is_same_v<T, float>) {
    if (std::isfinite(v)) {
      constexpr auto m = static_cast<double>(std::numeric_limits<float>::max());
      return static_cast<float>(std::clamp(v, -m, m));
    }
    return static_cast<float>(v);
  } else {
    return v;
  }
}

/// u8 rounding used by image kernels: round half up, then saturate.
inline std::uint8_t round_u8(double v) { return saturate_cast<std::uint8_t>(std::floor(v + 0.5)); }

inline std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string shape_str(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  if (shape.size() == 1) s += ",";
  return s + ")";
}

/// Dense n-dimensional array with row-major storage.
///
/// A default-constructed tensor is empty (rank 0, no elements) and is only a
/// placeholder; every tensor produced by an environment has a non-empty shape
/// of positive extents.
class Tensor {
 public:
  using Storage = std::variant<std::vector<std::uint8_t>, std::vector<std::int32_t>,
                               std::vector<float>, std::vector<double>>;

  Tensor() = default;

  /// Zero-filled tensor.
  Tensor(Dtype dtype, Shape shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    const std::size_t n = shape_numel(shape_);
    switch (dtype) {
      case Dtype::u8:
        data_ = std::vector<std::uint8_t>(n);
        break;
      case Dtype::i32:
        data_ = std::vector<std::int32_t>(n);
        break;
      case Dtype::f32:
        data_ = std::vector<float>(n);
        break;
      case Dtype::f64:
        data_ = std::vector<double>(n);
        break;
    }
  }

  template <class T>
  Tensor(Shape shape, std::vector<T> values) : shape_(std::move(shape)), data_(std::move(values)) {
    check_shape(shape_);
    if (shape_numel(shape_) != size()) {
      throw ShapeMismatch("tensor shape " + shape_str(shape_) + " does not match " +
                          std::to_string(size()) + " elements");
    }
  }

  template <class T>
  static Tensor vector(std::vector<T> values) {
    const std::size_t n = values.size();
    return Tensor(Shape{n}, std::move(values));
  }

  static Tensor full(Dtype dtype, Shape shape, double value) {
    Tensor t(dtype, std::move(shape));
    t.fill(value);
    return t;
  }

  Dtype dtype() const noexcept { return static_cast<Dtype>(data_.index()); }
  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept {
    return std::visit([](const auto& v) { return v.size(); }, data_);
  }
  bool empty() const noexcept { return shape_.empty(); }

  template <class T>
  std::span<T> values() {
    if (dtype() != dtype_of<T>()) {
      throw InvalidParam("tensor holds " + std::string(dtype_name(dtype())) + ", requested " +
                         std::string(dtype_name(dtype_of<T>())));
    }
    return std::get<std::vector<T>>(data_);
  }

  template <class T>
  std::span<const T> values() const {
    if (dtype() != dtype_of<T>()) {
      throw InvalidParam("tensor holds " + std::string(dtype_name(dtype())) + ", requested " +
                         std::string(dtype_name(dtype_of<T>())));
    }
    return std::get<std::vector<T>>(data_);
  }

  /// Calls f with a span over the typed elements.
  template <class F>
  decltype(auto) visit(F&& f) {
    return std::visit([&](auto& v) -> decltype(auto) { return f(std::span(v)); }, data_);
  }

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(
        [&](const auto& v) -> decltype(auto) { return f(std::span<const typename std::decay_t<decltype(v)>::value_type>(v)); },
        data_);
  }

  /// Element i (flat index) widened to double; exact for every dtype.
  double get(std::size_t i) const {
    return std::visit([i](const auto& v) { return static_cast<double>(v[i]); }, data_);
  }

  /// Stores v at flat index i using saturate_cast.
  void set(std::size_t i, double v) {
    std::visit(
        [i, v](auto& vec) {
          using T = typename std::decay_t<decltype(vec)>::value_type;
          vec[i] = saturate_cast<T>(v);
        },
        data_);
  }

  void fill(double v) {
    std::visit(
        [v](auto& vec) {
          using T = typename std::decay_t<decltype(vec)>::value_type;
          std::fill(vec.begin(), vec.end(), saturate_cast<T>(v));
        },
        data_);
  }

  std::size_t offset(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) throw ShapeMismatch("index rank does not match tensor rank");
    std::size_t off = 0;
    for (std::size_t k = 0; k < index.size(); ++k) {
      if (index[k] >= shape_[k]) throw InvalidParam("index out of range");
      off = off * shape_[k] + index[k];
    }
    return off;
  }

  double at(std::initializer_list<std::size_t> index) const {
    return get(offset(std::span<const std::size_t>(index.begin(), index.size())));
  }

  /// Elementwise conversion to another dtype (see saturate_cast).
  Tensor cast(Dtype target) const {
    if (target == dtype()) return *this;
    Tensor out(target, shape_);
    out.visit([&](auto dst) {
      using T = typename decltype(dst)::value_type;
      visit([&](auto src) {
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = saturate_cast<T>(static_cast<double>(src[i]));
      });
    });
    return out;
  }

  /// Same data, new shape; element counts must agree.
  Tensor reshaped(Shape shape) const {
    check_shape(shape);
    if (shape_numel(shape) != size()) {
      throw ShapeMismatch("cannot reshape " + shape_str(shape_) + " into " + shape_str(shape));
    }
    Tensor out = *this;
    out.shape_ = std::move(shape);
    return out;
  }

  /// Little-endian byte encoding of every element, in row-major order.
  template <class Sink>
  void write_bytes(Sink&& sink) const {
    visit([&](auto v) {
      using T = typename decltype(v)::value_type;
      for (const T& x : v) {
        if constexpr (sizeof(T) == 1) {
          sink(static_cast<std::uint8_t>(x));
        } else {
          using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
          const U bits = std::bit_cast<U>(x);
          for (std::size_t b = 0; b < sizeof(T); ++b) sink(static_cast<std::uint8_t>(bits >> (8 * b)));
        }
      }
    });
  }

  /// Bitwise identity of dtype, shape and element bytes.
  bool bit_equal(const Tensor& other) const {
    if (dtype() != other.dtype() || shape_ != other.shape_) return false;
    return visit([&](auto a) {
      using T = typename decltype(a)::value_type;
      using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                                   std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
      auto b = other.values<T>();
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::bit_cast<U>(a[i]) != std::bit_cast<U>(b[i])) return false;
      }
      return true;
    });
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  static void check_shape(const Shape& shape) {
    if (shape.empty()) throw ShapeMismatch("tensor shape must have at least one dimension");
    for (std::size_t d : shape) {
      if (d == 0) throw ShapeMismatch("tensor extents must be positive, got " + shape_str(shape));
    }
  }

  Shape shape_;
  Storage data_;
};

}  // namespace microwrap
