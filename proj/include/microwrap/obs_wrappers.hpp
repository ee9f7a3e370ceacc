#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "microwrap/env.hpp"
#include "microwrap/errors.hpp"
#include "microwrap/rng.hpp"
#include "microwrap/space.hpp"
#include "microwrap/tensor.hpp"

namespace microwrap {

namespace detail {

inline const Box& require_box(const Space& space, const char* wrapper) {
  const auto* box = std::get_if<Box>(&space);
  if (!box) throw PreconditionFailed(std::string(wrapper) + " needs a Box observation space, got " + describe(space));
  return *box;
}

/// Box with each bound widened just enough to contain zero.
inline Box widen_to_zero(const Box& box) {
  Tensor low = box.low();
  Tensor high = box.high();
  for (std::size_t i = 0; i < low.size(); ++i) {
    low.set(i, std::min(low.get(i), 0.0));
    high.set(i, std::max(high.get(i), 0.0));
  }
  return Box(std::move(low), std::move(high));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Kernels. Images are channel-last: (H, W) or (H, W, C).

namespace kernels {

enum class ColorMode { full, red, green, blue };

/// BT.601 luma with round-half-up, evaluated exactly in integers.
inline std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const std::uint32_t weighted = 299u * r + 587u * g + 114u * b;
  return static_cast<std::uint8_t>((weighted + 500u) / 1000u);
}

/// (H, W, 3) u8 → (H, W) u8.
inline Tensor reduce_color(const Tensor& image, ColorMode mode) {
  const std::size_t h = image.shape()[0];
  const std::size_t w = image.shape()[1];
  auto src = image.values<std::uint8_t>();
  std::vector<std::uint8_t> out(h * w);
  if (mode == ColorMode::full) {
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = luma(src[3 * p], src[3 * p + 1], src[3 * p + 2]);
  } else {
    const std::size_t ch = static_cast<std::size_t>(mode) - 1;
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = src[3 * p + ch];
  }
  return Tensor(Shape{h, w}, std::move(out));
}

/// Pixel-center nearest source index: floor((dst + 0.5) * src / dst).
inline std::vector<std::size_t> nearest_indices(std::size_t src_size, std::size_t dst_size) {
  std::vector<std::size_t> idx(dst_size);
  for (std::size_t d = 0; d < dst_size; ++d) {
    idx[d] = std::min(((2 * d + 1) * src_size) / (2 * dst_size), src_size - 1);
  }
  return idx;
}

struct Tap {
  std::size_t i0;
  std::size_t i1;
  double frac;
};

/// Half-pixel aligned linear taps, clamped at the edges.
inline std::vector<Tap> linear_taps(std::size_t src_size, std::size_t dst_size) {
  std::vector<Tap> taps(dst_size);
  const double scale = static_cast<double>(src_size) / static_cast<double>(dst_size);
  const double last = static_cast<double>(src_size - 1);
  for (std::size_t d = 0; d < dst_size; ++d) {
    const double s = std::clamp((static_cast<double>(d) + 0.5) * scale - 0.5, 0.0, last);
    const auto i0 = static_cast<std::size_t>(s);
    taps[d] = {i0, std::min(i0 + 1, src_size - 1), s - static_cast<double>(i0)};
  }
  return taps;
}

inline Tensor resize_nearest(const Tensor& image, std::size_t out_h, std::size_t out_w) {
  const std::size_t h = image.shape()[0];
  const std::size_t w = image.shape()[1];
  const std::size_t c = image.rank() == 3 ? image.shape()[2] : 1;
  Shape out_shape = image.shape();
  out_shape[0] = out_h;
  out_shape[1] = out_w;
  Tensor out(image.dtype(), out_shape);
  const auto rows = nearest_indices(h, out_h);
  const auto cols = nearest_indices(w, out_w);
  out.visit([&](auto dst) {
    using T = typename decltype(dst)::value_type;
    auto src = image.values<T>();
    for (std::size_t y = 0; y < out_h; ++y) {
      for (std::size_t x = 0; x < out_w; ++x) {
        const T* s = &src[(rows[y] * w + cols[x]) * c];
        std::copy(s, s + c, &dst[(y * out_w + x) * c]);
      }
    }
  });
  return out;
}

inline Tensor resize_bilinear(const Tensor& image, std::size_t out_h, std::size_t out_w) {
  const std::size_t w = image.shape()[1];
  const std::size_t c = image.rank() == 3 ? image.shape()[2] : 1;
  Shape out_shape = image.shape();
  out_shape[0] = out_h;
  out_shape[1] = out_w;
  Tensor out(image.dtype(), out_shape);
  const auto ty = linear_taps(image.shape()[0], out_h);
  const auto tx = linear_taps(w, out_w);
  out.visit([&](auto dst) {
    using T = typename decltype(dst)::value_type;
    auto src = image.values<T>();
    for (std::size_t y = 0; y < out_h; ++y) {
      for (std::size_t x = 0; x < out_w; ++x) {
        for (std::size_t k = 0; k < c; ++k) {
          const auto px = [&](std::size_t r, std::size_t col) { return static_cast<double>(src[(r * w + col) * c + k]); };
          const double top = px(ty[y].i0, tx[x].i0) * (1.0 - tx[x].frac) + px(ty[y].i0, tx[x].i1) * tx[x].frac;
          const double bot = px(ty[y].i1, tx[x].i0) * (1.0 - tx[x].frac) + px(ty[y].i1, tx[x].i1) * tx[x].frac;
          const double v = top * (1.0 - ty[y].frac) + bot * ty[y].frac;
          if constexpr (std::is_same_v<T, std::uint8_t>) {
            dst[(y * out_w + x) * c + k] = round_u8(v);
          } else {
            dst[(y * out_w + x) * c + k] = saturate_cast<T>(v);
          }
        }
      }
    }
  });
  return out;
}

/// Stacks equally shaped frames (oldest first).
///   (d,)      → (d·N,)       concatenated
///   (H, W)    → (H, W, N)    frame k in slice k
///   (H, W, C) → (H, W, C·N)  channels concatenated per pixel
template <class FrameRange>
Tensor stack_frames(const FrameRange& frames) {
  const Tensor& first = *std::begin(frames);
  const std::size_t n = static_cast<std::size_t>(std::distance(std::begin(frames), std::end(frames)));
  Shape shape = first.shape();
  std::size_t chunk = 1;  // contiguous run copied from each frame per pixel
  if (shape.size() == 1) {
    chunk = shape[0];
    shape[0] *= n;
  } else if (shape.size() == 2) {
    shape.push_back(n);
  } else {
    chunk = shape[2];
    shape[2] *= n;
  }
  const std::size_t pixels = first.size() / chunk;
  Tensor out(first.dtype(), shape);
  out.visit([&](auto dst) {
    using T = typename decltype(dst)::value_type;
    std::size_t k = 0;
    for (const Tensor& frame : frames) {
      auto src = frame.values<T>();
      for (std::size_t p = 0; p < pixels; ++p) {
        std::copy_n(&src[p * chunk], chunk, &dst[(p * n + k) * chunk]);
      }
      ++k;
    }
  });
  return out;
}

}  // namespace kernels

using kernels::ColorMode;

inline ColorMode parse_color_mode(std::string_view s) {
  if (s == "full") return ColorMode::full;
  if (s == "R") return ColorMode::red;
  if (s == "G") return ColorMode::green;
  if (s == "B") return ColorMode::blue;
  throw InvalidParam("unknown color mode '" + std::string(s) + "' (expected full, R, G or B)");
}

enum class Interp { nearest, bilinear };

inline Interp parse_interp(std::string_view s) {
  if (s == "nearest") return Interp::nearest;
  if (s == "bilinear") return Interp::bilinear;
  throw InvalidParam("unknown interpolation '" + std::string(s) + "'");
}

enum class StackFill { zero, repeat_first };

inline StackFill parse_stack_fill(std::string_view s) {
  if (s == "zero") return StackFill::zero;
  if (s == "repeat-first") return StackFill::repeat_first;
  throw InvalidParam("unknown stack fill '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Transforms.

class ColorReduction final : public Transform {
 public:
  ColorReduction(const Space& obs, const Space& act, ColorMode mode)
      : Transform(reduce_space(obs, mode), act), mode_(mode) {}

  Tensor on_reset(Tensor obs, std::optional<std::uint64_t>) override { return kernels::reduce_color(obs, mode_); }
  void on_step(StepResult& r) override { r.observation = kernels::reduce_color(r.observation, mode_); }

 private:
  // Luma is monotone in every channel, so reducing the bounds bounds the result.
  static Box reduce_space(const Space& space, ColorMode mode) {
    const Box& box = detail::require_box(space, "color_reduction");
    if (box.dtype() != Dtype::u8 || box.shape().size() != 3 || box.shape()[2] != 3) {
      throw PreconditionFailed("color_reduction needs a (H, W, 3) u8 image space, got " + describe(space));
    }
    return Box(kernels::reduce_color(box.low(), mode), kernels::reduce_color(box.high(), mode));
  }

  ColorMode mode_;
};

class Resize final : public Transform {
 public:
  Resize(const Space& obs, const Space& act, std::int64_t out_h, std::int64_t out_w, Interp interp)
      : Transform(resize_space(obs, out_h, out_w, interp), act),
        out_h_(static_cast<std::size_t>(out_h)),
        out_w_(static_cast<std::size_t>(out_w)),
        interp_(interp) {}

  Tensor on_reset(Tensor obs, std::optional<std::uint64_t>) override { return apply(obs); }
  void on_step(StepResult& r) override { r.observation = apply(r.observation); }

 private:
  Tensor apply(const Tensor& obs) const {
    return interp_ == Interp::nearest ? kernels::resize_nearest(obs, out_h_, out_w_)
                                      : kernels::resize_bilinear(obs, out_h_, out_w_);
  }

  static Box resize_space(const Space& space, std::int64_t out_h, std::int64_t out_w, Interp interp) {
    if (out_h < 1 || out_w < 1) throw InvalidParam("resize target must be at least 1x1");
    const Box& box = detail::require_box(space, "resize");
    const std::size_t rank = box.shape().size();
    if ((rank != 2 && rank != 3) || (box.dtype() != Dtype::u8 && box.dtype() != Dtype::f32)) {
      throw PreconditionFailed("resize needs a (H, W) or (H, W, C) u8/f32 space, got " + describe(space));
    }
    const auto h = static_cast<std::size_t>(out_h);
    const auto w = static_cast<std::size_t>(out_w);
    if (interp == Interp::nearest) {
      return Box(kernels::resize_nearest(box.low(), h, w), kernels::resize_nearest(box.high(), h, w));
    }
    // A bilinear sample is a convex combination of up to four source pixels,
    // so the extreme bounds among those taps bound it.
    const std::size_t src_w = box.shape()[1];
    const std::size_t c = rank == 3 ? box.shape()[2] : 1;
    const auto ty = kernels::linear_taps(box.shape()[0], h);
    const auto tx = kernels::linear_taps(src_w, w);
    Shape shape = box.shape();
    shape[0] = h;
    shape[1] = w;
    Tensor low(box.dtype(), shape);
    Tensor high(box.dtype(), shape);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        for (std::size_t k = 0; k < c; ++k) {
          const std::size_t taps[4] = {(ty[y].i0 * src_w + tx[x].i0) * c + k, (ty[y].i0 * src_w + tx[x].i1) * c + k,
                                       (ty[y].i1 * src_w + tx[x].i0) * c + k, (ty[y].i1 * src_w + tx[x].i1) * c + k};
          double lo = box.low().get(taps[0]);
          double hi = box.high().get(taps[0]);
          for (std::size_t t : taps) {
            lo = std::min(lo, box.low().get(t));
            hi = std::max(hi, box.high().get(t));
          }
          low.set((y * w + x) * c + k, lo);
          high.set((y * w + x) * c + k, hi);
        }
      }
    }
    return Box(std::move(low), std::move(high));
  }

  std::size_t out_h_;
  std::size_t out_w_;
  Interp interp_;
};

class DtypeCast final : public Transform {
 public:
  DtypeCast(const Space& obs, const Space& act, Dtype target) : Transform(cast_space(obs, target), act), target_(target) {}

  Tensor on_reset(Tensor obs, std::optional<std::uint64_t>) override { return obs.cast(target_); }
  void on_step(StepResult& r) override { r.observation = r.observation.cast(target_); }

 private:
  // Saturating truncation is monotone, so casting the bounds preserves containment.
  static Box cast_space(const Space& space, Dtype target) {
    const Box& box = detail::require_box(space, "dtype");
    return Box(box.low().cast(target), box.high().cast(target));
  }

  Dtype target_;
};

class Reshape final : public Transform {
 public:
  Reshape(const Space& obs, const Space& act, Shape shape) : Transform(reshape_space(obs, shape), act), shape_(std::move(shape)) {}

  Tensor on_reset(Tensor obs, std::optional<std::uint64_t>) override { return obs.reshaped(shape_); }
  void on_step(StepResult& r) override { r.observation = r.observation.reshaped(shape_); }

 private:
  static Box reshape_space(const Space& space, const Shape& shape) {
    const Box& box = detail::require_box(space, "reshape");
    if (shape.empty() || std::find(shape.begin(), shape.end(), 0) != shape.end()) {
      throw InvalidParam("reshape target " + shape_str(shape) + " must have positive extents");
    }
    if (shape_numel(shape) != box.size()) {
      throw ShapeMismatch("cannot reshape " + shape_str(box.shape()) + " into " + shape_str(shape));
    }
    return Box(box.low().reshaped(shape), box.high().reshaped(shape));
  }

  Shape shape_;
};

class NormalizeObs final : public Transform {
 public:
  NormalizeObs(const Space& obs, const Space& act, double out_min, double out_max)
      : Transform(normalized_space(obs, out_min, out_max), act),
        low_(std::get<Box>(obs).low()),
        high_(std::get<Box>(obs).high()),
        out_min_(out_min),
        out_max_(out_max) {}

  Tensor on_reset(Tensor obs, std::optional<std::uint64_t>) override { return apply(obs); }
  void on_step(StepResult& r) override { r.observation = apply(r.observation); }

  /// The elementwise affine map, exposed so callers can map bounds.
  Tensor apply(const Tensor& obs) const {
    std::vector<float> out(obs.size());
    const double span = out_max_ - out_min_;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double lo = low_.get(i);
      const double v = (obs.get(i) - lo) * span / (high_.get(i) - lo) + out_min_;
      out[i] = static_cast<float>(std::clamp(v, out_min_, out_max_));
    }
    return Tensor(obs.shape(), std::move(out));
  }

 private:
  static Box normalized_space(const Space& space, double out_min, double out_max) {
    if (!std::isfinite(out_min) || !std::isfinite(out_max) || !(out_min < out_max)) {
      throw InvalidParam("normalize_obs needs finite out_min < out_max");
    }
    const Box& box = detail::require_box(space, "normalize_obs");
    for (std::size_t i = 0; i < box.size(); ++i) {
      const double lo = box.low().get(i);
      const double hi = box.high().get(i);
      if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw PreconditionFailed("normalize_obs needs finite bounds; element " + std::to_string(i) + " is unbounded");
      }
      if (!(lo < hi)) {
        throw PreconditionFailed("normalize_obs needs low < high; element " + std::to_string(i) + " is degenerate");
      }
    }
    return Box::uniform(Dtype::f32, box.shape(), out_min, out_max);
  }

  Tensor low_;
  Tensor high_;
  double out_min_;
  double out_max_;
};

/// Emits the N most recent observations stacked; see kernels::stack_frames
/// for the per-rank layout.
class FrameStack final : public Transform {
 public:
  FrameStack(const Space& obs, const Space& act, std::int64_t n, StackFill fill)
      : Transform(stacked_space(obs, n, fill), act), n_(static_cast<std::size_t>(n)), fill_(fill) {}

  Tensor on_reset(Tensor obs, std::optional<std::uint64_t>) override {
    frames_.assign(n_, fill_ == StackFill::zero ? Tensor(obs.dtype(), obs.shape()) : obs);
    frames_.back() = std::move(obs);
    return kernels::stack_frames(frames_);
  }

  void on_step(StepResult& r) override {
    if (frames_.empty()) throw ContractViolation("frame_stack stepped before reset");
    frames_.pop_front();
    frames_.push_back(std::move(r.observation));
    r.observation = kernels::stack_frames(frames_);
  }

 private:
  static Box stacked_space(const Space& space, std::int64_t n, StackFill fill) {
    if (n < 1) throw InvalidParam("frame_stack needs N >= 1");
    const Box& box = detail::require_box(space, "frame_stack");
    if (box.shape().size() > 3) {
      throw PreconditionFailed("frame_stack needs a rank 1, 2 or 3 space, got " + describe(space));
    }
    // Zero-filled slots must lie inside the space.
    const Box frame = fill == StackFill::zero ? detail::widen_to_zero(box) : box;
    const std::vector<Tensor> lows(static_cast<std::size_t>(n), frame.low());
    const std::vector<Tensor> highs(static_cast<std::size_t>(n), frame.high());
    return Box(kernels::stack_frames(lows), kernels::stack_frames(highs));
  }

  std::size_t n_;
  StackFill fill_;
  std::deque<Tensor> frames_;
};

/// Emits the inner observation from d steps earlier (zeros during warm-up).
/// Rewards, done flags and info are not delayed.
class DelayObservations final : public Transform {
 public:
  DelayObservations(const Space& obs, const Space& act, std::int64_t d)
      : Transform(delayed_space(obs, d), act), delay_(static_cast<std::size_t>(d)) {}

  Tensor on_reset(Tensor obs, std::optional<std::uint64_t>) override {
    queue_.clear();
    return push(std::move(obs));
  }

  void on_step(StepResult& r) override { r.observation = push(std::move(r.observation)); }

 private:
  Tensor push(Tensor obs) {
    Tensor zero(obs.dtype(), obs.shape());
    queue_.push_back(std::move(obs));
    if (queue_.size() <= delay_) return zero;
    Tensor out = std::move(queue_.front());
    queue_.pop_front();
    return out;
  }

  static Box delayed_space(const Space& space, std::int64_t d) {
    if (d < 0) throw InvalidParam("delay must be non-negative");
    const Box& box = detail::require_box(space, "delay");
    return d == 0 ? box : detail::widen_to_zero(box);
  }

  std::size_t delay_;
  std::deque<Tensor> queue_;
};

// ---------------------------------------------------------------------------
// Frame skipping alters stepping, so it is an env wrapper rather than a
// transform.

/// Inclusive range of base steps per wrapper step.
struct SkipRange {
  std::int64_t lo = 1;
  std::int64_t hi = 1;
};

namespace detail {

inline void check_skip(SkipRange skip) {
  if (skip.lo < 1) throw InvalidParam("frame_skip needs skip >= 1");
  if (skip.lo > skip.hi) throw InvalidParam("frame_skip range needs lo <= hi");
}

/// Draws the number of base steps for one wrapper step.
inline std::int64_t draw_skip(SkipRange skip, Rng& rng) {
  return skip.lo == skip.hi ? skip.lo : rng.next_int(skip.lo, skip.hi);
}

}  // namespace detail

/// Repeats each action for k base steps, summing rewards and returning the
/// last observation. Stops early when the episode ends. A seed passed to
/// reset() reseeds the skip stream (stream id = the wrapper's seed).
class FrameSkip final : public Wrapper {
 public:
  FrameSkip(EnvPtr inner, SkipRange skip, std::uint64_t seed = 0)
      : Wrapper(std::move(inner)), skip_(skip), seed_(seed), rng_(seed, seed) {
    detail::check_skip(skip);
  }

  Tensor reset(std::optional<std::uint64_t> seed) override {
    if (seed) rng_.reseed(*seed, seed_);
    return inner_->reset(seed);
  }

  StepResult step(const Action& action) override {
    const std::int64_t k = detail::draw_skip(skip_, rng_);
    StepResult last;
    double total = 0.0;
    for (std::int64_t i = 0; i < k; ++i) {
      last = inner_->step(action);
      total += last.reward;
      if (last.done) break;
    }
    last.reward = total;
    return last;
  }

 private:
  SkipRange skip_;
  std::uint64_t seed_;
  Rng rng_;
};

/// Multi-agent frame skip: one skip count per joint step shared by all agents.
/// Each agent keeps its submitted action for the whole skip; agents that
/// finish mid-skip keep their final result and stop acting.
class ParallelFrameSkip final : public ParallelWrapper {
 public:
  ParallelFrameSkip(ParallelEnvPtr inner, SkipRange skip, std::uint64_t seed = 0)
      : ParallelWrapper(std::move(inner)), skip_(skip), seed_(seed), rng_(seed, seed) {
    detail::check_skip(skip);
  }

  AgentMap<Tensor> reset(std::optional<std::uint64_t> seed) override {
    if (seed) rng_.reseed(*seed, seed_);
    return inner_->reset(seed);
  }

  AgentMap<StepResult> step(const AgentMap<Action>& actions) override {
    const std::int64_t k = detail::draw_skip(skip_, rng_);
    AgentMap<StepResult> out;
    AgentMap<Action> pending = actions;
    for (std::int64_t i = 0; i < k && !pending.empty(); ++i) {
      AgentMap<StepResult> results = inner_->step(pending);
      for (auto& [id, r] : results) {
        auto [it, fresh] = out.try_emplace(id);
        const double total = (fresh ? 0.0 : it->second.reward) + r.reward;
        it->second = std::move(r);
        it->second.reward = total;
        if (it->second.done) pending.erase(id);
      }
    }
    return out;
  }

 private:
  SkipRange skip_;
  std::uint64_t seed_;
  Rng rng_;
};

// ---------------------------------------------------------------------------
// Env → env functions.

inline EnvPtr color_reduction(EnvPtr env, ColorMode mode = ColorMode::full) {
  return make_transform_env<ColorReduction>(std::move(env), mode);
}

inline EnvPtr resize(EnvPtr env, std::int64_t out_h, std::int64_t out_w, Interp interp = Interp::nearest) {
  return make_transform_env<Resize>(std::move(env), out_h, out_w, interp);
}

inline EnvPtr dtype_cast(EnvPtr env, Dtype target) { return make_transform_env<DtypeCast>(std::move(env), target); }

/// Row-major flatten is a reshape to (numel,).
inline std::unique_ptr<Transform> make_flatten(const Space& obs, const Space& act) {
  const Box& box = detail::require_box(obs, "flatten");
  return std::make_unique<Reshape>(obs, act, Shape{box.size()});
}

inline EnvPtr flatten(EnvPtr env) {
  if (!env) throw InvalidParam("wrapped environment must not be null");
  return std::make_unique<TransformEnv>(std::move(env),
                                        [](const Space& o, const Space& a, std::size_t) { return make_flatten(o, a); });
}

inline EnvPtr reshape(EnvPtr env, Shape shape) { return make_transform_env<Reshape>(std::move(env), std::move(shape)); }

inline EnvPtr normalize_obs(EnvPtr env, double out_min = 0.0, double out_max = 1.0) {
  return make_transform_env<NormalizeObs>(std::move(env), out_min, out_max);
}

inline EnvPtr frame_stack(EnvPtr env, std::int64_t n, StackFill fill = StackFill::zero) {
  return make_transform_env<FrameStack>(std::move(env), n, fill);
}

inline EnvPtr delay_observations(EnvPtr env, std::int64_t d) {
  return make_transform_env<DelayObservations>(std::move(env), d);
}

inline EnvPtr frame_skip(EnvPtr env, SkipRange skip, std::uint64_t seed = 0) {
  return std::make_unique<FrameSkip>(std::move(env), skip, seed);
}

inline EnvPtr frame_skip(EnvPtr env, std::int64_t skip, std::uint64_t seed = 0) {
  return frame_skip(std::move(env), SkipRange{skip, skip}, seed);
}

}  // namespace microwrap
