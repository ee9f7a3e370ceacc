#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "microwrap/env.hpp"
#include "microwrap/errors.hpp"
#include "microwrap/obs_wrappers.hpp"
#include "microwrap/space.hpp"

namespace microwrap {

using ObsFn = std::function<Tensor(const Tensor&)>;
using SpaceFn = std::function<Space(const Space&)>;
using ActionFn = std::function<Action(const Action&)>;
using RewardFn = std::function<double(double)>;

/// Whether lambda wrappers verify every produced value against its space.
enum class Checked { no, yes };

#ifdef NDEBUG
inline constexpr Checked kDefaultChecked = Checked::no;
#else
inline constexpr Checked kDefaultChecked = Checked::yes;
#endif

/// Applies fn to every observation.
///
/// Without a space function the new bounds are inferred as the elementwise
/// min/max of fn(low) and fn(high). That is only sound for elementwise
/// monotone fn; pass an explicit space function otherwise.
class ObservationLambda final : public Transform {
 public:
  ObservationLambda(const Space& obs, const Space& act, ObsFn fn, std::optional<SpaceFn> space_fn, Checked checked)
      : Transform(mapped_space(obs, fn, space_fn), act), fn_(std::move(fn)), checked_(checked) {}

  Tensor on_reset(Tensor obs, std::optional<std::uint64_t>) override { return apply(obs); }
  void on_step(StepResult& r) override { r.observation = apply(r.observation); }

 private:
  Tensor apply(const Tensor& obs) const {
    Tensor out = fn_(obs);
    if (checked_ == Checked::yes && !space_contains(observation_space_, out)) {
      throw ContainmentViolation("observation_lambda produced a value outside " + describe(observation_space_));
    }
    return out;
  }

  static Space mapped_space(const Space& space, const ObsFn& fn, const std::optional<SpaceFn>& space_fn) {
    if (!fn) throw InvalidParam("observation_lambda needs a function");
    const Box& box = detail::require_box(space, "observation_lambda");
    if (space_fn) return (*space_fn)(space);
    Tensor a = fn(box.low());
    Tensor b = fn(box.high());
    if (a.shape() != b.shape() || a.dtype() != b.dtype()) {
      throw SpaceInferenceFailed("observation_lambda: fn(low) and fn(high) differ in shape or dtype");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double x = a.get(i);
      const double y = b.get(i);
      if (std::isnan(x) || std::isnan(y)) throw SpaceInferenceFailed("observation_lambda: fn maps a bound to NaN");
      a.set(i, std::min(x, y));
      b.set(i, std::max(x, y));
    }
    return Box(std::move(a), std::move(b));
  }

  ObsFn fn_;
  Checked checked_;
};

/// Advertises wrapped_space and forwards fn(action). Every forwarded action
/// is checked against the inner action space.
class ActionLambda final : public Transform {
 public:
  ActionLambda(const Space& obs, const Space& act, ActionFn fn, Space wrapped_space)
      : Transform(obs, std::move(wrapped_space)), fn_(std::move(fn)), base_(act) {
    if (!fn_) throw InvalidParam("action_lambda needs a function");
  }

  Action forward_action(const Action& action) override {
    Action out = fn_(action);
    if (!space_contains(base_, out)) {
      throw ContainmentViolation("action_lambda mapped " + describe(action) + " to " + describe(out) + ", outside " +
                                 describe(base_));
    }
    return out;
  }

 private:
  ActionFn fn_;
  Space base_;
};

class RewardLambda final : public Transform {
 public:
  RewardLambda(const Space& obs, const Space& act, RewardFn fn) : Transform(obs, act), fn_(std::move(fn)) {
    if (!fn_) throw InvalidParam("reward_lambda needs a function");
  }

  void on_step(StepResult& r) override {
    const double v = fn_(r.reward);
    if (!std::isfinite(v)) {
      throw NonFiniteReward("reward_lambda returned " + std::to_string(v) + " for reward " + std::to_string(r.reward));
    }
    r.reward = v;
  }

 private:
  RewardFn fn_;
};

inline EnvPtr observation_lambda(EnvPtr env, ObsFn fn, std::optional<SpaceFn> space_fn = std::nullopt,
                                 Checked checked = kDefaultChecked) {
  return make_transform_env<ObservationLambda>(std::move(env), std::move(fn), std::move(space_fn), checked);
}

inline EnvPtr action_lambda(EnvPtr env, ActionFn fn, Space wrapped_space) {
  return make_transform_env<ActionLambda>(std::move(env), std::move(fn), std::move(wrapped_space));
}

inline EnvPtr reward_lambda(EnvPtr env, RewardFn fn) {
  return make_transform_env<RewardLambda>(std::move(env), std::move(fn));
}

}  // namespace microwrap
