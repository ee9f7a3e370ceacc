#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

#include "microwrap/env.hpp"
#include "microwrap/errors.hpp"
#include "microwrap/rng.hpp"
#include "microwrap/space.hpp"

namespace microwrap {

/// Accepts any tensor of the action shape and clamps it into the inner
/// bounds before forwarding. The advertised space is widened to the whole
/// dtype range (+/-inf for floating types).
class ClipActions final : public Transform {
 public:
  ClipActions(const Space& obs, const Space& act) : Transform(obs, widened(act)), bounds_(std::get<Box>(act)) {}

  Action forward_action(const Action& action) override {
    const auto* t = std::get_if<Tensor>(&action);
    if (!t || t->shape() != bounds_.shape()) {
      throw ShapeMismatch("clip_actions expects a tensor of shape " + shape_str(bounds_.shape()) + ", got " +
                          describe(action));
    }
    Tensor out(bounds_.dtype(), bounds_.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double v = t->get(i);
      if (std::isnan(v)) throw InvalidParam("clip_actions received NaN at element " + std::to_string(i));
      out.set(i, std::clamp(v, bounds_.low().get(i), bounds_.high().get(i)));
    }
    return out;
  }

 private:
  static Box widened(const Space& space) {
    const auto* box = std::get_if<Box>(&space);
    if (!box) throw PreconditionFailed("clip_actions needs a Box action space, got " + describe(space));
    if (!box->bounded()) throw PreconditionFailed("clip_actions needs finite action bounds");
    return Box::uniform(box->dtype(), box->shape(), dtype_lowest(box->dtype()), dtype_highest(box->dtype()));
  }

  Box bounds_;
};

/// With probability p forwards the previous action instead of the submitted
/// one. One uniform draw is consumed per step whether or not it is used.
class StickyActions final : public Transform {
 public:
  StickyActions(const Space& obs, const Space& act, double p, std::uint64_t seed)
      : Transform(obs, act), p_(p), seed_(seed), rng_(seed, seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidParam("sticky_actions needs 0 <= p <= 1");
  }

  Tensor on_reset(Tensor obs, std::optional<std::uint64_t> seed) override {
    if (seed) rng_.reseed(*seed, seed_);
    last_.reset();
    return obs;
  }

  Action forward_action(const Action& action) override {
    const double u = rng_.next_uniform();
    ++steps_;
    if (u < p_ && last_) {
      ++repeats_;
      return *last_;
    }
    last_ = action;
    return action;
  }

  const std::optional<Action>& last_action() const noexcept { return last_; }
  std::uint64_t steps() const noexcept { return steps_; }
  std::uint64_t repeats() const noexcept { return repeats_; }

 private:
  double p_;
  std::uint64_t seed_;
  Rng rng_;
  std::optional<Action> last_;
  std::uint64_t steps_ = 0;
  std::uint64_t repeats_ = 0;
};

inline EnvPtr clip_actions(EnvPtr env) { return make_transform_env<ClipActions>(std::move(env)); }

inline EnvPtr sticky_actions(EnvPtr env, double p, std::uint64_t seed) {
  return make_transform_env<StickyActions>(std::move(env), p, seed);
}

}  // namespace microwrap
