#pragma once

#include <algorithm>
#include <cmath>

#include "microwrap/env.hpp"
#include "microwrap/errors.hpp"

namespace microwrap {

class ClipReward final : public Transform {
 public:
  ClipReward(const Space& obs, const Space& act, double lower = -1.0, double upper = 1.0)
      : Transform(obs, act), lower_(lower), upper_(upper) {
    if (!(lower <= upper)) throw InvalidParam("clip_reward needs lower <= upper");
  }

  void on_step(StepResult& r) override { r.reward = std::min(upper_, std::max(lower_, r.reward)); }

 private:
  double lower_;
  double upper_;
};

inline EnvPtr clip_reward(EnvPtr env, double lower = -1.0, double upper = 1.0) {
  return make_transform_env<ClipReward>(std::move(env), lower, upper);
}

}  // namespace microwrap
