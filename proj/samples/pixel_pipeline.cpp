// Classic image preprocessing: greyscale, downscale, stack four frames, skip
// four frames, clip rewards.

#include <iostream>
#include <memory>

#include "microwrap/microwrap.hpp"

using namespace microwrap;

int main() {
  EnvPtr env = std::make_unique<GradientPixelEnv>(210, 160, 50);
  env = color_reduction(std::move(env), ColorMode::full);
  env = resize(std::move(env), 84, 84, Interp::bilinear);
  env = frame_stack(std::move(env), 4);
  env = frame_skip(std::move(env), 4);
  env = clip_reward(std::move(env));

  std::cout << "observation space: " << describe(env->observation_space()) << "\n";

  Tensor obs = env->reset(1);
  int steps = 0;
  double ret = 0.0;
  for (bool done = false; !done; ++steps) {
    StepResult r = env->step(std::int64_t{0});
    ret += r.reward;
    done = r.done;
    obs = std::move(r.observation);
  }
  std::cout << "episode: " << steps << " agent steps, return " << ret << ", last obs " << shape_str(obs.shape())
            << "\n";
  return 0;
}
