// Homogenizes heterogeneous agents so one policy network can serve them all.

#include <iostream>
#include <memory>

#include "microwrap/microwrap.hpp"

using namespace microwrap;

int main() {
  ParallelEnvPtr env = std::make_unique<MultiCounterEnv>(
      MultiCounterEnv::parse_layout("pursuer_0:3:3,pursuer_1:4:4,evader_0:5:5"), 10);
  env = pad_observations(std::move(env));
  env = pad_action_space(std::move(env));
  env = agent_indicator(std::move(env), /*type_only=*/true);
  env = lift_to_parallel(WrapperSpec{"frame_stack", {{"N", std::int64_t{2}}}}, std::move(env));

  for (const AgentId& id : env->possible_agents()) {
    std::cout << id << ": obs " << describe(env->observation_space(id)) << ", actions "
              << describe(env->action_space(id)) << "\n";
  }

  env->reset();
  AgentMap<Action> actions;
  for (const AgentId& id : env->agents()) actions.emplace(id, std::int64_t{4});
  for (const auto& [id, r] : env->step(actions)) {
    std::cout << id << " submitted 4, reward " << r.reward << "\n";
  }
  return 0;
}
