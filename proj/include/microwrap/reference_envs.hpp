#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "microwrap/env.hpp"
#include "microwrap/errors.hpp"
#include "microwrap/params.hpp"
#include "microwrap/space.hpp"

// Deterministic synthetic environments. None of them consume the reset seed,
// so any trajectory difference under a wrapper comes from the wrapper.

namespace microwrap {

namespace detail {

/// Shared reset/step bookkeeping for single-agent reference envs.
class EpisodeClock {
 public:
  explicit EpisodeClock(std::int64_t horizon) : horizon_(horizon) {}

  void reset() {
    t_ = 0;
    running_ = true;
  }

  /// Advances one step; returns true when the episode just ended.
  bool tick(const char* env) {
    if (!running_) throw ContractViolation(std::string(env) + ": step called without a live episode; call reset()");
    ++t_;
    running_ = t_ < horizon_;
    return !running_;
  }

  std::int64_t t() const noexcept { return t_; }

 private:
  std::int64_t horizon_;
  std::int64_t t_ = 0;
  bool running_ = false;
};

inline void check_action(const Space& space, const Action& a, const char* env) {
  if (!space_contains(space, a)) {
    throw ContainmentViolation(std::string(env) + ": action " + describe(a) + " outside " + describe(space));
  }
}

}  // namespace detail

/// f32 vector of length d whose elements all equal the step counter t.
/// Reward 1 per step; done when t reaches the horizon.
class CounterEnv final : public Env {
 public:
  CounterEnv(std::int64_t horizon, std::int64_t dim)
      : obs_space_(make_obs_space(horizon, dim)),
        act_space_(Box::uniform(Dtype::f32, {1}, -1.0, 1.0)),
        dim_(static_cast<std::size_t>(dim)),
        clock_(horizon) {}

  const Space& observation_space() const override { return obs_space_; }
  const Space& action_space() const override { return act_space_; }

  Tensor reset(std::optional<std::uint64_t>) override {
    clock_.reset();
    return observe();
  }

  StepResult step(const Action& action) override {
    detail::check_action(act_space_, action, "counter");
    const bool done = clock_.tick("counter");
    return {observe(), 1.0, done, {}};
  }

 private:
  static Box make_obs_space(std::int64_t horizon, std::int64_t dim) {
    if (horizon < 1) throw InvalidParam("counter: T must be >= 1");
    if (dim < 1) throw InvalidParam("counter: d must be >= 1");
    return Box::uniform(Dtype::f32, {static_cast<std::size_t>(dim)}, 0.0, static_cast<double>(horizon));
  }

  Tensor observe() const { return Tensor::full(Dtype::f32, {dim_}, static_cast<double>(clock_.t())); }

  Space obs_space_;
  Space act_space_;
  std::size_t dim_;
  detail::EpisodeClock clock_;
};

/// u8 (H, W, 3) image with pixel (r, c, ch) = (r·W + c + t·ch) mod 256.
/// Discrete(4) actions, reward 1 per step.
class GradientPixelEnv final : public Env {
 public:
  GradientPixelEnv(std::int64_t height, std::int64_t width, std::int64_t horizon)
      : obs_space_(make_obs_space(height, width, horizon)),
        act_space_(Discrete(4)),
        h_(static_cast<std::size_t>(height)),
        w_(static_cast<std::size_t>(width)),
        clock_(horizon) {}

  const Space& observation_space() const override { return obs_space_; }
  const Space& action_space() const override { return act_space_; }

  Tensor reset(std::optional<std::uint64_t>) override {
    clock_.reset();
    return observe();
  }

  StepResult step(const Action& action) override {
    detail::check_action(act_space_, action, "pixel");
    const bool done = clock_.tick("pixel");
    return {observe(), 1.0, done, {}};
  }

 private:
  static Box make_obs_space(std::int64_t h, std::int64_t w, std::int64_t horizon) {
    if (h < 1 || w < 1) throw InvalidParam("pixel: H and W must be >= 1");
    if (horizon < 1) throw InvalidParam("pixel: T must be >= 1");
    return Box::uniform(Dtype::u8, {static_cast<std::size_t>(h), static_cast<std::size_t>(w), 3}, 0.0, 255.0);
  }

  Tensor observe() const {
    std::vector<std::uint8_t> px(h_ * w_ * 3);
    const auto t = static_cast<std::uint64_t>(clock_.t());
    for (std::size_t r = 0; r < h_; ++r) {
      for (std::size_t c = 0; c < w_; ++c) {
        for (std::size_t ch = 0; ch < 3; ++ch) {
          px[(r * w_ + c) * 3 + ch] = static_cast<std::uint8_t>((r * w_ + c + t * ch) % 256);
        }
      }
    }
    return Tensor(Shape{h_, w_, 3}, std::move(px));
  }

  Space obs_space_;
  Space act_space_;
  std::size_t h_;
  std::size_t w_;
  detail::EpisodeClock clock_;
};

/// One agent of a MultiCounterEnv.
struct CounterAgentSpec {
  AgentId id;
  std::int64_t obs_dim = 1;
  Space action_space = Discrete(1);
  /// Agent-specific episode length; the env horizon when unset.
  std::optional<std::int64_t> horizon;
};

/// Parallel env: agent i observes an f32 vector of its own length filled with
/// t and is rewarded with the action it submitted (the index for Discrete,
/// the element sum for Box), so action forwarding is visible in rewards.
class MultiCounterEnv final : public ParallelEnv {
 public:
  MultiCounterEnv(std::vector<CounterAgentSpec> specs, std::int64_t horizon) {
    if (horizon < 1) throw InvalidParam("multi_counter: T must be >= 1");
    if (specs.empty()) throw InvalidParam("multi_counter: needs at least one agent");
    for (auto& s : specs) {
      if (s.obs_dim < 1) throw InvalidParam("multi_counter: agent '" + s.id + "' needs obs dim >= 1");
      const std::int64_t t_end = s.horizon.value_or(horizon);
      if (t_end < 1) throw InvalidParam("multi_counter: agent '" + s.id + "' needs horizon >= 1");
      if (agents_.count(s.id)) throw InvalidParam("multi_counter: duplicate agent id '" + s.id + "'");
      possible_.push_back(s.id);
      agents_.emplace(s.id, Agent{Box::uniform(Dtype::f32, {static_cast<std::size_t>(s.obs_dim)}, 0.0,
                                               static_cast<double>(t_end)),
                                  std::move(s.action_space), static_cast<std::size_t>(s.obs_dim), t_end});
    }
  }

  const std::vector<AgentId>& possible_agents() const override { return possible_; }
  const std::vector<AgentId>& agents() const override { return live_; }
  const Space& observation_space(const AgentId& a) const override { return agent(a).obs_space; }
  const Space& action_space(const AgentId& a) const override { return agent(a).act_space; }

  AgentMap<Tensor> reset(std::optional<std::uint64_t>) override {
    t_ = 0;
    live_ = possible_;
    AgentMap<Tensor> obs;
    for (const AgentId& id : live_) obs.emplace(id, observe(id));
    return obs;
  }

  AgentMap<StepResult> step(const AgentMap<Action>& actions) override {
    if (live_.empty()) throw ContractViolation("multi_counter: step called without live agents; call reset()");
    if (actions.size() != live_.size()) {
      throw ContractViolation("multi_counter: expected " + std::to_string(live_.size()) + " actions, got " +
                              std::to_string(actions.size()));
    }
    for (const AgentId& id : live_) {
      auto it = actions.find(id);
      if (it == actions.end()) throw ContractViolation("multi_counter: missing action for agent '" + id + "'");
      detail::check_action(agent(id).act_space, it->second, "multi_counter");
    }
    ++t_;
    AgentMap<StepResult> out;
    std::vector<AgentId> still_live;
    for (const AgentId& id : live_) {
      const bool done = t_ >= agent(id).horizon;
      out.emplace(id, StepResult{observe(id), echo(actions.at(id)), done, {}});
      if (!done) still_live.push_back(id);
    }
    live_ = std::move(still_live);
    return out;
  }

  /// Parses "id:dim:n[:T],..." where n is the Discrete action count.
  static std::vector<CounterAgentSpec> parse_layout(const std::string& layout) {
    std::vector<CounterAgentSpec> specs;
    std::stringstream items(layout);
    std::string item;
    while (std::getline(items, item, ',')) {
      std::vector<std::string> f;
      std::stringstream fields(item);
      std::string field;
      while (std::getline(fields, field, ':')) f.push_back(field);
      if (f.size() != 3 && f.size() != 4) {
        throw InvalidParam("multi_counter: agent entry '" + item + "' must be id:dim:n or id:dim:n:T");
      }
      try {
        CounterAgentSpec s{f[0], std::stoll(f[1]), Discrete(std::stoll(f[2])), std::nullopt};
        if (f.size() == 4) s.horizon = std::stoll(f[3]);
        specs.push_back(std::move(s));
      } catch (const std::logic_error&) {
        throw InvalidParam("multi_counter: agent entry '" + item + "' has a non-integer field");
      }
    }
    return specs;
  }

  static constexpr const char* kDefaultLayout = "pursuer_0:3:3,pursuer_1:4:4,evader_0:5:5";

 private:
  struct Agent {
    Space obs_space;
    Space act_space;
    std::size_t dim;
    std::int64_t horizon;
  };

  const Agent& agent(const AgentId& id) const {
    auto it = agents_.find(id);
    if (it == agents_.end()) throw ContractViolation("multi_counter: unknown agent '" + id + "'");
    return it->second;
  }

  Tensor observe(const AgentId& id) const {
    return Tensor::full(Dtype::f32, {agent(id).dim}, static_cast<double>(t_));
  }

  static double echo(const Action& a) {
    if (const auto* i = std::get_if<std::int64_t>(&a)) return static_cast<double>(*i);
    const Tensor& t = std::get<Tensor>(a);
    double sum = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) sum += t.get(k);
    return sum;
  }

  std::int64_t t_ = 0;
  std::vector<AgentId> possible_;
  std::vector<AgentId> live_;
  AgentMap<Agent> agents_;
};

/// Either kind of environment.
using AnyEnv = std::variant<EnvPtr, ParallelEnvPtr>;

/// Builds "counter" (T, d), "pixel" (H, W, T) or "multi_counter" (T, agents).
inline AnyEnv make_reference_env(const std::string& name, const ParamMap& p) {
  if (name == "counter") {
    params::reject_unknown(p, {"T", "d"}, "counter");
    return std::make_unique<CounterEnv>(params::get_int(p, "T", 100), params::get_int(p, "d", 4));
  }
  if (name == "pixel") {
    params::reject_unknown(p, {"H", "W", "T"}, "pixel");
    return std::make_unique<GradientPixelEnv>(params::get_int(p, "H", 84), params::get_int(p, "W", 84),
                                              params::get_int(p, "T", 100));
  }
  if (name == "multi_counter") {
    params::reject_unknown(p, {"T", "agents"}, "multi_counter");
    return std::make_unique<MultiCounterEnv>(
        MultiCounterEnv::parse_layout(params::get_string(p, "agents", MultiCounterEnv::kDefaultLayout)),
        params::get_int(p, "T", 100));
  }
  throw UnknownEnv("unknown environment '" + name + "' (expected counter, pixel or multi_counter)");
}

}  // namespace microwrap
