#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "microwrap/errors.hpp"
#include "microwrap/space.hpp"
#include "microwrap/tensor.hpp"

namespace microwrap {

using Info = std::map<std::string, std::string>;

struct StepResult {
  Tensor observation;
  double reward = 0.0;
  bool done = false;
  Info info;
};

/// Single-agent environment.
///
/// Objects are single-threaded: no internal locking, movable between threads.
/// Calling step() after an episode finished and before the next reset() is a
/// ContractViolation.
class Env {
 public:
  virtual ~Env() = default;

  virtual const Space& observation_space() const = 0;
  virtual const Space& action_space() const = 0;
  virtual Tensor reset(std::optional<std::uint64_t> seed = std::nullopt) = 0;
  virtual StepResult step(const Action& action) = 0;
};

using EnvPtr = std::unique_ptr<Env>;

using AgentId = std::string;

template <class T>
using AgentMap = std::map<AgentId, T>;

/// Simultaneous-action multi-agent environment.
///
/// agents() lists the live agents in env order; finished agents drop out of it
/// and of every later result until reset. step() requires exactly one action
/// per live agent.
class ParallelEnv {
 public:
  virtual ~ParallelEnv() = default;

  virtual const std::vector<AgentId>& possible_agents() const = 0;
  virtual const std::vector<AgentId>& agents() const = 0;
  virtual const Space& observation_space(const AgentId& agent) const = 0;
  virtual const Space& action_space(const AgentId& agent) const = 0;
  virtual AgentMap<Tensor> reset(std::optional<std::uint64_t> seed = std::nullopt) = 0;
  virtual AgentMap<StepResult> step(const AgentMap<Action>& actions) = 0;
};

using ParallelEnvPtr = std::unique_ptr<ParallelEnv>;

/// Forwards everything to an inner env; subclasses override what they change.
class Wrapper : public Env {
 public:
  explicit Wrapper(EnvPtr inner) : inner_(std::move(inner)) {
    if (!inner_) throw InvalidParam("wrapped environment must not be null");
  }

  const Space& observation_space() const override { return inner_->observation_space(); }
  const Space& action_space() const override { return inner_->action_space(); }
  Tensor reset(std::optional<std::uint64_t> seed) override { return inner_->reset(seed); }
  StepResult step(const Action& action) override { return inner_->step(action); }

  Env& inner() noexcept { return *inner_; }
  const Env& inner() const noexcept { return *inner_; }

 protected:
  EnvPtr inner_;
};

class ParallelWrapper : public ParallelEnv {
 public:
  explicit ParallelWrapper(ParallelEnvPtr inner) : inner_(std::move(inner)) {
    if (!inner_) throw InvalidParam("wrapped environment must not be null");
  }

  const std::vector<AgentId>& possible_agents() const override { return inner_->possible_agents(); }
  const std::vector<AgentId>& agents() const override { return inner_->agents(); }
  const Space& observation_space(const AgentId& a) const override { return inner_->observation_space(a); }
  const Space& action_space(const AgentId& a) const override { return inner_->action_space(a); }
  AgentMap<Tensor> reset(std::optional<std::uint64_t> seed) override { return inner_->reset(seed); }
  AgentMap<StepResult> step(const AgentMap<Action>& actions) override { return inner_->step(actions); }

 protected:
  ParallelEnvPtr inner_;
};

/// The per-value half of a wrapper: how it maps spaces and how it rewrites
/// observations, actions and rewards flowing through one agent's channel.
///
/// A transform never steps an environment itself, which is what lets the same
/// object serve a single-agent env (TransformEnv) or one agent of a parallel
/// env (lift_to_parallel). Constructors check preconditions against the inner
/// spaces and throw PreconditionFailed.
class Transform {
 public:
  Transform(Space observation_space, Space action_space)
      : observation_space_(std::move(observation_space)), action_space_(std::move(action_space)) {}
  virtual ~Transform() = default;

  const Space& observation_space() const noexcept { return observation_space_; }
  const Space& action_space() const noexcept { return action_space_; }

  /// Called with the inner env's reset observation.
  virtual Tensor on_reset(Tensor observation, std::optional<std::uint64_t> /*seed*/) { return observation; }
  /// Maps an action in the advertised space to one for the inner env.
  virtual Action forward_action(const Action& action) { return action; }
  /// Rewrites the inner env's step result in place.
  virtual void on_step(StepResult& /*result*/) {}

 protected:
  Space observation_space_;
  Space action_space_;
};

/// Builds a transform for given inner spaces. agent_index is 0 for
/// single-agent use and the agent's position when lifted.
using TransformFactory =
    std::function<std::unique_ptr<Transform>(const Space& observation_space, const Space& action_space,
                                             std::size_t agent_index)>;

class TransformEnv final : public Wrapper {
 public:
  TransformEnv(EnvPtr inner, const TransformFactory& factory) : Wrapper(std::move(inner)) {
    transform_ = factory(inner_->observation_space(), inner_->action_space(), 0);
  }

  const Space& observation_space() const override { return transform_->observation_space(); }
  const Space& action_space() const override { return transform_->action_space(); }

  Tensor reset(std::optional<std::uint64_t> seed) override {
    return transform_->on_reset(inner_->reset(seed), seed);
  }

  StepResult step(const Action& action) override {
    StepResult r = inner_->step(transform_->forward_action(action));
    transform_->on_step(r);
    return r;
  }

  Transform& transform() noexcept { return *transform_; }

 private:
  std::unique_ptr<Transform> transform_;
};

/// Wraps env with transform T constructed as T(obs_space, act_space, args...).
template <class T, class... Args>
EnvPtr make_transform_env(EnvPtr env, Args... args) {
  if (!env) throw InvalidParam("wrapped environment must not be null");
  return std::make_unique<TransformEnv>(
      std::move(env), [&](const Space& o, const Space& a, std::size_t) { return std::make_unique<T>(o, a, args...); });
}

/// Applies an independent transform instance to every agent of a parallel env.
class LiftedEnv final : public ParallelWrapper {
 public:
  LiftedEnv(ParallelEnvPtr inner, const TransformFactory& factory) : ParallelWrapper(std::move(inner)) {
    const auto& ids = inner_->possible_agents();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const AgentId& id = ids[i];
      try {
        transforms_.emplace(id, factory(inner_->observation_space(id), inner_->action_space(id), i));
      } catch (const PreconditionFailed& e) {
        throw PreconditionFailed(std::string("agent '") + id + "': " + e.what(), id, e.wrapper_index());
      }
    }
  }

  const Space& observation_space(const AgentId& a) const override { return transform_for(a).observation_space(); }
  const Space& action_space(const AgentId& a) const override { return transform_for(a).action_space(); }

  AgentMap<Tensor> reset(std::optional<std::uint64_t> seed) override {
    AgentMap<Tensor> obs = inner_->reset(seed);
    for (auto& [id, o] : obs) o = transform_for(id).on_reset(std::move(o), seed);
    return obs;
  }

  AgentMap<StepResult> step(const AgentMap<Action>& actions) override {
    AgentMap<Action> forwarded;
    for (const auto& [id, a] : actions) forwarded.emplace(id, transform_for(id).forward_action(a));
    AgentMap<StepResult> results = inner_->step(forwarded);
    for (auto& [id, r] : results) transform_for(id).on_step(r);
    return results;
  }

  Transform& transform(const AgentId& a) { return transform_for(a); }

 private:
  Transform& transform_for(const AgentId& a) const {
    auto it = transforms_.find(a);
    if (it == transforms_.end()) throw ContractViolation("unknown agent '" + a + "'");
    return *it->second;
  }

  AgentMap<std::unique_ptr<Transform>> transforms_;
};

/// Per-agent application of a single-agent transform. Stateful transforms keep
/// separate state for every agent.
inline ParallelEnvPtr lift_to_parallel(const TransformFactory& factory, ParallelEnvPtr env) {
  return std::make_unique<LiftedEnv>(std::move(env), factory);
}

/// Views a parallel env that has exactly one agent as a single-agent env.
class SingleAgentView final : public Env {
 public:
  explicit SingleAgentView(ParallelEnvPtr env) : env_(std::move(env)) {
    if (!env_ || env_->possible_agents().size() != 1) {
      throw PreconditionFailed("single-agent view needs a parallel env with exactly one agent");
    }
    id_ = env_->possible_agents().front();
  }

  const Space& observation_space() const override { return env_->observation_space(id_); }
  const Space& action_space() const override { return env_->action_space(id_); }
  Tensor reset(std::optional<std::uint64_t> seed) override { return env_->reset(seed).at(id_); }
  StepResult step(const Action& action) override { return env_->step({{id_, action}}).at(id_); }

 private:
  ParallelEnvPtr env_;
  AgentId id_;
};

/// Throws ContainmentViolation when the inner env emits an observation outside
/// its declared space or receives an action outside its declared action space.
class CheckedEnv final : public Wrapper {
 public:
  CheckedEnv(EnvPtr inner, std::string label) : Wrapper(std::move(inner)), label_(std::move(label)) {}

  Tensor reset(std::optional<std::uint64_t> seed) override {
    Tensor obs = inner_->reset(seed);
    check_obs(obs);
    return obs;
  }

  StepResult step(const Action& action) override {
    if (!space_contains(inner_->action_space(), action)) {
      throw ContainmentViolation(label_ + ": action " + describe(action) + " outside " +
                                 describe(inner_->action_space()));
    }
    StepResult r = inner_->step(action);
    check_obs(r.observation);
    return r;
  }

 private:
  void check_obs(const Tensor& obs) const {
    if (!space_contains(inner_->observation_space(), obs)) {
      throw ContainmentViolation(label_ + ": observation outside " + describe(inner_->observation_space()));
    }
  }

  std::string label_;
};

class CheckedParallelEnv final : public ParallelWrapper {
 public:
  CheckedParallelEnv(ParallelEnvPtr inner, std::string label)
      : ParallelWrapper(std::move(inner)), label_(std::move(label)) {}

  AgentMap<Tensor> reset(std::optional<std::uint64_t> seed) override {
    AgentMap<Tensor> obs = inner_->reset(seed);
    for (const auto& [id, o] : obs) check_obs(id, o);
    return obs;
  }

  AgentMap<StepResult> step(const AgentMap<Action>& actions) override {
    for (const auto& [id, a] : actions) {
      if (!space_contains(inner_->action_space(id), a)) {
        throw ContainmentViolation(label_ + ": agent '" + id + "' action " + describe(a) + " outside " +
                                   describe(inner_->action_space(id)));
      }
    }
    AgentMap<StepResult> results = inner_->step(actions);
    for (const auto& [id, r] : results) check_obs(id, r.observation);
    return results;
  }

 private:
  void check_obs(const AgentId& id, const Tensor& obs) const {
    if (!space_contains(inner_->observation_space(id), obs)) {
      throw ContainmentViolation(label_ + ": agent '" + id + "' observation outside " +
                                 describe(inner_->observation_space(id)));
    }
  }

  std::string label_;
};

}  // namespace microwrap
