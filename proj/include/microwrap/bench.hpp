#pragma once

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "json.hpp"
#include "microwrap/env.hpp"
#include "microwrap/errors.hpp"
#include "microwrap/params.hpp"
#include "microwrap/reference_envs.hpp"
#include "microwrap/registry.hpp"
#include "microwrap/rng.hpp"

namespace microwrap {

enum class Policy { zeros, random };

struct EnvConfig {
  std::string name;
  ParamMap params;
};

/// A benchmark run: a reference env, wrappers applied first-to-last (the first
/// listed sits closest to the env), a step budget and an action policy.
struct ChainConfig {
  EnvConfig env;
  std::vector<WrapperSpec> wrappers;
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
  Policy policy = Policy::zeros;
};

struct RunReport {
  std::uint64_t total_steps = 0;
  double wall_seconds = 0.0;
  double steps_per_second = 0.0;
  std::uint64_t obs_checksum = 0;
  double reward_sum = 0.0;
};

/// 64-bit FNV-1a.
class Fnv1a {
 public:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  void add(std::uint8_t byte) noexcept {
    hash_ ^= byte;
    hash_ *= kPrime;
  }

  /// Feeds the tensor's little-endian element bytes in row-major order.
  void add(const Tensor& t) {
    t.write_bytes([this](std::uint8_t b) { add(b); });
  }

  std::uint64_t value() const noexcept { return hash_; }

 private:
  std::uint64_t hash_ = kOffset;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline ParamValue to_param(const nlohmann::json& v, const std::string& where) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::vector<std::int64_t> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) throw ValidationError(where + ": list parameters must hold integers");
      out.push_back(e.get<std::int64_t>());
    }
    return out;
  }
  throw ValidationError(where + ": parameters must be numbers, strings, booleans or integer lists");
}

/// Splits {"name": ..., <params>} into a name and a ParamMap.
inline std::pair<std::string, ParamMap> named_object(const nlohmann::json& obj, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  auto name = obj.find("name");
  if (name == obj.end() || !name->is_string()) throw ValidationError(where + " needs a string \"name\"");
  ParamMap p;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (it.key() == "name") continue;
    p.emplace(it.key(), to_param(it.value(), where + " parameter '" + it.key() + "'"));
  }
  return {name->get<std::string>(), std::move(p)};
}

}  // namespace detail

/// Parses and validates a JSON chain config.
///
/// Throws ParseError (with line and column) for malformed JSON and
/// ValidationError for well-formed documents that break the schema.
inline ChainConfig parse_config(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError(e.what(), line, col);
  }
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& k = it.key();
    if (k != "env" && k != "wrappers" && k != "steps" && k != "seed" && k != "policy") {
      throw ValidationError("unknown config key '" + k + "'");
    }
  }

  ChainConfig cfg;
  if (!doc.contains("env")) throw ValidationError("config needs an \"env\" object");
  std::tie(cfg.env.name, cfg.env.params) = detail::named_object(doc["env"], "env");
  try {
    make_reference_env(cfg.env.name, cfg.env.params);
  } catch (const UnknownEnv& e) {
    throw ValidationError(e.what());
  } catch (const InvalidParam& e) {
    throw ValidationError(std::string("env: ") + e.what());
  }

  if (doc.contains("wrappers")) {
    const auto& ws = doc["wrappers"];
    if (!ws.is_array()) throw ValidationError("\"wrappers\" must be an array");
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const std::string where = "wrappers[" + std::to_string(i) + "]";
      WrapperSpec spec;
      std::tie(spec.name, spec.params) = detail::named_object(ws[i], where);
      try {
        validate_spec(spec);
      } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
      }
      cfg.wrappers.push_back(std::move(spec));
    }
  }

  if (!doc.contains("steps")) throw ValidationError("config needs \"steps\"");
  const auto& steps = doc["steps"];
  if (!steps.is_number_integer() || steps.get<std::int64_t>() < 1) {
    throw ValidationError("\"steps\" must be a positive integer");
  }
  cfg.steps = steps.get<std::uint64_t>();

  if (doc.contains("seed")) {
    const auto& seed = doc["seed"];
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
      throw ValidationError("\"seed\" must be a non-negative integer");
    }
    cfg.seed = seed.get<std::uint64_t>();
  }

  if (doc.contains("policy")) {
    const auto& pol = doc["policy"];
    if (pol == "zeros") {
      cfg.policy = Policy::zeros;
    } else if (pol == "random") {
      cfg.policy = Policy::random;
    } else {
      throw ValidationError("\"policy\" must be \"zeros\" or \"random\"");
    }
  }
  return cfg;
}

namespace detail {

inline std::string layer_label(const ChainConfig& cfg, std::size_t layers) {
  if (layers == 0) return "env '" + cfg.env.name + "'";
  return "wrapper #" + std::to_string(layers - 1) + " (" + cfg.wrappers[layers - 1].name + ")";
}

inline AnyEnv checked_layer(AnyEnv env, std::string label) {
  if (auto* e = std::get_if<EnvPtr>(&env)) return std::make_unique<CheckedEnv>(std::move(*e), std::move(label));
  return std::make_unique<CheckedParallelEnv>(std::move(std::get<ParallelEnvPtr>(env)), std::move(label));
}

}  // namespace detail

/// Builds the env and applies the wrappers innermost-first. Preconditions are
/// checked here, and a PreconditionFailed carries the failing wrapper index.
/// With `checked`, every layer verifies the values crossing it.
inline AnyEnv build_chain(const ChainConfig& cfg, bool checked = false) {
  AnyEnv env = make_reference_env(cfg.env.name, cfg.env.params);
  if (checked) env = detail::checked_layer(std::move(env), detail::layer_label(cfg, 0));
  for (std::size_t i = 0; i < cfg.wrappers.size(); ++i) {
    try {
      env = apply_wrapper(cfg.wrappers[i], std::move(env));
    } catch (const PreconditionFailed& e) {
      throw PreconditionFailed("wrapper #" + std::to_string(i) + " (" + cfg.wrappers[i].name + "): " + e.what(),
                               e.agent(), i);
    }
    if (checked) env = detail::checked_layer(std::move(env), detail::layer_label(cfg, i + 1));
  }
  return env;
}

/// Action drawn from `space` by the named policy. For random Box actions,
/// infinite bounds are replaced by a finite window 8 wide (or [-4, 4] when
/// both are infinite).
inline Action sample_action(const Space& space, Policy policy, Rng& rng) {
  if (const auto* d = std::get_if<Discrete>(&space)) {
    if (policy == Policy::zeros) return std::int64_t{0};
    return static_cast<std::int64_t>(rng.next_int(0, d->n() - 1));
  }
  const Box& box = std::get<Box>(space);
  Tensor out(box.dtype(), box.shape());
  if (policy == Policy::zeros) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double lo = box.low().get(i);
    double hi = box.high().get(i);
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      lo = -4.0;
      hi = 4.0;
    } else if (!std::isfinite(lo)) {
      lo = hi - 8.0;
    } else if (!std::isfinite(hi)) {
      hi = lo + 8.0;
    }
    if (is_floating(box.dtype())) {
      out.set(i, lo + (hi - lo) * rng.next_uniform());
    } else {
      out.set(i, static_cast<double>(rng.next_int(static_cast<std::int64_t>(std::ceil(lo)),
                                                  static_cast<std::int64_t>(std::floor(hi)))));
    }
  }
  return out;
}

/// Stream id for the benchmark's action policy, kept apart from wrapper streams.
inline constexpr std::uint64_t kPolicyStream = 0x706f6c6963790000ULL;

namespace detail {

struct RunTally {
  Fnv1a hash;
  double reward_sum = 0.0;
};

inline void run_single(Env& env, const ChainConfig& cfg, Rng& rng, RunTally& tally) {
  bool need_reset = false;
  tally.hash.add(env.reset(cfg.seed));
  for (std::uint64_t s = 0; s < cfg.steps; ++s) {
    if (need_reset) tally.hash.add(env.reset());
    StepResult r = env.step(sample_action(env.action_space(), cfg.policy, rng));
    tally.hash.add(r.observation);
    tally.reward_sum += r.reward;
    need_reset = r.done;
  }
}

inline void hash_in_agent_order(const ParallelEnv& env, const AgentMap<Tensor>& obs, Fnv1a& hash) {
  for (const AgentId& id : env.possible_agents()) {
    if (auto it = obs.find(id); it != obs.end()) hash.add(it->second);
  }
}

inline void run_parallel(ParallelEnv& env, const ChainConfig& cfg, Rng& rng, RunTally& tally) {
  hash_in_agent_order(env, env.reset(cfg.seed), tally.hash);
  for (std::uint64_t s = 0; s < cfg.steps; ++s) {
    if (env.agents().empty()) hash_in_agent_order(env, env.reset(), tally.hash);
    AgentMap<Action> actions;
    for (const AgentId& id : env.agents()) actions.emplace(id, sample_action(env.action_space(id), cfg.policy, rng));
    AgentMap<StepResult> results = env.step(actions);
    for (const AgentId& id : env.possible_agents()) {
      if (auto it = results.find(id); it != results.end()) {
        tally.hash.add(it->second.observation);
        tally.reward_sum += it->second.reward;
      }
    }
  }
}

}  // namespace detail

/// Runs exactly cfg.steps steps, resetting whenever an episode ends.
///
/// The first reset receives cfg.seed; later resets receive none. The checksum
/// covers every emitted observation, reset observations included; for
/// parallel envs each step's observations are hashed in agent order.
inline RunReport run_benchmark(const ChainConfig& cfg, bool checked = false) {
  AnyEnv env = build_chain(cfg, checked);
  Rng rng(cfg.seed, kPolicyStream);
  detail::RunTally tally;
  const auto start = std::chrono::steady_clock::now();
  if (auto* e = std::get_if<EnvPtr>(&env)) {
    detail::run_single(**e, cfg, rng, tally);
  } else {
    detail::run_parallel(*std::get<ParallelEnvPtr>(env), cfg, rng, tally);
  }
  const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;

  RunReport report;
  report.total_steps = cfg.steps;
  report.wall_seconds = wall.count();
  const double secs = std::max(report.wall_seconds, 1e-9);
  report.steps_per_second = static_cast<double>(cfg.steps) / secs;
  report.obs_checksum = tally.hash.value();
  report.reward_sum = tally.reward_sum;
  return report;
}

inline std::string checksum_hex(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016" PRIx64, v);
  return buf;
}

/// One-line JSON rendering of a report.
inline std::string to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["total_steps"] = r.total_steps;
  j["wall_seconds"] = r.wall_seconds;
  j["steps_per_second"] = r.steps_per_second;
  j["obs_checksum"] = checksum_hex(r.obs_checksum);
  j["reward_sum"] = r.reward_sum;
  return j.dump();
}

}  // namespace microwrap
