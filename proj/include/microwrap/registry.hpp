#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "microwrap/action_wrappers.hpp"
#include "microwrap/env.hpp"
#include "microwrap/errors.hpp"
#include "microwrap/multiagent_wrappers.hpp"
#include "microwrap/obs_wrappers.hpp"
#include "microwrap/params.hpp"
#include "microwrap/reference_envs.hpp"
#include "microwrap/reward_wrappers.hpp"

namespace microwrap {

/// Serializable description of one wrapper: a registered name plus parameters.
struct WrapperSpec {
  std::string name;
  ParamMap params;
};

enum class ParamKind { integer, number, boolean, string, int_list, int_or_range };

struct ParamSchema {
  const char* name;
  ParamKind kind;
  bool required;
};

struct WrapperInfo {
  const char* name;
  std::vector<ParamSchema> params;
  bool multi_agent_only;
};

/// Every name accepted in a WrapperSpec, in documentation order.
inline const std::vector<WrapperInfo>& wrapper_registry() {
  using K = ParamKind;
  static const std::vector<WrapperInfo> registry = {
      {"color_reduction", {{"mode", K::string, false}}, false},
      {"resize", {{"out_h", K::integer, true}, {"out_w", K::integer, true}, {"interp", K::string, false}}, false},
      {"dtype", {{"target", K::string, true}}, false},
      {"flatten", {}, false},
      {"reshape", {{"shape", K::int_list, true}}, false},
      {"normalize_obs", {{"out_min", K::number, false}, {"out_max", K::number, false}}, false},
      {"frame_stack", {{"N", K::integer, true}, {"fill", K::string, false}}, false},
      {"frame_skip", {{"skip", K::int_or_range, true}, {"seed", K::integer, false}}, false},
      {"delay", {{"d", K::integer, true}}, false},
      {"clip_actions", {}, false},
      {"sticky_actions", {{"p", K::number, true}, {"seed", K::integer, false}}, false},
      {"clip_reward", {{"lower", K::number, false}, {"upper", K::number, false}}, false},
      {"agent_indicator", {{"type_only", K::boolean, false}}, true},
      {"pad_observations", {}, true},
      {"pad_action_space", {}, true},
  };
  return registry;
}

inline const WrapperInfo* find_wrapper(const std::string& name) {
  const auto& reg = wrapper_registry();
  auto it = std::find_if(reg.begin(), reg.end(), [&](const WrapperInfo& w) { return name == w.name; });
  return it == reg.end() ? nullptr : &*it;
}

namespace detail {

inline bool kind_matches(const ParamValue& v, ParamKind kind) {
  switch (kind) {
    case ParamKind::integer:
      return std::holds_alternative<std::int64_t>(v);
    case ParamKind::number:
      return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
    case ParamKind::boolean:
      return std::holds_alternative<bool>(v);
    case ParamKind::string:
      return std::holds_alternative<std::string>(v);
    case ParamKind::int_list:
      return std::holds_alternative<std::vector<std::int64_t>>(v);
    case ParamKind::int_or_range: {
      if (std::holds_alternative<std::int64_t>(v)) return true;
      const auto* l = std::get_if<std::vector<std::int64_t>>(&v);
      return l && l->size() == 2;
    }
  }
  return false;
}

inline const char* kind_name(ParamKind kind) {
  switch (kind) {
    case ParamKind::integer:
      return "an integer";
    case ParamKind::number:
      return "a number";
    case ParamKind::boolean:
      return "a boolean";
    case ParamKind::string:
      return "a string";
    case ParamKind::int_list:
      return "a list of integers";
    case ParamKind::int_or_range:
      return "an integer or a [lo, hi] pair";
  }
  return "?";
}

inline SkipRange skip_param(const ParamMap& p) {
  const ParamValue* v = params::find(p, "skip");
  if (!v) throw InvalidParam("missing required parameter 'skip'");
  if (const auto* i = std::get_if<std::int64_t>(v)) return {*i, *i};
  const auto* l = std::get_if<std::vector<std::int64_t>>(v);
  if (!l || l->size() != 2) throw InvalidParam("parameter 'skip' must be an integer or a [lo, hi] pair");
  return {(*l)[0], (*l)[1]};
}

inline std::uint64_t seed_param(const ParamMap& p) {
  const std::int64_t seed = params::get_int(p, "seed", 0);
  if (seed < 0) throw InvalidParam("parameter 'seed' must be non-negative");
  return static_cast<std::uint64_t>(seed);
}

inline Shape shape_param(const ParamMap& p) {
  Shape shape;
  for (std::int64_t d : params::get_int_list(p, "shape")) {
    if (d < 1) throw InvalidParam("parameter 'shape' needs positive extents");
    shape.push_back(static_cast<std::size_t>(d));
  }
  return shape;
}

/// Value-level checks that do not need an environment.
inline void check_values(const WrapperSpec& spec) {
  const ParamMap& p = spec.params;
  const std::string& n = spec.name;
  if (n == "color_reduction") {
    parse_color_mode(params::get_string(p, "mode", "full"));
  } else if (n == "resize") {
    if (params::get_int(p, "out_h") < 1 || params::get_int(p, "out_w") < 1) {
      throw InvalidParam("out_h and out_w must be >= 1");
    }
    parse_interp(params::get_string(p, "interp", "nearest"));
  } else if (n == "dtype") {
    parse_dtype(params::get_string(p, "target"));
  } else if (n == "reshape") {
    shape_param(p);
  } else if (n == "normalize_obs") {
    const double lo = params::get_number(p, "out_min", 0.0);
    const double hi = params::get_number(p, "out_max", 1.0);
    if (!(lo < hi)) throw InvalidParam("out_min must be < out_max");
  } else if (n == "frame_stack") {
    if (params::get_int(p, "N") < 1) throw InvalidParam("N must be >= 1");
    parse_stack_fill(params::get_string(p, "fill", "zero"));
  } else if (n == "frame_skip") {
    detail::check_skip(skip_param(p));
    seed_param(p);
  } else if (n == "delay") {
    if (params::get_int(p, "d") < 0) throw InvalidParam("d must be >= 0");
  } else if (n == "sticky_actions") {
    const double prob = params::get_number(p, "p");
    if (!(prob >= 0.0 && prob <= 1.0)) throw InvalidParam("p must lie in [0, 1]");
    seed_param(p);
  } else if (n == "clip_reward") {
    if (!(params::get_number(p, "lower", -1.0) <= params::get_number(p, "upper", 1.0))) {
      throw InvalidParam("lower must be <= upper");
    }
  }
}

}  // namespace detail

/// Checks the name, parameter names, kinds and values. Throws ValidationError.
inline void validate_spec(const WrapperSpec& spec) {
  const WrapperInfo* info = find_wrapper(spec.name);
  if (!info) throw ValidationError("unknown wrapper '" + spec.name + "'");
  for (const auto& [key, value] : spec.params) {
    auto it = std::find_if(info->params.begin(), info->params.end(), [&](const ParamSchema& s) { return key == s.name; });
    if (it == info->params.end()) {
      throw ValidationError("wrapper '" + spec.name + "': unknown parameter '" + key + "'");
    }
    if (!detail::kind_matches(value, it->kind)) {
      throw ValidationError("wrapper '" + spec.name + "': parameter '" + key + "' must be " +
                            detail::kind_name(it->kind));
    }
  }
  for (const ParamSchema& s : info->params) {
    if (s.required && !spec.params.count(s.name)) {
      throw ValidationError("wrapper '" + spec.name + "': missing required parameter '" + s.name + "'");
    }
  }
  try {
    detail::check_values(spec);
  } catch (const InvalidParam& e) {
    throw ValidationError("wrapper '" + spec.name + "': " + e.what());
  }
}

/// Transform factory for the per-value wrappers; nullopt for frame_skip and
/// the multi-agent-only wrappers.
inline std::optional<TransformFactory> transform_factory(const WrapperSpec& spec) {
  validate_spec(spec);
  const ParamMap p = spec.params;
  const std::string& n = spec.name;
  if (n == "color_reduction") {
    const ColorMode mode = parse_color_mode(params::get_string(p, "mode", "full"));
    return [mode](const Space& o, const Space& a, std::size_t) { return std::make_unique<ColorReduction>(o, a, mode); };
  }
  if (n == "resize") {
    const auto h = params::get_int(p, "out_h");
    const auto w = params::get_int(p, "out_w");
    const Interp interp = parse_interp(params::get_string(p, "interp", "nearest"));
    return [=](const Space& o, const Space& a, std::size_t) { return std::make_unique<Resize>(o, a, h, w, interp); };
  }
  if (n == "dtype") {
    const Dtype target = parse_dtype(params::get_string(p, "target"));
    return [=](const Space& o, const Space& a, std::size_t) { return std::make_unique<DtypeCast>(o, a, target); };
  }
  if (n == "flatten") {
    return [](const Space& o, const Space& a, std::size_t) { return make_flatten(o, a); };
  }
  if (n == "reshape") {
    const Shape shape = detail::shape_param(p);
    return [=](const Space& o, const Space& a, std::size_t) { return std::make_unique<Reshape>(o, a, shape); };
  }
  if (n == "normalize_obs") {
    const double lo = params::get_number(p, "out_min", 0.0);
    const double hi = params::get_number(p, "out_max", 1.0);
    return [=](const Space& o, const Space& a, std::size_t) { return std::make_unique<NormalizeObs>(o, a, lo, hi); };
  }
  if (n == "frame_stack") {
    const auto count = params::get_int(p, "N");
    const StackFill fill = parse_stack_fill(params::get_string(p, "fill", "zero"));
    return [=](const Space& o, const Space& a, std::size_t) { return std::make_unique<FrameStack>(o, a, count, fill); };
  }
  if (n == "delay") {
    const auto d = params::get_int(p, "d");
    return [=](const Space& o, const Space& a, std::size_t) { return std::make_unique<DelayObservations>(o, a, d); };
  }
  if (n == "clip_actions") {
    return [](const Space& o, const Space& a, std::size_t) { return std::make_unique<ClipActions>(o, a); };
  }
  if (n == "sticky_actions") {
    const double prob = params::get_number(p, "p");
    const std::uint64_t seed = detail::seed_param(p);
    // Lifted copies draw from independent streams: seed + agent index.
    return [=](const Space& o, const Space& a, std::size_t agent) {
      return std::make_unique<StickyActions>(o, a, prob, seed + agent);
    };
  }
  if (n == "clip_reward") {
    const double lo = params::get_number(p, "lower", -1.0);
    const double hi = params::get_number(p, "upper", 1.0);
    return [=](const Space& o, const Space& a, std::size_t) { return std::make_unique<ClipReward>(o, a, lo, hi); };
  }
  return std::nullopt;
}

/// Applies a single-agent wrapper independently to every agent. frame_skip
/// is applied jointly (one shared skip count per step).
inline ParallelEnvPtr lift_to_parallel(const WrapperSpec& spec, ParallelEnvPtr env) {
  if (spec.name == "frame_skip") {
    validate_spec(spec);
    return std::make_unique<ParallelFrameSkip>(std::move(env), detail::skip_param(spec.params),
                                               detail::seed_param(spec.params));
  }
  auto factory = transform_factory(spec);
  if (!factory) throw PreconditionFailed("wrapper '" + spec.name + "' is not a single-agent wrapper");
  return lift_to_parallel(*factory, std::move(env));
}

inline EnvPtr apply_wrapper(const WrapperSpec& spec, EnvPtr env) {
  if (spec.name == "frame_skip") {
    validate_spec(spec);
    return frame_skip(std::move(env), detail::skip_param(spec.params), detail::seed_param(spec.params));
  }
  auto factory = transform_factory(spec);
  if (!factory) throw PreconditionFailed("wrapper '" + spec.name + "' needs a multi-agent environment");
  return std::make_unique<TransformEnv>(std::move(env), *factory);
}

inline ParallelEnvPtr apply_wrapper(const WrapperSpec& spec, ParallelEnvPtr env) {
  validate_spec(spec);
  if (spec.name == "agent_indicator") {
    return agent_indicator(std::move(env), params::get_bool(spec.params, "type_only", false));
  }
  if (spec.name == "pad_observations") return pad_observations(std::move(env));
  if (spec.name == "pad_action_space") return pad_action_space(std::move(env));
  return lift_to_parallel(spec, std::move(env));
}

inline AnyEnv apply_wrapper(const WrapperSpec& spec, AnyEnv env) {
  return std::visit([&](auto&& e) -> AnyEnv { return apply_wrapper(spec, std::move(e)); }, std::move(env));
}

}  // namespace microwrap
