#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "microwrap/env.hpp"
#include "microwrap/errors.hpp"
#include "microwrap/space.hpp"
#include "microwrap/tensor.hpp"

namespace microwrap {

namespace detail {

/// Calls f(src_offset, dst_offset) for every index of `region`, which must fit
/// inside both shapes. Offsets are row-major in their own shapes.
template <class F>
void for_each_common(const Shape& region, const Shape& src, const Shape& dst, F&& f) {
  const std::size_t rank = region.size();
  std::vector<std::size_t> idx(rank, 0);
  const std::size_t total = shape_numel(region);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t so = 0;
    std::size_t d_o = 0;
    for (std::size_t k = 0; k < rank; ++k) {
      so = so * src[k] + idx[k];
      d_o = d_o * dst[k] + idx[k];
    }
    f(so, d_o);
    for (std::size_t k = rank; k-- > 0;) {
      if (++idx[k] < region[k]) break;
      idx[k] = 0;
    }
  }
}

}  // namespace detail

/// Zero-pads t on the high side of every dimension up to `target`.
inline Tensor pad_to(const Tensor& t, const Shape& target) {
  if (t.shape() == target) return t;
  Tensor out(t.dtype(), target);
  detail::for_each_common(t.shape(), t.shape(), target, [&](std::size_t s, std::size_t d) { out.set(d, t.get(s)); });
  return out;
}

/// Leading (origin-anchored) block of t with shape `target`.
inline Tensor crop_to(const Tensor& t, const Shape& target) {
  if (t.shape() == target) return t;
  Tensor out(t.dtype(), target);
  detail::for_each_common(target, t.shape(), target, [&](std::size_t s, std::size_t d) { out.set(d, t.get(s)); });
  return out;
}

/// Maps agents to one-hot indicator slots.
struct AgentTypeIndex {
  AgentMap<std::size_t> index;
  std::size_t num_indicators = 0;

  /// type_only=false: one slot per agent, in env order. type_only=true: agents
  /// sharing the id prefix before the last underscore share a slot, numbered
  /// by first appearance.
  static AgentTypeIndex build(const std::vector<AgentId>& agents, bool type_only) {
    AgentTypeIndex out;
    if (!type_only) {
      for (std::size_t i = 0; i < agents.size(); ++i) out.index[agents[i]] = i;
      out.num_indicators = agents.size();
      return out;
    }
    std::vector<std::string> types;
    for (const AgentId& id : agents) {
      const auto cut = id.rfind('_');
      if (cut == std::string::npos) {
        throw MalformedAgentId("agent id '" + id + "' has no underscore to split a type from");
      }
      const std::string type = id.substr(0, cut);
      auto it = std::find(types.begin(), types.end(), type);
      if (it == types.end()) it = types.insert(types.end(), type);
      out.index[id] = static_cast<std::size_t>(it - types.begin());
    }
    out.num_indicators = types.size();
    return out;
  }
};

/// Appends a one-hot agent (or agent type) indicator to every observation:
/// K extra elements for vectors, K extra channels for (H, W, C) images. The
/// hot value is 255 for u8 and 1 otherwise.
class AgentIndicator final : public ParallelWrapper {
 public:
  AgentIndicator(ParallelEnvPtr inner, bool type_only) : ParallelWrapper(std::move(inner)) {
    const auto& agents = inner_->possible_agents();
    if (agents.empty()) throw PreconditionFailed("agent_indicator needs at least one agent");
    const auto* first = std::get_if<Box>(&inner_->observation_space(agents.front()));
    for (const AgentId& id : agents) {
      const Space& s = inner_->observation_space(id);
      if (!first || !is_box(s) || !(std::get<Box>(s) == *first)) {
        throw PreconditionFailed("agent_indicator needs identical Box observation spaces; agent '" + id + "' has " +
                                     describe(s),
                                 id, std::nullopt);
      }
    }
    const std::size_t rank = first->shape().size();
    if (rank != 1 && rank != 3) {
      throw PreconditionFailed("agent_indicator needs rank 1 or rank 3 observations, got " + describe(*first));
    }
    types_ = AgentTypeIndex::build(agents, type_only);
    hot_ = first->dtype() == Dtype::u8 ? 255.0 : 1.0;
    const std::size_t k = types_.num_indicators;
    space_.emplace(Box(append(first->low(), k, std::nullopt), append(first->high(), k, std::nullopt, hot_)));
  }

  const Space& observation_space(const AgentId& a) const override {
    inner_->observation_space(a);  // validates the id
    return *space_;
  }

  AgentMap<Tensor> reset(std::optional<std::uint64_t> seed) override {
    AgentMap<Tensor> obs = inner_->reset(seed);
    for (auto& [id, o] : obs) o = indicate(id, o);
    return obs;
  }

  AgentMap<StepResult> step(const AgentMap<Action>& actions) override {
    AgentMap<StepResult> results = inner_->step(actions);
    for (auto& [id, r] : results) r.observation = indicate(id, r.observation);
    return results;
  }

  const AgentTypeIndex& types() const noexcept { return types_; }

 private:
  Tensor indicate(const AgentId& id, const Tensor& obs) const {
    return append(obs, types_.num_indicators, types_.index.at(id));
  }

  /// Appends k trailing elements (rank 1) or channels (rank 3). Slot `hot`
  /// gets hot_; the rest get `fill`.
  Tensor append(const Tensor& t, std::size_t k, std::optional<std::size_t> hot, double fill = 0.0) const {
    Shape shape = t.shape();
    const std::size_t c = shape.back();
    shape.back() += k;
    const std::size_t pixels = t.size() / c;
    Tensor out(t.dtype(), shape);
    out.visit([&](auto dst) {
      using T = typename decltype(dst)::value_type;
      auto src = t.values<T>();
      const T fill_v = saturate_cast<T>(fill);
      const T hot_v = saturate_cast<T>(hot_);
      for (std::size_t p = 0; p < pixels; ++p) {
        T* row = &dst[p * (c + k)];
        std::copy_n(&src[p * c], c, row);
        std::fill_n(row + c, k, fill_v);
        if (hot) row[c + *hot] = hot_v;
      }
    });
    return out;
  }

  AgentTypeIndex types_;
  double hot_ = 1.0;
  std::optional<Space> space_;
};

namespace detail {

/// Common padded Box over several Box spaces of equal rank and dtype: the
/// elementwise hull of every space zero-padded to the max shape.
inline Box padded_hull(const std::vector<const Box*>& boxes, const char* wrapper) {
  const Box& first = *boxes.front();
  Shape target = first.shape();
  for (const Box* b : boxes) {
    if (b->shape().size() != target.size() || b->dtype() != first.dtype()) {
      throw PreconditionFailed(std::string(wrapper) + " needs spaces of equal rank and dtype");
    }
    for (std::size_t k = 0; k < target.size(); ++k) target[k] = std::max(target[k], b->shape()[k]);
  }
  Tensor low = pad_to(first.low(), target);
  Tensor high = pad_to(first.high(), target);
  for (const Box* b : boxes) {
    const Tensor bl = pad_to(b->low(), target);
    const Tensor bh = pad_to(b->high(), target);
    for (std::size_t i = 0; i < low.size(); ++i) {
      low.set(i, std::min(low.get(i), bl.get(i)));
      high.set(i, std::max(high.get(i), bh.get(i)));
    }
  }
  return Box(std::move(low), std::move(high));
}

}  // namespace detail

/// Zero-pads every agent's observations to a common shape anchored at the
/// origin; all agents then share one observation space.
class PadObservations final : public ParallelWrapper {
 public:
  explicit PadObservations(ParallelEnvPtr inner) : ParallelWrapper(std::move(inner)) {
    std::vector<const Box*> boxes;
    for (const AgentId& id : inner_->possible_agents()) {
      const auto* box = std::get_if<Box>(&inner_->observation_space(id));
      if (!box) {
        throw PreconditionFailed("pad_observations needs Box observation spaces; agent '" + id + "' has " +
                                     describe(inner_->observation_space(id)),
                                 id, std::nullopt);
      }
      boxes.push_back(box);
    }
    if (boxes.empty()) throw PreconditionFailed("pad_observations needs at least one agent");
    space_.emplace(detail::padded_hull(boxes, "pad_observations"));
  }

  const Space& observation_space(const AgentId& a) const override {
    inner_->observation_space(a);
    return *space_;
  }

  AgentMap<Tensor> reset(std::optional<std::uint64_t> seed) override {
    AgentMap<Tensor> obs = inner_->reset(seed);
    for (auto& [id, o] : obs) o = pad_to(o, shape());
    return obs;
  }

  AgentMap<StepResult> step(const AgentMap<Action>& actions) override {
    AgentMap<StepResult> results = inner_->step(actions);
    for (auto& [id, r] : results) r.observation = pad_to(r.observation, shape());
    return results;
  }

 private:
  const Shape& shape() const { return std::get<Box>(*space_).shape(); }

  std::optional<Space> space_;
};

/// Gives every agent the same action space.
///
/// Discrete: every agent advertises Discrete(max n); an index outside an
/// agent's own range is forwarded as 0. Box: the padded hull of all action
/// boxes is advertised; the leading block of the submitted tensor is clamped
/// into the agent's own bounds and forwarded.
class PadActionSpace final : public ParallelWrapper {
 public:
  explicit PadActionSpace(ParallelEnvPtr inner) : ParallelWrapper(std::move(inner)) {
    const auto& agents = inner_->possible_agents();
    if (agents.empty()) throw PreconditionFailed("pad_action_space needs at least one agent");
    const bool discrete = is_discrete(inner_->action_space(agents.front()));
    std::int64_t n_max = 0;
    std::vector<const Box*> boxes;
    for (const AgentId& id : agents) {
      const Space& s = inner_->action_space(id);
      if (is_discrete(s) != discrete) {
        throw PreconditionFailed("pad_action_space needs action spaces of one kind; agent '" + id + "' has " +
                                     describe(s),
                                 id, std::nullopt);
      }
      if (discrete) {
        n_max = std::max(n_max, std::get<Discrete>(s).n());
      } else {
        boxes.push_back(&std::get<Box>(s));
      }
    }
    if (discrete) {
      space_.emplace(Discrete(n_max));
    } else {
      space_.emplace(detail::padded_hull(boxes, "pad_action_space"));
    }
  }

  const Space& action_space(const AgentId& a) const override {
    inner_->action_space(a);
    return *space_;
  }

  AgentMap<StepResult> step(const AgentMap<Action>& actions) override {
    AgentMap<Action> forwarded;
    for (const auto& [id, a] : actions) forwarded.emplace(id, forward(id, a));
    return inner_->step(forwarded);
  }

  /// The action agent `id` would receive for submitted action `a`.
  Action forward(const AgentId& id, const Action& a) const {
    const Space& own = inner_->action_space(id);
    if (const auto* d = std::get_if<Discrete>(&own)) {
      const auto* idx = std::get_if<std::int64_t>(&a);
      if (!idx) throw ShapeMismatch("pad_action_space expects a discrete action for agent '" + id + "'");
      return d->contains(*idx) ? *idx : std::int64_t{0};
    }
    const Box& box = std::get<Box>(own);
    const auto* t = std::get_if<Tensor>(&a);
    const Box& padded = std::get<Box>(*space_);
    if (!t || t->shape() != padded.shape()) {
      throw ShapeMismatch("pad_action_space expects a tensor of shape " + shape_str(padded.shape()) + " for agent '" +
                          id + "', got " + describe(a));
    }
    Tensor out = crop_to(*t, box.shape()).cast(box.dtype());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out.set(i, std::clamp(out.get(i), box.low().get(i), box.high().get(i)));
    }
    return out;
  }

 private:
  std::optional<Space> space_;
};

inline ParallelEnvPtr agent_indicator(ParallelEnvPtr env, bool type_only = false) {
  return std::make_unique<AgentIndicator>(std::move(env), type_only);
}

inline ParallelEnvPtr pad_observations(ParallelEnvPtr env) { return std::make_unique<PadObservations>(std::move(env)); }

inline ParallelEnvPtr pad_action_space(ParallelEnvPtr env) { return std::make_unique<PadActionSpace>(std::move(env)); }

}  // namespace microwrap
