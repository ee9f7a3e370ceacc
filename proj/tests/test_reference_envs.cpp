#include <gtest/gtest.h>

#include "microwrap/microwrap.hpp"
#include "test_support.hpp"

using namespace microwrap;
using namespace microwrap::testing;

TEST(CounterEnv, Trajectory) {
  EnvPtr env = counter(3, 2);
  EXPECT_EQ(env->reset(), Tensor::vector(std::vector<float>{0, 0}));
  for (float t = 1; t <= 3; ++t) {
    const StepResult r = env->step(zero_box_action());
    EXPECT_EQ(r.observation, Tensor::vector(std::vector<float>{t, t}));
    EXPECT_EQ(r.reward, 1.0);
    EXPECT_EQ(r.done, t == 3);
  }
}

TEST(CounterEnv, RejectsOutOfSpaceActions) {
  EnvPtr env = counter();
  env->reset();
  EXPECT_THROW(env->step(Tensor::vector(std::vector<float>{1.5f})), ContainmentViolation);
  EXPECT_THROW(env->step(std::int64_t{0}), ContainmentViolation);
}

TEST(GradientPixelEnv, Formula) {
  EnvPtr env = pixel(2, 2, 5);
  const Tensor o = env->reset();
  EXPECT_EQ(o.at({1, 1, 0}), 3.0);
  const Tensor o3 = [&] {
    env->step(std::int64_t{0});
    env->step(std::int64_t{1});
    return env->step(std::int64_t{3}).observation;
  }();
  EXPECT_EQ(o3.at({1, 0, 2}), 8.0);  // 2 + 3*2
  EXPECT_EQ(o3.at({0, 1, 1}), 4.0);  // 1 + 3
}

TEST(GradientPixelEnv, WrapsModulo256) {
  EnvPtr env = pixel(20, 20, 300);
  env->reset();
  Tensor o;
  for (int i = 0; i < 200; ++i) o = env->step(std::int64_t{0}).observation;
  EXPECT_EQ(o.at({19, 19, 2}), double((399 + 200 * 2) % 256));
}

TEST(MultiCounterEnv, EchoesActions) {
  ParallelEnvPtr env = std::make_unique<MultiCounterEnv>(MultiCounterEnv::parse_layout("a_0:2:3,b_0:1:4"), 5);
  const auto obs = env->reset();
  EXPECT_EQ(obs.at("a_0"), Tensor::vector(std::vector<float>{0, 0}));
  auto r = env->step({{"a_0", std::int64_t{2}}, {"b_0", std::int64_t{3}}});
  EXPECT_EQ(r.at("a_0").reward, 2.0);
  EXPECT_EQ(r.at("b_0").reward, 3.0);
  EXPECT_EQ(r.at("b_0").observation, Tensor::vector(std::vector<float>{1}));
}

TEST(MultiCounterEnv, LayoutParsing) {
  const auto specs = MultiCounterEnv::parse_layout(MultiCounterEnv::kDefaultLayout);
  ASSERT_EQ(specs.size(), 3u);
  EXPECT_EQ(specs[2].id, "evader_0");
  EXPECT_EQ(specs[2].obs_dim, 5);
  EXPECT_EQ(specs[2].action_space, Space(Discrete(5)));
  EXPECT_EQ(MultiCounterEnv::parse_layout("x_0:1:2:7")[0].horizon, 7);
  EXPECT_THROW(MultiCounterEnv::parse_layout("x_0:1"), InvalidParam);
  EXPECT_THROW(MultiCounterEnv::parse_layout("x_0:a:2"), InvalidParam);
  EXPECT_THROW(MultiCounterEnv(MultiCounterEnv::parse_layout("x_0:1:2,x_0:1:2"), 3), InvalidParam);
}

TEST(MakeReferenceEnv, NamesAndParams) {
  AnyEnv c = make_reference_env("counter", {{"T", std::int64_t{3}}, {"d", std::int64_t{2}}});
  ASSERT_TRUE(std::holds_alternative<EnvPtr>(c));
  EXPECT_EQ(std::get<Box>(std::get<EnvPtr>(c)->observation_space()).shape(), (Shape{2}));

  AnyEnv p = make_reference_env("pixel", {});
  EXPECT_EQ(std::get<Box>(std::get<EnvPtr>(p)->observation_space()).shape(), (Shape{84, 84, 3}));

  AnyEnv m = make_reference_env("multi_counter", {});
  ASSERT_TRUE(std::holds_alternative<ParallelEnvPtr>(m));
  EXPECT_EQ(std::get<ParallelEnvPtr>(m)->possible_agents().size(), 3u);

  EXPECT_THROW(make_reference_env("atari", {}), UnknownEnv);
  EXPECT_THROW(make_reference_env("counter", {{"T", std::int64_t{0}}}), InvalidParam);
  EXPECT_THROW(make_reference_env("counter", {{"H", std::int64_t{4}}}), InvalidParam);
  EXPECT_THROW(make_reference_env("pixel", {{"W", std::string("wide")}}), InvalidParam);
}

TEST(ReferenceEnvs, SeedIndependentAndContained) {
  auto policy = [](std::size_t s) -> Action { return static_cast<std::int64_t>(s % 4); };
  for (std::uint64_t seed : {0ULL, 1ULL, 12345ULL}) {
    EnvPtr a = pixel(4, 3, 7);
    EnvPtr b = pixel(4, 3, 7);
    const auto ta = rollout(*a, 40, policy, seed);
    EXPECT_TRUE(bit_equal(ta, rollout(*b, 40, policy, std::nullopt)));
    for (const Tensor& o : ta.observations) ASSERT_TRUE(space_contains(a->observation_space(), o));
  }
  EnvPtr c = counter(5, 3);
  const auto tc = rollout(*c, 40, [](std::size_t) { return zero_box_action(); }, 9);
  for (const Tensor& o : tc.observations) ASSERT_TRUE(space_contains(c->observation_space(), o));
}
