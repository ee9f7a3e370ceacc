#include <gtest/gtest.h>

#include <deque>

#include "microwrap/microwrap.hpp"
#include "test_support.hpp"

using namespace microwrap;
using namespace microwrap::testing;

namespace {

Tensor u8_image(Shape shape, std::vector<std::uint8_t> v) { return Tensor(std::move(shape), std::move(v)); }

/// Env emitting a fixed u8 image every step.
EnvPtr still_image(Tensor img, std::int64_t horizon = 5) {
  Space space = Box::uniform(Dtype::u8, img.shape(), 0, 255);
  return std::make_unique<ScriptedEnv>(
      space, Discrete(2), [img](std::int64_t) { return img; }, [](std::int64_t) { return 1.0; }, horizon);
}

Action noop(std::size_t) { return std::int64_t{0}; }

}  // namespace

// color_reduction ----------------------------------------------------------

TEST(ColorReduction, LumaOfMixedPixel) {
  EXPECT_EQ(kernels::luma(100, 50, 200), 82);  // 29.9 + 29.35 + 22.8 = 82.05
  EnvPtr env = color_reduction(still_image(u8_image({1, 1, 3}, {100, 50, 200})));
  EXPECT_EQ(env->reset().get(0), 82.0);
}

TEST(ColorReduction, GreyIsFixedPoint) {
  for (int v = 0; v < 256; ++v) {
    const auto b = static_cast<std::uint8_t>(v);
    ASSERT_EQ(kernels::luma(b, b, b), b);
  }
  EnvPtr env = color_reduction(still_image(u8_image({1, 1, 3}, {7, 7, 7})));
  EXPECT_EQ(env->reset().get(0), 7.0);
}

TEST(ColorReduction, ChannelSelect) {
  const Tensor px = u8_image({1, 1, 3}, {100, 50, 200});
  EXPECT_EQ(color_reduction(still_image(px), ColorMode::red)->reset().get(0), 100.0);
  EXPECT_EQ(color_reduction(still_image(px), ColorMode::green)->reset().get(0), 50.0);
  EXPECT_EQ(color_reduction(still_image(px), ColorMode::blue)->reset().get(0), 200.0);
}

TEST(ColorReduction, SpaceIsHWu8) {
  EnvPtr env = color_reduction(pixel(6, 5));
  const Box& box = std::get<Box>(env->observation_space());
  EXPECT_EQ(box.shape(), (Shape{6, 5}));
  EXPECT_EQ(box.dtype(), Dtype::u8);
}

TEST(ColorReduction, RejectsNonImageSpaces) {
  EXPECT_THROW(color_reduction(counter()), PreconditionFailed);
  EXPECT_THROW(color_reduction(still_image(u8_image({2, 2}, {1, 2, 3, 4}))), PreconditionFailed);
  EXPECT_THROW(color_reduction(dtype_cast(pixel(), Dtype::f32)), PreconditionFailed);
  EXPECT_THROW(parse_color_mode("grey"), InvalidParam);
}

// resize --------------------------------------------------------------------

TEST(Resize, NearestRampPicksPixelCentres) {
  std::vector<std::uint8_t> ramp(16);
  for (std::size_t i = 0; i < 16; ++i) ramp[i] = static_cast<std::uint8_t>(i);
  EnvPtr env = resize(still_image(u8_image({4, 4}, ramp)), 2, 2, Interp::nearest);
  EXPECT_EQ(env->reset(), u8_image({2, 2}, {5, 7, 13, 15}));
}

TEST(Resize, BilinearColumnUpsample) {
  EnvPtr env = resize(still_image(u8_image({2, 1}, {0, 255})), 4, 1, Interp::bilinear);
  EXPECT_EQ(env->reset(), u8_image({4, 1}, {0, 64, 191, 255}));
}

TEST(Resize, SameSizeNearestIsIdentity) {
  auto base = rollout(*pixel(6, 5), 20, noop);
  auto wrapped = rollout(*resize(pixel(6, 5), 6, 5), 20, noop);
  EXPECT_TRUE(bit_equal(base, wrapped));
}

TEST(Resize, KeepsChannelsAndDtype) {
  EnvPtr env = resize(pixel(6, 5), 3, 7, Interp::bilinear);
  const Box& box = std::get<Box>(env->observation_space());
  EXPECT_EQ(box.shape(), (Shape{3, 7, 3}));
  EXPECT_EQ(box.dtype(), Dtype::u8);
  EXPECT_EQ(env->reset().shape(), (Shape{3, 7, 3}));
}

TEST(Resize, F32Bilinear) {
  const Box space = Box::uniform(Dtype::f32, {1, 2}, 0, 10);
  EnvPtr base = std::make_unique<ScriptedEnv>(
      space, Discrete(1), [](std::int64_t) { return Tensor(Shape{1, 2}, std::vector<float>{0.0f, 1.0f}); },
      [](std::int64_t) { return 0.0; }, 3);
  EnvPtr env = resize(std::move(base), 1, 4, Interp::bilinear);
  EXPECT_EQ(env->reset(), Tensor(Shape{1, 4}, std::vector<float>{0.0f, 0.25f, 0.75f, 1.0f}));
}

TEST(Resize, Errors) {
  EXPECT_THROW(resize(pixel(), 0, 4), InvalidParam);
  EXPECT_THROW(resize(pixel(), 4, -1), InvalidParam);
  EXPECT_THROW(resize(counter(), 2, 2), PreconditionFailed);
  EXPECT_THROW(resize(dtype_cast(pixel(), Dtype::i32), 2, 2), PreconditionFailed);
}

// dtype ---------------------------------------------------------------------

TEST(DtypeCast, ExamplesAndSpace) {
  EnvPtr env = dtype_cast(still_image(u8_image({1, 1}, {255})), Dtype::f32);
  const Tensor o = env->reset();
  EXPECT_EQ(o.dtype(), Dtype::f32);
  EXPECT_EQ(o.values<float>()[0], 255.0f);
  EXPECT_EQ(std::get<Box>(env->observation_space()).high().get(0), 255.0);

  EnvPtr sat = dtype_cast(sequence_env({{300.0f, -0.9f}}, 3), Dtype::u8);
  EXPECT_EQ(sat->reset(), Tensor::vector(std::vector<std::uint8_t>{255, 0}));

  EnvPtr trunc = dtype_cast(sequence_env({{-0.9f}}, 3), Dtype::i32);
  EXPECT_EQ(trunc->reset(), Tensor::vector(std::vector<std::int32_t>{0}));
}

TEST(DtypeCast, SaturatedBoundsStillContainOutput) {
  EnvPtr env = dtype_cast(sequence_env({{-1000.0f, 1000.0f}}, 3), Dtype::u8);
  EXPECT_TRUE(space_contains(env->observation_space(), env->reset()));
}

TEST(DtypeCast, RejectsDiscrete) {
  EnvPtr disc = std::make_unique<ScriptedEnv>(
      Discrete(3), Discrete(1), [](std::int64_t) { return Tensor::vector(std::vector<std::int32_t>{0}); },
      [](std::int64_t) { return 0.0; }, 3);
  EXPECT_THROW(dtype_cast(std::move(disc), Dtype::f32), PreconditionFailed);
}

// flatten / reshape ---------------------------------------------------------

TEST(Flatten, RowMajor) {
  EnvPtr env = flatten(still_image(u8_image({2, 2}, {1, 2, 3, 4})));
  EXPECT_EQ(env->reset(), Tensor::vector(std::vector<std::uint8_t>{1, 2, 3, 4}));
}

TEST(Flatten, OneDimensionalUnchanged) {
  EXPECT_TRUE(bit_equal(rollout(*counter(), 15, [](std::size_t) { return zero_box_action(); }),
                        rollout(*flatten(counter()), 15, [](std::size_t) { return zero_box_action(); })));
}

TEST(Flatten, ShapeIsProduct) {
  EnvPtr env = flatten(still_image(Tensor(Dtype::u8, {2, 3, 4})));
  EXPECT_EQ(std::get<Box>(env->observation_space()).shape(), (Shape{24}));
}

TEST(Reshape, Examples) {
  EnvPtr env = reshape(sequence_env({{1, 2, 3, 4}}, 3), {2, 2});
  EXPECT_EQ(env->reset(), Tensor(Shape{2, 2}, std::vector<float>{1, 2, 3, 4}));
  EXPECT_THROW(reshape(sequence_env({{1, 2, 3, 4}}, 3), {3}), ShapeMismatch);
  EXPECT_THROW(reshape(sequence_env({{1, 2, 3, 4}}, 3), {0, 4}), InvalidParam);
}

TEST(Reshape, SameShapeIsIdentity) {
  EXPECT_TRUE(bit_equal(rollout(*pixel(), 12, noop), rollout(*reshape(pixel(), {6, 5, 3}), 12, noop)));
}

TEST(Reshape, FlattenAfterReshapeEqualsFlatten) {
  for (Shape s : {Shape{90}, Shape{30, 3}, Shape{3, 5, 6}, Shape{2, 3, 5, 3}, Shape{1, 90, 1}}) {
    auto a = rollout(*flatten(reshape(pixel(6, 5), s)), 12, noop);
    auto b = rollout(*flatten(pixel(6, 5)), 12, noop);
    EXPECT_TRUE(bit_equal(a, b)) << shape_str(s);
  }
}

// normalize_obs -------------------------------------------------------------

TEST(NormalizeObs, EndpointsAndInterior) {
  EnvPtr env = normalize_obs(still_image(u8_image({1, 3}, {0, 255, 51})));
  const Tensor o = env->reset();
  EXPECT_EQ(o.dtype(), Dtype::f32);
  EXPECT_EQ(o.values<float>()[0], 0.0f);
  EXPECT_EQ(o.values<float>()[1], 1.0f);
  EXPECT_NEAR(o.values<float>()[2], 0.2, 1e-7);
}

TEST(NormalizeObs, MidpointToMidpoint) {
  EnvPtr env = normalize_obs(sequence_env({{5}}, 3, 0, 10), -1.0, 1.0);
  EXPECT_EQ(env->reset().values<float>()[0], 0.0f);
}

TEST(NormalizeObs, BoundsMapExactlyToOutputRange) {
  Tensor low = Tensor::vector(std::vector<float>{-3.0f, 0.0f, 2.5f});
  Tensor high = Tensor::vector(std::vector<float>{7.0f, 1e-3f, 1000.0f});
  const Space space = Box(low, high);
  NormalizeObs n(space, Discrete(1), -2.0, 5.0);
  EXPECT_EQ(n.apply(low), Tensor::full(Dtype::f32, {3}, -2.0));
  EXPECT_EQ(n.apply(high), Tensor::full(Dtype::f32, {3}, 5.0));
  EXPECT_EQ(n.observation_space(), Space(Box::uniform(Dtype::f32, {3}, -2.0, 5.0)));
}

TEST(NormalizeObs, Preconditions) {
  EXPECT_THROW(normalize_obs(sequence_env({{0}}, 3, 1, 1)), PreconditionFailed);
  EXPECT_THROW(normalize_obs(dtype_cast(sequence_env({{0}}, 3), Dtype::f32), 1.0, 1.0), InvalidParam);
  const Box unbounded = Box::uniform(Dtype::f32, {1}, 0.0, std::numeric_limits<double>::infinity());
  EnvPtr inf_env = std::make_unique<ScriptedEnv>(
      unbounded, Discrete(1), [](std::int64_t) { return Tensor::vector(std::vector<float>{0}); },
      [](std::int64_t) { return 0.0; }, 3);
  EXPECT_THROW(normalize_obs(std::move(inf_env)), PreconditionFailed);
}

// frame_stack ---------------------------------------------------------------

TEST(FrameStack, ZeroFillFifo) {
  EnvPtr env = frame_stack(sequence_env({{5}, {6}, {7}}, 5), 3);
  EXPECT_EQ(env->reset(), Tensor::vector(std::vector<float>{0, 0, 5}));
  EXPECT_EQ(env->step(std::int64_t{0}).observation, Tensor::vector(std::vector<float>{0, 5, 6}));
  EXPECT_EQ(env->step(std::int64_t{0}).observation, Tensor::vector(std::vector<float>{5, 6, 7}));
}

TEST(FrameStack, RepeatFirstFill) {
  EnvPtr env = frame_stack(sequence_env({{5}, {6}}, 5), 3, StackFill::repeat_first);
  EXPECT_EQ(env->reset(), Tensor::vector(std::vector<float>{5, 5, 5}));
  EXPECT_EQ(env->step(std::int64_t{0}).observation, Tensor::vector(std::vector<float>{5, 5, 6}));
}

TEST(FrameStack, SingleFrameIsIdentity) {
  auto policy = [](std::size_t) { return zero_box_action(); };
  EXPECT_TRUE(bit_equal(rollout(*counter(7, 3), 20, policy), rollout(*frame_stack(counter(7, 3), 1), 20, policy)));
}

TEST(FrameStack, Rank2NewestInLastSlice) {
  EnvPtr env = frame_stack(color_reduction(pixel(2, 2), ColorMode::green), 2);
  EXPECT_EQ(std::get<Box>(env->observation_space()).shape(), (Shape{2, 2, 2}));
  env->reset();
  const Tensor o = env->step(std::int64_t{0}).observation;  // green at t is (r*W + c + t) mod 256
  for (std::size_t p = 0; p < 4; ++p) {
    EXPECT_EQ(o.get(p * 2 + 0), double(p)) << p;
    EXPECT_EQ(o.get(p * 2 + 1), double(p + 1)) << p;
  }
}

TEST(FrameStack, Rank3ChannelConcatOldestFirst) {
  EnvPtr env = frame_stack(pixel(1, 1), 2);
  EXPECT_EQ(std::get<Box>(env->observation_space()).shape(), (Shape{1, 1, 6}));
  env->reset();
  env->step(std::int64_t{0});
  // t=1 frame is (0,1,2), t=2 frame is (0,2,4).
  EXPECT_EQ(env->step(std::int64_t{0}).observation, u8_image({1, 1, 6}, {0, 1, 2, 0, 2, 4}));
}

TEST(FrameStack, ZeroFillWidensBoundsToContainZero) {
  EnvPtr env = frame_stack(sequence_env({{5}}, 3, 2, 9), 2);
  const Box& box = std::get<Box>(env->observation_space());
  EXPECT_EQ(box.low().get(0), 0.0);
  EXPECT_EQ(box.low().get(1), 0.0);
  EXPECT_TRUE(space_contains(box, env->reset()));
  EnvPtr rep = frame_stack(sequence_env({{5}}, 3, 2, 9), 2, StackFill::repeat_first);
  EXPECT_EQ(std::get<Box>(rep->observation_space()).low().get(0), 2.0);
}

TEST(FrameStack, MatchesNaiveQueue) {
  // Reference: rebuild the stacked vector from a plain list of past frames.
  Rng rng(11);
  std::vector<std::vector<float>> frames;
  for (int i = 0; i < 200; ++i) {
    frames.push_back({float(rng.next_int(-50, 50)), float(rng.next_int(-50, 50))});
  }
  for (StackFill fill : {StackFill::zero, StackFill::repeat_first}) {
    EnvPtr env = frame_stack(sequence_env(frames, 1000), 4, fill);
    std::vector<std::vector<float>> history;
    auto expect = [&] {
      std::vector<float> out;
      for (int k = 3; k >= 0; --k) {
        const int idx = static_cast<int>(history.size()) - 1 - k;
        const std::vector<float> frame =
            idx >= 0 ? history[static_cast<std::size_t>(idx)]
                     : (fill == StackFill::zero ? std::vector<float>{0, 0} : history.front());
        out.insert(out.end(), frame.begin(), frame.end());
      }
      return Tensor::vector(out);
    };
    history.push_back(frames[0]);
    ASSERT_EQ(env->reset(), expect());
    for (std::size_t t = 1; t < frames.size(); ++t) {
      history.push_back(frames[t]);
      ASSERT_EQ(env->step(std::int64_t{0}).observation, expect()) << t;
    }
  }
}

TEST(FrameStack, Errors) {
  EXPECT_THROW(frame_stack(counter(), 0), InvalidParam);
  EXPECT_THROW(frame_stack(reshape(counter(10, 16), {2, 2, 2, 2}), 2), PreconditionFailed);
  EXPECT_THROW(parse_stack_fill("repeat_first"), InvalidParam);
}

TEST(FrameStack, ResetClearsHistory) {
  EnvPtr env = frame_stack(counter(3, 1), 2);
  env->reset();
  env->step(zero_box_action());
  env->step(zero_box_action());
  EXPECT_EQ(env->reset(), Tensor::vector(std::vector<float>{0, 0}));
}

// frame_skip ----------------------------------------------------------------

TEST(FrameSkip, SumsConstantRewards) {
  EnvPtr env = frame_skip(counter(100, 1), 4);
  env->reset();
  const StepResult r = env->step(zero_box_action());
  EXPECT_EQ(r.reward, 4.0);
  EXPECT_EQ(r.observation.get(0), 4.0);
}

TEST(FrameSkip, EarlyTerminationTrace) {
  EnvPtr env = frame_skip(counter(10, 1), 4);
  env->reset();
  const StepResult a = env->step(zero_box_action());
  const StepResult b = env->step(zero_box_action());
  const StepResult c = env->step(zero_box_action());
  EXPECT_EQ(a.reward, 4.0);
  EXPECT_FALSE(a.done);
  EXPECT_EQ(b.reward, 4.0);
  EXPECT_FALSE(b.done);
  EXPECT_EQ(c.reward, 2.0);
  EXPECT_TRUE(c.done);
  EXPECT_EQ(c.observation.get(0), 10.0);
}

TEST(FrameSkip, UnitSkipIsIdentity) {
  auto policy = [](std::size_t) { return zero_box_action(); };
  const auto base = rollout(*counter(7), 30, policy);
  EXPECT_TRUE(bit_equal(base, rollout(*frame_skip(counter(7), 1), 30, policy)));
  EXPECT_TRUE(bit_equal(base, rollout(*frame_skip(counter(7), SkipRange{1, 1}), 30, policy)));
}

TEST(FrameSkip, RangeDrawsWithinBoundsAndIsSeeded) {
  auto skips = [](std::uint64_t seed) {
    EnvPtr env = frame_skip(counter(1000000, 1), SkipRange{2, 5}, seed);
    env->reset(3);
    std::vector<double> out;
    for (int i = 0; i < 400; ++i) out.push_back(env->step(zero_box_action()).reward);
    return out;
  };
  const auto a = skips(1);
  EXPECT_EQ(a, skips(1));
  EXPECT_NE(a, skips(2));
  std::vector<int> seen(6);
  for (double k : a) {
    ASSERT_GE(k, 2.0);
    ASSERT_LE(k, 5.0);
    ++seen[static_cast<std::size_t>(k)];
  }
  for (int k = 2; k <= 5; ++k) EXPECT_GT(seen[static_cast<std::size_t>(k)], 50);
}

TEST(FrameSkip, ResetSeedRestartsStream) {
  EnvPtr env = frame_skip(counter(1000000, 1), SkipRange{1, 9}, 4);
  auto draw = [&] {
    env->reset(77);
    std::vector<double> out;
    for (int i = 0; i < 20; ++i) out.push_back(env->step(zero_box_action()).reward);
    return out;
  };
  EXPECT_EQ(draw(), draw());
}

TEST(FrameSkip, Errors) {
  EXPECT_THROW(frame_skip(counter(), 0), InvalidParam);
  EXPECT_THROW(frame_skip(counter(), SkipRange{3, 2}), InvalidParam);
  EXPECT_THROW(frame_skip(counter(), SkipRange{0, 2}), InvalidParam);
}

// delay ---------------------------------------------------------------------

TEST(Delay, ZeroIsIdentity) {
  EXPECT_TRUE(bit_equal(rollout(*pixel(), 25, noop), rollout(*delay_observations(pixel(), 0), 25, noop)));
}

TEST(Delay, WarmupZerosThenShifted) {
  EnvPtr env = delay_observations(sequence_env({{10}, {11}, {12}, {13}}, 3), 2);
  EXPECT_EQ(env->reset(), Tensor::vector(std::vector<float>{0}));
  auto r1 = env->step(std::int64_t{0});
  auto r2 = env->step(std::int64_t{0});
  auto r3 = env->step(std::int64_t{0});
  EXPECT_EQ(r1.observation, Tensor::vector(std::vector<float>{0}));
  EXPECT_EQ(r2.observation, Tensor::vector(std::vector<float>{10}));
  EXPECT_EQ(r3.observation, Tensor::vector(std::vector<float>{11}));
  EXPECT_EQ(r1.reward, 1.0);
  EXPECT_FALSE(r2.done);
  EXPECT_TRUE(r3.done);  // done is not delayed
}

TEST(Delay, ResetFlushesQueue) {
  EnvPtr env = delay_observations(counter(3, 1), 1);
  env->reset();
  env->step(zero_box_action());
  env->step(zero_box_action());
  EXPECT_EQ(env->reset(), Tensor::vector(std::vector<float>{0}));
  EXPECT_EQ(env->step(zero_box_action()).observation, Tensor::vector(std::vector<float>{0}));
}

TEST(Delay, Errors) {
  EXPECT_THROW(delay_observations(counter(), -1), InvalidParam);
}
