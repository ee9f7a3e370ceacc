#pragma once

// Umbrella header.

#include "microwrap/action_wrappers.hpp"
#include "microwrap/bench.hpp"
#include "microwrap/env.hpp"
#include "microwrap/errors.hpp"
#include "microwrap/lambda_wrappers.hpp"
#include "microwrap/multiagent_wrappers.hpp"
#include "microwrap/obs_wrappers.hpp"
#include "microwrap/params.hpp"
#include "microwrap/reference_envs.hpp"
#include "microwrap/registry.hpp"
#include "microwrap/reward_wrappers.hpp"
#include "microwrap/rng.hpp"
#include "microwrap/space.hpp"
#include "microwrap/tensor.hpp"
