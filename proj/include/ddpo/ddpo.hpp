#pragma once

#include "ddpo/core.hpp"
#include "ddpo/rollout_log.hpp"
#include "ddpo/shaping.hpp"
#include "ddpo/policy.hpp"
#include "ddpo/optimizer.hpp"
#include "ddpo/env.hpp"
#include "ddpo/analytics.hpp"
#include "ddpo/config.hpp"
#include "ddpo/experiment.hpp"
#include "ddpo/compare.hpp"
#include "ddpo/lemmas.hpp"
