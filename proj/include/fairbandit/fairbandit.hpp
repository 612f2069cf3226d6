#pragma once

// Umbrella header for the core library (everything except the HTTP service).

#include "fairbandit/config.hpp"
#include "fairbandit/environment.hpp"
#include "fairbandit/error.hpp"
#include "fairbandit/experiment.hpp"
#include "fairbandit/export.hpp"
#include "fairbandit/fuzz.hpp"
#include "fairbandit/json_io.hpp"
#include "fairbandit/oracle.hpp"
#include "fairbandit/policy.hpp"
#include "fairbandit/rng.hpp"
#include "fairbandit/schedule.hpp"
#include "fairbandit/state.hpp"
