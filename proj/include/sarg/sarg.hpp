#pragma once

// Umbrella header for the core pipeline. Remote HTTP providers live in
// sarg/remote.hpp (and sarg/factory.hpp) and are opt-in to keep builds that
// only need the offline pipeline free of the HTTP dependency.

#include "sarg/assets.hpp"
#include "sarg/clock.hpp"
#include "sarg/compile.hpp"
#include "sarg/error.hpp"
#include "sarg/eval.hpp"
#include "sarg/extraction.hpp"
#include "sarg/graph.hpp"
#include "sarg/providers.hpp"
#include "sarg/query_analysis.hpp"
#include "sarg/run_config.hpp"
#include "sarg/text.hpp"
#include "sarg/traversal.hpp"
#include "sarg/util.hpp"
