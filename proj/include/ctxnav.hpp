#pragma once

// Everything in one include.
#include "ctxnav/core/errors.hpp"
#include "ctxnav/core/geometry.hpp"
#include "ctxnav/core/json.hpp"
#include "ctxnav/core/rng.hpp"
#include "ctxnav/world/agent.hpp"
#include "ctxnav/world/oracles.hpp"
#include "ctxnav/world/scene.hpp"
#include "ctxnav/world/sensor.hpp"
#include "ctxnav/goal/caption.hpp"
#include "ctxnav/goal/goal_json.hpp"
#include "ctxnav/goal/lexicon.hpp"
#include "ctxnav/goal/types.hpp"
#include "ctxnav/mapping/grid.hpp"
#include "ctxnav/mapping/instances.hpp"
#include "ctxnav/mapping/occupancy.hpp"
#include "ctxnav/mapping/rooms.hpp"
#include "ctxnav/mapping/walls.hpp"
#include "ctxnav/explore/frontiers.hpp"
#include "ctxnav/explore/planner.hpp"
#include "ctxnav/explore/similarity.hpp"
#include "ctxnav/explore/value_map.hpp"
#include "ctxnav/verify/extrinsic.hpp"
#include "ctxnav/verify/intrinsic.hpp"
#include "ctxnav/verify/relations.hpp"
#include "ctxnav/harness/batch.hpp"
#include "ctxnav/harness/episode.hpp"
#include "ctxnav/harness/generator.hpp"
#include "ctxnav/harness/ground_truth.hpp"
#include "ctxnav/harness/metrics.hpp"
#include "ctxnav/harness/render.hpp"
