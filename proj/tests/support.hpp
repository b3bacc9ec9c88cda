#pragma once

#include <random>

#include "gridsplit/coordinator.hpp"
#include "gridsplit/formation.hpp"
#include "gridsplit/scenario.hpp"

namespace gridsplit::testing {

// Fixture snapshot at a formation step: loads drawn uniformly in
// [0.5, 1.5] x the step mean, PV in [0, 1] x zone rating.
FormationSnapshot random_snapshot(const Scenario& sc, std::mt19937_64& rng);

// Mean load and PV of the fixture over the given formation step.
FormationSnapshot fixture_snapshot(const Scenario& sc, int step);

// Identical feeders in mirror image: feeder-2 is feeder-1 shifted by 5 ids,
// ties join equal-depth zones, and criticality is mirrored too.
Scenario mirrored_scenario(bool zero_pv);

// The fixture cut to [start, start + minutes), re-based at minute 0.
Scenario fixture_window(int start, int minutes);

// Path graph 1-2-...-n with one GFM at node 1.
ZoneGraph single_feeder(int n);

}  // namespace gridsplit::testing
