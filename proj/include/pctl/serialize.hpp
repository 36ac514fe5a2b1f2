#pragma once

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "pctl/bifurcation.hpp"
#include "pctl/control_sim.hpp"
#include "pctl/interval_set.hpp"
#include "pctl/safeset.hpp"

namespace pctl {

using json = nlohmann::ordered_json;

/// [[lo, hi], ...], sorted; [] for the empty set.
json to_json(const IntervalSet& s);
IntervalSet interval_set_from_json(const json& j);

json to_json(const SafeSetResult& r);
json to_json(const TrajectoryRecord& t);
json to_json(const BifurcationEvent& e);
json to_json(const TraceRecord& t);
json to_json(const UMinResult& r);
json to_json(const EscapeCertificate& c);
json to_json(const JacobianReport& r);

/// n,x,xi,u,crash with one row per step n = 1..N (x = x_n, xi and u the
/// values that produced it). --n 0 gives the header alone.
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& t);
/// u,beta,exists,measure,n_components,note; note carries outside-regime
/// marks and per-cell errors.
void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells);

}  // namespace pctl
