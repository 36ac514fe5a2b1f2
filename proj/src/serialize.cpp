#include "pctl/serialize.hpp"

#include <ostream>
#include <stdexcept>

namespace pctl {

namespace {

// Shortest round-trip text for CSV cells.
std::string num(double v) {
  json j = v;
  return j.dump();
}

json optional_num(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const IntervalSet& s) {
  json arr = json::array();
  for (const auto& iv : s) arr.push_back({iv.lo, iv.hi});
  return arr;
}

IntervalSet interval_set_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("interval set must be a JSON array");
  std::vector<Interval> ivs;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw std::invalid_argument("interval must be a [lo, hi] pair of numbers");
    ivs.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return IntervalSet::normalize(std::move(ivs));
}

json to_json(const SafeSetResult& r) {
  json j;
  j["components"] = to_json(r.safe_set);
  j["measure"] = measure(r.safe_set);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["residual"] = r.residual;
  j["maximality_residual"] = r.maximality_residual;
  j["outside_regime"] = r.outside_regime;
  j["polished"] = r.polished;
  j["point_components"] = r.point_components;
  return j;
}

json to_json(const TrajectoryRecord& t) {
  json j;
  j["states"] = t.states;
  j["disturbances"] = t.disturbances;
  j["controls"] = t.controls;
  j["crash"] = t.crash_flags;
  j["crash_threshold"] = t.crash_threshold;
  j["crash_count"] = t.crash_count;
  j["mean_state"] = t.mean_state;
  j["domain_exit_step"] = t.domain_exit_step ? json(*t.domain_exit_step) : json(nullptr);
  return j;
}

json to_json(const BifurcationEvent& e) {
  json j;
  j["kind"] = to_string(e.kind);
  j["u"] = e.u_at;
  j["beta"] = e.beta_at;
  j["component_index"] = e.component_index;
  j["u_lo"] = e.u_lo;
  j["u_hi"] = e.u_hi;
  j["components_below"] = e.components_below;
  j["components_above"] = e.components_above;
  j["detail"] = e.detail;
  return j;
}

json to_json(const TraceRecord& t) {
  json samples = json::array();
  for (const auto& s : t.samples) {
    json js;
    js["u"] = s.u;
    js["points"] = s.points;
    js["active"] = s.active;
    js["active_derivative"] = s.active_derivative;
    js["recompute_mismatch"] = optional_num(s.recompute_mismatch);
    samples.push_back(std::move(js));
  }
  json events = json::array();
  for (const auto& e : t.events) events.push_back(to_json(e));
  json j;
  j["samples"] = std::move(samples);
  j["events"] = std::move(events);
  j["max_mismatch"] = t.max_mismatch;
  j["reseeds"] = t.reseeds;
  j["halted"] = t.halted.empty() ? json(nullptr) : json(t.halted);
  return j;
}

json to_json(const UMinResult& r) {
  json j;
  j["beta"] = r.beta;
  j["u_min"] = optional_num(r.u_min);
  j["iterations"] = r.iterations;
  return j;
}

json to_json(const EscapeCertificate& c) {
  json steps = json::array();
  for (const auto& st : c.steps) {
    json policy = json::array();
    for (const auto& cell : st.policy) policy.push_back({{"states", {cell.states.lo, cell.states.hi}}, {"xi", cell.xi}});
    steps.push_back({{"reachable", to_json(st.reachable)}, {"policy", std::move(policy)}});
  }
  json j;
  j["x0"] = c.x0;
  j["depth"] = c.depth;
  j["steps"] = std::move(steps);
  j["play"] = {{"states", c.play_states}, {"disturbances", c.play_disturbances}, {"controls", c.play_controls}};
  return j;
}

json to_json(const JacobianReport& r) {
  json factors = json::array();
  for (const auto& f : r.factors)
    factors.push_back({{"indices", f.indices}, {"cycle", f.cycle}, {"value", f.value}});
  json j;
  j["det"] = r.det;
  j["det_from_factors"] = r.det_from_factors;
  j["slopes"] = r.slopes;
  j["factors"] = std::move(factors);
  j["nonsingular"] = r.nonsingular;
  return j;
}

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& t) {
  os << "n,x,xi,u,crash\n";
  for (std::size_t k = 0; k < t.steps(); ++k) {
    os << k + 1 << ',' << num(t.states[k + 1]) << ',' << num(t.disturbances[k]) << ','
       << num(t.controls[k]) << ',' << (t.crash_flags[k + 1] ? 1 : 0) << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells) {
  os << "u,beta,exists,measure,n_components,note\n";
  for (const auto& c : cells) {
    std::string note;
    if (c.outside_regime) note = "outside_regime";
    if (!c.error.empty()) note += (note.empty() ? "" : ";") + std::string("error: ") + c.error;
    // Commas would break the row.
    for (auto& ch : note)
      if (ch == ',' || ch == '\n') ch = ' ';
    os << num(c.u_bound) << ',' << num(c.beta) << ',';
    if (c.computed)
      os << (c.exists ? 1 : 0) << ',' << num(c.measure) << ',' << c.n_components;
    else
      os << ",,";
    os << ',' << note << '\n';
  }
}

}  // namespace pctl
