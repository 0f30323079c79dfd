#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "stride/hybrid/sim.hpp"

namespace stride::hybrid {

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace output: " + path);
  out << "t";
  for (int i = 0; i < 7; ++i) out << ",q" << i;
  for (int i = 0; i < 7; ++i) out << ",v" << i;
  out << ",domain,phase";
  for (int i = 0; i < 4; ++i) out << ",u" << i;
  out << ",Flx,Flz,Frx,Frz";
  for (int i = 0; i < 4; ++i) out << ",y" << i;
  for (int i = 0; i < 4; ++i) out << ",yd" << i;
  out << ",V,r_v,r_vdot,r_dom,r_reg,r_total\n";
  out << std::setprecision(17);
  for (const TraceRow& r : trace.rows) {
    out << r.t;
    for (int i = 0; i < 7; ++i) out << ',' << r.q[i];
    for (int i = 0; i < 7; ++i) out << ',' << r.v[i];
    out << ',' << to_string(r.domain) << ',' << r.phase;
    for (int i = 0; i < 4; ++i) out << ',' << r.u[i];
    out << ',' << r.f_left[0] << ',' << r.f_left[1] << ',' << r.f_right[0] << ',' << r.f_right[1];
    for (int i = 0; i < 4; ++i) out << ',' << r.y[i];
    for (int i = 0; i < 4; ++i) out << ',' << r.y_ref[i];
    out << ',' << r.clf_value << ',' << r.r_v << ',' << r.r_vdot << ',' << r.r_dom << ','
        << r.r_reg << ',' << r.r_total << '\n';
  }
}

std::string trace_summary_json(const Trace& trace) {
  nlohmann::json j;
  j["samples"] = trace.rows.size();
  j["duration"] = trace.duration();
  j["diverged"] = trace.diverged;
  j["failure"] = trace.failure;

  int transitions = 0, friction_violations = 0, impulses = 0;
  for (const Event& e : trace.events) {
    switch (e.kind) {
      case Event::Kind::Transition: ++transitions; break;
      case Event::Kind::FrictionViolation: ++friction_violations; break;
      case Event::Kind::Impulse: ++impulses; break;
    }
  }
  j["transitions"] = transitions;
  j["friction_violations"] = friction_violations;
  j["impulses"] = impulses;

  if (trace.rows.size() >= 2) {
    const double dx = trace.rows.back().q[0] - trace.rows.front().q[0];
    j["mean_forward_speed"] = dx / trace.duration();
    double flight = 0;
    for (const TraceRow& r : trace.rows)
      if (r.domain == Domain::Flight) ++flight;
    j["flight_fraction"] = flight / static_cast<double>(trace.rows.size());
  }
  return j.dump(2);
}

}  // namespace stride::hybrid
