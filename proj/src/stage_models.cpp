#include "gridfire/stage_models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gridfire {

using nlohmann::json;

std::vector<uint8_t> ShutoffPlan::energized_at(int t) const {
  std::vector<uint8_t> out(z.size());
  for (size_t c = 0; c < z.size(); ++c) out[c] = z[c][t];
  return out;
}

double ShutoffPlan::shed_cost(const PowerCase& pc, int t) const {
  double cost = 0.0;
  for (size_t d = 0; d < pc.loads.size(); ++d)
    cost += pc.loads[d].priority * (1.0 - served[d][t - 1]);
  return cost;
}

int ShutoffPlan::off_count(int t) const {
  int n = 0;
  for (const auto& zc : z) n += zc[t] == 0;
  return n;
}

void validate_plan(const PowerCase& pc, const ShutoffPlan& plan) {
  const int T = pc.horizon;
  if (plan.horizon != T) throw ValidationError("plan horizon does not match the case");
  if ((int)plan.z.size() != pc.component_count())
    throw ValidationError("plan component count does not match the case");
  for (int c = 0; c < pc.component_count(); ++c) {
    if ((int)plan.z[c].size() != T + 1) throw ValidationError("plan z must span t = 0..T");
    if (plan.z[c][0] != 1)
      throw ValidationError("component " + pc.component_label(c) + " must start energized");
    for (int t = 0; t < T; ++t)
      if (plan.z[c][t] < plan.z[c][t + 1])
        throw ValidationError("component " + pc.component_label(c) +
                              " re-energizes at t=" + std::to_string(t + 1));
  }
  const int nb = (int)pc.buses.size();
  const int ng = (int)pc.generators.size();
  for (int t = 1; t <= T; ++t) {
    for (int g = 0; g < ng; ++g)
      if (plan.z[nb + g][t] > plan.z[pc.generators[g].bus][t])
        throw ValidationError("generator " + pc.generators[g].id +
                              " energized on a dead bus at t=" + std::to_string(t));
    for (size_t l = 0; l < pc.lines.size(); ++l) {
      const int zl = plan.z[nb + ng + (int)l][t];
      if (zl > plan.z[pc.lines[l].from_bus][t] || zl > plan.z[pc.lines[l].to_bus][t])
        throw ValidationError("line " + pc.lines[l].id +
                              " energized with a dead endpoint at t=" + std::to_string(t));
    }
    for (size_t d = 0; d < pc.loads.size(); ++d) {
      const double x = plan.served[d][t - 1];
      if (x < -1e-6 || x > 1.0 + 1e-6)
        throw ValidationError("load " + pc.loads[d].id + " served fraction out of [0,1]");
      if (x > plan.z[pc.loads[d].bus][t] + 1e-6)
        throw ValidationError("load " + pc.loads[d].id +
                              " served on a dead bus at t=" + std::to_string(t));
    }
  }
}

namespace {

std::string pname(const char* stem, int a, int b) {
  std::ostringstream os;
  os << stem << "_" << a << "_" << b;
  return os.str();
}

}  // namespace

void build_flow_block(LinearModel& model, const PowerCase& pc, int period,
                      const PeriodVars& v) {
  (void)period;
  const double thbar = pc.theta_max, thlow = pc.theta_min;
  for (size_t l = 0; l < pc.lines.size(); ++l) {
    const Line& ln = pc.lines[l];
    const double b = ln.susceptance, W = ln.thermal_limit;
    const int P = v.flow[l], ti = v.angle[ln.from_bus], tj = v.angle[ln.to_bus];
    const int w = v.sw_line[l];
    if (w >= 0) {
      model.add_constraint({{P, 1.0}, {ti, b}, {tj, -b}, {w, -b * thbar}},
                           ConstraintSense::LessEqual, -b * thbar);
      model.add_constraint({{P, 1.0}, {ti, b}, {tj, -b}, {w, -b * thlow}},
                           ConstraintSense::GreaterEqual, -b * thlow);
      model.add_constraint({{P, 1.0}, {w, -W}}, ConstraintSense::LessEqual, 0.0);
      model.add_constraint({{P, 1.0}, {w, W}}, ConstraintSense::GreaterEqual, 0.0);
    } else {
      model.add_constraint({{P, 1.0}, {ti, b}, {tj, -b}}, ConstraintSense::Equal, 0.0);
    }
  }
  for (size_t i = 0; i < pc.buses.size(); ++i) {
    std::vector<std::pair<int, double>> terms;
    for (int g : pc.bus_generators[i]) terms.push_back({v.gen[g], 1.0});
    for (int l : pc.bus_lines_in[i]) terms.push_back({v.flow[l], 1.0});
    for (int l : pc.bus_lines_out[i]) terms.push_back({v.flow[l], -1.0});
    for (int d : pc.bus_loads[i]) {
      const double D = demand(pc, d, period);
      if (D != 0.0) terms.push_back({v.served[d], -D});
    }
    model.add_constraint(std::move(terms), ConstraintSense::Equal, 0.0);
  }
  for (size_t g = 0; g < pc.generators.size(); ++g) {
    const Generator& gen = pc.generators[g];
    const int P = v.gen[g], w = v.sw_gen[g];
    if (w >= 0) {
      model.add_constraint({{P, 1.0}, {w, -gen.p_max}}, ConstraintSense::LessEqual, 0.0);
      model.add_constraint({{P, 1.0}, {w, -gen.p_min}}, ConstraintSense::GreaterEqual, 0.0);
    } else {
      model.add_constraint({{P, 1.0}}, ConstraintSense::LessEqual, gen.p_max);
      model.add_constraint({{P, 1.0}}, ConstraintSense::GreaterEqual, gen.p_min);
    }
  }
}

void build_logic_block(LinearModel& model, const PowerCase& pc, const PeriodVars& v) {
  for (size_t i = 0; i < pc.buses.size(); ++i) {
    const int zb = v.sw_bus[i];
    for (int d : pc.bus_loads[i]) {
      if (zb >= 0)
        model.add_constraint({{zb, 1.0}, {v.served[d], -1.0}},
                             ConstraintSense::GreaterEqual, 0.0);
      else
        continue;  // x <= 1 already a bound
    }
    for (int g : pc.bus_generators[i]) {
      if (v.sw_gen[g] < 0) continue;
      if (zb >= 0)
        model.add_constraint({{zb, 1.0}, {v.sw_gen[g], -1.0}},
                             ConstraintSense::GreaterEqual, 0.0);
    }
  }
  for (size_t l = 0; l < pc.lines.size(); ++l) {
    if (v.sw_line[l] < 0) continue;
    const int zi = v.sw_bus[pc.lines[l].from_bus];
    const int zj = v.sw_bus[pc.lines[l].to_bus];
    if (zi >= 0)
      model.add_constraint({{zi, 1.0}, {v.sw_line[l], -1.0}},
                           ConstraintSense::GreaterEqual, 0.0);
    if (zj >= 0)
      model.add_constraint({{zj, 1.0}, {v.sw_line[l], -1.0}},
                           ConstraintSense::GreaterEqual, 0.0);
  }
}

namespace {

PeriodVars add_dispatch_vars(LinearModel& model, const PowerCase& pc, int t,
                             const char* suffix) {
  PeriodVars v;
  v.served.resize(pc.loads.size());
  v.angle.resize(pc.buses.size());
  v.flow.resize(pc.lines.size());
  v.gen.resize(pc.generators.size());
  for (size_t d = 0; d < pc.loads.size(); ++d)
    v.served[d] = model.add_variable(pname((std::string("x") + suffix).c_str(), (int)d, t),
                                     0.0, 1.0);
  for (size_t i = 0; i < pc.buses.size(); ++i)
    v.angle[i] = model.add_variable(pname((std::string("th") + suffix).c_str(), (int)i, t),
                                    pc.theta_min / 2.0, pc.theta_max / 2.0);
  for (size_t l = 0; l < pc.lines.size(); ++l)
    v.flow[l] = model.add_variable(pname((std::string("pl") + suffix).c_str(), (int)l, t),
                                   -pc.lines[l].thermal_limit, pc.lines[l].thermal_limit);
  for (size_t g = 0; g < pc.generators.size(); ++g)
    v.gen[g] = model.add_variable(pname((std::string("pg") + suffix).c_str(), (int)g, t),
                                  std::min(pc.generators[g].p_min, 0.0),
                                  std::max(pc.generators[g].p_max, 0.0));
  return v;
}

}  // namespace

FirstStageVars add_first_stage(LinearModel& model, const PowerCase& pc) {
  const int T = pc.horizon;
  const int nc = pc.component_count();
  const int nb = (int)pc.buses.size();
  const int ng = (int)pc.generators.size();
  FirstStageVars fs;
  fs.z.assign(nc, std::vector<int>(T));
  for (int c = 0; c < nc; ++c)
    for (int t = 1; t <= T; ++t)
      fs.z[c][t - 1] = model.add_binary(pname("z", c, t));

  fs.periods.resize(T);
  for (int t = 1; t <= T; ++t) {
    PeriodVars& v = fs.periods[t - 1];
    v = add_dispatch_vars(model, pc, t, "");
    v.sw_bus.resize(nb);
    v.sw_gen.resize(ng);
    v.sw_line.resize(pc.lines.size());
    for (int i = 0; i < nb; ++i) v.sw_bus[i] = fs.z[i][t - 1];
    for (int g = 0; g < ng; ++g) v.sw_gen[g] = fs.z[nb + g][t - 1];
    for (size_t l = 0; l < pc.lines.size(); ++l)
      v.sw_line[l] = fs.z[nb + ng + (int)l][t - 1];
    build_flow_block(model, pc, t, v);
    build_logic_block(model, pc, v);
  }
  // once off, stays off
  for (int c = 0; c < nc; ++c)
    for (int t = 1; t < T; ++t)
      model.add_constraint({{fs.z[c][t - 1], 1.0}, {fs.z[c][t], -1.0}},
                           ConstraintSense::GreaterEqual, 0.0);
  return fs;
}

ShutoffPlan extract_plan(const PowerCase& pc, const FirstStageVars& fs,
                         const std::vector<double>& sol) {
  const int T = pc.horizon;
  const int nc = pc.component_count();
  ShutoffPlan plan;
  plan.horizon = T;
  plan.z.assign(nc, std::vector<uint8_t>(T + 1, 1));
  for (int c = 0; c < nc; ++c)
    for (int t = 1; t <= T; ++t)
      plan.z[c][t] = sol[fs.z[c][t - 1]] > 0.5 ? 1 : 0;
  plan.served.assign(pc.loads.size(), std::vector<double>(T, 0.0));
  plan.angle.assign(pc.buses.size(), std::vector<double>(T, 0.0));
  plan.flow.assign(pc.lines.size(), std::vector<double>(T, 0.0));
  plan.gen.assign(pc.generators.size(), std::vector<double>(T, 0.0));
  for (int t = 1; t <= T; ++t) {
    const PeriodVars& v = fs.periods[t - 1];
    for (size_t d = 0; d < pc.loads.size(); ++d)
      plan.served[d][t - 1] = std::clamp(sol[v.served[d]], 0.0, 1.0);
    for (size_t i = 0; i < pc.buses.size(); ++i) plan.angle[i][t - 1] = sol[v.angle[i]];
    for (size_t l = 0; l < pc.lines.size(); ++l) plan.flow[l][t - 1] = sol[v.flow[l]];
    for (size_t g = 0; g < pc.generators.size(); ++g) plan.gen[g][t - 1] = sol[v.gen[g]];
  }
  return plan;
}

namespace {

struct Stage2Build {
  LinearModel model;
  std::vector<int> zvar, yvar, etavar;
  std::vector<PeriodVars> periods;  // index t - tau
};

// Shared builder for model f (z fixed to z_hat) and its Lagrangian
// relaxation (z free, lambda in the objective).
Stage2Build build_stage2(const PowerCase& pc, const DisruptionScenario& sc,
                         const std::vector<uint8_t>& z_hat,
                         const std::vector<double>* lambda) {
  const int T = pc.horizon;
  const int tau = sc.tau;
  const int nc = pc.component_count();
  const int nb = (int)pc.buses.size();
  const int ng = (int)pc.generators.size();
  if (tau < 1 || tau > T)
    throw ModelBuildError("second stage requires a disruptive scenario");
  if ((int)z_hat.size() != nc)
    throw ModelBuildError("z_hat must have one entry per component");

  Stage2Build b;
  LinearModel& m = b.model;
  b.zvar.resize(nc);
  b.yvar.resize(nc);
  b.etavar.resize(nc);
  for (int c = 0; c < nc; ++c) {
    b.zvar[c] = m.add_binary(pname("zw", c, 0));
    if (!lambda) m.fix_variable(b.zvar[c], z_hat[c] ? 1.0 : 0.0);
  }
  for (int c = 0; c < nc; ++c) b.yvar[c] = m.add_binary(pname("y", c, 0));
  for (int c = 0; c < nc; ++c) {
    b.etavar[c] = m.add_binary(pname("eta", c, 0));
    if (sc.exo_damage[c]) m.fix_variable(b.etavar[c], 1.0);  // eta >= v with min cost
  }
  // eta >= v is the bound above; keep it explicit when v = 0? nothing needed.
  for (int c = 0; c < nc; ++c) {
    m.add_constraint({{b.yvar[c], 1.0}, {b.zvar[c], -1.0}}, ConstraintSense::LessEqual, 0.0);
    m.add_constraint({{b.yvar[c], 1.0}, {b.etavar[c], 1.0}}, ConstraintSense::LessEqual, 1.0);
  }
  for (int c = 0; c < nc; ++c) {
    if (!sc.fault[c]) continue;
    for (int k : sc.affected[c])
      m.add_constraint({{b.etavar[k], 1.0}, {b.zvar[c], -1.0}},
                       ConstraintSense::GreaterEqual, 0.0);
  }

  for (int t = tau; t <= T; ++t) {
    PeriodVars v = add_dispatch_vars(m, pc, t, "w");
    v.sw_bus.assign(b.yvar.begin(), b.yvar.begin() + nb);
    v.sw_gen.assign(b.yvar.begin() + nb, b.yvar.begin() + nb + ng);
    v.sw_line.assign(b.yvar.begin() + nb + ng, b.yvar.end());
    build_flow_block(m, pc, t, v);
    build_logic_block(m, pc, v);
    for (size_t d = 0; d < pc.loads.size(); ++d) {
      m.add_objective_coefficient(v.served[d], -pc.loads[d].priority);
      m.add_objective_offset(pc.loads[d].priority);
    }
    b.periods.push_back(std::move(v));
  }
  for (int c = 0; c < nc; ++c) {
    double r = 0.0;
    ComponentId id = pc.component(c);
    switch (id.kind) {
      case ComponentKind::Bus: r = pc.bus_damage_cost; break;
      case ComponentKind::Generator: r = pc.generators[id.index].damage_cost; break;
      case ComponentKind::Line: r = pc.lines[id.index].damage_cost; break;
    }
    m.add_objective_coefficient(b.etavar[c], r);
  }
  if (lambda) {
    for (int c = 0; c < nc; ++c) {
      m.add_objective_coefficient(b.zvar[c], -(*lambda)[c]);
      m.add_objective_offset((*lambda)[c] * (z_hat[c] ? 1.0 : 0.0));
    }
  }

  // Structural warm start: forced damage plus the maximal functional set.
  std::vector<uint8_t> eta_hint(nc, 0);
  for (int c = 0; c < nc; ++c) eta_hint[c] = sc.exo_damage[c];
  for (int c = 0; c < nc; ++c)
    if (sc.fault[c] && z_hat[c])
      for (int k : sc.affected[c]) eta_hint[k] = 1;
  std::vector<uint8_t> y_hint(nc, 0);
  for (int i = 0; i < nb; ++i) y_hint[i] = z_hat[i] && !eta_hint[i];
  for (int g = 0; g < ng; ++g) {
    const int c = nb + g;
    y_hint[c] = z_hat[c] && !eta_hint[c] && y_hint[pc.generators[g].bus];
  }
  for (size_t l = 0; l < pc.lines.size(); ++l) {
    const int c = nb + ng + (int)l;
    y_hint[c] = z_hat[c] && !eta_hint[c] && y_hint[pc.lines[l].from_bus] &&
                y_hint[pc.lines[l].to_bus];
  }
  for (int c = 0; c < nc; ++c) {
    m.set_warm_start(b.zvar[c], z_hat[c]);
    m.set_warm_start(b.etavar[c], eta_hint[c]);
    m.set_warm_start(b.yvar[c], y_hint[c]);
  }
  return b;
}

SecondStageOutcome extract_stage2(const PowerCase& pc, const DisruptionScenario& sc,
                                  const Stage2Build& b, const SolveResult& res) {
  SecondStageOutcome out;
  out.objective = res.objective;
  const int nc = pc.component_count();
  out.z.resize(nc);
  out.functional.resize(nc);
  out.damaged.resize(nc);
  for (int c = 0; c < nc; ++c) {
    out.z[c] = res.values[b.zvar[c]] > 0.5;
    out.functional[c] = res.values[b.yvar[c]] > 0.5;
    out.damaged[c] = res.values[b.etavar[c]] > 0.5;
    double r = 0.0;
    ComponentId id = pc.component(c);
    switch (id.kind) {
      case ComponentKind::Bus: r = pc.bus_damage_cost; break;
      case ComponentKind::Generator: r = pc.generators[id.index].damage_cost; break;
      case ComponentKind::Line: r = pc.lines[id.index].damage_cost; break;
    }
    if (out.damaged[c]) out.damage_cost += r;
  }
  const int tau = sc.tau;
  for (size_t ti = 0; ti < b.periods.size(); ++ti) {
    for (size_t d = 0; d < pc.loads.size(); ++d)
      out.shed_cost +=
          pc.loads[d].priority * (1.0 - res.values[b.periods[ti].served[d]]);
  }
  (void)tau;
  return out;
}

}  // namespace

SecondStageOutcome second_stage_value(const PowerCase& pc, const DisruptionScenario& sc,
                                      const std::vector<uint8_t>& z_hat,
                                      MilpSolver& solver, const SolveLimits& limits) {
  Stage2Build b = build_stage2(pc, sc, z_hat, nullptr);
  SolveResult res = solver.solve(b.model, limits);
  if (!res.has_solution())
    throw SolverError("second-stage subproblem did not solve to feasibility");
  return extract_stage2(pc, sc, b, res);
}

LagrangianOutcome lagrangian_value(const PowerCase& pc, const DisruptionScenario& sc,
                                   const std::vector<uint8_t>& z_hat,
                                   const std::vector<double>& lambda,
                                   MilpSolver& solver, const SolveLimits& limits) {
  Stage2Build b = build_stage2(pc, sc, z_hat, &lambda);
  SolveResult res = solver.solve(b.model, limits);
  if (!res.has_solution())
    throw SolverError("Lagrangian relaxation did not solve to feasibility");
  SecondStageOutcome s2 = extract_stage2(pc, sc, b, res);
  LagrangianOutcome out;
  out.value = res.objective;
  out.z = s2.z;
  out.stage_cost = s2.shed_cost + s2.damage_cost;
  return out;
}

ExtensiveModel build_extensive(const PowerCase& pc,
                               const std::vector<DisruptionScenario>& scenarios,
                               ObjectiveMode mode) {
  if (scenarios.empty()) throw ModelBuildError("scenario set is empty");
  const int T = pc.horizon;
  const int nc = pc.component_count();
  const int nb = (int)pc.buses.size();
  const int ng = (int)pc.generators.size();

  ExtensiveModel em;
  LinearModel& m = em.model;
  em.first_stage = add_first_stage(m, pc);

  if (mode == ObjectiveMode::Expectation) {
    // weight of period t in the pre-disruption shed: P(tau > t)
    std::vector<double> wt(T + 1, 0.0);
    for (const DisruptionScenario& sc : scenarios)
      for (int t = 1; t <= T; ++t)
        if (sc.tau > t) wt[t] += sc.probability;
    for (int t = 1; t <= T; ++t) {
      if (wt[t] == 0.0) continue;
      for (size_t d = 0; d < pc.loads.size(); ++d) {
        m.add_objective_coefficient(em.first_stage.periods[t - 1].served[d],
                                    -pc.loads[d].priority * wt[t]);
        m.add_objective_offset(pc.loads[d].priority * wt[t]);
      }
    }
  } else {
    em.epigraph = m.add_variable("worst_case", 0.0, kInf);
    m.set_objective_coefficient(em.epigraph, 1.0);
  }

  for (size_t w = 0; w < scenarios.size(); ++w) {
    const DisruptionScenario& sc = scenarios[w];
    std::vector<std::pair<int, double>> epi_terms;  // WorstCase accumulation
    double epi_rhs = 0.0;
    if (mode == ObjectiveMode::WorstCase) {
      epi_terms.push_back({em.epigraph, 1.0});
      const int cutoff = sc.disrupted(T) ? sc.tau - 1 : T;
      for (int t = 1; t <= cutoff; ++t)
        for (size_t d = 0; d < pc.loads.size(); ++d) {
          epi_terms.push_back(
              {em.first_stage.periods[t - 1].served[d], pc.loads[d].priority});
          epi_rhs += pc.loads[d].priority;
        }
    }
    if (!sc.disrupted(T)) {
      if (mode == ObjectiveMode::WorstCase)
        em.model.add_constraint(std::move(epi_terms), ConstraintSense::GreaterEqual,
                                epi_rhs);
      continue;
    }

    const int tau = sc.tau;
    ExtensiveModel::ScenarioVars blk;
    blk.scenario = (int)w;
    blk.functional.resize(nc);
    blk.damaged.resize(nc);
    const std::string sfx = "w" + std::to_string(w);
    for (int c = 0; c < nc; ++c)
      blk.functional[c] = m.add_binary(pname(("y" + sfx).c_str(), c, 0));
    for (int c = 0; c < nc; ++c) {
      blk.damaged[c] = m.add_binary(pname(("eta" + sfx).c_str(), c, 0));
      if (sc.exo_damage[c]) m.fix_variable(blk.damaged[c], 1.0);
    }
    const double p = mode == ObjectiveMode::Expectation ? sc.probability : 0.0;

    for (int c = 0; c < nc; ++c) {
      // y <= z at tau-1 (nonanticipativity substituted into the local copy)
      const int zlink = em.first_stage.z_at(c, tau - 1);
      if (zlink >= 0)
        m.add_constraint({{blk.functional[c], 1.0}, {zlink, -1.0}},
                         ConstraintSense::LessEqual, 0.0);
      m.add_constraint({{blk.functional[c], 1.0}, {blk.damaged[c], 1.0}},
                       ConstraintSense::LessEqual, 1.0);
    }
    for (int c = 0; c < nc; ++c) {
      if (!sc.fault[c]) continue;
      const int zlink = em.first_stage.z_at(c, tau - 1);
      for (int k : sc.affected[c]) {
        if (zlink >= 0)
          m.add_constraint({{blk.damaged[k], 1.0}, {zlink, -1.0}},
                           ConstraintSense::GreaterEqual, 0.0);
        else
          m.add_constraint({{blk.damaged[k], 1.0}}, ConstraintSense::GreaterEqual, 1.0);
      }
    }

    for (int t = tau; t <= T; ++t) {
      PeriodVars v = add_dispatch_vars(m, pc, t, sfx.c_str());
      v.sw_bus.assign(blk.functional.begin(), blk.functional.begin() + nb);
      v.sw_gen.assign(blk.functional.begin() + nb, blk.functional.begin() + nb + ng);
      v.sw_line.assign(blk.functional.begin() + nb + ng, blk.functional.end());
      build_flow_block(m, pc, t, v);
      build_logic_block(m, pc, v);
      for (size_t d = 0; d < pc.loads.size(); ++d) {
        if (mode == ObjectiveMode::Expectation) {
          m.add_objective_coefficient(v.served[d], -pc.loads[d].priority * p);
          m.add_objective_offset(pc.loads[d].priority * p);
        } else {
          epi_terms.push_back({v.served[d], pc.loads[d].priority});
          epi_rhs += pc.loads[d].priority;
        }
      }
      blk.periods.push_back(std::move(v));
    }
    for (int c = 0; c < nc; ++c) {
      double r = 0.0;
      ComponentId id = pc.component(c);
      switch (id.kind) {
        case ComponentKind::Bus: r = pc.bus_damage_cost; break;
        case ComponentKind::Generator: r = pc.generators[id.index].damage_cost; break;
        case ComponentKind::Line: r = pc.lines[id.index].damage_cost; break;
      }
      if (mode == ObjectiveMode::Expectation) {
        m.add_objective_coefficient(blk.damaged[c], r * p);
      } else if (r != 0.0) {
        epi_terms.push_back({blk.damaged[c], -r});
      }
    }
    if (mode == ObjectiveMode::WorstCase)
      em.model.add_constraint(std::move(epi_terms), ConstraintSense::GreaterEqual, epi_rhs);
    em.blocks.push_back(std::move(blk));
  }
  return em;
}

double scenario_cost_in_extensive(const PowerCase& pc, const ExtensiveModel& em,
                                  const std::vector<DisruptionScenario>& scenarios,
                                  int scenario, const std::vector<double>& sol) {
  const int T = pc.horizon;
  const DisruptionScenario& sc = scenarios[scenario];
  const int cutoff = sc.disrupted(T) ? sc.tau - 1 : T;
  double cost = 0.0;
  for (int t = 1; t <= cutoff; ++t)
    for (size_t d = 0; d < pc.loads.size(); ++d)
      cost += pc.loads[d].priority *
              (1.0 - sol[em.first_stage.periods[t - 1].served[d]]);
  if (!sc.disrupted(T)) return cost;
  for (const auto& blk : em.blocks) {
    if (blk.scenario != scenario) continue;
    for (const PeriodVars& v : blk.periods)
      for (size_t d = 0; d < pc.loads.size(); ++d)
        cost += pc.loads[d].priority * (1.0 - sol[v.served[d]]);
    for (int c = 0; c < pc.component_count(); ++c) {
      if (sol[blk.damaged[c]] <= 0.5) continue;
      ComponentId id = pc.component(c);
      switch (id.kind) {
        case ComponentKind::Bus: cost += pc.bus_damage_cost; break;
        case ComponentKind::Generator: cost += pc.generators[id.index].damage_cost; break;
        case ComponentKind::Line: cost += pc.lines[id.index].damage_cost; break;
      }
    }
  }
  return cost;
}

void write_plan(const std::string& path, const ShutoffPlan& plan,
                const std::string& case_hash, double objective, double gap) {
  json jz = json::array();
  for (const auto& zc : plan.z) jz.push_back(zc);
  json j{{"format", "gridfire-plan/1"},
         {"case_hash", case_hash},
         {"horizon", plan.horizon},
         {"objective", objective},
         {"gap", gap},
         {"z", jz},
         {"served", plan.served},
         {"angle", plan.angle},
         {"flow", plan.flow},
         {"gen", plan.gen}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write plan file: " + path);
  out << j.dump(2) << "\n";
}

PlanFile read_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open plan file: " + path);
  PlanFile pf;
  try {
    json j = json::parse(in);
    if (j.value("format", "") != "gridfire-plan/1")
      throw ParseError("unsupported plan file format");
    pf.case_hash = j.value("case_hash", "");
    pf.objective = j.value("objective", 0.0);
    pf.gap = j.value("gap", 0.0);
    pf.plan.horizon = j.at("horizon").get<int>();
    for (const json& zc : j.at("z"))
      pf.plan.z.push_back(zc.get<std::vector<uint8_t>>());
    pf.plan.served = j.at("served").get<std::vector<std::vector<double>>>();
    pf.plan.angle = j.at("angle").get<std::vector<std::vector<double>>>();
    pf.plan.flow = j.at("flow").get<std::vector<std::vector<double>>>();
    pf.plan.gen = j.at("gen").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed plan file: ") + e.what());
  }
  return pf;
}

}  // namespace gridfire
