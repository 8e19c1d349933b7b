#include "gridfire/decomposition.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include "gridfire/qp.hpp"
#include "json.hpp"

namespace gridfire {

using nlohmann::json;

double Cut::evaluate(const std::vector<uint8_t>& z) const {
  double v = value;
  for (size_t c = 0; c < lambda.size(); ++c)
    v += lambda[c] * ((z[c] ? 1.0 : 0.0) - (anchor[c] ? 1.0 : 0.0));
  return v;
}

double DualState::probe(const PowerCase& pc, const DisruptionScenario& sc,
                        const std::vector<uint8_t>& z_hat,
                        const std::vector<double>& lambda, MilpSolver& solver,
                        const SolveLimits& limits) {
  LagrangianOutcome lo = lagrangian_value(pc, sc, z_hat, lambda, solver, limits);
  DualLinearization lin;
  lin.intercept = lo.stage_cost;
  lin.gradient.resize(lambda.size());
  for (size_t c = 0; c < lambda.size(); ++c)
    lin.gradient[c] = (z_hat[c] ? 1.0 : 0.0) - (lo.z[c] ? 1.0 : 0.0);
  // skip exact duplicates (same minimizer)
  bool dup = false;
  for (const DualLinearization& ex : linearizations)
    if (ex.gradient == lin.gradient && std::abs(ex.intercept - lin.intercept) < 1e-12) {
      dup = true;
      break;
    }
  if (!dup) linearizations.push_back(std::move(lin));
  ++evaluations;
  if (lo.value > best_value) {
    best_value = lo.value;
    best_lambda = lambda;
  }
  return lo.value;
}

namespace {

double model_value_at(const std::vector<DualLinearization>& lins,
                      const std::vector<double>& lambda) {
  double v = kInf;
  for (const DualLinearization& lin : lins) {
    double c = lin.intercept;
    for (size_t i = 0; i < lambda.size(); ++i) c += lin.gradient[i] * lambda[i];
    v = std::min(v, c);
  }
  return v;
}

}  // namespace

DualResult solve_dual(const PowerCase& pc, const DisruptionScenario& sc,
                      const std::vector<uint8_t>& z_hat, double f_hat,
                      MilpSolver& solver, DualState& state, double tol, int max_iters) {
  const int nc = pc.component_count();
  const SolveLimits sub_limits{1e-9, kInf};
  const double scale = std::max(1.0, std::abs(f_hat));
  const double target_tol = tol * scale;

  if (state.linearizations.empty())
    state.probe(pc, sc, z_hat, std::vector<double>(nc, 0.0), solver, sub_limits);

  std::vector<double> center = state.best_lambda;
  double center_value = state.best_value;
  double mu = 1.0;

  DualResult out;
  for (int iter = 0; iter < max_iters; ++iter) {
    if (state.best_value >= f_hat - target_tol) break;

    // proximal master in its simplex dual form:
    //   min_{a in simplex}  (d + G center)' a  +  1/(2 mu) a' G G' a
    // candidate = center + (1/mu) G' a
    const int k = static_cast<int>(state.linearizations.size());
    std::vector<std::vector<double>> Q(k, std::vector<double>(k, 0.0));
    std::vector<double> lin_cost(k, 0.0);
    for (int a = 0; a < k; ++a) {
      const DualLinearization& la = state.linearizations[a];
      lin_cost[a] = la.intercept;
      for (int c = 0; c < nc; ++c) lin_cost[a] += la.gradient[c] * center[c];
      for (int b = a; b < k; ++b) {
        double dot = 0.0;
        for (int c = 0; c < nc; ++c)
          dot += la.gradient[c] * state.linearizations[b].gradient[c];
        Q[a][b] = Q[b][a] = dot / mu;
      }
    }
    NnqpResult qp = solve_nnqp(Q, lin_cost, /*simplex=*/true);
    std::vector<double> cand(nc, 0.0);
    for (int c = 0; c < nc; ++c) {
      double g = 0.0;
      for (int a = 0; a < k; ++a) g += qp.x[a] * state.linearizations[a].gradient[c];
      cand[c] = center[c] + g / mu;
    }

    const double model_cand = model_value_at(state.linearizations, cand);
    if (model_cand - state.best_value <= target_tol) break;  // model saturated

    const double actual = state.probe(pc, sc, z_hat, cand, solver, sub_limits);
    const double predicted = model_cand - center_value;
    if (actual >= center_value + 0.1 * predicted) {
      center = cand;  // serious step
      center_value = actual;
    } else {
      mu = std::max(mu * 0.5, 1e-8);  // null step: loosen the proximal pull
    }
  }
  out.lambda = state.best_lambda;
  out.value = state.best_value;
  out.converged = state.best_value >= f_hat - std::max(10.0 * target_tol, 1e-6);
  out.evaluations = state.evaluations;
  return out;
}

Cut smc_cut(const PowerCase& pc, const DisruptionScenario& sc,
            const std::vector<uint8_t>& z_hat, double delta, double f_hat,
            MilpSolver& solver, DualState& state, int scenario_index, int iteration,
            double tol) {
  const int nc = pc.component_count();
  const SolveLimits sub_limits{1e-9, kInf};
  const double required = (1.0 - delta) * f_hat;
  const double viol_tol = std::max(tol, tol * std::abs(f_hat));

  Cut cut;
  cut.scenario = scenario_index;
  cut.anchor = z_hat;
  cut.iteration = iteration;
  cut.kind = CutMode::SMC;

  // lambda = 0 is the global minimum-norm point; feasible iff R(0) meets the
  // anchor requirement (e.g. history-independent scenarios, f_hat = 0).
  if (state.linearizations.empty())
    state.probe(pc, sc, z_hat, std::vector<double>(nc, 0.0), solver, sub_limits);
  {
    std::vector<double> zero(nc, 0.0);
    const double r0 = model_value_at(state.linearizations, zero);
    if (r0 >= required - viol_tol) {
      // model value at 0 overestimates R(0); confirm with a probe
      const double actual = state.probe(pc, sc, z_hat, zero, solver, sub_limits);
      if (actual >= required - viol_tol) {
        cut.lambda = zero;
        cut.value = actual;
        return cut;
      }
    }
  }

  for (int iter = 0; iter < 100; ++iter) {
    // relaxed QP: min 1/2 |lambda|^2  s.t.  g_i' lambda >= required - d_i;
    // solved through its nonnegative dual, lambda = G' nu
    const int k = static_cast<int>(state.linearizations.size());
    std::vector<std::vector<double>> Q(k, std::vector<double>(k, 0.0));
    std::vector<double> rhs(k, 0.0);
    for (int a = 0; a < k; ++a) {
      rhs[a] = -(required - state.linearizations[a].intercept);
      for (int b = a; b < k; ++b) {
        double dot = 0.0;
        for (int c = 0; c < nc; ++c)
          dot += state.linearizations[a].gradient[c] *
                 state.linearizations[b].gradient[c];
        Q[a][b] = Q[b][a] = dot;
      }
    }
    NnqpResult qp = solve_nnqp(Q, rhs, /*simplex=*/false);
    std::vector<double> cand(nc, 0.0);
    for (int c = 0; c < nc; ++c)
      for (int a = 0; a < k; ++a)
        cand[c] += qp.x[a] * state.linearizations[a].gradient[c];

    const double actual = state.probe(pc, sc, z_hat, cand, solver, sub_limits);
    if (actual >= required - viol_tol) {
      cut.lambda = cand;
      cut.value = actual;
      return cut;
    }
  }

  // row generation exhausted; the plain Lagrangian cut is always feasible
  DualResult lc = solve_dual(pc, sc, z_hat, f_hat, solver, state, tol);
  cut.kind = CutMode::LC;
  cut.lambda = lc.lambda;
  cut.value = lc.value;
  return cut;
}

MasterModel build_master(const PowerCase& pc,
                         const std::vector<DisruptionScenario>& scenarios,
                         const std::vector<Cut>& pool) {
  if (scenarios.empty()) throw ModelBuildError("scenario set is empty");
  const int T = pc.horizon;
  MasterModel mm;
  LinearModel& m = mm.model;
  mm.first_stage = add_first_stage(m, pc);

  std::vector<double> wt(T + 1, 0.0);
  for (const DisruptionScenario& sc : scenarios)
    for (int t = 1; t <= T; ++t)
      if (sc.tau > t) wt[t] += sc.probability;
  for (int t = 1; t <= T; ++t) {
    if (wt[t] == 0.0) continue;
    for (size_t d = 0; d < pc.loads.size(); ++d) {
      m.add_objective_coefficient(mm.first_stage.periods[t - 1].served[d],
                                  -pc.loads[d].priority * wt[t]);
      m.add_objective_offset(pc.loads[d].priority * wt[t]);
    }
  }

  mm.value_var.assign(scenarios.size(), -1);
  for (size_t w = 0; w < scenarios.size(); ++w) {
    const DisruptionScenario& sc = scenarios[w];
    if (!sc.disrupted(T)) continue;
    // recourse costs are nonnegative, so V is bounded below by zero even
    // before any cut exists
    mm.value_var[w] = m.add_variable("V_" + std::to_string(w), 0.0, kInf);
    m.set_objective_coefficient(mm.value_var[w], sc.probability);
  }
  for (const Cut& cut : pool) {
    const DisruptionScenario& sc = scenarios[cut.scenario];
    const int V = mm.value_var[cut.scenario];
    if (V < 0) throw ModelBuildError("cut attached to a non-disruptive scenario");
    std::vector<std::pair<int, double>> terms{{V, 1.0}};
    double rhs = cut.value;
    for (size_t c = 0; c < cut.lambda.size(); ++c) {
      rhs -= cut.lambda[c] * (cut.anchor[c] ? 1.0 : 0.0);
      const int zv = mm.first_stage.z_at((int)c, sc.tau - 1);
      if (zv >= 0)
        terms.push_back({zv, -cut.lambda[c]});
      else
        rhs += cut.lambda[c];  // z at t=0 is the constant 1
    }
    m.add_constraint(std::move(terms), ConstraintSense::GreaterEqual, rhs);
  }
  return mm;
}

std::string plan_hash(const ShutoffPlan& plan) {
  uint64_t h = 1469598103934665603ull;
  for (const auto& zc : plan.z)
    for (uint8_t b : zc) {
      h ^= b;
      h *= 1099511628211ull;
    }
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string anchor_key(const std::vector<uint8_t>& z) {
  std::string s(z.size(), '0');
  for (size_t i = 0; i < z.size(); ++i) s[i] = z[i] ? '1' : '0';
  return s;
}

struct AnchorEntry {
  double f_hat = 0.0;
  bool has_f = false;
  bool has_lc = false;
  bool has_smc = false;
  DualState dual;
};

template <typename Fn>
void parallel_over(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int nw = std::min(threads, n);
  for (int w = 0; w < nw; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

DecompositionResult run_decomposition(const PowerCase& pc,
                                      const std::vector<DisruptionScenario>& scenarios,
                                      const DecompositionOptions& opts) {
  if (scenarios.empty()) throw ValidationError("scenario set is empty");
  if (opts.epsilon < 0.0) throw ValidationError("epsilon must be >= 0");
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  const int T = pc.horizon;
  const int nw = static_cast<int>(scenarios.size());
  std::vector<int> active;  // disruptive scenarios with positive weight
  for (int w = 0; w < nw; ++w)
    if (scenarios[w].disrupted(T) && scenarios[w].probability > 0.0) active.push_back(w);

  DecompositionResult res;
  if (opts.resume && !opts.checkpoint_path.empty())
    read_checkpoint(opts.checkpoint_path, case_fingerprint(pc), res);

  std::map<std::pair<int, std::string>, AnchorEntry> cache;
  auto master_solver = make_solver(opts.solver);
  const SolveLimits sub_limits{opts.subproblem_gap, kInf};

  double lb = res.log.empty() ? 0.0 : res.log.back().lower;
  double ub = res.log.empty() ? kInf : res.log.back().upper;
  int start_iter = res.log.empty() ? 1 : res.log.back().iteration + 1;
  bool have_incumbent = !res.log.empty();

  for (int iter = start_iter; iter <= opts.max_iterations; ++iter) {
    res.iterations = iter;
    MasterModel mm = build_master(pc, scenarios, res.pool);
    SolveResult ms = master_solver->solve(mm.model, {opts.master_gap, kInf});
    if (!ms.has_solution()) throw SolverError("master problem did not solve");
    lb = std::max(lb, ms.objective);

    // anchors and value-function estimates at the master solution
    std::vector<std::vector<uint8_t>> anchors(nw);
    std::vector<double> vhat(nw, 0.0);
    for (int w : active) {
      const int tau = scenarios[w].tau;
      std::vector<uint8_t> zhat(pc.component_count(), 1);
      if (tau > 1)
        for (int c = 0; c < pc.component_count(); ++c)
          zhat[c] = ms.values[mm.first_stage.z[c][tau - 2]] > 0.5;
      anchors[w] = std::move(zhat);
      vhat[w] = ms.values[mm.value_var[w]];
    }

    // forward: true recourse cost at each anchor
    std::vector<double> fvals(nw, 0.0);
    std::vector<AnchorEntry*> entries(nw, nullptr);
    for (int w : active)
      entries[w] = &cache[{w, anchor_key(anchors[w])}];
    parallel_over((int)active.size(), opts.threads, [&](int idx) {
      const int w = active[idx];
      AnchorEntry* e = entries[w];
      if (!e->has_f) {
        auto solver = opts.threads > 1 ? make_solver(opts.solver) : nullptr;
        MilpSolver& s = solver ? *solver : *master_solver;
        e->f_hat =
            second_stage_value(pc, scenarios[w], anchors[w], s, sub_limits).objective;
        e->has_f = true;
      }
      fvals[w] = e->f_hat;
    });

    double zbar = ms.objective;
    for (int w : active) zbar += scenarios[w].probability * (fvals[w] - vhat[w]);
    if (zbar < ub - 1e-9) {
      ub = zbar;
      res.incumbent = extract_plan(pc, mm.first_stage, ms.values);
      have_incumbent = true;
    }

    BoundsRecord rec;
    rec.iteration = iter;
    rec.lower = lb;
    rec.upper = ub;
    rec.incumbent_hash = have_incumbent ? plan_hash(res.incumbent) : "";
    rec.wall_seconds = elapsed();
    res.log.push_back(rec);
    if (!opts.checkpoint_path.empty())
      write_checkpoint(opts.checkpoint_path, res, case_fingerprint(pc));

    const double gap =
        (ub - lb) <= 1e-9 ? 0.0 : (ub - lb) / std::max(std::abs(ub), 1e-12);
    res.lower = lb;
    res.upper = ub;
    res.gap = gap;
    if (gap < opts.epsilon || (ub - lb) <= 1e-9) {
      res.converged = true;
      break;
    }
    if (elapsed() > opts.time_limit_seconds) break;

    // backward: one cut per scenario at the current anchor
    std::vector<Cut> fresh(nw);
    std::vector<uint8_t> added(nw, 0);
    parallel_over((int)active.size(), opts.threads, [&](int idx) {
      const int w = active[idx];
      AnchorEntry* e = entries[w];
      auto solver = opts.threads > 1 ? make_solver(opts.solver) : nullptr;
      MilpSolver& s = solver ? *solver : *master_solver;
      if (opts.mode == CutMode::LC) {
        if (e->has_lc) return;
        DualResult dr =
            solve_dual(pc, scenarios[w], anchors[w], e->f_hat, s, e->dual, opts.dual_tol);
        Cut cut;
        cut.scenario = w;
        cut.lambda = dr.lambda;
        cut.value = dr.value;
        cut.anchor = anchors[w];
        cut.iteration = iter;
        cut.kind = CutMode::LC;
        fresh[w] = std::move(cut);
        added[w] = 1;
        e->has_lc = true;
      } else {
        if (!e->has_smc) {
          Cut cut = smc_cut(pc, scenarios[w], anchors[w], opts.delta, e->f_hat, s,
                            e->dual, w, iter, opts.dual_tol);
          if (cut.kind == CutMode::LC) e->has_lc = true;
          e->has_smc = true;
          fresh[w] = std::move(cut);
          added[w] = 1;
        } else if (!e->has_lc) {
          // revisited anchor: escalate to the tight Lagrangian cut so the
          // epsilon = 0 termination argument applies
          DualResult dr = solve_dual(pc, scenarios[w], anchors[w], e->f_hat, s, e->dual,
                                     opts.dual_tol);
          Cut cut;
          cut.scenario = w;
          cut.lambda = dr.lambda;
          cut.value = dr.value;
          cut.anchor = anchors[w];
          cut.iteration = iter;
          cut.kind = CutMode::LC;
          fresh[w] = std::move(cut);
          added[w] = 1;
          e->has_lc = true;
        }
      }
    });
    bool any = false;
    for (int w : active)
      if (added[w]) {
        res.pool.push_back(std::move(fresh[w]));
        any = true;
      }
    if (!any) break;  // fixpoint: every anchor already carries its cuts
  }

  res.lower = lb;
  res.upper = ub;
  res.gap = (ub - lb) <= 1e-9 ? 0.0 : (ub - lb) / std::max(std::abs(ub), 1e-12);
  if (!res.converged) res.converged = res.gap < opts.epsilon;
  return res;
}

void write_bounds_csv(const std::string& path, const std::vector<BoundsRecord>& log) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write bounds log: " + path);
  out << "iteration,lower,upper,incumbent,wall_seconds\n";
  char buf[64];
  for (const BoundsRecord& r : log) {
    snprintf(buf, sizeof buf, "%.9g", r.lower);
    out << r.iteration << "," << buf << ",";
    snprintf(buf, sizeof buf, "%.9g", r.upper);
    out << buf << "," << r.incumbent_hash << ",";
    snprintf(buf, sizeof buf, "%.3f", r.wall_seconds);
    out << buf << "\n";
  }
}

namespace {

json cut_to_json(const Cut& c) {
  return json{{"scenario", c.scenario},
              {"lambda", c.lambda},
              {"value", c.value},
              {"anchor", c.anchor},
              {"iteration", c.iteration},
              {"kind", c.kind == CutMode::LC ? "lc" : "smc"}};
}

Cut cut_from_json(const json& j) {
  Cut c;
  c.scenario = j.at("scenario").get<int>();
  c.lambda = j.at("lambda").get<std::vector<double>>();
  c.value = j.at("value").get<double>();
  c.anchor = j.at("anchor").get<std::vector<uint8_t>>();
  c.iteration = j.at("iteration").get<int>();
  c.kind = j.at("kind").get<std::string>() == "smc" ? CutMode::SMC : CutMode::LC;
  return c;
}

}  // namespace

void write_checkpoint(const std::string& path, const DecompositionResult& state,
                      const std::string& case_hash) {
  json pool = json::array();
  for (const Cut& c : state.pool) pool.push_back(cut_to_json(c));
  json log = json::array();
  for (const BoundsRecord& r : state.log)
    log.push_back({{"iteration", r.iteration},
                   {"lower", r.lower},
                   {"upper", r.upper},
                   {"incumbent", r.incumbent_hash},
                   {"wall_seconds", r.wall_seconds}});
  json jz = json::array();
  for (const auto& zc : state.incumbent.z) jz.push_back(zc);
  json j{{"format", "gridfire-checkpoint/1"},
         {"case_hash", case_hash},
         {"pool", pool},
         {"log", log},
         {"incumbent",
          {{"horizon", state.incumbent.horizon},
           {"z", jz},
           {"served", state.incumbent.served},
           {"angle", state.incumbent.angle},
           {"flow", state.incumbent.flow},
           {"gen", state.incumbent.gen}}}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << j.dump() << "\n";
}

bool read_checkpoint(const std::string& path, const std::string& case_hash,
                     DecompositionResult& state) {
  std::ifstream in(path);
  if (!in) return false;
  try {
    json j = json::parse(in);
    if (j.value("format", "") != "gridfire-checkpoint/1") return false;
    if (j.value("case_hash", "") != case_hash)
      throw ValidationError("checkpoint belongs to a different case");
    state.pool.clear();
    for (const json& c : j.at("pool")) state.pool.push_back(cut_from_json(c));
    state.log.clear();
    for (const json& r : j.at("log")) {
      BoundsRecord rec;
      rec.iteration = r.at("iteration").get<int>();
      rec.lower = r.at("lower").get<double>();
      rec.upper = r.at("upper").get<double>();
      rec.incumbent_hash = r.value("incumbent", "");
      rec.wall_seconds = r.value("wall_seconds", 0.0);
      state.log.push_back(rec);
    }
    const json& inc = j.at("incumbent");
    state.incumbent.horizon = inc.at("horizon").get<int>();
    state.incumbent.z.clear();
    for (const json& zc : inc.at("z"))
      state.incumbent.z.push_back(zc.get<std::vector<uint8_t>>());
    state.incumbent.served = inc.at("served").get<std::vector<std::vector<double>>>();
    state.incumbent.angle = inc.at("angle").get<std::vector<std::vector<double>>>();
    state.incumbent.flow = inc.at("flow").get<std::vector<std::vector<double>>>();
    state.incumbent.gen = inc.at("gen").get<std::vector<std::vector<double>>>();
    return !state.log.empty();
  } catch (const json::exception&) {
    return false;
  }
}

}  // namespace gridfire
