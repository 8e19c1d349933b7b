#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gridfire/artifacts.hpp"
#include "gridfire/benchmarks.hpp"
#include "gridfire/decomposition.hpp"
#include "gridfire/evaluation.hpp"
#include "gridfire/plot.hpp"

namespace py = pybind11;
using namespace gridfire;

namespace {

DecompositionOptions make_opts(double epsilon, double delta, const std::string& cut,
                               const std::string& solver, int threads, int max_iters) {
  DecompositionOptions opts;
  opts.epsilon = epsilon;
  opts.delta = delta;
  opts.mode = cut == "smc" ? CutMode::SMC : CutMode::LC;
  opts.solver = solver_choice_from_string(solver);
  opts.threads = threads;
  opts.max_iterations = max_iters;
  return opts;
}

}  // namespace

PYBIND11_MODULE(_gridfire, m) {
  m.doc() = "wildfire-aware preemptive de-energization planning";

  py::register_exception<ParseError>(m, "ParseError");
  py::register_exception<ValidationError>(m, "ValidationError");
  py::register_exception<SolverError>(m, "SolverError");

  py::enum_<ComponentKind>(m, "ComponentKind")
      .value("Bus", ComponentKind::Bus)
      .value("Generator", ComponentKind::Generator)
      .value("Line", ComponentKind::Line);

  py::class_<PowerCase>(m, "PowerCase")
      .def_property_readonly("horizon", [](const PowerCase& pc) { return pc.horizon; })
      .def_property_readonly("n_buses", [](const PowerCase& pc) { return pc.buses.size(); })
      .def_property_readonly("n_generators",
                             [](const PowerCase& pc) { return pc.generators.size(); })
      .def_property_readonly("n_lines", [](const PowerCase& pc) { return pc.lines.size(); })
      .def_property_readonly("n_loads", [](const PowerCase& pc) { return pc.loads.size(); })
      .def("component_count", &PowerCase::component_count)
      .def("component_label", &PowerCase::component_label)
      .def("fingerprint", [](const PowerCase& pc) { return case_fingerprint(pc); })
      .def("__repr__", [](const PowerCase& pc) {
        return "<PowerCase " + std::to_string(pc.buses.size()) + " buses, " +
               std::to_string(pc.lines.size()) + " lines, T=" +
               std::to_string(pc.horizon) + ">";
      });

  m.def("load_case", &load_case, py::arg("path"));
  m.def("parse_case", &parse_case, py::arg("text"));
  m.def("save_case", &save_case, py::arg("case"), py::arg("path"));
  m.def("demand", &demand, py::arg("case"), py::arg("load"), py::arg("period"));
  m.def("fault_prob", &fault_prob, py::arg("hourly_rate"));
  m.def("utm_zone_for", &utm_zone_for, py::arg("lon_deg"));
  m.def(
      "latlon_to_utm",
      [](double lat, double lon, int zone) {
        UtmPoint p = latlon_to_utm(lat, lon, zone);
        return py::make_tuple(p.easting, p.northing, p.zone);
      },
      py::arg("lat"), py::arg("lon"), py::arg("zone") = 0);

  py::class_<GridGeometry>(m, "GridGeometry")
      .def_readonly("n_cols", &GridGeometry::n_cols)
      .def_readonly("n_rows", &GridGeometry::n_rows)
      .def_readonly("cell_size", &GridGeometry::cell_size)
      .def_readonly("zone", &GridGeometry::zone)
      .def("cells", &GridGeometry::cells);
  py::class_<CellMaps>(m, "CellMaps")
      .def_readonly("bus_cell", &CellMaps::bus_cell)
      .def_readonly("line_cells", &CellMaps::line_cells)
      .def_readonly("cells_with_line", &CellMaps::cells_with_line);
  m.def(
      "build_grid",
      [](const PowerCase& pc, double cell_size) {
        auto [geom, maps] = build_grid(pc, cell_size);
        return py::make_tuple(geom, maps);
      },
      py::arg("case"), py::arg("cell_size") = 1000.0);

  py::class_<EnvLayers>(m, "EnvLayers")
      .def_static("uniform", &EnvLayers::uniform)
      .def_readwrite("q0", &EnvLayers::q0)
      .def_readwrite("fuel", &EnvLayers::fuel);
  m.def("load_env_csv", &load_env_csv, py::arg("path"), py::arg("geom"));
  m.def("spread_prob", &spread_prob, py::arg("env"), py::arg("period"), py::arg("cell"));
  m.def("ignition_prob", &ignition_prob, py::arg("case"), py::arg("maps"),
        py::arg("cell"));

  py::class_<DisruptionScenario>(m, "DisruptionScenario")
      .def_readonly("tau", &DisruptionScenario::tau)
      .def_readonly("probability", &DisruptionScenario::probability)
      .def_readonly("exo_damage", &DisruptionScenario::exo_damage)
      .def_readonly("fault", &DisruptionScenario::fault)
      .def_readonly("affected", &DisruptionScenario::affected)
      .def("disrupted", &DisruptionScenario::disrupted);
  m.def(
      "generate_scenarios",
      [](const PowerCase& pc, const GridGeometry& geom, const CellMaps& maps,
         const EnvLayers& env, int n, uint64_t seed, bool exogenous, bool endogenous,
         int threads) {
        SimulationOptions opts;
        opts.count = n;
        opts.seed = seed;
        opts.exogenous = exogenous;
        opts.endogenous = endogenous;
        opts.threads = threads;
        return generate_scenarios(pc, geom, maps, env, opts);
      },
      py::arg("case"), py::arg("geom"), py::arg("maps"), py::arg("env"), py::arg("n"),
      py::arg("seed") = 0, py::arg("exogenous") = true, py::arg("endogenous") = true,
      py::arg("threads") = 1);

  py::class_<ShutoffPlan>(m, "ShutoffPlan")
      .def_readonly("horizon", &ShutoffPlan::horizon)
      .def_readonly("z", &ShutoffPlan::z)
      .def_readonly("served", &ShutoffPlan::served)
      .def("off_count", &ShutoffPlan::off_count)
      .def("energized_at", &ShutoffPlan::energized_at);

  py::class_<BoundsRecord>(m, "BoundsRecord")
      .def_readonly("iteration", &BoundsRecord::iteration)
      .def_readonly("lower", &BoundsRecord::lower)
      .def_readonly("upper", &BoundsRecord::upper);

  py::class_<DecompositionResult>(m, "DecompositionResult")
      .def_readonly("incumbent", &DecompositionResult::incumbent)
      .def_readonly("lower", &DecompositionResult::lower)
      .def_readonly("upper", &DecompositionResult::upper)
      .def_readonly("gap", &DecompositionResult::gap)
      .def_readonly("converged", &DecompositionResult::converged)
      .def_readonly("iterations", &DecompositionResult::iterations)
      .def_readonly("log", &DecompositionResult::log);
  m.def(
      "solve_decomposition",
      [](const PowerCase& pc, const std::vector<DisruptionScenario>& scen,
         double epsilon, double delta, const std::string& cut, const std::string& solver,
         int threads, int max_iterations) {
        return run_decomposition(
            pc, scen, make_opts(epsilon, delta, cut, solver, threads, max_iterations));
      },
      py::arg("case"), py::arg("scenarios"), py::arg("epsilon") = 0.01,
      py::arg("delta") = 1e-4, py::arg("cut") = "smc", py::arg("solver") = "auto",
      py::arg("threads") = 1, py::arg("max_iterations") = 500,
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "solve_extensive",
      [](const PowerCase& pc, const std::vector<DisruptionScenario>& scen,
         const std::string& mode, const std::string& solver) {
        ExtensiveModel em = build_extensive(
            pc, scen,
            mode == "worst_case" ? ObjectiveMode::WorstCase : ObjectiveMode::Expectation);
        auto s = make_solver(solver_choice_from_string(solver));
        SolveResult res = s->solve(em.model, {1e-6, kInf});
        if (!res.has_solution()) throw SolverError("extensive form did not solve");
        return py::make_tuple(res.objective, extract_plan(pc, em.first_stage, res.values));
      },
      py::arg("case"), py::arg("scenarios"), py::arg("mode") = "expectation",
      py::arg("solver") = "auto");

  py::class_<ScenarioCost>(m, "ScenarioCost")
      .def_readonly("pre_shed", &ScenarioCost::pre_shed)
      .def_readonly("post_shed", &ScenarioCost::post_shed)
      .def_readonly("damage", &ScenarioCost::damage)
      .def("total", &ScenarioCost::total);
  py::class_<EvaluationReport>(m, "EvaluationReport")
      .def_readonly("plan_tag", &EvaluationReport::plan_tag)
      .def_readonly("per_scenario", &EvaluationReport::per_scenario)
      .def_readonly("nondisruptive_shed", &EvaluationReport::nondisruptive_shed)
      .def_readonly("disruptive_shed", &EvaluationReport::disruptive_shed)
      .def_readonly("disruptive_damage", &EvaluationReport::disruptive_damage)
      .def_readonly("g_n", &EvaluationReport::g_n)
      .def_readonly("worst_case", &EvaluationReport::worst_case);
  m.def(
      "evaluate_plan",
      [](const PowerCase& pc, const ShutoffPlan& plan,
         const std::vector<DisruptionScenario>& test_set, const std::string& tag,
         const std::string& solver, int threads) {
        EvaluateOptions opts;
        opts.solver = solver_choice_from_string(solver);
        opts.threads = threads;
        return evaluate_plan(pc, plan, test_set, tag, opts);
      },
      py::arg("case"), py::arg("plan"), py::arg("test_set"), py::arg("tag") = "",
      py::arg("solver") = "auto", py::arg("threads") = 1,
      py::call_guard<py::gil_scoped_release>());

  py::class_<BenchmarkResult>(m, "BenchmarkResult")
      .def_readonly("tag", &BenchmarkResult::tag)
      .def_readonly("plan", &BenchmarkResult::plan)
      .def_readonly("objective", &BenchmarkResult::objective);
  py::class_<WaitAndSeeResult>(m, "WaitAndSeeResult")
      .def_readonly("costs", &WaitAndSeeResult::costs)
      .def_readonly("expected", &WaitAndSeeResult::expected);
  py::class_<RiskTable>(m, "RiskTable")
      .def_readonly("risk", &RiskTable::risk)
      .def_readonly("risk_total", &RiskTable::risk_total)
      .def_readonly("demand_total", &RiskTable::demand_total);
  py::class_<RobustResult>(m, "RobustResult")
      .def_readonly("plan", &RobustResult::plan)
      .def_readonly("objective", &RobustResult::objective)
      .def_readonly("worst_case", &RobustResult::worst_case)
      .def_readonly("support", &RobustResult::support)
      .def_readonly("converged", &RobustResult::converged);

  m.def(
      "solve_deterministic",
      [](const PowerCase& pc, const std::string& solver) {
        BenchmarkOptions opts;
        opts.solver = solver_choice_from_string(solver);
        return solve_deterministic(pc, opts);
      },
      py::arg("case"), py::arg("solver") = "auto",
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "solve_wait_and_see",
      [](const PowerCase& pc, const std::vector<DisruptionScenario>& scen,
         const std::string& solver, int threads) {
        BenchmarkOptions opts;
        opts.solver = solver_choice_from_string(solver);
        opts.threads = threads;
        return solve_wait_and_see(pc, scen, opts);
      },
      py::arg("case"), py::arg("scenarios"), py::arg("solver") = "auto",
      py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
  m.def("compute_risk_table", &compute_risk_table, py::arg("case"), py::arg("scenarios"));
  m.def(
      "solve_risk_based",
      [](const PowerCase& pc, const RiskTable& table, double alpha,
         const std::string& solver) {
        BenchmarkOptions opts;
        opts.solver = solver_choice_from_string(solver);
        return solve_risk_based(pc, table, alpha, opts);
      },
      py::arg("case"), py::arg("risk"), py::arg("alpha"), py::arg("solver") = "auto",
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "solve_robust",
      [](const PowerCase& pc, const std::vector<DisruptionScenario>& scen,
         const std::string& solver, int threads) {
        BenchmarkOptions opts;
        opts.solver = solver_choice_from_string(solver);
        opts.threads = threads;
        return solve_robust(pc, scen, opts);
      },
      py::arg("case"), py::arg("scenarios"), py::arg("solver") = "auto",
      py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());

  m.def("glpk_available", &glpk_available);
  m.def("second_stage_value",
        [](const PowerCase& pc, const DisruptionScenario& sc,
           const std::vector<uint8_t>& z_hat, const std::string& solver) {
          auto s = make_solver(solver_choice_from_string(solver));
          SecondStageOutcome out = second_stage_value(pc, sc, z_hat, *s, {1e-9, kInf});
          return py::make_tuple(out.objective, out.shed_cost, out.damage_cost);
        },
        py::arg("case"), py::arg("scenario"), py::arg("z_hat"), py::arg("solver") = "auto");

  m.attr("__version__") = "0.1.0";
}
