#include <dlfcn.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <vector>

#include "gridfire/linear_model.hpp"

// GLPK is used strictly as an optional runtime plugin: the shared library is
// discovered and dlopen'd, never linked. The declarations below mirror the
// stable documented prefix of the GLPK 4.x/5.x ABI; control structs carry an
// oversized reserved tail and are initialized by glp_init_* before use.

namespace gridfire {

namespace {

using glp_prob = void;

struct glp_smcp {
  int msg_lev;
  int meth;
  int pricing;
  int r_test;
  double tol_bnd;
  double tol_dj;
  double tol_piv;
  double obj_ll;
  double obj_ul;
  int it_lim;
  int tm_lim;
  int out_frq;
  int out_dly;
  int presolve;
  unsigned char reserved[512];
};

struct glp_iocp {
  int msg_lev;
  int br_tech;
  int bt_tech;
  double tol_int;
  double tol_obj;
  int tm_lim;
  int out_frq;
  int out_dly;
  void* cb_func;
  void* cb_info;
  int cb_size;
  int pp_tech;
  double mip_gap;
  int mir_cuts;
  int gmi_cuts;
  int cov_cuts;
  int clq_cuts;
  int presolve;
  int binarize;
  int fp_heur;
  unsigned char reserved[512];
};

constexpr int GLP_MIN = 1;
constexpr int GLP_FR = 1, GLP_LO = 2, GLP_UP = 3, GLP_DB = 4, GLP_FX = 5;
constexpr int GLP_CV = 1, GLP_BV = 3;
constexpr int GLP_ON = 1, GLP_OFF = 0;
constexpr int GLP_MSG_OFF = 0;
constexpr int GLP_UNDEF = 1, GLP_FEAS = 2, GLP_NOFEAS = 4, GLP_OPT = 5, GLP_UNBND = 6;
constexpr int GLP_EITLIM = 0x08, GLP_ETMLIM = 0x09, GLP_ENOPFS = 0x0A,
              GLP_ENODFS = 0x0B, GLP_EMIPGAP = 0x0E;

struct GlpkApi {
  void* handle = nullptr;
  glp_prob* (*create_prob)();
  void (*delete_prob)(glp_prob*);
  void (*set_obj_dir)(glp_prob*, int);
  int (*add_rows)(glp_prob*, int);
  int (*add_cols)(glp_prob*, int);
  void (*set_row_bnds)(glp_prob*, int, int, double, double);
  void (*set_col_bnds)(glp_prob*, int, int, double, double);
  void (*set_obj_coef)(glp_prob*, int, double);
  void (*set_col_kind)(glp_prob*, int, int);
  void (*load_matrix)(glp_prob*, int, const int*, const int*, const double*);
  void (*init_smcp)(glp_smcp*);
  int (*simplex)(glp_prob*, const glp_smcp*);
  int (*get_status)(glp_prob*);
  double (*get_obj_val)(glp_prob*);
  double (*get_col_prim)(glp_prob*, int);
  void (*init_iocp)(glp_iocp*);
  int (*intopt)(glp_prob*, const glp_iocp*);
  int (*mip_status)(glp_prob*);
  double (*mip_obj_val)(glp_prob*);
  double (*mip_col_val)(glp_prob*, int);
  int (*term_out)(int);
  const char* (*version)();
};

// Loads the library at `path`; when direct loading fails on unresolved
// sibling dependencies (manylinux-style bundles), preloads every lib*.so*
// from the same directory in repeated rounds.
void* dlopen_with_siblings(const std::string& path) {
  if (void* h = dlopen(path.c_str(), RTLD_NOW | RTLD_LOCAL)) return h;
  namespace fs = std::filesystem;
  fs::path p(path);
  std::error_code ec;
  if (!fs::exists(p, ec)) return nullptr;
  std::vector<std::string> sibs;
  for (const auto& e : fs::directory_iterator(p.parent_path(), ec)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("lib", 0) == 0 && name.find(".so") != std::string::npos &&
        e.path().string() != path)
      sibs.push_back(e.path().string());
  }
  for (size_t round = 0; round < sibs.size() + 1; ++round) {
    bool progress = false;
    for (const std::string& s : sibs)
      if (dlopen(s.c_str(), RTLD_NOW | RTLD_GLOBAL)) progress = true;
    if (void* h = dlopen(path.c_str(), RTLD_NOW | RTLD_LOCAL)) return h;
    if (!progress) break;
  }
  return nullptr;
}

const GlpkApi* load_glpk() {
  static std::once_flag flag;
  static GlpkApi api;
  static bool ok = false;
  std::call_once(flag, [] {
    std::vector<std::string> candidates;
    if (const char* env = std::getenv("GRIDFIRE_GLPK")) candidates.push_back(env);
    candidates.insert(candidates.end(),
                      {"libglpk.so", "libglpk.so.40", "libglpk.so.36", "libglpk.so.35"});
#ifdef GRIDFIRE_GLPK_HINT
    candidates.push_back(GRIDFIRE_GLPK_HINT);
#endif
    void* h = nullptr;
    for (const std::string& c : candidates) {
      h = dlopen_with_siblings(c);
      if (h) break;
    }
    if (!h) return;
    auto sym = [&](const char* name) { return dlsym(h, name); };
    api.handle = h;
    api.create_prob = (glp_prob * (*)()) sym("glp_create_prob");
    api.delete_prob = (void (*)(glp_prob*))sym("glp_delete_prob");
    api.set_obj_dir = (void (*)(glp_prob*, int))sym("glp_set_obj_dir");
    api.add_rows = (int (*)(glp_prob*, int))sym("glp_add_rows");
    api.add_cols = (int (*)(glp_prob*, int))sym("glp_add_cols");
    api.set_row_bnds = (void (*)(glp_prob*, int, int, double, double))sym("glp_set_row_bnds");
    api.set_col_bnds = (void (*)(glp_prob*, int, int, double, double))sym("glp_set_col_bnds");
    api.set_obj_coef = (void (*)(glp_prob*, int, double))sym("glp_set_obj_coef");
    api.set_col_kind = (void (*)(glp_prob*, int, int))sym("glp_set_col_kind");
    api.load_matrix =
        (void (*)(glp_prob*, int, const int*, const int*, const double*))sym("glp_load_matrix");
    api.init_smcp = (void (*)(glp_smcp*))sym("glp_init_smcp");
    api.simplex = (int (*)(glp_prob*, const glp_smcp*))sym("glp_simplex");
    api.get_status = (int (*)(glp_prob*))sym("glp_get_status");
    api.get_obj_val = (double (*)(glp_prob*))sym("glp_get_obj_val");
    api.get_col_prim = (double (*)(glp_prob*, int))sym("glp_get_col_prim");
    api.init_iocp = (void (*)(glp_iocp*))sym("glp_init_iocp");
    api.intopt = (int (*)(glp_prob*, const glp_iocp*))sym("glp_intopt");
    api.mip_status = (int (*)(glp_prob*))sym("glp_mip_status");
    api.mip_obj_val = (double (*)(glp_prob*))sym("glp_mip_obj_val");
    api.mip_col_val = (double (*)(glp_prob*, int))sym("glp_mip_col_val");
    api.term_out = (int (*)(int))sym("glp_term_out");
    api.version = (const char* (*)())sym("glp_version");
    ok = api.create_prob && api.delete_prob && api.set_obj_dir && api.add_rows &&
         api.add_cols && api.set_row_bnds && api.set_col_bnds && api.set_obj_coef &&
         api.set_col_kind && api.load_matrix && api.init_smcp && api.simplex &&
         api.get_status && api.get_obj_val && api.get_col_prim && api.init_iocp &&
         api.intopt && api.mip_status && api.mip_obj_val && api.mip_col_val &&
         api.term_out && api.version;
  });
  return ok ? &api : nullptr;
}

class GlpkSolver final : public MilpSolver {
 public:
  explicit GlpkSolver(const GlpkApi* api) : api_(api) {}
  std::string name() const override { return "glpk"; }

  SolveResult solve(const LinearModel& model, const SolveLimits& limits) override {
    const auto t0 = std::chrono::steady_clock::now();
    api_->term_out(GLP_OFF);
    glp_prob* p = api_->create_prob();
    struct Guard {
      const GlpkApi* api;
      glp_prob* p;
      ~Guard() { api->delete_prob(p); }
    } guard{api_, p};

    api_->set_obj_dir(p, GLP_MIN);
    const int n = model.num_variables();
    const int m = model.num_constraints();
    if (n > 0) api_->add_cols(p, n);
    if (m > 0) api_->add_rows(p, m);

    bool mip = false;
    for (int j = 0; j < n; ++j) {
      const ModelVariable& v = model.variables()[j];
      set_bounds(p, j + 1, v.lower, v.upper, /*row=*/false);
      if (v.kind == VarKind::Binary && v.lower < v.upper) {
        api_->set_col_kind(p, j + 1, GLP_BV);
        // kind BV resets bounds to [0,1]; restore any tighter box
        set_bounds(p, j + 1, v.lower, v.upper, false);
        mip = true;
      } else {
        api_->set_col_kind(p, j + 1, GLP_CV);
      }
      if (model.objective()[j] != 0.0) api_->set_obj_coef(p, j + 1, model.objective()[j]);
    }
    api_->set_obj_coef(p, 0, model.objective_offset());

    std::vector<int> ia{0}, ja{0};
    std::vector<double> ar{0.0};
    for (int i = 0; i < m; ++i) {
      const ModelConstraint& con = model.constraints()[i];
      switch (con.sense) {
        case ConstraintSense::LessEqual:
          api_->set_row_bnds(p, i + 1, GLP_UP, 0.0, con.rhs);
          break;
        case ConstraintSense::GreaterEqual:
          api_->set_row_bnds(p, i + 1, GLP_LO, con.rhs, 0.0);
          break;
        case ConstraintSense::Equal:
          api_->set_row_bnds(p, i + 1, GLP_FX, con.rhs, con.rhs);
          break;
      }
      std::map<int, double> merged;
      for (const auto& [v, c] : con.terms) merged[v] += c;
      for (const auto& [v, c] : merged) {
        if (c == 0.0) continue;
        ia.push_back(i + 1);
        ja.push_back(v + 1);
        ar.push_back(c);
      }
    }
    api_->load_matrix(p, static_cast<int>(ia.size()) - 1, ia.data(), ja.data(), ar.data());

    SolveResult res;
    const int tm_ms = std::isfinite(limits.time_limit_seconds)
                          ? std::max(1, (int)(limits.time_limit_seconds * 1000))
                          : INT32_MAX;
    if (mip) {
      glp_iocp parm;
      api_->init_iocp(&parm);
      parm.msg_lev = GLP_MSG_OFF;
      parm.presolve = GLP_ON;
      parm.mip_gap = limits.mip_gap;
      parm.tm_lim = tm_ms;
      const int rc = api_->intopt(p, &parm);
      const int st = api_->mip_status(p);
      if (rc == GLP_ENOPFS || st == GLP_NOFEAS) {
        res.status = SolveStatus::Infeasible;
      } else if (rc == GLP_ENODFS) {
        res.status = SolveStatus::Unbounded;
      } else if (rc == 0 || rc == GLP_EMIPGAP || rc == GLP_ETMLIM || rc == GLP_EITLIM) {
        if (st == GLP_OPT || ((rc == 0 || rc == GLP_EMIPGAP) && st == GLP_FEAS)) {
          res.status = SolveStatus::Optimal;
          res.gap = limits.mip_gap;
        } else if (st == GLP_FEAS) {
          res.status = SolveStatus::Feasible;
          res.gap = kInf;
        } else if (st == GLP_UNDEF) {
          res.status = SolveStatus::Limit;
        } else {
          throw SolverError("glpk: unexpected MIP status " + std::to_string(st));
        }
        if (res.has_solution()) {
          res.objective = api_->mip_obj_val(p);
          res.values.resize(n);
          for (int j = 0; j < n; ++j) res.values[j] = api_->mip_col_val(p, j + 1);
        }
      } else {
        throw SolverError("glpk: intopt failed with code " + std::to_string(rc));
      }
    } else {
      glp_smcp parm;
      api_->init_smcp(&parm);
      parm.msg_lev = GLP_MSG_OFF;
      parm.presolve = GLP_OFF;
      parm.tm_lim = tm_ms;
      const int rc = api_->simplex(p, &parm);
      const int st = api_->get_status(p);
      if (rc != 0 && rc != GLP_ETMLIM && rc != GLP_EITLIM)
        throw SolverError("glpk: simplex failed with code " + std::to_string(rc));
      if (st == GLP_OPT) {
        res.status = SolveStatus::Optimal;
        res.gap = 0.0;
        res.objective = api_->get_obj_val(p);
        res.values.resize(n);
        for (int j = 0; j < n; ++j) res.values[j] = api_->get_col_prim(p, j + 1);
      } else if (st == GLP_NOFEAS) {
        res.status = SolveStatus::Infeasible;
      } else if (st == GLP_UNBND) {
        res.status = SolveStatus::Unbounded;
      } else if (st == GLP_UNDEF || st == GLP_FEAS) {
        res.status = SolveStatus::Limit;
      } else {
        res.status = SolveStatus::Infeasible;  // GLP_INFEAS after full solve
      }
    }
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }

 private:
  void set_bounds(glp_prob* p, int idx, double lo, double hi, bool row) {
    auto setter = row ? api_->set_row_bnds : api_->set_col_bnds;
    const bool flo = std::isfinite(lo), fhi = std::isfinite(hi);
    if (flo && fhi) {
      if (lo == hi)
        setter(p, idx, GLP_FX, lo, hi);
      else
        setter(p, idx, GLP_DB, lo, hi);
    } else if (flo) {
      setter(p, idx, GLP_LO, lo, 0.0);
    } else if (fhi) {
      setter(p, idx, GLP_UP, 0.0, hi);
    } else {
      setter(p, idx, GLP_FR, 0.0, 0.0);
    }
  }

  const GlpkApi* api_;
};

}  // namespace

bool glpk_available() { return load_glpk() != nullptr; }

std::unique_ptr<MilpSolver> make_glpk_solver() {
  const GlpkApi* api = load_glpk();
  if (!api)
    throw SolverError(
        "GLPK backend unavailable: no loadable libglpk found "
        "(set GRIDFIRE_GLPK to a shared-library path)");
  return std::make_unique<GlpkSolver>(api);
}

}  // namespace gridfire
