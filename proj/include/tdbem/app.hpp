#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "tdbem/bbfmm.hpp"
#include "tdbem/solver.hpp"

namespace tdbem {

struct RunConfig {
  std::string problem = "dirichlet";  // dirichlet | mixed
  int level = 1;                      // cube refinement level, used when mesh is empty
  std::string mesh;                   // OFF path
  double c = 1.0;
  double end_time = 3.0;
  Index steps = 0;  // 0: from dt_ratio * h / c
  double dt_ratio = 0.7;
  std::string backend = "dense";  // dense | aca | fmm
  double eps_aca = 1e-4;
  double eps = 0.0;  // 0: 100 * eps_aca
  int fmm_levels = 1;
  int fmm_order = 2;
  Index b_min = 20;
  double eta = 0.8;
  Index r_max = -1;
  double tol = 1e-8;
  std::vector<Vec3> probes{Vec3(0.0, 0.0, 0.0), Vec3(1.5, 0.2, 0.3)};
  Vec3 source{0.8, 0.2, 0.3};
  std::string out = "out";
  std::string preset;

  double tensor_eps() const { return eps > 0.0 ? eps : 100.0 * eps_aca; }
};

// Parameters of the refinement levels 1..5: step count, ACA tolerance, FMM
// levels and interpolation points per direction.
void apply_preset(RunConfig& cfg, const std::string& name);
// key=value lines, '#' starts a comment; a 'preset' key is applied first
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path);
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

// Mesh, problem, contour and the operator families of one run.
struct RunSetup {
  RunConfig cfg;
  TriangleMesh mesh;
  BoundaryProblem problem;
  std::vector<double> steps;
  ButcherTableau tableau = radau_iia_2();
  Contour contour;
  std::unique_ptr<LayerOperator> v_op, k_op, pv_op, pk_op;
  std::shared_ptr<FmmGeometry> geometry;
  std::shared_ptr<M2LTensor> m2l;
  std::unique_ptr<OperatorFamily> V, K, PV, PK;
  double build_seconds = 0.0;
};

std::unique_ptr<RunSetup> setup_run(const RunConfig& cfg);

struct RankSummary {
  Index min = 0;
  double mean = 0.0;
  Index max = 0;
};
RankSummary rank_summary(const FamilyStats& st);
// compressed minus shared bytes over dense bytes, summed over the families
double compression_ratio(const std::vector<FamilyStats>& stats);

struct RunResult {
  Solution solution;
  std::vector<TraceError> errors;
  double lmax = 0.0;
  // largest probe value before the wave can arrive, relative to the peak
  double precursor = 0.0;
  FamilyStats v_stats, k_stats;
  double build_seconds = 0.0;
};

RunResult run_problem(RunSetup& setup);
double precursor_ratio(const Solution& sol, const RunSetup& setup);

// Output files in cfg.out; the manifest is written even when the run throws.
void write_traces(const RunSetup& setup, const RunResult& res);
void write_stats(const RunSetup& setup, const std::vector<FamilyStats>& stats);
void write_timings(const RunSetup& setup, const RunResult& res);
void write_manifest(const RunSetup* setup, const RunConfig& cfg, const RunResult* res, const std::string& note);

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  double dt = 0.0;
  double lmax = 0.0;
  double eoc = std::numeric_limits<double>::quiet_NaN();  // none on the first level
};
void write_errors(const std::string& path, const std::vector<ConvergenceRow>& rows);

}  // namespace tdbem
