#include "tdbem/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace tdbem {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw DomainError("config key '" + key + "': not a number: " + v);
  }
}

Index to_index(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw DomainError("config key '" + key + "': not an integer: " + v);
  return static_cast<Index>(d);
}

std::vector<Vec3> to_points(const std::string& key, const std::string& v) {
  std::vector<Vec3> pts;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    std::replace(item.begin(), item.end(), ',', ' ');
    std::stringstream ps(item);
    Vec3 p;
    if (!(ps >> p.x() >> p.y() >> p.z())) throw DomainError("config key '" + key + "': bad point: " + item);
    pts.push_back(p);
  }
  return pts;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::string fmt(const Vec3& p) { return fmt(p.x()) + "," + fmt(p.y()) + "," + fmt(p.z()); }

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return ap.norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return bp.norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return (p - (a + d1 / (d1 - d3) * ab)).norm();
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return cp.norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return (p - (a + d2 / (d2 - d6) * ac)).norm();
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    return (p - (b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  return (p - (a + ab * (vb * denom) + ac * (vc * denom))).norm();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out);
  std::ofstream f(std::filesystem::path(cfg.out) / name);
  if (!f) throw DomainError("cannot write " + (std::filesystem::path(cfg.out) / name).string());
  f.precision(12);
  return f;
}

}  // namespace

void apply_preset(RunConfig& cfg, const std::string& name) {
  const std::string prefix = "paper-level-";
  if (name.rfind(prefix, 0) != 0) throw DomainError("unknown preset: " + name);
  const int L = static_cast<int>(to_index("preset", name.substr(prefix.size())));
  if (L < 1 || L > 5) throw DomainError("preset level must be 1..5: " + name);
  static constexpr int fmm_levels[] = {1, 2, 2, 3, 4};
  cfg.preset = name;
  cfg.level = L;
  cfg.mesh.clear();
  cfg.end_time = 3.0;
  cfg.steps = Index{10} << (L - 1);
  cfg.eps_aca = std::pow(10.0, -(3 + L));
  cfg.eps = 0.0;
  cfg.fmm_levels = fmm_levels[L - 1];
  // tabulated interpolation order is the polynomial degree
  cfg.fmm_order = L + 1;
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DomainError("config line " + std::to_string(lineno) + ": expected key=value");
    kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  RunConfig cfg = base;
  for (const auto& [k, v] : kv) {
    if (k == "preset") apply_preset(cfg, v);
  }
  for (const auto& [k, v] : kv) {
    if (k == "preset") continue;
    if (k == "problem") {
      if (v != "dirichlet" && v != "mixed") throw DomainError("problem must be dirichlet or mixed");
      cfg.problem = v;
    } else if (k == "level") {
      cfg.level = static_cast<int>(to_index(k, v));
    } else if (k == "mesh") {
      cfg.mesh = v;
    } else if (k == "c") {
      cfg.c = to_double(k, v);
    } else if (k == "end_time") {
      cfg.end_time = to_double(k, v);
    } else if (k == "steps") {
      cfg.steps = to_index(k, v);
    } else if (k == "dt_ratio") {
      cfg.dt_ratio = to_double(k, v);
    } else if (k == "backend") {
      if (v != "dense" && v != "aca" && v != "fmm") throw DomainError("backend must be dense, aca or fmm");
      cfg.backend = v;
    } else if (k == "eps_aca") {
      cfg.eps_aca = to_double(k, v);
    } else if (k == "eps") {
      cfg.eps = to_double(k, v);
    } else if (k == "fmm.levels") {
      cfg.fmm_levels = static_cast<int>(to_index(k, v));
    } else if (k == "fmm.order") {
      cfg.fmm_order = static_cast<int>(to_index(k, v));
    } else if (k == "b_min") {
      cfg.b_min = to_index(k, v);
    } else if (k == "eta") {
      cfg.eta = to_double(k, v);
    } else if (k == "r_max") {
      cfg.r_max = to_index(k, v);
    } else if (k == "tol") {
      cfg.tol = to_double(k, v);
    } else if (k == "probes") {
      cfg.probes = to_points(k, v);
    } else if (k == "source") {
      const auto p = to_points(k, v);
      if (p.size() != 1) throw DomainError("source must be a single point");
      cfg.source = p[0];
    } else if (k == "out") {
      cfg.out = v;
    } else {
      throw DomainError("unknown config key: " + k);
    }
  }
  if (!(cfg.c > 0.0) || !(cfg.end_time > 0.0)) throw DomainError("c and end_time must be positive");
  if (cfg.steps < 0) throw DomainError("steps must be non-negative");
  if (!(cfg.eps_aca > 0.0) || cfg.eps < 0.0) throw DomainError("tolerances must be positive");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DomainError("cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg) {
  std::string probes;
  for (const auto& p : cfg.probes) probes += (probes.empty() ? "" : ";") + fmt(p);
  return {{"preset", cfg.preset},
          {"problem", cfg.problem},
          {"level", std::to_string(cfg.level)},
          {"mesh", cfg.mesh},
          {"c", fmt(cfg.c)},
          {"end_time", fmt(cfg.end_time)},
          {"steps", std::to_string(cfg.steps)},
          {"dt_ratio", fmt(cfg.dt_ratio)},
          {"backend", cfg.backend},
          {"eps_aca", fmt(cfg.eps_aca)},
          {"eps", fmt(cfg.tensor_eps())},
          {"fmm.levels", std::to_string(cfg.fmm_levels)},
          {"fmm.order", std::to_string(cfg.fmm_order)},
          {"b_min", std::to_string(cfg.b_min)},
          {"eta", fmt(cfg.eta)},
          {"r_max", std::to_string(cfg.r_max)},
          {"tol", fmt(cfg.tol)},
          {"probes", probes},
          {"source", fmt(cfg.source)},
          {"out", cfg.out}};
}

std::unique_ptr<RunSetup> setup_run(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  auto s = std::make_unique<RunSetup>();
  s->cfg = cfg;
  s->mesh = cfg.mesh.empty() ? unit_cube(cfg.level) : read_off(cfg.mesh);
  s->problem = make_problem(s->mesh, cfg.problem == "mixed" ? ProblemKind::mixed : ProblemKind::dirichlet);
  const Index n = cfg.steps > 0 ? cfg.steps
                                : static_cast<Index>(std::ceil(cfg.end_time * cfg.c / (cfg.dt_ratio * s->mesh.h()) - 1e-9));
  s->steps = uniform_steps(cfg.end_time, n);
  s->contour = build_contour(s->steps, s->tableau);

  for (const auto& p : cfg.probes) {
    double d = std::numeric_limits<double>::max();
    for (Index t = 0; t < s->mesh.num_triangles(); ++t) {
      const auto& tri = s->mesh.triangle(t);
      d = std::min(d, point_triangle_distance(p, s->mesh.vertex(tri[0]), s->mesh.vertex(tri[1]), s->mesh.vertex(tri[2])));
    }
    if (d <= 0.5 * s->mesh.h()) throw DomainError("probe " + fmt(p) + " is within h/2 of the surface");
  }

  s->v_op = std::make_unique<LayerOperator>(s->mesh, LayerKind::single, Space::P0, s->problem.rows, cfg.c);
  s->k_op = std::make_unique<LayerOperator>(s->mesh, LayerKind::double_layer, Space::P1, s->problem.rows, cfg.c);
  if (cfg.backend == "dense") {
    s->V = std::make_unique<DenseFamily>(*s->v_op, s->contour);
    s->K = std::make_unique<DenseFamily>(*s->k_op, s->contour);
  } else if (cfg.backend == "aca") {
    CompressionOptions co;
    co.eps_aca = cfg.eps_aca;
    co.eps = cfg.tensor_eps();
    co.b_min = cfg.b_min;
    co.eta = cfg.eta;
    co.r_max = cfg.r_max;
    s->V = std::make_unique<AcaFamily>(*s->v_op, s->contour, co);
    s->K = std::make_unique<AcaFamily>(*s->k_op, s->contour, co);
  } else if (cfg.backend == "fmm") {
    FmmOptions fo;
    fo.levels = cfg.fmm_levels;
    fo.order = cfg.fmm_order;
    fo.eps_aca = cfg.eps_aca;
    fo.eps = cfg.tensor_eps();
    fo.r_max = cfg.r_max;
    s->geometry = std::make_shared<FmmGeometry>(s->mesh, s->problem.rows.x, fo.levels, fo.order);
    s->m2l = build_m2l_tensor(*s->geometry, s->contour, cfg.c, fo.eps, fo.r_max);
    s->V = std::make_unique<FmmFamily>(*s->v_op, s->contour, s->geometry, s->m2l, fo, true);
    s->K = std::make_unique<FmmFamily>(*s->k_op, s->contour, s->geometry, s->m2l, fo, false);
  } else {
    throw DomainError("unknown backend: " + cfg.backend);
  }
  if (!cfg.probes.empty()) {
    s->pv_op = std::make_unique<LayerOperator>(s->mesh, LayerKind::single, Space::P0, free_rows(cfg.probes), cfg.c);
    s->pk_op = std::make_unique<LayerOperator>(s->mesh, LayerKind::double_layer, Space::P1, free_rows(cfg.probes), cfg.c);
    s->PV = std::make_unique<DenseFamily>(*s->pv_op, s->contour);
    s->PK = std::make_unique<DenseFamily>(*s->pk_op, s->contour);
  }
  s->build_seconds = seconds_since(t0);
  return s;
}

RankSummary rank_summary(const FamilyStats& st) {
  RankSummary r;
  if (st.blocks.empty()) return r;
  r.min = std::numeric_limits<Index>::max();
  double sum = 0.0;
  for (const auto& b : st.blocks) {
    r.min = std::min(r.min, b.rank);
    r.max = std::max(r.max, b.rank);
    sum += static_cast<double>(b.rank);
  }
  r.mean = sum / static_cast<double>(st.blocks.size());
  return r;
}

double compression_ratio(const std::vector<FamilyStats>& stats) {
  double c = 0.0, d = 0.0;
  for (const auto& s : stats) {
    c += s.compressed_bytes - s.shared_bytes;
    d += s.dense_bytes;
  }
  return d > 0.0 ? c / d : 0.0;
}

double precursor_ratio(const Solution& sol, const RunSetup& setup) {
  const auto& cfg = setup.cfg;
  const Eigen::VectorXd& cs = setup.tableau.c;
  double peak = 0.0, early = 0.0, t0 = 0.0;
  for (size_t n = 0; n < sol.probes.size(); ++n) {
    for (Index p = 0; p < sol.probes[n].rows(); ++p) {
      const double arrival = (cfg.probes[static_cast<size_t>(p)] - cfg.source).norm() / cfg.c;
      for (Index a = 0; a < sol.probes[n].cols(); ++a) {
        const double v = std::abs(sol.probes[n](p, a));
        peak = std::max(peak, v);
        if (t0 + cs(a) * sol.steps[n] < arrival) early = std::max(early, v);
      }
    }
    t0 += sol.steps[n];
  }
  return peak > 0.0 ? early / peak : 0.0;
}

RunResult run_problem(RunSetup& setup) {
  const auto& cfg = setup.cfg;
  RunResult res;
  SmoothPulse pulse;
  pulse.source = cfg.source;
  pulse.c = cfg.c;
  SolverOptions so;
  so.tableau = setup.tableau;
  so.tol = cfg.tol;
  ProbeOperators probes;
  if (setup.PV) probes = {setup.PV.get(), setup.PK.get()};
  res.solution = solve_gcq(setup.problem, *setup.V, *setup.K, setup.contour, setup.steps,
                           pulse_data(setup.mesh, pulse), so, probes);
  res.errors = midpoint_errors(setup.problem, setup.steps, setup.tableau.c, res.solution.q, res.solution.u, pulse);
  res.lmax = lmax(res.errors);
  res.precursor = precursor_ratio(res.solution, setup);
  res.v_stats = setup.V->stats();
  res.v_stats.name = "V";
  res.k_stats = setup.K->stats();
  res.k_stats.name = "K";
  res.build_seconds = setup.build_seconds;
  return res;
}

void write_traces(const RunSetup& setup, const RunResult& res) {
  auto f = open_out(setup.cfg, "traces.csv");
  SmoothPulse pulse;
  pulse.source = setup.cfg.source;
  pulse.c = setup.cfg.c;
  f << "step,t_mid,flux_error,pressure_error";
  for (size_t p = 0; p < setup.cfg.probes.size(); ++p) f << ",probe" << p;
  f << "\n";
  double t0 = 0.0;
  for (size_t n = 0; n < setup.steps.size(); ++n) {
    const double tm = t0 + 0.5 * setup.steps[n];
    f << n << "," << tm << "," << res.errors[n].flux << "," << res.errors[n].pressure;
    if (!res.solution.probes.empty()) {
      const Eigen::VectorXd v = midpoint_values(res.solution.probes, n, setup.tableau.c);
      for (Index p = 0; p < v.size(); ++p) f << "," << v(p);
    }
    f << "\n";
    t0 += setup.steps[n];
  }
}

void write_stats(const RunSetup& setup, const std::vector<FamilyStats>& stats) {
  {
    auto f = open_out(setup.cfg, "compression.csv");
    f << "operator,compressed_bytes,shared_bytes,dense_bytes,ratio\n";
    double c = 0.0, s = 0.0, d = 0.0;
    for (const auto& st : stats) {
      f << st.name << "," << st.compressed_bytes << "," << st.shared_bytes << "," << st.dense_bytes << ","
        << (st.compressed_bytes - st.shared_bytes) / st.dense_bytes << "\n";
      c += st.compressed_bytes;
      s += st.shared_bytes;
      d += st.dense_bytes;
    }
    f << "total," << c << "," << s << "," << d << "," << (c - s) / d << "\n";
  }
  {
    auto f = open_out(setup.cfg, "ranks.csv");
    f << "operator,block,rows,cols,admissible,rank,capped\n";
    for (const auto& st : stats) {
      for (size_t b = 0; b < st.blocks.size(); ++b) {
        const auto& bs = st.blocks[b];
        f << st.name << "," << b << "," << bs.rows << "," << bs.cols << "," << bs.admissible << "," << bs.rank << ","
          << bs.capped << "\n";
      }
    }
  }
  {
    auto f = open_out(setup.cfg, "freq_histogram.csv");
    f << "node,re,im";
    for (const auto& st : stats) f << "," << st.name;
    f << ",total\n";
    for (size_t l = 0; l < setup.contour.nodes.size(); ++l) {
      f << l << "," << setup.contour.nodes[l].real() << "," << setup.contour.nodes[l].imag();
      Index tot = 0;
      for (const auto& st : stats) {
        const Index h = l < st.frequency_histogram.size() ? st.frequency_histogram[l] : 0;
        f << "," << h;
        tot += h;
      }
      f << "," << tot << "\n";
    }
  }
}

void write_timings(const RunSetup& setup, const RunResult& res) {
  auto f = open_out(setup.cfg, "timings.csv");
  f << "phase,seconds\n";
  f << "tensor_build," << res.build_seconds << "\n";
  f << "operators," << res.solution.timings.operators << "\n";
  f << "convolution," << res.solution.timings.convolution << "\n";
  f << "solve," << res.solution.timings.solve << "\n";
}

void write_manifest(const RunSetup* setup, const RunConfig& cfg, const RunResult* res, const std::string& note) {
  auto f = open_out(cfg, "manifest.txt");
  f << "# tdbem run manifest\n";
  for (const auto& [k, v] : config_entries(cfg)) f << k << " = " << v << "\n";
  f << "tableau = radau_iia_2\n";
  f << "error_rule_order = 6\n";
  f << "error_time = step midpoint, Lagrange interpolation through t_{n-1} and the stage times\n";
  if (setup) {
    f << "vertices = " << setup->mesh.num_vertices() << "\n";
    f << "triangles = " << setup->mesh.num_triangles() << "\n";
    f << "h = " << fmt(setup->mesh.h()) << "\n";
    f << "steps_used = " << setup->steps.size() << "\n";
    f << "dt = " << fmt(setup->steps.empty() ? 0.0 : setup->steps[0]) << "\n";
    f << "contour.q = " << fmt(setup->contour.q) << "\n";
    f << "contour.k = " << fmt(setup->contour.k) << "\n";
    f << "contour.n_q = " << setup->contour.n_q << "\n";
    f << "contour.representatives = " << setup->contour.representatives() << "\n";
    f << "unknowns = " << setup->problem.unknowns() << "\n";
  }
  if (res) {
    for (const auto* st : {&res->v_stats, &res->k_stats}) {
      const auto r = rank_summary(*st);
      f << "rank." << st->name << " = min " << r.min << " mean " << fmt(r.mean) << " max " << r.max << "\n";
    }
    f << "compression_ratio = " << fmt(compression_ratio({res->v_stats, res->k_stats})) << "\n";
    if (!res->solution.steps.empty()) {
      f << "lmax = " << fmt(res->lmax) << "\n";
      f << "precursor_ratio = " << fmt(res->precursor) << "\n";
      f << "max_imag_ratio = " << fmt(res->solution.max_imag_ratio) << "\n";
    }
  }
  f << "status = " << (note.empty() ? "ok" : note) << "\n";
}

void write_errors(const std::string& path, const std::vector<ConvergenceRow>& rows) {
  const auto dir = std::filesystem::path(path).parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  std::ofstream f(path);
  if (!f) throw DomainError("cannot write " + path);
  f.precision(12);
  f << "level,h,dt,Lmax,eoc\n";
  for (const auto& r : rows) {
    f << r.level << "," << r.h << "," << r.dt << "," << r.lmax << ",";
    if (!std::isnan(r.eoc)) f << r.eoc;
    f << "\n";
  }
}

}  // namespace tdbem
