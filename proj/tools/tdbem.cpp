#include <CLI11.hpp>

#include <cmath>
#include <iostream>

#include "tdbem/app.hpp"

using namespace tdbem;

namespace {

std::pair<int, int> parse_levels(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const int l = std::stoi(s);
    return {l, l};
  }
  return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
}

int run_config(RunConfig cfg) {
  std::unique_ptr<RunSetup> setup;
  try {
    setup = setup_run(cfg);
    const RunResult res = run_problem(*setup);
    write_traces(*setup, res);
    write_stats(*setup, {res.v_stats, res.k_stats});
    write_timings(*setup, res);
    write_errors(cfg.out + "/errors.csv", {{cfg.level, setup->mesh.h(), setup->steps[0], res.lmax}});
    write_manifest(setup.get(), cfg, &res, "");
    std::cout << "Lmax " << res.lmax << "  compression " << compression_ratio({res.v_stats, res.k_stats})
              << "  build " << res.build_seconds << " s  convolution " << res.solution.timings.convolution
              << " s  solve " << res.solution.timings.solve << " s\n";
  } catch (const std::exception& e) {
    write_manifest(setup.get(), cfg, nullptr, std::string("failed: ") + e.what());
    throw;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-domain acoustic BEM with generalized convolution quadrature"};
  app.require_subcommand(1);

  auto* mesh = app.add_subcommand("mesh", "Write a mesh");
  auto* cube = mesh->add_subcommand("cube", "Unit cube surface");
  int level = 1;
  std::string mesh_out = "cube.off";
  cube->add_option("--level", level, "Refinement level")->check(CLI::Range(1, 6));
  cube->add_option("--out", mesh_out, "OFF output path");
  mesh->require_subcommand(1);

  auto* run = app.add_subcommand("run", "Solve one problem");
  std::string config, preset, backend, out;
  run->add_option("--config", config, "key=value config file");
  run->add_option("--preset", preset, "paper-level-1 .. paper-level-5");
  run->add_option("--backend", backend, "dense | aca | fmm");
  run->add_option("--out", out, "Output directory");

  auto* stats = app.add_subcommand("stats", "Build the operators and report compression");
  stats->add_option("--config", config, "key=value config file");
  stats->add_option("--preset", preset, "paper-level-1 .. paper-level-5");
  stats->add_option("--backend", backend, "dense | aca | fmm");
  stats->add_option("--out", out, "Output directory");

  auto* conv = app.add_subcommand("convergence", "Refinement study over preset levels");
  std::string problem = "dirichlet", levels = "1..3";
  conv->add_option("--problem", problem)->check(CLI::IsMember({"dirichlet", "mixed"}));
  conv->add_option("--levels", levels, "e.g. 1..3");
  conv->add_option("--backend", backend)->check(CLI::IsMember({"dense", "aca", "fmm"}));
  conv->add_option("--out", out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  auto make_config = [&]() {
    RunConfig cfg;
    if (!preset.empty()) apply_preset(cfg, preset);
    if (!config.empty()) cfg = load_config(config);
    if (!preset.empty() && !config.empty()) apply_preset(cfg, preset);
    if (!backend.empty()) cfg = parse_config("backend=" + backend, cfg);
    if (!out.empty()) cfg.out = out;
    return cfg;
  };

  try {
    if (cube->parsed()) {
      write_off(unit_cube(level), mesh_out);
      return 0;
    }
    if (run->parsed()) return run_config(make_config());
    if (stats->parsed()) {
      const RunConfig cfg = make_config();
      auto setup = setup_run(cfg);
      FamilyStats v = setup->V->stats(), k = setup->K->stats();
      v.name = "V";
      k.name = "K";
      write_stats(*setup, {v, k});
      RunResult res;
      res.v_stats = v;
      res.k_stats = k;
      res.build_seconds = setup->build_seconds;
      write_manifest(setup.get(), cfg, &res, "");
      const auto rv = rank_summary(v), rk = rank_summary(k);
      std::cout << "compression " << compression_ratio({v, k}) << "  rank V " << rv.mean << "  rank K " << rk.mean
                << "  build " << setup->build_seconds << " s\n";
      return 0;
    }
    if (conv->parsed()) {
      const auto [lo, hi] = parse_levels(levels);
      const std::string root = out.empty() ? "convergence" : out;
      std::vector<ConvergenceRow> rows;
      for (int l = lo; l <= hi; ++l) {
        RunConfig cfg;
        apply_preset(cfg, "paper-level-" + std::to_string(l));
        cfg.problem = problem;
        if (!backend.empty()) cfg.backend = backend;
        cfg.out = root + "/level-" + std::to_string(l);
        auto setup = setup_run(cfg);
        const RunResult res = run_problem(*setup);
        write_traces(*setup, res);
        write_stats(*setup, {res.v_stats, res.k_stats});
        write_timings(*setup, res);
        write_manifest(setup.get(), cfg, &res, "");
        ConvergenceRow r{l, setup->mesh.h(), setup->steps[0], res.lmax};
        if (!rows.empty()) r.eoc = eoc(rows.back().lmax, r.lmax);
        rows.push_back(r);
        std::cout << "level " << l << "  Lmax " << r.lmax;
        if (!std::isnan(r.eoc)) std::cout << "  eoc " << r.eoc;
        std::cout << std::endl;
      }
      write_errors(root + "/errors.csv", rows);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
