// Convergence-study driver for the three-field and multipoint vorticity
// Stokes discretizations.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "mvmfem/study.hpp"
#include "mvmfem/vtk.hpp"

namespace {

int run(const mvmfem::StudyConfig& config, bool assert_invariants) {
  using namespace mvmfem;
  ConvergenceReport report;
  try {
    report = run_convergence(config);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  }

  if (!config.out_path.empty()) {
    emit_report(report, config.format, config.out_path);
    std::cout << "wrote " << config.out_path << "\n";
  } else {
    if (config.format == "csv")
      emit_csv(report, std::cout);
    else
      emit_markdown(report, std::cout);
  }

  if (!config.vtk_dir.empty()) {
    std::filesystem::create_directories(config.vtk_dir);
    for (int level = 0; level < config.levels; ++level) {
      const Index n = config.level_n(level);
      ExactFields exact = exact_fields(config.dim, config.mu);
      LevelOperators ops = assemble_level(config.dim, n, config.mu, exact.g);
      MethodSolution sol = config.run_mv ? solve_multipoint(ops, config.solver_tol)
                                         : solve_three_field(ops, config.solver_tol);
      std::vector<double> divq = ops.B_q.apply(sol.q);
      for (Index c = 0; c < ops.mesh.n_cells(); ++c)
        divq[c] = std::abs(divq[c]) / ops.mesh.cell_volume[c];
      // cell-averaged velocity vectors
      std::vector<Vec3> qcell(ops.mesh.n_cells());
      QuadRule rule = simplex_rule(config.dim, 2);
      std::vector<BasisValue> vals;
      for (Index c = 0; c < ops.mesh.n_cells(); ++c) {
        CellBasis cb(ops.space_Q, c);
        Vec3 mean{};
        for (std::size_t k = 0; k < rule.weights.size(); ++k) {
          cb.eval(rule.bary[k], vals);
          for (int i = 0; i < cb.n_local(); ++i) mean += rule.weights[k] * sol.q[cb.dofs()[i]] * vals[i].v;
        }
        qcell[c] = mean;
      }
      std::string path = config.vtk_dir + "/level" + std::to_string(level) + ".vtk";
      export_vtk(ops.mesh, {{"p_h", sol.p}, {"abs_div_q", divq}}, {{"q_h", qcell}}, path);
      std::cout << "wrote " << path << "\n";
    }
  }

  if (assert_invariants) {
    bool ok = true;
    for (const auto& rec : report.records) {
      if (rec.max_div > 1e-10) ok = false;
      if (rec.method == "mv" && config.run_3f) {
        if (rec.inv_p > 1e-9) ok = false;
        if (rec.inv_curl > 1e-9) ok = false;
        if (config.dim == 2 && rec.inv_r2d > 1e-9) ok = false;
      }
    }
    if (!ok) {
      std::cerr << "invariant assertion failed\n";
      return 3;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convergence studies for three-field and multipoint vorticity Stokes elements"};
  mvmfem::StudyConfig config;
  std::string methods = "mv,3f";
  bool assert_invariants = false;
  long base = 8, levels = 4;

  app.add_option("--dim", config.dim, "space dimension (2 or 3)")
      ->check(CLI::IsMember({2, 3}))
      ->capture_default_str();
  app.add_option("--base", base, "resolution of the first level")->capture_default_str();
  app.add_option("--levels", levels, "number of refinement levels")->capture_default_str();
  app.add_option("--methods", methods, "comma list from {mv,3f}")->capture_default_str();
  app.add_option("--mu", config.mu, "viscosity")->capture_default_str();
  app.add_option("--tol", config.solver_tol, "relative solver residual tolerance")
      ->capture_default_str();
  app.add_flag("--perturb-pressure", config.perturb_pressure,
               "rerun with the force perturbed by a pressure gradient and record deltas");
  app.add_option("--format", config.format, "report format")
      ->check(CLI::IsMember({"csv", "md"}))
      ->capture_default_str();
  app.add_option("--out", config.out_path, "report path (stdout when omitted)");
  app.add_option("--vtk-dir", config.vtk_dir, "write per-level VTK cell data here");
  app.add_flag("--assert", assert_invariants, "exit 3 if the method invariants fail");
  CLI11_PARSE(app, argc, argv);

  config.base_n = base;
  config.levels = static_cast<int>(levels);
  config.run_mv = methods.find("mv") != std::string::npos;
  config.run_3f = methods.find("3f") != std::string::npos;
  if (!config.run_mv && !config.run_3f) {
    std::cerr << "no methods selected\n";
    return 1;
  }
  return run(config, assert_invariants);
}
