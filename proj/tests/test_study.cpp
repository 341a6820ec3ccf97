#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mvmfem/mms.hpp"
#include "mvmfem/study.hpp"
#include "mvmfem/vtk.hpp"

using namespace mvmfem;

TEST_CASE("fields representable in the space reproduce with no error") {
  SimplicialMesh m = build_structured_mesh(2, 3);
  FeSpace sr = build_space(m, SpaceKind::Lagrange1);
  AnalyticField affine{2, 1, 1, [](const Vec3& x) -> Vec3 {
                         return {0.3 + 0.7 * x.x - 1.1 * x.y, 0.0, 0.0};
                       }};
  DofVector u = interpolate(sr, affine);
  REQUIRE(compute_L2_error_full(sr, u, affine).value <= 1e-12);

  FeSpace sq = build_space(m, SpaceKind::RT0);
  AnalyticField cvec{2, 2, 0, [](const Vec3&) -> Vec3 { return {0.4, -0.9, 0.0}; }};
  DofVector w = interpolate(sq, cvec);
  REQUIRE(compute_L2_error_full(sq, w, cvec).value <= 1e-12);
}

TEST_CASE("constant pressure against the zero solution has relative error one") {
  SimplicialMesh m = build_structured_mesh(2, 2);
  FeSpace sp = build_space(m, SpaceKind::P0);
  AnalyticField one{2, 1, 0, [](const Vec3&) -> Vec3 { return {1.0, 0.0, 0.0}; }};
  DofVector zero(sp);
  L2Error e = compute_L2_error_full(sp, zero, one);
  REQUIRE(e.relative);
  REQUIRE_THAT(e.value, Catch::Matchers::WithinRel(1.0, 1e-13));
}

TEST_CASE("zero exact field flags the absolute-error fallback") {
  SimplicialMesh m = build_structured_mesh(2, 2);
  FeSpace sp = build_space(m, SpaceKind::P0);
  DofVector u(sp);
  u.coeffs.assign(u.coeffs.size(), 0.5);
  L2Error e = compute_L2_error_full(sp, u, zero_field(2, 1));
  REQUIRE_FALSE(e.relative);
  REQUIRE_THAT(e.value, Catch::Matchers::WithinRel(0.5, 1e-13));
}

TEST_CASE("study rates equal hand-computed log ratios") {
  StudyConfig cfg;
  cfg.dim = 2;
  cfg.base_n = 2;
  cfg.levels = 3;
  cfg.run_3f = false;
  ConvergenceReport rep = run_convergence(cfg);
  REQUIRE(rep.records.size() == 3);
  for (std::size_t k = 1; k < rep.records.size(); ++k) {
    const auto& a = rep.records[k - 1];
    const auto& b = rep.records[k];
    REQUIRE_THAT(b.rate_r, Catch::Matchers::WithinAbs(
                               std::log(a.err_r / b.err_r) / std::log(a.h / b.h), 1e-12));
    REQUIRE_THAT(b.rate_q, Catch::Matchers::WithinAbs(
                               std::log(a.err_q / b.err_q) / std::log(a.h / b.h), 1e-12));
    REQUIRE_THAT(b.rate_p, Catch::Matchers::WithinAbs(
                               std::log(a.err_p / b.err_p) / std::log(a.h / b.h), 1e-12));
  }
  REQUIRE(std::isnan(rep.records[0].rate_r));
}

TEST_CASE("level resolutions double in 2D and increment in 3D") {
  StudyConfig cfg;
  cfg.dim = 2;
  cfg.base_n = 8;
  REQUIRE(cfg.level_n(0) == 8);
  REQUIRE(cfg.level_n(2) == 32);
  cfg.dim = 3;
  cfg.base_n = 2;
  REQUIRE(cfg.level_n(0) == 2);
  REQUIRE(cfg.level_n(2) == 4);
}

TEST_CASE("csv round-trips at full precision") {
  StudyConfig cfg;
  cfg.dim = 2;
  cfg.base_n = 2;
  cfg.levels = 2;
  ConvergenceReport rep = run_convergence(cfg);
  std::ostringstream ss;
  emit_csv(rep, ss);
  std::istringstream in(ss.str());
  std::vector<LevelRecord> parsed = parse_csv(in);
  REQUIRE(parsed.size() == rep.records.size());
  for (std::size_t k = 0; k < parsed.size(); ++k) {
    const auto& a = rep.records[k];
    const auto& b = parsed[k];
    REQUIRE(a.method == b.method);
    REQUIRE(a.level == b.level);
    REQUIRE(a.n_dof == b.n_dof);
    REQUIRE(a.h == b.h);  // exact: 17 significant digits round-trip doubles
    REQUIRE(a.err_r == b.err_r);
    REQUIRE(a.err_q == b.err_q);
    REQUIRE(a.err_p == b.err_p);
    REQUIRE(a.inv_p == b.inv_p);
    REQUIRE(a.max_div == b.max_div);
    if (k < 2) {
      REQUIRE(std::isnan(b.rate_r));  // blank rate cells on the first level
    } else {
      REQUIRE(a.rate_r == b.rate_r);
    }
  }
}

TEST_CASE("empty report emits a header-only csv") {
  ConvergenceReport rep;
  std::ostringstream ss;
  emit_csv(rep, ss);
  std::istringstream in(ss.str());
  std::string line;
  int data_lines = 0, header_lines = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("method,", 0) == 0)
      ++header_lines;
    else
      ++data_lines;
  }
  REQUIRE(header_lines == 1);
  REQUIRE(data_lines == 0);
}

TEST_CASE("markdown report mirrors the per-method table layout") {
  StudyConfig cfg;
  cfg.dim = 2;
  cfg.base_n = 2;
  cfg.levels = 2;
  ConvergenceReport rep = run_convergence(cfg);
  std::ostringstream ss;
  emit_markdown(rep, ss);
  const std::string text = ss.str();
  REQUIRE(text.find("3F-MFEM") != std::string::npos);
  REQUIRE(text.find("MV-MFEM") != std::string::npos);
  REQUIRE(text.find("| h | N_dof | Error_r | Rate_r |") != std::string::npos);
  // first level prints '-' in the rate columns
  REQUIRE(text.find("| - |") != std::string::npos);
}

TEST_CASE("vtk export round-trips mesh connectivity and cell data") {
  SimplicialMesh m = build_structured_mesh(2, 1);
  std::vector<double> p(m.n_cells(), 0.0);
  const std::string path = "test_vtk_out.vtk";
  export_vtk(m, {{"p_h", p}}, {}, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  VtkContents vtk = parse_vtk(in);
  REQUIRE(vtk.points.size() == static_cast<std::size_t>(m.n_vertices()));
  REQUIRE(vtk.cells.size() == static_cast<std::size_t>(m.n_cells()));
  for (Index c = 0; c < m.n_cells(); ++c) {
    REQUIRE(vtk.cells[c].size() == 3);
    for (int k = 0; k < 3; ++k) REQUIRE(vtk.cells[c][k] == m.cells[c][k]);
  }
  REQUIRE(vtk.cell_scalars.size() == 1);
  REQUIRE(vtk.cell_scalars[0].first == "p_h");
  for (double v : vtk.cell_scalars[0].second) REQUIRE(v == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("report writing rejects unwritable paths") {
  ConvergenceReport rep;
  REQUIRE_THROWS_AS(emit_report(rep, "csv", "/nonexistent-dir/report.csv"),
                    std::runtime_error);
}

TEST_CASE("config validation") {
  StudyConfig cfg;
  cfg.levels = 1;
  REQUIRE_THROWS_AS(run_convergence(cfg), std::invalid_argument);
  cfg.levels = 2;
  cfg.run_3f = cfg.run_mv = false;
  REQUIRE_THROWS_AS(run_convergence(cfg), std::invalid_argument);
}
