#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvmfem/assembly.hpp"
#include "mvmfem/hybridization.hpp"
#include "mvmfem/mesh.hpp"
#include "mvmfem/mms.hpp"
#include "mvmfem/solver.hpp"

namespace mvmfem {

struct StudyConfig {
  int dim = 2;
  Index base_n = 8;      // resolution of the first level
  int levels = 4;        // 2D: n doubles per level; 3D: n increments per level
  bool run_3f = true;
  bool run_mv = true;
  double mu = 1.0;
  double solver_tol = 1e-10;
  bool perturb_pressure = false;
  std::string format = "csv";  // csv | md
  std::string out_path;
  std::string vtk_dir;

  Index level_n(int level) const {
    return dim == 2 ? base_n << level : base_n + level;
  }
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct LevelRecord {
  std::string method;  // "3f" or "mv"
  int dim = 2;
  int level = 0;
  double h = 0.0;
  Index n_dof = 0;
  double err_r = 0.0, err_q = 0.0, err_p = 0.0;
  double rate_r = kNaN, rate_q = kNaN, rate_p = kNaN;
  // invariant residuals between the two methods on this level
  double inv_p = kNaN, inv_curl = kNaN, inv_r2d = kNaN;
  double max_div = kNaN;
  // energy-norm pieces and diagnostics (not part of the CSV contract)
  double energy_err = kNaN;
  double err_curl_r = kNaN;
  double pert_dq = kNaN, pert_dr = kNaN, pert_dp = kNaN;
  double method_gap_q = kNaN;  // |q_3f - q_mv| on this level
  double norm_r = kNaN, norm_curl_r = kNaN, norm_p = kNaN;  // solution norms
  double wall_seconds = 0.0;
};

struct ConvergenceReport {
  StudyConfig config;
  std::vector<LevelRecord> records;
};

// ---- error metrics --------------------------------------------------------

struct L2Error {
  double value = 0.0;
  bool relative = true;  // false when the exact norm underflowed and the
                         // absolute error is reported instead
};

// ||u_h - u|| / ||u||, falling back to the absolute error for ||u|| < 1e-14.
// `use_differential` measures the basis differential (curl for vorticity
// spaces, div for RT0) against the field instead of the value.
inline L2Error compute_L2_error_full(const FeSpace& space, const DofVector& dofs,
                                     const AnalyticField& field, bool use_differential = false) {
  const auto& mesh = *space.mesh;
  QuadRule rule = simplex_rule(mesh.dim, std::max(6, field.degree));
  double num = 0.0, den = 0.0;
  std::vector<BasisValue> vals;
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    CellBasis cb(space, c);
    for (std::size_t k = 0; k < rule.weights.size(); ++k) {
      cb.eval(rule.bary[k], vals);
      Vec3 uh{};
      for (int i = 0; i < cb.n_local(); ++i)
        uh += dofs.coeffs[cb.dofs()[i]] * (use_differential ? vals[i].d : vals[i].v);
      const Vec3 ex = field(cb.point(rule.bary[k]));
      const Vec3 diff = uh - ex;
      const double w = rule.weights[k] * cb.volume();
      num += w * dot(diff, diff);
      den += w * dot(ex, ex);
    }
  }
  L2Error e;
  if (std::sqrt(den) < 1e-14) {
    e.value = std::sqrt(num);
    e.relative = false;
  } else {
    e.value = std::sqrt(num / den);
  }
  return e;
}

inline double compute_L2_error(const FeSpace& space, const DofVector& dofs,
                               const AnalyticField& field, bool relative = true) {
  L2Error e = compute_L2_error_full(space, dofs, field);
  if (!relative) {
    // rescale back to the absolute error when requested
    QuadRule rule = simplex_rule(space.mesh->dim, std::max(6, field.degree));
    double den = 0.0;
    for (Index c = 0; c < space.mesh->n_cells(); ++c) {
      CellBasis cb(space, c);
      for (std::size_t k = 0; k < rule.weights.size(); ++k) {
        Vec3 ex = field(cb.point(rule.bary[k]));
        den += rule.weights[k] * cb.volume() * dot(ex, ex);
      }
    }
    return e.relative ? e.value * std::sqrt(den) : e.value;
  }
  return e.value;
}

// L2 norm of a discrete field (or of its differential).
inline double l2_norm(const FeSpace& space, std::span<const double> coeffs,
                      bool use_differential = false) {
  const auto& mesh = *space.mesh;
  QuadRule rule = simplex_rule(mesh.dim, 2);
  double num = 0.0;
  std::vector<BasisValue> vals;
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    CellBasis cb(space, c);
    for (std::size_t k = 0; k < rule.weights.size(); ++k) {
      cb.eval(rule.bary[k], vals);
      Vec3 uh{};
      for (int i = 0; i < cb.n_local(); ++i)
        uh += coeffs[cb.dofs()[i]] * (use_differential ? vals[i].d : vals[i].v);
      num += rule.weights[k] * cb.volume() * dot(uh, uh);
    }
  }
  return std::sqrt(num);
}

// ---- per-level pipeline ----------------------------------------------------

struct MethodSolution {
  std::vector<double> r, q, p;
  Index n_dof = 0;
};

struct LevelOperators {
  SimplicialMesh mesh;
  FeSpace space_R, space_Q, space_P;
  SparseMatrix A, B_r, B_q;
  VertexBlockMatrix A_h;
  RhsVectors rhs;
};

inline LevelOperators assemble_level(int dim, Index n, double mu, const AnalyticField& g) {
  LevelOperators ops;
  ops.mesh = build_structured_mesh(dim, n);
  ops.space_R = build_space(ops.mesh, dim == 2 ? SpaceKind::Lagrange1 : SpaceKind::Nedelec2);
  ops.space_Q = build_space(ops.mesh, SpaceKind::RT0);
  ops.space_P = build_space(ops.mesh, SpaceKind::P0);
  ops.A = assemble_exact_vorticity_mass(ops.space_R, mu);
  ops.A_h = assemble_quadrature_vorticity_mass(ops.space_R, mu);
  ops.B_r = assemble_curl(ops.space_R, ops.space_Q);
  ops.B_q = assemble_div(ops.space_Q, ops.space_P);
  ops.rhs = assemble_rhs(g, zero_field(dim, 1), zero_field(dim, dim), "p-boundary",
                         ops.space_R, ops.space_Q, ops.space_P);
  return ops;
}

inline MethodSolution solve_three_field(const LevelOperators& ops, double tol) {
  SaddleSystem sys = build_three_field_system(ops.A, ops.B_r, ops.B_q, ops.rhs);
  SolveResult sol = solve_saddle(sys, tol);
  MethodSolution out;
  const Index nr = ops.space_R.n_dofs, nq = ops.space_Q.n_dofs, np = ops.space_P.n_dofs;
  out.r.assign(sol.x.begin(), sol.x.begin() + nr);
  out.q.assign(sol.x.begin() + nr, sol.x.begin() + nr + nq);
  out.p.assign(sol.x.begin() + nr + nq, sol.x.begin() + nr + nq + np);
  out.n_dof = nr + nq + np;
  return out;
}

inline MethodSolution solve_multipoint(const LevelOperators& ops, double tol) {
  VertexBlockMatrix inv = invert_vertex_blocks(ops.A_h);
  ReducedSystem red = build_reduced_system(ops.B_r, ops.B_q, inv, ops.rhs);
  SaddleSystem sys = build_reduced_saddle(red);
  SolveResult sol = solve_saddle(sys, tol);
  MethodSolution out;
  const Index nq = ops.space_Q.n_dofs, np = ops.space_P.n_dofs;
  out.q.assign(sol.x.begin(), sol.x.begin() + nq);
  out.p.assign(sol.x.begin() + nq, sol.x.begin() + nq + np);
  out.r = reconstruct_vorticity(inv, ops.B_r, ops.rhs.f_r, out.q);
  out.n_dof = nq + np;
  return out;
}

// Residuals of the quantities the quadrature rule provably leaves unchanged.
struct InvariantRecord {
  double p_match = 0.0;      // |p_3f - p_mv|
  double curl_match = 0.0;   // |curl(r_3f - r_mv)|
  double r_match_2d = kNaN;  // |r_3f - r_mv|, 2D only
  double max_div = 0.0;      // max over cells of |div q_mv|
  double q_gap = 0.0;        // |q_3f - q_mv|
};

inline InvariantRecord check_invariants(const LevelOperators& ops, const MethodSolution& sol_3f,
                                        const MethodSolution& sol_mv) {
  if (sol_3f.r.size() != sol_mv.r.size() || sol_3f.q.size() != sol_mv.q.size() ||
      sol_3f.p.size() != sol_mv.p.size())
    throw std::invalid_argument("check_invariants: solutions on different spaces");
  InvariantRecord inv;
  std::vector<double> dp(sol_3f.p.size()), dr(sol_3f.r.size()), dq(sol_3f.q.size());
  for (std::size_t i = 0; i < dp.size(); ++i) dp[i] = sol_3f.p[i] - sol_mv.p[i];
  for (std::size_t i = 0; i < dr.size(); ++i) dr[i] = sol_3f.r[i] - sol_mv.r[i];
  for (std::size_t i = 0; i < dq.size(); ++i) dq[i] = sol_3f.q[i] - sol_mv.q[i];
  inv.p_match = l2_norm(ops.space_P, dp);
  inv.curl_match = l2_norm(ops.space_R, dr, /*use_differential=*/true);
  if (ops.mesh.dim == 2) inv.r_match_2d = l2_norm(ops.space_R, dr);
  inv.q_gap = l2_norm(ops.space_Q, dq);
  std::vector<double> div = ops.B_q.apply(sol_mv.q);
  for (Index c = 0; c < ops.mesh.n_cells(); ++c)
    inv.max_div = std::max(inv.max_div, std::abs(div[c]) / ops.mesh.cell_volume[c]);
  return inv;
}

// ---- convergence study -----------------------------------------------------

inline double rate_between(double err_coarse, double err_fine, double h_coarse, double h_fine) {
  return std::log(err_coarse / err_fine) / std::log(h_coarse / h_fine);
}

inline ConvergenceReport run_convergence(const StudyConfig& config) {
  if (config.levels < 2) throw std::invalid_argument("run_convergence: need at least 2 levels");
  if (!config.run_3f && !config.run_mv)
    throw std::invalid_argument("run_convergence: no methods selected");
  ExactFields exact = exact_fields(config.dim, config.mu);
  AnalyticField grad_phi = gradient_perturbation(config.dim);
  AnalyticField g_pert = {config.dim, config.dim, std::max(exact.g.degree, grad_phi.degree),
                          [&exact, &grad_phi](const Vec3& x) -> Vec3 {
                            return exact.g(x) + grad_phi(x);
                          }};

  ConvergenceReport report;
  report.config = config;
  for (int level = 0; level < config.levels; ++level) {
    const Index n = config.level_n(level);
    const auto t0 = std::chrono::steady_clock::now();
    LevelOperators ops = assemble_level(config.dim, n, config.mu, exact.g);
    const double h = mesh_size(ops.mesh);

    MethodSolution sol_3f, sol_mv;
    if (config.run_3f) sol_3f = solve_three_field(ops, config.solver_tol);
    if (config.run_mv) sol_mv = solve_multipoint(ops, config.solver_tol);

    InvariantRecord inv;
    if (config.run_3f && config.run_mv) inv = check_invariants(ops, sol_3f, sol_mv);

    MethodSolution pert_3f, pert_mv;
    if (config.perturb_pressure) {
      LevelOperators ops_p = assemble_level(config.dim, n, config.mu, g_pert);
      if (config.run_3f) pert_3f = solve_three_field(ops_p, config.solver_tol);
      if (config.run_mv) pert_mv = solve_multipoint(ops_p, config.solver_tol);
    }

    auto push = [&](const std::string& name, const MethodSolution& sol,
                    const MethodSolution& pert) {
      LevelRecord rec;
      rec.method = name;
      rec.dim = config.dim;
      rec.level = level;
      rec.h = h;
      rec.n_dof = sol.n_dof;
      rec.err_r = compute_L2_error_full(ops.space_R, DofVector(ops.space_R, sol.r), exact.r).value;
      rec.err_q = compute_L2_error_full(ops.space_Q, DofVector(ops.space_Q, sol.q), exact.q).value;
      rec.err_p = compute_L2_error_full(ops.space_P, DofVector(ops.space_P, sol.p), exact.p).value;
      rec.err_curl_r = compute_L2_error_full(ops.space_R, DofVector(ops.space_R, sol.r),
                                             exact.curl_r, /*use_differential=*/true)
                           .value;
      // energy norm: absolute L2 pieces of r, curl r, q, div q, p
      const double nr = compute_L2_error(ops.space_R, DofVector(ops.space_R, sol.r), exact.r,
                                         /*relative=*/false);
      const double ncr = [&] {
        QuadRule rule = simplex_rule(config.dim, std::max(6, exact.curl_r.degree));
        double num = 0.0;
        std::vector<BasisValue> vals;
        for (Index c = 0; c < ops.mesh.n_cells(); ++c) {
          CellBasis cb(ops.space_R, c);
          for (std::size_t k = 0; k < rule.weights.size(); ++k) {
            cb.eval(rule.bary[k], vals);
            Vec3 uh{};
            for (int i = 0; i < cb.n_local(); ++i) uh += sol.r[cb.dofs()[i]] * vals[i].d;
            Vec3 diff = uh - exact.curl_r(cb.point(rule.bary[k]));
            num += rule.weights[k] * cb.volume() * dot(diff, diff);
          }
        }
        return std::sqrt(num);
      }();
      const double nq = compute_L2_error(ops.space_Q, DofVector(ops.space_Q, sol.q), exact.q,
                                         /*relative=*/false);
      const double ndq = [&] {  // div q is elementwise constant; exact integral
        std::vector<double> div = ops.B_q.apply(sol.q);
        double s = 0.0;
        for (Index c = 0; c < ops.mesh.n_cells(); ++c)
          s += div[c] * div[c] / ops.mesh.cell_volume[c];
        return std::sqrt(s);
      }();
      const double np = compute_L2_error(ops.space_P, DofVector(ops.space_P, sol.p), exact.p,
                                         /*relative=*/false);
      rec.energy_err = std::sqrt(nr * nr + ncr * ncr + nq * nq + ndq * ndq + np * np);

      if (config.run_3f && config.run_mv) {
        rec.inv_p = inv.p_match;
        rec.inv_curl = inv.curl_match;
        rec.inv_r2d = inv.r_match_2d;
        rec.method_gap_q = inv.q_gap;
      }
      rec.norm_r = l2_norm(ops.space_R, sol.r);
      rec.norm_curl_r = l2_norm(ops.space_R, sol.r, /*use_differential=*/true);
      rec.norm_p = l2_norm(ops.space_P, sol.p);
      {
        std::vector<double> div = ops.B_q.apply(sol.q);
        rec.max_div = 0.0;
        for (Index c = 0; c < ops.mesh.n_cells(); ++c)
          rec.max_div = std::max(rec.max_div, std::abs(div[c]) / ops.mesh.cell_volume[c]);
      }
      if (config.perturb_pressure) {
        std::vector<double> dq(sol.q.size()), dr(sol.r.size()), dp(sol.p.size());
        for (std::size_t i = 0; i < dq.size(); ++i) dq[i] = sol.q[i] - pert.q[i];
        for (std::size_t i = 0; i < dr.size(); ++i) dr[i] = sol.r[i] - pert.r[i];
        for (std::size_t i = 0; i < dp.size(); ++i) dp[i] = sol.p[i] - pert.p[i];
        rec.pert_dq = l2_norm(ops.space_Q, dq);
        rec.pert_dr = l2_norm(ops.space_R, dr);
        rec.pert_dp = l2_norm(ops.space_P, dp);
      }
      rec.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      // rates relative to the previous record of the same method
      for (auto it = report.records.rbegin(); it != report.records.rend(); ++it)
        if (it->method == name) {
          rec.rate_r = rate_between(it->err_r, rec.err_r, it->h, rec.h);
          rec.rate_q = rate_between(it->err_q, rec.err_q, it->h, rec.h);
          rec.rate_p = rate_between(it->err_p, rec.err_p, it->h, rec.h);
          break;
        }
      report.records.push_back(std::move(rec));
    };
    if (config.run_3f) push("3f", sol_3f, pert_3f);
    if (config.run_mv) push("mv", sol_mv, pert_mv);
  }
  return report;
}

// ---- report emission -------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream ss;
  ss << std::scientific << std::setprecision(16) << v;
  return ss.str();
}

}  // namespace detail

inline void emit_csv(const ConvergenceReport& report, std::ostream& os) {
  os << "# dim=" << report.config.dim << " base_n=" << report.config.base_n
     << " levels=" << report.config.levels << " mu=" << report.config.mu
     << " solver_tol=" << report.config.solver_tol
     << " perturb=" << (report.config.perturb_pressure ? 1 : 0) << "\n";
  os << "method,dim,level,h,n_dof,err_r,rate_r,err_q,rate_q,err_p,rate_p,"
        "inv_p,inv_curl,inv_r2d,max_div\n";
  for (const auto& r : report.records) {
    os << r.method << "," << r.dim << "," << r.level << "," << detail::fmt(r.h) << "," << r.n_dof
       << "," << detail::fmt(r.err_r) << "," << detail::fmt(r.rate_r) << ","
       << detail::fmt(r.err_q) << "," << detail::fmt(r.rate_q) << "," << detail::fmt(r.err_p)
       << "," << detail::fmt(r.rate_p) << "," << detail::fmt(r.inv_p) << ","
       << detail::fmt(r.inv_curl) << "," << detail::fmt(r.inv_r2d) << ","
       << detail::fmt(r.max_div) << "\n";
  }
}

inline void emit_markdown(const ConvergenceReport& report, std::ostream& os) {
  os << "Convergence study (dim=" << report.config.dim << ", mu=" << report.config.mu
     << ", solver_tol=" << report.config.solver_tol << ")\n\n";
  for (const std::string& method : {std::string("3f"), std::string("mv")}) {
    bool any = false;
    for (const auto& r : report.records) any |= (r.method == method);
    if (!any) continue;
    os << "## " << (method == "3f" ? "3F-MFEM" : "MV-MFEM") << "\n\n";
    os << "| h | N_dof | Error_r | Rate_r | Error_q | Rate_q | Error_p | Rate_p |\n";
    os << "|---|-------|---------|--------|---------|--------|---------|--------|\n";
    for (const auto& r : report.records) {
      if (r.method != method) continue;
      auto cell = [](double v, int prec) {
        if (std::isnan(v)) return std::string("-");
        std::ostringstream ss;
        ss << std::scientific << std::setprecision(prec) << v;
        return ss.str();
      };
      auto rate = [](double v) {
        if (std::isnan(v)) return std::string("-");
        std::ostringstream ss;
        ss << std::fixed << std::setprecision(2) << v;
        return ss.str();
      };
      os << "| " << cell(r.h, 2) << " | " << r.n_dof << " | " << cell(r.err_r, 2) << " | "
         << rate(r.rate_r) << " | " << cell(r.err_q, 2) << " | " << rate(r.rate_q) << " | "
         << cell(r.err_p, 2) << " | " << rate(r.rate_p) << " |\n";
    }
    os << "\n";
  }
}

inline void emit_report(const ConvergenceReport& report, const std::string& format,
                        const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("emit_report: cannot open " + path);
  if (format == "csv")
    emit_csv(report, os);
  else if (format == "md")
    emit_markdown(report, os);
  else
    throw std::invalid_argument("emit_report: unknown format " + format);
}

// Parses the records back from the CSV emitted above (test and tooling aid).
inline std::vector<LevelRecord> parse_csv(std::istream& is) {
  std::vector<LevelRecord> out;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    cells.resize(15);
    auto num = [](const std::string& s) { return s.empty() ? kNaN : std::stod(s); };
    LevelRecord r;
    r.method = cells[0];
    r.dim = std::stoi(cells[1]);
    r.level = std::stoi(cells[2]);
    r.h = num(cells[3]);
    r.n_dof = std::stoll(cells[4]);
    r.err_r = num(cells[5]);
    r.rate_r = num(cells[6]);
    r.err_q = num(cells[7]);
    r.rate_q = num(cells[8]);
    r.err_p = num(cells[9]);
    r.rate_p = num(cells[10]);
    r.inv_p = num(cells[11]);
    r.inv_curl = num(cells[12]);
    r.inv_r2d = num(cells[13]);
    r.max_div = num(cells[14]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace mvmfem
