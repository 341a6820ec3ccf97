#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mvmfem/mms.hpp"
#include "mvmfem/solver.hpp"
#include "mvmfem/study.hpp"
#include "oracles.hpp"

using namespace mvmfem;

TEST_CASE("identity system returns the right-hand side") {
  const Index n = 17;
  std::vector<Triplet> trip;
  for (Index i = 0; i < n; ++i) trip.push_back({i, i, 1.0});
  SaddleSystem sys;
  sys.matrix = SparseMatrix(n, n, std::move(trip));
  sys.rhs.resize(n);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (auto& v : sys.rhs) v = dist(rng);
  SolveResult sol = solve_saddle(sys);
  for (Index i = 0; i < n; ++i) REQUIRE(sol.x[i] == sys.rhs[i]);
  REQUIRE(sol.residual <= 1e-15);
}

TEST_CASE("three-field system matches a dense elimination oracle") {
  ExactFields fields = exact_fields(2, 1.0);
  LevelOperators ops = assemble_level(2, 2, 1.0, fields.g);
  SaddleSystem sys = build_three_field_system(ops.A, ops.B_r, ops.B_q, ops.rhs);
  SolveResult sol = solve_saddle(sys, 1e-10);
  REQUIRE(sol.residual <= 1e-10);

  const int n = static_cast<int>(sys.matrix.rows());
  std::vector<double> dense(n * n, 0.0);
  for (const auto& t : sys.matrix.triplets()) dense[t.row * n + t.col] = t.value;
  std::vector<double> x = oracles::dense_solve(dense, sys.rhs);
  for (int i = 0; i < n; ++i)
    REQUIRE_THAT(sol.x[i], Catch::Matchers::WithinAbs(x[i], 1e-9));
}

TEST_CASE("solving twice is bitwise deterministic") {
  ExactFields fields = exact_fields(2, 1.0);
  LevelOperators ops = assemble_level(2, 3, 1.0, fields.g);
  SaddleSystem sys = build_three_field_system(ops.A, ops.B_r, ops.B_q, ops.rhs);
  SolveResult a = solve_saddle(sys);
  SolveResult b = solve_saddle(sys);
  REQUIRE(a.x == b.x);
}

TEST_CASE("the saddle matrices are symmetric as stored") {
  for (int dim : {2, 3}) {
    ExactFields fields = exact_fields(dim, 1.0);
    LevelOperators ops = assemble_level(dim, 2, 1.0, fields.g);
    SaddleSystem tf = build_three_field_system(ops.A, ops.B_r, ops.B_q, ops.rhs);
    REQUIRE(tf.matrix.max_abs_diff(tf.matrix.transposed()) < 1e-14);
    VertexBlockMatrix inv = invert_vertex_blocks(ops.A_h);
    ReducedSystem red = build_reduced_system(ops.B_r, ops.B_q, inv, ops.rhs);
    SaddleSystem mv = build_reduced_saddle(red);
    REQUIRE(mv.matrix.max_abs_diff(mv.matrix.transposed()) < 1e-13);
  }
}

TEST_CASE("multipoint and three-field solutions share the pressure") {
  ExactFields fields = exact_fields(2, 1.0);
  LevelOperators ops = assemble_level(2, 2, 1.0, fields.g);
  MethodSolution tf = solve_three_field(ops, 1e-11);
  MethodSolution mv = solve_multipoint(ops, 1e-11);
  for (Index i = 0; i < ops.space_P.n_dofs; ++i)
    REQUIRE_THAT(tf.p[i], Catch::Matchers::WithinAbs(mv.p[i], 1e-10));
  // velocities differ only at the quadrature-consistency level
  double gap = 0.0;
  for (Index i = 0; i < ops.space_Q.n_dofs; ++i)
    gap = std::max(gap, std::abs(tf.q[i] - mv.q[i]));
  REQUIRE(gap < 0.05);
  REQUIRE(gap > 0.0);
}

TEST_CASE("failure reporting: singular factorization throws") {
  std::vector<Triplet> trip = {{0, 0, 1.0}, {1, 1, 0.0}};
  SaddleSystem sys;
  sys.matrix = SparseMatrix(2, 2, std::move(trip));
  sys.rhs = {1.0, 1.0};
  REQUIRE_THROWS_AS(solve_saddle(sys), SolverError);
}

TEST_CASE("shape mismatches are rejected") {
  SaddleSystem sys;
  sys.matrix = SparseMatrix(2, 2, {{0, 0, 1.0}, {1, 1, 1.0}});
  sys.rhs = {1.0};
  REQUIRE_THROWS_AS(solve_saddle(sys), std::invalid_argument);
}
