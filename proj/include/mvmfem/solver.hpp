#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <stdexcept>
#include <string>
#include <vector>

#include "mvmfem/assembly.hpp"
#include "mvmfem/hybridization.hpp"
#include "mvmfem/sparse.hpp"

namespace mvmfem {

// Symmetric indefinite saddle-point system with block partition offsets
// (r/q/p for the three-field layouts, q/p for the reduced one).
struct SaddleSystem {
  SparseMatrix matrix;
  std::vector<double> rhs;
  std::vector<Index> offsets;  // starting index of each block, then total size
};

struct SolveResult {
  std::vector<double> x;
  double residual = 0.0;  // relative, |Mx-b| / |b|
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sparse direct solve. Systems here are indefinite and desk-scale, so a
// robust LU with fill-reducing column ordering is used; the residual contract
// is checked on exit. Deterministic for fixed input.
inline SolveResult solve_saddle(const SaddleSystem& sys, double tol = 1e-10) {
  const Index n = sys.matrix.rows();
  if (sys.matrix.cols() != n || static_cast<Index>(sys.rhs.size()) != n)
    throw std::invalid_argument("solve_saddle: shape mismatch");

  Eigen::SparseMatrix<double> m(n, n);
  {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(sys.matrix.nnz());
    for (const auto& t : sys.matrix.triplets()) trip.push_back({int(t.row), int(t.col), t.value});
    m.setFromTriplets(trip.begin(), trip.end());
  }
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(sys.rhs.data(), n);

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success)
    throw SolverError("solve_saddle: factorization failed (" + lu.lastErrorMessage() + ")");
  Eigen::VectorXd x = lu.solve(b);

  const double bn = b.norm();
  const double res = (m * x - b).norm() / (bn > 0 ? bn : 1.0);
  if (!(res <= tol))
    throw SolverError("solve_saddle: residual " + std::to_string(res) + " above tolerance " +
                      std::to_string(tol));
  SolveResult out;
  out.x.assign(x.data(), x.data() + n);
  out.residual = res;
  return out;
}

namespace detail {

inline void append_block(std::vector<Triplet>& trip, const SparseMatrix& m, Index row0,
                         Index col0, double scale) {
  for (const auto& t : m.triplets()) trip.push_back({t.row + row0, t.col + col0, scale * t.value});
}

// Shared three-field layout  [ M   -B_r^T  0     ] [r]   [ f_r  ]
//                            [-B_r  0      B_q^T ] [q] = [ -f_q ]
//                            [ 0    B_q    0     ] [p]   [ 0    ]
// (the velocity row of the weak form is negated so the matrix is symmetric).
inline SaddleSystem three_field_layout(const SparseMatrix& mass, const SparseMatrix& B_r,
                                       const SparseMatrix& B_q, const RhsVectors& f) {
  const Index nr = mass.rows(), nq = B_r.rows(), np = B_q.rows();
  std::vector<Triplet> trip;
  append_block(trip, mass, 0, 0, 1.0);
  append_block(trip, B_r.transposed(), 0, nr, -1.0);
  append_block(trip, B_r, nr, 0, -1.0);
  append_block(trip, B_q.transposed(), nr, nr + nq, 1.0);
  append_block(trip, B_q, nr + nq, nr, 1.0);
  SaddleSystem sys;
  sys.matrix = SparseMatrix(nr + nq + np, nr + nq + np, std::move(trip));
  sys.rhs.assign(nr + nq + np, 0.0);
  for (Index i = 0; i < nr; ++i) sys.rhs[i] = f.f_r[i];
  for (Index i = 0; i < nq; ++i) sys.rhs[nr + i] = -f.f_q[i];
  sys.offsets = {0, nr, nr + nq, nr + nq + np};
  return sys;
}

}  // namespace detail

// Three-field method: exact vorticity mass.
inline SaddleSystem build_three_field_system(const SparseMatrix& A, const SparseMatrix& B_r,
                                             const SparseMatrix& B_q, const RhsVectors& f) {
  return detail::three_field_layout(A, B_r, B_q, f);
}

// Quadrature variant of the three-field system (A replaced by A_h); the
// monolithic counterpart of the reduced method.
inline SaddleSystem build_augmented_system(const VertexBlockMatrix& A_h, const SparseMatrix& B_r,
                                           const SparseMatrix& B_q, const RhsVectors& f) {
  return detail::three_field_layout(A_h.to_sparse(), B_r, B_q, f);
}

// Reduced multipoint system  [ S    -B_q^T ] [q]   [ rhs_q ]
//                            [-B_q   0     ] [p] = [ 0     ]
inline SaddleSystem build_reduced_saddle(const ReducedSystem& red) {
  const Index nq = red.S.rows(), np = red.B_q->rows();
  std::vector<Triplet> trip;
  detail::append_block(trip, red.S, 0, 0, 1.0);
  detail::append_block(trip, red.B_q->transposed(), 0, nq, -1.0);
  detail::append_block(trip, *red.B_q, nq, 0, -1.0);
  SaddleSystem sys;
  sys.matrix = SparseMatrix(nq + np, nq + np, std::move(trip));
  sys.rhs.assign(nq + np, 0.0);
  for (Index i = 0; i < nq; ++i) sys.rhs[i] = red.rhs_q[i];
  sys.offsets = {0, nq, nq + np};
  return sys;
}

}  // namespace mvmfem
