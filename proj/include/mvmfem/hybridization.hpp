#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvmfem/assembly.hpp"
#include "mvmfem/sparse.hpp"

namespace mvmfem {

// Velocity-pressure system left after eliminating the vorticity:
//   [ S   -B_q^T ] [q]   [ f_q - B_r A_h^-1 f_r ]
//   [ B_q        ] [p] = [ 0                    ]
// with S = B_r A_h^-1 B_r^T.
struct ReducedSystem {
  SparseMatrix S;
  const SparseMatrix* B_q = nullptr;
  std::vector<double> rhs_q;
  std::vector<double> rhs_p;
};

namespace detail {

// Dense Cholesky on a small block; returns false on a non-positive pivot.
inline bool cholesky_in_place(std::vector<double>& a, int n) {
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    const double l = std::sqrt(d);
    a[j * n + j] = l;
    for (int i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / l;
    }
  }
  return true;
}

// Explicit inverse from the Cholesky factor, L L^T x = e_k per column.
inline std::vector<double> cholesky_inverse(const std::vector<double>& chol, int n) {
  std::vector<double> inv(n * n, 0.0), col(n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      double s = (i == k) ? 1.0 : 0.0;
      for (int j = 0; j < i; ++j) s -= chol[i * n + j] * col[j];
      col[i] = s / chol[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = col[i];
      for (int j = i + 1; j < n; ++j) s -= chol[j * n + i] * inv[j * n + k];
      inv[i * n + k] = s / chol[i * n + i];
    }
  }
  return inv;
}

}  // namespace detail

// Per-vertex dense inversion of the block-diagonal operator. Blocks are SPD by
// construction, so a failed Cholesky indicates an orientation or basis bug and
// is reported with the vertex id.
inline VertexBlockMatrix invert_vertex_blocks(const VertexBlockMatrix& A_h) {
  VertexBlockMatrix inv;
  inv.n_dofs = A_h.n_dofs;
  inv.blocks.resize(A_h.blocks.size());
  for (std::size_t v = 0; v < A_h.blocks.size(); ++v) {
    const auto& b = A_h.blocks[v];
    auto& o = inv.blocks[v];
    o.dofs = b.dofs;
    if (b.size() == 0) continue;
    std::vector<double> chol = b.a;
    if (!detail::cholesky_in_place(chol, b.size()))
      throw std::runtime_error("invert_vertex_blocks: block at vertex " + std::to_string(v) +
                               " is not SPD");
    o.a = detail::cholesky_inverse(chol, b.size());
  }
  return inv;
}

// Assembles S = B_r A_h^-1 B_r^T sparsely from per-vertex outer products:
// only velocity dofs whose curl couples to the same vertex interact.
inline ReducedSystem build_reduced_system(const SparseMatrix& B_r, const SparseMatrix& B_q,
                                          const VertexBlockMatrix& A_h_inv,
                                          const RhsVectors& f) {
  if (B_r.cols() != A_h_inv.n_dofs ||
      static_cast<Index>(f.f_r.size()) != A_h_inv.n_dofs ||
      static_cast<Index>(f.f_q.size()) != B_r.rows() || B_q.cols() != B_r.rows())
    throw std::invalid_argument("build_reduced_system: dimension mismatch");

  const SparseMatrix B_r_t = B_r.transposed();  // row per vorticity dof
  std::vector<Triplet> trip;
  std::vector<Index> rows;      // velocity dofs touching the current vertex
  std::vector<double> local;    // |rows| x k dense C with C = B_r[rows, dofs]
  for (const auto& block : A_h_inv.blocks) {
    const int k = block.size();
    if (k == 0) continue;
    rows.clear();
    for (Index dof : block.dofs)
      for (Index q : B_r_t.row_cols(dof)) rows.push_back(q);
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    const int nr = static_cast<int>(rows.size());
    local.assign(nr * k, 0.0);
    for (int j = 0; j < k; ++j) {
      auto cols = B_r_t.row_cols(block.dofs[j]);
      auto vals = B_r_t.row_values(block.dofs[j]);
      for (std::size_t t = 0; t < cols.size(); ++t) {
        const int i = static_cast<int>(
            std::lower_bound(rows.begin(), rows.end(), cols[t]) - rows.begin());
        local[i * k + j] = vals[t];
      }
    }
    // scatter C * inv * C^T
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nr; ++j) {
        double s = 0.0;
        for (int a = 0; a < k; ++a)
          for (int b = 0; b < k; ++b)
            s += local[i * k + a] * block.at(a, b) * local[j * k + b];
        if (s != 0.0) trip.push_back({rows[i], rows[j], s});
      }
  }

  ReducedSystem sys;
  sys.S = SparseMatrix(B_r.rows(), B_r.rows(), std::move(trip));
  sys.B_q = &B_q;
  std::vector<double> ainv_fr = A_h_inv.apply(f.f_r);
  std::vector<double> br_ainv_fr = B_r.apply(ainv_fr);
  sys.rhs_q = f.f_q;
  for (std::size_t i = 0; i < sys.rhs_q.size(); ++i) sys.rhs_q[i] -= br_ainv_fr[i];
  sys.rhs_p.assign(B_q.rows(), 0.0);
  return sys;
}

// Local vorticity post-processing: r_h = A_h^-1 (f_r + B_r^T q_h).
inline std::vector<double> reconstruct_vorticity(const VertexBlockMatrix& A_h_inv,
                                                 const SparseMatrix& B_r,
                                                 std::span<const double> f_r,
                                                 std::span<const double> q_h) {
  std::vector<double> rhs = B_r.apply_transpose(q_h);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += f_r[i];
  return A_h_inv.apply(rhs);
}

}  // namespace mvmfem
