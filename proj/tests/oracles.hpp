// Test-side oracles, implemented independently of the library code paths they
// check: dense linear algebra via plain Gaussian elimination, and basis
// functions re-derived from the vertex-coordinate system rather than from
// facet normals.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mvmfem/mesh.hpp"

namespace oracles {

using mvmfem::Index;
using mvmfem::SimplicialMesh;
using mvmfem::Vec3;

// Gaussian elimination with partial pivoting; returns x with A x = b.
inline std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
    if (std::abs(a[piv * n + k]) < 1e-300) throw std::runtime_error("dense_solve: singular");
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
      std::swap(b[k], b[piv]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = a[i * n + k] / a[k * n + k];
      for (int j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a[i * n + j] * x[j];
    x[i] = s / a[i * n + i];
  }
  return x;
}

inline int dense_rank(std::vector<double> a, int rows, int cols, double tol = 1e-10) {
  int rank = 0;
  for (int col = 0; col < cols && rank < rows; ++col) {
    int piv = rank;
    for (int i = rank + 1; i < rows; ++i)
      if (std::abs(a[i * cols + col]) > std::abs(a[piv * cols + col])) piv = i;
    if (std::abs(a[piv * cols + col]) < tol) continue;
    for (int j = 0; j < cols; ++j) std::swap(a[rank * cols + j], a[piv * cols + j]);
    for (int i = 0; i < rows; ++i) {
      if (i == rank) continue;
      const double f = a[i * cols + col] / a[rank * cols + col];
      for (int j = 0; j < cols; ++j) a[i * cols + j] -= f * a[rank * cols + j];
    }
    ++rank;
  }
  return rank;
}

// Barycentric coordinate gradients from the interpolation conditions
// lambda_i(x_j) = delta_ij, solved per coordinate with dense elimination.
inline std::vector<Vec3> bary_gradients(const SimplicialMesh& mesh, Index cell) {
  const int d = mesh.dim;
  const int n = d + 1;
  std::vector<Vec3> grads(n);
  for (int i = 0; i < n; ++i) {
    // unknowns: [c, g_1..g_d] with c + g . x_j = delta_ij
    std::vector<double> a(n * n), b(n, 0.0);
    for (int j = 0; j < n; ++j) {
      a[j * n + 0] = 1.0;
      for (int k = 0; k < d; ++k) a[j * n + 1 + k] = mesh.vertices[mesh.cells[cell][j]][k];
      b[j] = (i == j) ? 1.0 : 0.0;
    }
    auto sol = dense_solve(a, b);
    for (int k = 0; k < d; ++k) grads[i][k] = sol[1 + k];
  }
  return grads;
}

// RT0 basis value with the orientation sign recomputed from scratch (centroid
// side test against the sorted-tuple normal).
inline Vec3 rt0_value(const SimplicialMesh& mesh, Index cell, int local_facet, const Vec3& x) {
  const int d = mesh.dim;
  const Index opp = mesh.cells[cell][local_facet];
  const Index fid = mesh.cell_facets[cell][local_facet].facet;
  auto fv = mesh.facet_vertices(fid);
  Vec3 nu;
  if (d == 2) {
    Vec3 t = mesh.vertices[fv[1]] - mesh.vertices[fv[0]];
    nu = {t.y, -t.x, 0.0};
  } else {
    nu = cross(mesh.vertices[fv[1]] - mesh.vertices[fv[0]],
               mesh.vertices[fv[2]] - mesh.vertices[fv[0]]);
  }
  const double side = dot(nu, mesh.vertices[opp] - mesh.vertices[fv[0]]);
  const double sign = side < 0 ? 1.0 : -1.0;
  return (x - mesh.vertices[opp]) * (sign / (d * mesh.cell_volume[cell]));
}

}  // namespace oracles
