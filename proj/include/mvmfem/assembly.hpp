#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvmfem/fespace.hpp"
#include "mvmfem/mesh.hpp"
#include "mvmfem/quadrature.hpp"
#include "mvmfem/sparse.hpp"

namespace mvmfem {

// Block-diagonal-by-vertex operator. Block v holds the coupling of all
// vorticity dofs associated with vertex v; in 2D these are 1x1, in 3D the
// block dimension equals the number of edges meeting at v.
class VertexBlockMatrix {
 public:
  struct Block {
    std::vector<Index> dofs;   // global dof ids, ascending
    std::vector<double> a;     // dense row-major, dofs.size()^2
    double& at(int i, int j) { return a[i * dofs.size() + j]; }
    double at(int i, int j) const { return a[i * dofs.size() + j]; }
    int size() const { return static_cast<int>(dofs.size()); }
  };

  Index n_dofs = 0;
  std::vector<Block> blocks;  // indexed by vertex id

  std::vector<double> apply(std::span<const double> x) const {
    if (static_cast<Index>(x.size()) != n_dofs)
      throw std::invalid_argument("VertexBlockMatrix::apply: size mismatch");
    std::vector<double> y(n_dofs, 0.0);
    for (const auto& b : blocks)
      for (int i = 0; i < b.size(); ++i) {
        double s = 0.0;
        for (int j = 0; j < b.size(); ++j) s += b.at(i, j) * x[b.dofs[j]];
        y[b.dofs[i]] = s;
      }
    return y;
  }

  SparseMatrix to_sparse() const {
    std::vector<Triplet> t;
    for (const auto& b : blocks)
      for (int i = 0; i < b.size(); ++i)
        for (int j = 0; j < b.size(); ++j)
          if (b.at(i, j) != 0.0) t.push_back({b.dofs[i], b.dofs[j], b.at(i, j)});
    return SparseMatrix(n_dofs, n_dofs, std::move(t));
  }

  double trace() const {
    double s = 0.0;
    for (const auto& b : blocks)
      for (int i = 0; i < b.size(); ++i) s += b.at(i, i);
    return s;
  }
};

struct RhsVectors {
  std::vector<double> f_r;
  std::vector<double> f_q;
  std::vector<double> f_p;
};

namespace detail {

inline void check_vorticity_space(const FeSpace& space) {
  if (space.kind != SpaceKind::Lagrange1 && space.kind != SpaceKind::Nedelec2)
    throw std::invalid_argument("expected a vorticity space (Lagrange1 or Nedelec2)");
}

// Skeleton of the per-vertex blocks: which dofs are associated with each
// vertex. Every vorticity dof belongs to exactly one vertex.
inline VertexBlockMatrix empty_blocks(const FeSpace& space) {
  const auto& mesh = *space.mesh;
  VertexBlockMatrix m;
  m.n_dofs = space.n_dofs;
  m.blocks.resize(mesh.n_vertices());
  if (space.kind == SpaceKind::Lagrange1) {
    for (Index v = 0; v < mesh.n_vertices(); ++v) m.blocks[v].dofs = {v};
  } else {
    for (Index e = 0; e < mesh.n_edges(); ++e) {
      m.blocks[mesh.edges[e][0]].dofs.push_back(2 * e);
      m.blocks[mesh.edges[e][1]].dofs.push_back(2 * e + 1);
    }
  }
  for (auto& b : m.blocks) {
    std::sort(b.dofs.begin(), b.dofs.end());
    b.a.assign(b.dofs.size() * b.dofs.size(), 0.0);
  }
  return m;
}

inline int block_pos(const VertexBlockMatrix::Block& b, Index dof) {
  auto it = std::lower_bound(b.dofs.begin(), b.dofs.end(), dof);
  return static_cast<int>(it - b.dofs.begin());
}

// Cell barycentric coordinates of a point lying on facet f of cell c, given
// the facet-simplex barycentric weights.
inline std::array<double, 4> cell_bary_on_facet(const SimplicialMesh& mesh, Index c, Index f,
                                                const std::array<double, 4>& facet_bary) {
  std::array<double, 4> bary{0.0, 0.0, 0.0, 0.0};
  auto fv = mesh.facet_vertices(f);
  for (int k = 0; k < mesh.dim; ++k) {
    bool found = false;
    for (int l = 0; l <= mesh.dim; ++l)
      if (mesh.cells[c][l] == fv[k]) {
        bary[l] = facet_bary[k];
        found = true;
        break;
      }
    if (!found) throw std::logic_error("cell_bary_on_facet: facet not part of cell");
  }
  return bary;
}

}  // namespace detail

// <mu^-1 r, r~>_Omega with exact integration of the linear basis.
inline SparseMatrix assemble_exact_vorticity_mass(const FeSpace& space_R, double mu) {
  detail::check_vorticity_space(space_R);
  if (mu <= 0.0) throw std::invalid_argument("assemble_exact_vorticity_mass: mu must be > 0");
  const auto& mesh = *space_R.mesh;
  QuadRule rule = simplex_rule(mesh.dim, 2);
  std::vector<Triplet> trip;
  std::vector<BasisValue> vals;
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    CellBasis cb(space_R, c);
    const int nl = cb.n_local();
    std::vector<double> local(nl * nl, 0.0);
    for (std::size_t k = 0; k < rule.weights.size(); ++k) {
      cb.eval(rule.bary[k], vals);
      const double w = rule.weights[k] * cb.volume() / mu;
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j) local[i * nl + j] += w * dot(vals[i].v, vals[j].v);
    }
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j)
        trip.push_back({cb.dofs()[i], cb.dofs()[j], local[i * nl + j]});
  }
  return SparseMatrix(space_R.n_dofs, space_R.n_dofs, std::move(trip));
}

// <mu^-1 r, r~>_h: the vertex quadrature rule sum_cells |cell|/(dim+1)
// sum_vertices (r.r~)(x_v). Only dofs associated with the same vertex couple,
// which is what makes the operator block-diagonal.
inline VertexBlockMatrix assemble_quadrature_vorticity_mass(const FeSpace& space_R, double mu) {
  detail::check_vorticity_space(space_R);
  if (mu <= 0.0) throw std::invalid_argument("assemble_quadrature_vorticity_mass: mu > 0");
  const auto& mesh = *space_R.mesh;
  const int dim = mesh.dim;
  VertexBlockMatrix m = detail::empty_blocks(space_R);
  std::vector<BasisValue> vals;
  std::array<double, 4> bary{};
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    CellBasis cb(space_R, c);
    const double w = mesh.cell_volume[c] / (dim + 1) / mu;
    for (int lv = 0; lv <= dim; ++lv) {
      bary.fill(0.0);
      bary[lv] = 1.0;
      cb.eval(bary, vals);
      const Index v = mesh.cells[c][lv];
      auto& block = m.blocks[v];
      for (int i = 0; i < cb.n_local(); ++i) {
        if (cb.associated_vertex(i) != lv) continue;  // value vanishes at x_v
        const int bi = detail::block_pos(block, cb.dofs()[i]);
        for (int j = 0; j < cb.n_local(); ++j) {
          if (cb.associated_vertex(j) != lv) continue;
          const int bj = detail::block_pos(block, cb.dofs()[j]);
          block.at(bi, bj) += w * dot(vals[i].v, vals[j].v);
        }
      }
    }
  }
  return m;
}

// <curl r, q~>_Omega; rows are velocity dofs, columns vorticity dofs.
inline SparseMatrix assemble_curl(const FeSpace& space_R, const FeSpace& space_Q) {
  detail::check_vorticity_space(space_R);
  if (space_Q.kind != SpaceKind::RT0)
    throw std::invalid_argument("assemble_curl: velocity space must be RT0");
  if (space_R.mesh != space_Q.mesh)
    throw std::invalid_argument("assemble_curl: spaces on different meshes");
  const auto& mesh = *space_R.mesh;
  QuadRule rule = simplex_rule(mesh.dim, 2);
  std::vector<Triplet> trip;
  std::vector<BasisValue> vr, vq;
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    CellBasis cbr(space_R, c), cbq(space_Q, c);
    std::vector<double> local(cbq.n_local() * cbr.n_local(), 0.0);
    for (std::size_t k = 0; k < rule.weights.size(); ++k) {
      cbr.eval(rule.bary[k], vr);
      cbq.eval(rule.bary[k], vq);
      const double w = rule.weights[k] * cbq.volume();
      for (int i = 0; i < cbq.n_local(); ++i)
        for (int j = 0; j < cbr.n_local(); ++j)
          local[i * cbr.n_local() + j] += w * dot(vr[j].d, vq[i].v);
    }
    for (int i = 0; i < cbq.n_local(); ++i)
      for (int j = 0; j < cbr.n_local(); ++j)
        trip.push_back({cbq.dofs()[i], cbr.dofs()[j], local[i * cbr.n_local() + j]});
  }
  return SparseMatrix(space_Q.n_dofs, space_R.n_dofs, std::move(trip));
}

// <div q, p~>_Omega; with flux-integral dofs every entry is the orientation
// sign, assembled exactly.
inline SparseMatrix assemble_div(const FeSpace& space_Q, const FeSpace& space_P) {
  if (space_Q.kind != SpaceKind::RT0 || space_P.kind != SpaceKind::P0)
    throw std::invalid_argument("assemble_div: expected RT0 and P0");
  if (space_Q.mesh != space_P.mesh)
    throw std::invalid_argument("assemble_div: spaces on different meshes");
  const auto& mesh = *space_Q.mesh;
  std::vector<Triplet> trip;
  for (Index c = 0; c < mesh.n_cells(); ++c)
    for (int k = 0; k <= mesh.dim; ++k) {
      const CellFacet& cf = mesh.cell_facets[c][k];
      trip.push_back({c, cf.facet, double(cf.sign)});
    }
  return SparseMatrix(space_P.n_dofs, space_Q.n_dofs, std::move(trip));
}

// Load and boundary functionals of the weak form:
//   f_q(k) = int_Omega g . q~_k  -  int_{p-boundary} p0 (nu . q~_k)
//   f_r(j) = int_{p-boundary} q0 . (nu x r~_j)
// Boundary terms are taken over facets tagged `p_tag`.
inline RhsVectors assemble_rhs(const AnalyticField& g, const AnalyticField& p0,
                               const AnalyticField& q0, const std::string& p_tag,
                               const FeSpace& space_R, const FeSpace& space_Q,
                               const FeSpace& space_P) {
  const auto& mesh = *space_Q.mesh;
  const int dim = mesh.dim;
  RhsVectors rhs;
  rhs.f_r.assign(space_R.n_dofs, 0.0);
  rhs.f_q.assign(space_Q.n_dofs, 0.0);
  rhs.f_p.assign(space_P.n_dofs, 0.0);

  // volume term
  QuadRule cell_rule = simplex_rule(dim, std::max(6, g.degree));
  std::vector<BasisValue> vq, vr;
  for (Index c = 0; c < mesh.n_cells(); ++c) {
    CellBasis cb(space_Q, c);
    for (std::size_t k = 0; k < cell_rule.weights.size(); ++k) {
      cb.eval(cell_rule.bary[k], vq);
      const Vec3 gval = g(cb.point(cell_rule.bary[k]));
      const double w = cell_rule.weights[k] * cb.volume();
      for (int i = 0; i < cb.n_local(); ++i)
        rhs.f_q[cb.dofs()[i]] += w * dot(gval, vq[i].v);
    }
  }

  // boundary terms
  QuadRule facet_rule = simplex_rule(dim - 1, std::max({6, p0.degree, q0.degree}));
  for (Index f = 0; f < mesh.n_facets(); ++f) {
    if (!mesh.is_boundary_facet(f) || mesh.facet_tag[f] != p_tag) continue;
    const auto [c, sign] = mesh.facet_cells[f][0];
    auto fv = mesh.facet_vertices(f);
    // nu below is the domain-outward normal: the global facet normal times
    // the incident cell's orientation sign.
    // - int p0 (nu.q~): only the facet's own RT0 dof has a normal trace here,
    //   constant and equal to sign/|f|.
    double p0_int = 0.0;
    for (std::size_t k = 0; k < facet_rule.weights.size(); ++k) {
      Vec3 x{};
      for (int i = 0; i < dim; ++i) x += facet_rule.bary[k][i] * mesh.vertices[fv[i]];
      p0_int += facet_rule.weights[k] * p0(x).x;
    }
    rhs.f_q[f] -= sign * p0_int;  // (sign/|f|) * |f| * mean(p0)

    // + int q0 . (nu x r~)
    CellBasis cbr(space_R, c);
    const Vec3 nu = mesh.facet_normal[f] * double(sign);
    for (std::size_t k = 0; k < facet_rule.weights.size(); ++k) {
      auto bary = detail::cell_bary_on_facet(mesh, c, f, facet_rule.bary[k]);
      cbr.eval(bary, vr);
      Vec3 x{};
      for (int i = 0; i < dim; ++i) x += facet_rule.bary[k][i] * mesh.vertices[fv[i]];
      const Vec3 q0val = q0(x);
      const double w = facet_rule.weights[k] * mesh.facet_area[f];
      for (int j = 0; j < cbr.n_local(); ++j) {
        // nu x r~ is rot90(nu) r~ for scalar 2D vorticity, the cross product in 3D
        Vec3 nxr = dim == 2 ? rot90(nu) * vr[j].v.x : cross(nu, vr[j].v);
        rhs.f_r[cbr.dofs()[j]] += w * dot(q0val, nxr);
      }
    }
  }
  return rhs;
}

// Symmetric elimination of flagged dofs: identity row/col with zero value.
inline SparseMatrix apply_essential_bc(const SparseMatrix& m,
                                       std::span<const std::uint8_t> flags) {
  if (m.rows() != m.cols() || static_cast<Index>(flags.size()) != m.rows())
    throw std::invalid_argument("apply_essential_bc: shape mismatch");
  std::vector<Triplet> trip;
  for (auto t : m.triplets()) {
    if (flags[t.row] || flags[t.col]) continue;
    trip.push_back(t);
  }
  for (Index i = 0; i < m.rows(); ++i)
    if (flags[i]) trip.push_back({i, i, 1.0});
  return SparseMatrix(m.rows(), m.cols(), std::move(trip));
}

inline void apply_essential_bc(std::vector<double>& rhs, std::span<const std::uint8_t> flags) {
  for (std::size_t i = 0; i < rhs.size(); ++i)
    if (flags[i]) rhs[i] = 0.0;
}

}  // namespace mvmfem
