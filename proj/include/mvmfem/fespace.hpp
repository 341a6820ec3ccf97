#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvmfem/mesh.hpp"
#include "mvmfem/quadrature.hpp"

namespace mvmfem {

enum class SpaceKind { Lagrange1, Nedelec2, RT0, P0, P0vec };

inline const char* to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::Lagrange1: return "Lagrange1";
    case SpaceKind::Nedelec2: return "Nedelec2";
    case SpaceKind::RT0: return "RT0";
    case SpaceKind::P0: return "P0";
    case SpaceKind::P0vec: return "P0vec";
  }
  return "?";
}

// Analytic field with a declared quadrature degree. For polynomial fields the
// degree is an upper bound on the true total degree; for non-polynomial fields
// it is the target exactness of the quadrature applied to them. Scalar fields
// store their value in the x component.
struct AnalyticField {
  int dim = 2;
  int components = 1;
  int degree = 6;
  std::function<Vec3(const Vec3&)> eval;

  Vec3 operator()(const Vec3& x) const { return eval(x); }
};

// Number of components of the elementwise-constant auxiliary space: the
// vorticity is scalar in 2D and a 3-vector in 3D.
inline int w_components(int dim) { return dim == 2 ? 1 : 3; }

struct FeSpace {
  SpaceKind kind = SpaceKind::P0;
  const SimplicialMesh* mesh = nullptr;
  Index n_dofs = 0;
  std::vector<std::uint8_t> essential;  // per-dof essential-BC flag

  int dim() const { return mesh->dim; }
  bool vector_valued() const {
    return kind == SpaceKind::Nedelec2 || kind == SpaceKind::RT0 ||
           (kind == SpaceKind::P0vec && mesh->dim == 3);
  }
};

struct DofVector {
  const FeSpace* space = nullptr;
  std::vector<double> coeffs;

  explicit DofVector(const FeSpace& s) : space(&s), coeffs(s.n_dofs, 0.0) {}
  DofVector(const FeSpace& s, std::vector<double> c) : space(&s), coeffs(std::move(c)) {
    if (static_cast<Index>(coeffs.size()) != s.n_dofs)
      throw std::invalid_argument("DofVector: length mismatch");
  }
};

inline FeSpace build_space(const SimplicialMesh& mesh, SpaceKind kind) {
  if (mesh.cell_facets.empty())
    throw std::invalid_argument("build_space: mesh entities not derived");
  FeSpace s;
  s.kind = kind;
  s.mesh = &mesh;
  switch (kind) {
    case SpaceKind::Lagrange1:
      if (mesh.dim != 2)
        throw std::invalid_argument("build_space: Lagrange1 vorticity space is 2D only");
      s.n_dofs = mesh.n_vertices();
      break;
    case SpaceKind::Nedelec2:
      if (mesh.dim != 3)
        throw std::invalid_argument("build_space: Nedelec2 requires dim=3");
      s.n_dofs = 2 * mesh.n_edges();
      break;
    case SpaceKind::RT0:
      s.n_dofs = mesh.n_facets();
      break;
    case SpaceKind::P0:
      s.n_dofs = mesh.n_cells();
      break;
    case SpaceKind::P0vec:
      s.n_dofs = w_components(mesh.dim) * mesh.n_cells();
      break;
  }
  s.essential.assign(s.n_dofs, 0);
  return s;
}

// Value and differential of one local basis function at a point. The
// differential is the (vector) curl for vorticity spaces and the divergence
// (in d.x) for RT0; unused for P0/P0vec.
struct BasisValue {
  Vec3 v{};
  Vec3 d{};
};

// Per-cell basis evaluation context. Precomputes barycentric gradients and the
// local-to-global dof table; evaluation takes barycentric coordinates so that
// vertex values are exact Kronecker deltas.
//
// Local dof conventions:
//   Lagrange1: dof i <-> local vertex i, basis lambda_i.
//   Nedelec2:  per local vertex pair, global edge (a,b) with a<b contributes
//              dof 2e   (vertex a): lambda_a grad(lambda_b),
//              dof 2e+1 (vertex b): lambda_b grad(lambda_a).
//   RT0:       dof i <-> facet opposite local vertex i,
//              phi = sign (x - x_opp) / (dim |cell|), normalized so the
//              global-normal flux integral is 1.
//   P0/P0vec:  one dof per component, constant 1 in that component.
class CellBasis {
 public:
  CellBasis(const FeSpace& space, Index cell) : space_(&space), cell_(cell) {
    const auto& mesh = *space.mesh;
    const int dim = mesh.dim;
    volume_ = mesh.cell_volume[cell];
    // grad(lambda_i) = -sign_i * normal_i * |facet_i| / (dim |cell|): lambda_i
    // falls from 1 at vertex i to 0 on the opposite facet.
    for (int i = 0; i <= dim; ++i) {
      const CellFacet& cf = mesh.cell_facets[cell][i];
      grads_[i] = mesh.facet_normal[cf.facet] *
                  (-cf.sign * mesh.facet_area[cf.facet] / (dim * volume_));
    }
    switch (space.kind) {
      case SpaceKind::Lagrange1:
        for (int i = 0; i < 3; ++i) dofs_.push_back(mesh.cells[cell][i]);
        break;
      case SpaceKind::Nedelec2:
        for (int i = 0; i < 4; ++i)
          for (int j = i + 1; j < 4; ++j) {
            Index a = mesh.cells[cell][i], b = mesh.cells[cell][j];
            int lo = a < b ? i : j, hi = a < b ? j : i;
            Index e = edge_index(mesh, std::min(a, b), std::max(a, b));
            dofs_.push_back(2 * e);
            n2_assoc_.push_back({lo, hi});
            dofs_.push_back(2 * e + 1);
            n2_assoc_.push_back({hi, lo});
          }
        break;
      case SpaceKind::RT0:
        for (int i = 0; i <= dim; ++i) dofs_.push_back(mesh.cell_facets[cell][i].facet);
        break;
      case SpaceKind::P0:
        dofs_.push_back(cell);
        break;
      case SpaceKind::P0vec:
        for (int c = 0; c < w_components(dim); ++c)
          dofs_.push_back(w_components(dim) * cell + c);
        break;
    }
  }

  const std::vector<Index>& dofs() const { return dofs_; }
  int n_local() const { return static_cast<int>(dofs_.size()); }
  double volume() const { return volume_; }
  const Vec3& grad_lambda(int i) const { return grads_[i]; }

  // Local vertex a basis function lambda_a grad(lambda_b) is associated with;
  // meaningful for vorticity spaces (Lagrange1: the vertex itself).
  int associated_vertex(int local_dof) const {
    if (space_->kind == SpaceKind::Lagrange1) return local_dof;
    return n2_assoc_[local_dof].first;
  }

  Vec3 point(const std::array<double, 4>& bary) const {
    const auto& mesh = *space_->mesh;
    Vec3 x{};
    for (int i = 0; i <= mesh.dim; ++i) x += bary[i] * mesh.vertices[mesh.cells[cell_][i]];
    return x;
  }

  void eval(const std::array<double, 4>& bary, std::vector<BasisValue>& out,
            double tol = 1e-12) const {
    const auto& mesh = *space_->mesh;
    const int dim = mesh.dim;
    for (int i = 0; i <= dim; ++i)
      if (bary[i] < -tol) throw std::invalid_argument("CellBasis::eval: point outside cell");
    out.resize(dofs_.size());
    switch (space_->kind) {
      case SpaceKind::Lagrange1:
        for (int i = 0; i < 3; ++i) {
          out[i].v = {bary[i], 0.0, 0.0};
          out[i].d = rot90(grads_[i]);  // 2D curl of a scalar
        }
        break;
      case SpaceKind::Nedelec2:
        for (std::size_t k = 0; k < dofs_.size(); ++k) {
          auto [a, b] = n2_assoc_[k];
          out[k].v = bary[a] * grads_[b];
          out[k].d = cross(grads_[a], grads_[b]);
        }
        break;
      case SpaceKind::RT0: {
        Vec3 x = point(bary);
        for (int i = 0; i <= dim; ++i) {
          const CellFacet& cf = mesh.cell_facets[cell_][i];
          Vec3 xo = mesh.vertices[mesh.cells[cell_][i]];
          out[i].v = (x - xo) * (cf.sign / (dim * volume_));
          out[i].d = {cf.sign / volume_, 0.0, 0.0};
        }
        break;
      }
      case SpaceKind::P0:
        out[0].v = {1.0, 0.0, 0.0};
        out[0].d = {};
        break;
      case SpaceKind::P0vec:
        for (std::size_t k = 0; k < dofs_.size(); ++k) {
          out[k].v = {};
          out[k].v[static_cast<int>(k)] = 1.0;
          out[k].d = {};
        }
        break;
    }
  }

  // Field value of a coefficient vector at a point of this cell.
  Vec3 value(const DofVector& u, const std::array<double, 4>& bary,
             std::vector<BasisValue>& scratch) const {
    eval(bary, scratch);
    Vec3 s{};
    for (std::size_t k = 0; k < dofs_.size(); ++k) s += u.coeffs[dofs_[k]] * scratch[k].v;
    return s;
  }

  Vec3 differential(const DofVector& u, const std::array<double, 4>& bary,
                    std::vector<BasisValue>& scratch) const {
    eval(bary, scratch);
    Vec3 s{};
    for (std::size_t k = 0; k < dofs_.size(); ++k) s += u.coeffs[dofs_[k]] * scratch[k].d;
    return s;
  }

  static Index edge_index(const SimplicialMesh& mesh, Index a, Index b) {
    auto it = std::lower_bound(mesh.edges.begin(), mesh.edges.end(),
                               std::array<Index, 2>{a, b});
    if (it == mesh.edges.end() || (*it)[0] != a || (*it)[1] != b)
      throw std::logic_error("edge_index: edge not found");
    return static_cast<Index>(it - mesh.edges.begin());
  }

 private:
  const FeSpace* space_;
  Index cell_;
  double volume_ = 0.0;
  std::array<Vec3, 4> grads_{};
  std::vector<Index> dofs_;
  std::vector<std::pair<int, int>> n2_assoc_;  // (associated vertex, other endpoint)
};

// One-off basis evaluation; prefer CellBasis in loops.
inline std::vector<BasisValue> eval_basis(const FeSpace& space, Index cell,
                                          const std::array<double, 4>& bary) {
  CellBasis cb(space, cell);
  std::vector<BasisValue> out;
  cb.eval(bary, out);
  return out;
}

namespace detail {

// Integral of `field . global_normal` over a facet, by a rule exact for the
// requested degree on the facet simplex.
inline double facet_flux(const SimplicialMesh& mesh, Index f, const AnalyticField& field,
                         const QuadRule& rule) {
  auto fv = mesh.facet_vertices(f);
  double integral = 0.0;
  for (std::size_t k = 0; k < rule.weights.size(); ++k) {
    Vec3 x{};
    for (int i = 0; i < mesh.dim; ++i) x += rule.bary[k][i] * mesh.vertices[fv[i]];
    integral += rule.weights[k] * dot(field(x), mesh.facet_normal[f]);
  }
  return integral * mesh.facet_area[f];
}

}  // namespace detail

// Canonical interpolant. Lagrange1 and Nedelec2 use vertex values, RT0 the
// facet flux integrals, P0/P0vec the cell averages.
inline DofVector interpolate(const FeSpace& space, const AnalyticField& field) {
  const auto& mesh = *space.mesh;
  DofVector u(space);
  const int qdeg = std::max(6, field.degree);
  switch (space.kind) {
    case SpaceKind::Lagrange1:
      for (Index v = 0; v < mesh.n_vertices(); ++v) u.coeffs[v] = field(mesh.vertices[v]).x;
      break;
    case SpaceKind::Nedelec2:
      for (Index e = 0; e < mesh.n_edges(); ++e) {
        const Vec3& xa = mesh.vertices[mesh.edges[e][0]];
        const Vec3& xb = mesh.vertices[mesh.edges[e][1]];
        u.coeffs[2 * e] = dot(field(xa), xb - xa);
        u.coeffs[2 * e + 1] = dot(field(xb), xa - xb);
      }
      break;
    case SpaceKind::RT0: {
      QuadRule rule = simplex_rule(mesh.dim - 1, qdeg);
      for (Index f = 0; f < mesh.n_facets(); ++f)
        u.coeffs[f] = detail::facet_flux(mesh, f, field, rule);
      break;
    }
    case SpaceKind::P0:
    case SpaceKind::P0vec: {
      QuadRule rule = simplex_rule(mesh.dim, qdeg);
      const int nc = space.kind == SpaceKind::P0 ? 1 : w_components(mesh.dim);
      for (Index c = 0; c < mesh.n_cells(); ++c) {
        CellBasis cb(space, c);
        Vec3 mean{};
        for (std::size_t k = 0; k < rule.weights.size(); ++k)
          mean += rule.weights[k] * field(cb.point(rule.bary[k]));
        for (int comp = 0; comp < nc; ++comp) u.coeffs[nc * c + comp] = mean[comp];
      }
      break;
    }
  }
  return u;
}

// Marks essential-BC dofs carried by boundary facets with the given tag
// (nu x r = 0 for vorticity spaces, nu . q = 0 for RT0).
inline void flag_essential(FeSpace& space, const std::string& tag) {
  const auto& mesh = *space.mesh;
  for (Index f = 0; f < mesh.n_facets(); ++f) {
    if (!mesh.is_boundary_facet(f) || mesh.facet_tag[f] != tag) continue;
    auto fv = mesh.facet_vertices(f);
    switch (space.kind) {
      case SpaceKind::Lagrange1:
        for (int k = 0; k < mesh.dim; ++k) space.essential[fv[k]] = 1;
        break;
      case SpaceKind::Nedelec2:
        for (int a = 0; a < 3; ++a)
          for (int b = a + 1; b < 3; ++b) {
            Index e = CellBasis::edge_index(mesh, std::min(fv[a], fv[b]),
                                            std::max(fv[a], fv[b]));
            space.essential[2 * e] = 1;
            space.essential[2 * e + 1] = 1;
          }
        break;
      case SpaceKind::RT0:
        space.essential[f] = 1;
        break;
      default:
        throw std::invalid_argument("flag_essential: space has no boundary dofs");
    }
  }
}

}  // namespace mvmfem
