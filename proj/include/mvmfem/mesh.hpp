#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvmfem/geometry.hpp"

namespace mvmfem {

using Index = std::int64_t;

// Facet of a cell together with its global id, the orientation sign relating
// the cell-outward normal to the global facet normal, and the local index of
// the opposite vertex.
struct CellFacet {
  Index facet = -1;
  int sign = 0;      // +1 if outward normal of the cell matches the global normal
  int opposite = 0;  // local vertex index opposite this facet
};

// Simplicial tessellation with derived entity connectivity.
//
// Global orientations are canonical: entities are stored as sorted vertex
// tuples; an edge's tangent runs from low to high vertex id and a facet's
// normal is fixed by the sorted tuple (rot90 of the tangent in 2D, the cross
// product (b-a)x(c-a) in 3D). Cells are normalized to positive signed volume
// at construction, so facet signs are independent of traversal order.
class SimplicialMesh {
 public:
  int dim = 2;
  std::vector<Vec3> vertices;
  std::vector<std::array<Index, 4>> cells;  // dim+1 valid entries per cell

  std::vector<std::array<Index, 2>> edges;          // sorted pairs
  std::vector<std::array<Index, 3>> faces;          // 3D only, sorted triples
  std::vector<std::array<CellFacet, 4>> cell_facets;  // dim+1 valid entries
  std::vector<std::vector<std::pair<Index, int>>> facet_cells;  // (cell, sign)

  std::vector<double> cell_volume;
  std::vector<double> facet_area;
  std::vector<Vec3> facet_normal;  // global unit normal per facet

  std::vector<std::string> facet_tag;  // empty for interior facets

  Index n_cells() const { return static_cast<Index>(cells.size()); }
  Index n_vertices() const { return static_cast<Index>(vertices.size()); }
  Index n_edges() const { return static_cast<Index>(edges.size()); }
  Index n_facets() const {
    return dim == 2 ? static_cast<Index>(edges.size()) : static_cast<Index>(faces.size());
  }

  std::array<Index, 3> facet_vertices(Index f) const {
    if (dim == 2) return {edges[f][0], edges[f][1], -1};
    return {faces[f][0], faces[f][1], faces[f][2]};
  }

  bool is_boundary_facet(Index f) const { return facet_cells[f].size() == 1; }

  Vec3 cell_centroid(Index c) const {
    Vec3 s{};
    for (int k = 0; k <= dim; ++k) s += vertices[cells[c][k]];
    return s * (1.0 / (dim + 1));
  }

  Vec3 facet_centroid(Index f) const {
    auto fv = facet_vertices(f);
    Vec3 s{};
    for (int k = 0; k < dim; ++k) s += vertices[fv[k]];
    return s * (1.0 / dim);
  }

  double signed_volume(const std::array<Index, 4>& cell) const {
    if (dim == 2) {
      Vec3 u = vertices[cell[1]] - vertices[cell[0]];
      Vec3 v = vertices[cell[2]] - vertices[cell[0]];
      return 0.5 * (u.x * v.y - u.y * v.x);
    }
    Vec3 u = vertices[cell[1]] - vertices[cell[0]];
    Vec3 v = vertices[cell[2]] - vertices[cell[0]];
    Vec3 w = vertices[cell[3]] - vertices[cell[0]];
    return dot(u, cross(v, w)) / 6.0;
  }

  // Tags every boundary facet whose centroid satisfies the predicate.
  void tag_boundary(const std::string& tag, const std::function<bool(const Vec3&)>& pred) {
    for (Index f = 0; f < n_facets(); ++f)
      if (is_boundary_facet(f) && pred(facet_centroid(f))) facet_tag[f] = tag;
  }
};

// Populates edges/faces, facet incidence, orientation signs, measures and
// normals. Idempotent. Throws on non-manifold input (facet in >2 cells).
inline void derive_entities(SimplicialMesh& mesh) {
  const int dim = mesh.dim;
  // Positive volume normalization; swapping the last two vertices flips sign.
  for (auto& cell : mesh.cells) {
    if (mesh.signed_volume(cell) < 0) std::swap(cell[dim], cell[dim - 1]);
    std::array<Index, 4> sorted_check = cell;
    std::sort(sorted_check.begin(), sorted_check.begin() + dim + 1);
    for (int k = 0; k < dim; ++k)
      if (sorted_check[k] == sorted_check[k + 1])
        throw std::invalid_argument("derive_entities: degenerate cell");
  }

  std::map<std::array<Index, 2>, Index> edge_ids;
  std::map<std::array<Index, 3>, Index> face_ids;
  mesh.edges.clear();
  mesh.faces.clear();
  for (const auto& cell : mesh.cells) {
    for (int a = 0; a <= dim; ++a)
      for (int b = a + 1; b <= dim; ++b) {
        std::array<Index, 2> e{std::min(cell[a], cell[b]), std::max(cell[a], cell[b])};
        if (edge_ids.emplace(e, 0).second) {}
      }
    if (dim == 3) {
      for (int skip = 0; skip < 4; ++skip) {
        std::array<Index, 3> f;
        int t = 0;
        for (int k = 0; k < 4; ++k)
          if (k != skip) f[t++] = cell[k];
        std::sort(f.begin(), f.end());
        face_ids.emplace(f, 0);
      }
    }
  }
  for (auto& [e, id] : edge_ids) {
    id = static_cast<Index>(mesh.edges.size());
    mesh.edges.push_back(e);
  }
  for (auto& [f, id] : face_ids) {
    id = static_cast<Index>(mesh.faces.size());
    mesh.faces.push_back(f);
  }

  const Index n_facets = dim == 2 ? static_cast<Index>(mesh.edges.size())
                                  : static_cast<Index>(mesh.faces.size());
  mesh.cell_volume.resize(mesh.cells.size());
  mesh.facet_area.assign(n_facets, 0.0);
  mesh.facet_normal.assign(n_facets, Vec3{});
  mesh.facet_cells.assign(n_facets, {});
  mesh.cell_facets.assign(mesh.cells.size(), {});

  for (Index f = 0; f < n_facets; ++f) {
    if (dim == 2) {
      const auto& e = mesh.edges[f];
      Vec3 t = mesh.vertices[e[1]] - mesh.vertices[e[0]];
      mesh.facet_area[f] = norm(t);
      mesh.facet_normal[f] = rot90(t) * (1.0 / norm(t));
    } else {
      const auto& tri = mesh.faces[f];
      Vec3 u = mesh.vertices[tri[1]] - mesh.vertices[tri[0]];
      Vec3 v = mesh.vertices[tri[2]] - mesh.vertices[tri[0]];
      Vec3 c = cross(u, v);
      mesh.facet_area[f] = 0.5 * norm(c);
      mesh.facet_normal[f] = c * (1.0 / norm(c));
    }
  }

  for (Index ci = 0; ci < mesh.n_cells(); ++ci) {
    const auto& cell = mesh.cells[ci];
    mesh.cell_volume[ci] = mesh.signed_volume(cell);
    for (int opp = 0; opp <= dim; ++opp) {
      Index fid;
      if (dim == 2) {
        std::array<Index, 2> key{0, 0};
        int t = 0;
        for (int k = 0; k <= dim; ++k)
          if (k != opp) key[t++] = cell[k];
        if (key[0] > key[1]) std::swap(key[0], key[1]);
        fid = edge_ids.at(key);
      } else {
        std::array<Index, 3> key;
        int t = 0;
        for (int k = 0; k <= dim; ++k)
          if (k != opp) key[t++] = cell[k];
        std::sort(key.begin(), key.end());
        fid = face_ids.at(key);
      }
      // Outward test: the global normal points away from the opposite vertex.
      Vec3 base = mesh.vertices[mesh.facet_vertices(fid)[0]];
      double side = dot(mesh.facet_normal[fid], mesh.vertices[cell[opp]] - base);
      int sign = side < 0 ? +1 : -1;
      mesh.cell_facets[ci][opp] = CellFacet{fid, sign, opp};
      mesh.facet_cells[fid].push_back({ci, sign});
      if (mesh.facet_cells[fid].size() > 2)
        throw std::invalid_argument("derive_entities: non-manifold facet");
    }
  }

  mesh.facet_tag.assign(n_facets, std::string{});
  // Default configuration: the whole boundary carries the pressure condition.
  for (Index f = 0; f < n_facets; ++f)
    if (mesh.is_boundary_facet(f)) mesh.facet_tag[f] = "p-boundary";
}

// Unit square split into n x n quads, each cut along the (low,low)-(high,high)
// diagonal; 2n^2 triangles.
inline SimplicialMesh build_structured_mesh_2d(Index n) {
  if (n < 1) throw std::invalid_argument("build_structured_mesh: n must be >= 1");
  SimplicialMesh mesh;
  mesh.dim = 2;
  auto vid = [n](Index i, Index j) { return i + j * (n + 1); };
  for (Index j = 0; j <= n; ++j)
    for (Index i = 0; i <= n; ++i)
      mesh.vertices.push_back({double(i) / n, double(j) / n, 0.0});
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      Index v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.cells.push_back({v00, v10, v11, -1});
      mesh.cells.push_back({v00, v11, v01, -1});
    }
  derive_entities(mesh);
  return mesh;
}

// Unit cube split into n^3 subcubes, each cut into 6 tetrahedra by the Kuhn
// subdivision (monotone lattice paths from the low to the high corner). All
// tetrahedra of a subcube share its main diagonal, and face diagonals agree
// between neighboring subcubes, so the mesh is conforming.
inline SimplicialMesh build_structured_mesh_3d(Index n) {
  if (n < 1) throw std::invalid_argument("build_structured_mesh: n must be >= 1");
  SimplicialMesh mesh;
  mesh.dim = 3;
  auto vid = [n](Index i, Index j, Index k) { return i + (n + 1) * (j + (n + 1) * k); };
  for (Index k = 0; k <= n; ++k)
    for (Index j = 0; j <= n; ++j)
      for (Index i = 0; i <= n; ++i)
        mesh.vertices.push_back({double(i) / n, double(j) / n, double(k) / n});
  static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                      {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        for (const auto& perm : perms) {
          std::array<Index, 3> p{i, j, k};
          std::array<Index, 4> cell;
          cell[0] = vid(p[0], p[1], p[2]);
          for (int step = 0; step < 3; ++step) {
            p[perm[step]] += 1;
            cell[step + 1] = vid(p[0], p[1], p[2]);
          }
          mesh.cells.push_back(cell);
        }
  derive_entities(mesh);
  return mesh;
}

inline SimplicialMesh build_structured_mesh(int dim, Index n) {
  if (dim == 2) return build_structured_mesh_2d(n);
  if (dim == 3) return build_structured_mesh_3d(n);
  throw std::invalid_argument("build_structured_mesh: dim must be 2 or 3");
}

// Maximum cell diameter.
inline double mesh_size(const SimplicialMesh& mesh) {
  double h = 0.0;
  for (const auto& cell : mesh.cells)
    for (int a = 0; a <= mesh.dim; ++a)
      for (int b = a + 1; b <= mesh.dim; ++b)
        h = std::max(h, norm(mesh.vertices[cell[a]] - mesh.vertices[cell[b]]));
  return h;
}

// Debug dump: DIM / VERTICES k / coords / CELLS m / vertex ids, one per line.
inline void dump_mesh(const SimplicialMesh& mesh, std::ostream& os) {
  os << "DIM " << mesh.dim << "\n";
  os << "VERTICES " << mesh.n_vertices() << "\n";
  for (const auto& v : mesh.vertices) {
    os << v.x << " " << v.y;
    if (mesh.dim == 3) os << " " << v.z;
    os << "\n";
  }
  os << "CELLS " << mesh.n_cells() << "\n";
  for (const auto& c : mesh.cells) {
    for (int k = 0; k <= mesh.dim; ++k) os << (k ? " " : "") << c[k];
    os << "\n";
  }
}

}  // namespace mvmfem
