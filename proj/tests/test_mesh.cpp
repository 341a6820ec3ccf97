#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "mvmfem/mesh.hpp"

using namespace mvmfem;

TEST_CASE("smallest 2D split: 4 vertices, 2 triangles, 5 edges") {
  SimplicialMesh m = build_structured_mesh(2, 1);
  REQUIRE(m.n_vertices() == 4);
  REQUIRE(m.n_cells() == 2);
  REQUIRE(m.n_edges() == 5);
  REQUIRE_THAT(mesh_size(m), Catch::Matchers::WithinRel(std::sqrt(2.0), 1e-14));
}

TEST_CASE("2D n=2 counts satisfy the closed-form formulas and Euler") {
  SimplicialMesh m = build_structured_mesh(2, 2);
  REQUIRE(m.n_vertices() == 9);
  REQUIRE(m.n_cells() == 8);
  REQUIRE(m.n_edges() == 16);
  for (Index n : {1, 2, 3, 5}) {
    SimplicialMesh mn = build_structured_mesh(2, n);
    REQUIRE(mn.n_vertices() == (n + 1) * (n + 1));
    REQUIRE(mn.n_cells() == 2 * n * n);
    REQUIRE(mn.n_edges() == 3 * n * n + 2 * n);
    // Euler: V - E + F = 1 for a disc
    REQUIRE(mn.n_vertices() - mn.n_edges() + mn.n_cells() == 1);
    REQUIRE_THAT(mesh_size(mn), Catch::Matchers::WithinRel(std::sqrt(2.0) / n, 1e-13));
  }
}

TEST_CASE("Kuhn subdivision of one cube: 8 vertices, 6 tets, 19 edges, 18 faces") {
  SimplicialMesh m = build_structured_mesh(3, 1);
  REQUIRE(m.n_vertices() == 8);
  REQUIRE(m.n_cells() == 6);
  REQUIRE(m.n_edges() == 19);
  REQUIRE(m.n_facets() == 18);
  REQUIRE_THAT(mesh_size(m), Catch::Matchers::WithinRel(std::sqrt(3.0), 1e-14));
}

TEST_CASE("cell volumes are positive and sum to the unit domain") {
  for (int dim : {2, 3})
    for (Index n : {1, 2, 3}) {
      SimplicialMesh m = build_structured_mesh(dim, n);
      double total = 0.0;
      for (Index c = 0; c < m.n_cells(); ++c) {
        REQUIRE(m.cell_volume[c] > 0.0);
        total += m.cell_volume[c];
      }
      REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-13));
    }
}

TEST_CASE("facet incidence: interior facets belong to 2 cells with opposite signs") {
  for (int dim : {2, 3}) {
    SimplicialMesh m = build_structured_mesh(dim, dim == 2 ? 3 : 1);
    Index boundary = 0;
    for (Index f = 0; f < m.n_facets(); ++f) {
      const auto& inc = m.facet_cells[f];
      REQUIRE((inc.size() == 1 || inc.size() == 2));
      if (inc.size() == 2)
        REQUIRE(inc[0].second * inc[1].second == -1);
      else
        ++boundary;
      REQUIRE(m.is_boundary_facet(f) == (inc.size() == 1));
    }
    if (dim == 2) REQUIRE(boundary == 4 * 3);  // 2n boundary edges per side
  }
}

TEST_CASE("discrete divergence theorem: signed facet normals close up per cell") {
  for (int dim : {2, 3}) {
    SimplicialMesh m = build_structured_mesh(dim, 2);
    for (Index c = 0; c < m.n_cells(); ++c) {
      Vec3 sum{};
      for (int k = 0; k <= dim; ++k) {
        const CellFacet& cf = m.cell_facets[c][k];
        sum += double(cf.sign) * m.facet_area[cf.facet] * m.facet_normal[cf.facet];
      }
      REQUIRE(norm(sum) < 1e-14);
    }
  }
}

TEST_CASE("outward flux of the position field equals dim * volume") {
  // int_{dOmega_c} x . nu = int div x = dim |c|; checks the sign convention
  for (int dim : {2, 3}) {
    SimplicialMesh m = build_structured_mesh(dim, 2);
    for (Index c = 0; c < m.n_cells(); ++c) {
      double flux = 0.0;
      for (int k = 0; k <= dim; ++k) {
        const CellFacet& cf = m.cell_facets[c][k];
        flux += cf.sign * m.facet_area[cf.facet] *
                dot(m.facet_centroid(cf.facet), m.facet_normal[cf.facet]);
      }
      REQUIRE_THAT(flux, Catch::Matchers::WithinRel(dim * m.cell_volume[c], 1e-12));
    }
  }
}

TEST_CASE("derive_entities is idempotent") {
  SimplicialMesh m = build_structured_mesh(2, 3);
  auto edges = m.edges;
  auto signs = m.cell_facets;
  derive_entities(m);
  REQUIRE(m.edges == edges);
  for (Index c = 0; c < m.n_cells(); ++c)
    for (int k = 0; k <= m.dim; ++k) {
      REQUIRE(m.cell_facets[c][k].facet == signs[c][k].facet);
      REQUIRE(m.cell_facets[c][k].sign == signs[c][k].sign);
    }
}

TEST_CASE("entity lists are duplicate-free sorted tuples") {
  SimplicialMesh m = build_structured_mesh(3, 2);
  std::set<std::array<Index, 2>> edge_set(m.edges.begin(), m.edges.end());
  REQUIRE(edge_set.size() == m.edges.size());
  for (const auto& e : m.edges) REQUIRE(e[0] < e[1]);
  std::set<std::array<Index, 3>> face_set(m.faces.begin(), m.faces.end());
  REQUIRE(face_set.size() == m.faces.size());
  for (const auto& f : m.faces) {
    REQUIRE(f[0] < f[1]);
    REQUIRE(f[1] < f[2]);
  }
}

TEST_CASE("single and double triangle inputs") {
  SimplicialMesh m;
  m.dim = 2;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.cells = {{0, 1, 2, -1}};
  derive_entities(m);
  REQUIRE(m.n_edges() == 3);
  for (Index f = 0; f < 3; ++f) REQUIRE(m.facet_cells[f].size() == 1);

  SimplicialMesh m2;
  m2.dim = 2;
  m2.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m2.cells = {{0, 1, 2, -1}, {0, 2, 3, -1}};
  derive_entities(m2);
  int shared = 0;
  for (Index f = 0; f < m2.n_facets(); ++f)
    if (m2.facet_cells[f].size() == 2) {
      ++shared;
      REQUIRE(m2.facet_cells[f][0].second + m2.facet_cells[f][1].second == 0);
    }
  REQUIRE(shared == 1);
}

TEST_CASE("every interior face of the Kuhn cube has opposite-signed tets") {
  SimplicialMesh m = build_structured_mesh(3, 1);
  int interior = 0;
  for (Index f = 0; f < m.n_facets(); ++f)
    if (m.facet_cells[f].size() == 2) {
      ++interior;
      REQUIRE(m.facet_cells[f][0].second * m.facet_cells[f][1].second == -1);
    }
  REQUIRE(interior == 6);  // 18 faces total, 12 on the cube surface
}

TEST_CASE("invalid inputs are rejected") {
  REQUIRE_THROWS_AS(build_structured_mesh(2, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(build_structured_mesh(4, 1), std::invalid_argument);

  SimplicialMesh bad;  // three triangles sharing one edge
  bad.dim = 2;
  bad.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0.5, -1, 0}};
  bad.cells = {{0, 1, 2, -1}, {0, 1, 3, -1}, {0, 1, 4, -1}};
  REQUIRE_THROWS_AS(derive_entities(bad), std::invalid_argument);
}

TEST_CASE("boundary tagging covers the boundary and supports predicates") {
  SimplicialMesh m = build_structured_mesh(2, 2);
  for (Index f = 0; f < m.n_facets(); ++f)
    if (m.is_boundary_facet(f))
      REQUIRE(m.facet_tag[f] == "p-boundary");
    else
      REQUIRE(m.facet_tag[f].empty());
  m.tag_boundary("q-boundary", [](const Vec3& x) { return x.x < 1e-12; });
  int q_count = 0;
  for (Index f = 0; f < m.n_facets(); ++f)
    if (m.facet_tag[f] == "q-boundary") ++q_count;
  REQUIRE(q_count == 2);
}

TEST_CASE("mesh dump round-trips counts") {
  SimplicialMesh m = build_structured_mesh(2, 2);
  std::ostringstream ss;
  dump_mesh(m, ss);
  std::istringstream in(ss.str());
  std::string word;
  in >> word;
  REQUIRE(word == "DIM");
  int dim;
  in >> dim >> word;
  REQUIRE(dim == 2);
  REQUIRE(word == "VERTICES");
  Index nv;
  in >> nv;
  REQUIRE(nv == m.n_vertices());
}
