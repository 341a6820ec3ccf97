#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvmfem/mesh.hpp"

namespace mvmfem {

// Legacy ASCII VTK unstructured-grid writer for cellwise inspection data.
inline void export_vtk(const SimplicialMesh& mesh,
                       const std::vector<std::pair<std::string, std::vector<double>>>& cell_scalars,
                       const std::vector<std::pair<std::string, std::vector<Vec3>>>& cell_vectors,
                       const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_vtk: cannot open " + path);
  os << std::setprecision(17);
  os << "# vtk DataFile Version 3.0\n";
  os << "mvmfem cell data\n";
  os << "ASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.n_vertices() << " double\n";
  for (const auto& v : mesh.vertices) os << v.x << " " << v.y << " " << v.z << "\n";
  const int nv = mesh.dim + 1;
  os << "CELLS " << mesh.n_cells() << " " << mesh.n_cells() * (nv + 1) << "\n";
  for (const auto& c : mesh.cells) {
    os << nv;
    for (int k = 0; k < nv; ++k) os << " " << c[k];
    os << "\n";
  }
  os << "CELL_TYPES " << mesh.n_cells() << "\n";
  for (Index c = 0; c < mesh.n_cells(); ++c) os << (mesh.dim == 2 ? 5 : 10) << "\n";
  if (cell_scalars.empty() && cell_vectors.empty()) return;
  os << "CELL_DATA " << mesh.n_cells() << "\n";
  for (const auto& [name, data] : cell_scalars) {
    if (static_cast<Index>(data.size()) != mesh.n_cells())
      throw std::invalid_argument("export_vtk: scalar array size mismatch for " + name);
    os << "SCALARS " << name << " double 1\n";
    os << "LOOKUP_TABLE default\n";
    for (double v : data) os << v << "\n";
  }
  for (const auto& [name, data] : cell_vectors) {
    if (static_cast<Index>(data.size()) != mesh.n_cells())
      throw std::invalid_argument("export_vtk: vector array size mismatch for " + name);
    os << "VECTORS " << name << " double\n";
    for (const auto& v : data) os << v.x << " " << v.y << " " << v.z << "\n";
  }
}

// Minimal reader for the files written above (round-trip checks).
struct VtkContents {
  std::vector<Vec3> points;
  std::vector<std::vector<Index>> cells;
  std::vector<std::pair<std::string, std::vector<double>>> cell_scalars;
};

inline VtkContents parse_vtk(std::istream& is) {
  VtkContents out;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "POINTS") {
      Index n;
      ss >> n;
      out.points.resize(n);
      for (Index i = 0; i < n; ++i) is >> out.points[i].x >> out.points[i].y >> out.points[i].z;
    } else if (word == "CELLS") {
      Index n, total;
      ss >> n >> total;
      out.cells.resize(n);
      for (Index i = 0; i < n; ++i) {
        int k;
        is >> k;
        out.cells[i].resize(k);
        for (int j = 0; j < k; ++j) is >> out.cells[i][j];
      }
    } else if (word == "SCALARS") {
      std::string name;
      ss >> name;
      std::getline(is, line);  // LOOKUP_TABLE
      std::vector<double> data(out.cells.size());
      for (auto& v : data) is >> v;
      out.cell_scalars.emplace_back(name, std::move(data));
    }
  }
  return out;
}

}  // namespace mvmfem
