#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

namespace mvmfem {

struct Triplet {
  std::int64_t row = 0;
  std::int64_t col = 0;
  double value = 0.0;
};

// Row-major compressed sparse matrix built from triplets; duplicates are
// summed during canonicalization.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::int64_t rows, std::int64_t cols, std::vector<Triplet> triplets)
      : n_rows_(rows), n_cols_(cols) {
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    row_ptr_.assign(rows + 1, 0);
    for (std::size_t k = 0; k < triplets.size();) {
      const auto& t = triplets[k];
      if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
        throw std::out_of_range("SparseMatrix: triplet out of range");
      double sum = 0.0;
      std::size_t j = k;
      while (j < triplets.size() && triplets[j].row == t.row && triplets[j].col == t.col)
        sum += triplets[j++].value;
      cols_.push_back(t.col);
      vals_.push_back(sum);
      ++row_ptr_[t.row + 1];
      k = j;
    }
    for (std::int64_t r = 0; r < rows; ++r) row_ptr_[r + 1] += row_ptr_[r];
  }

  std::int64_t rows() const { return n_rows_; }
  std::int64_t cols() const { return n_cols_; }
  std::int64_t nnz() const { return static_cast<std::int64_t>(vals_.size()); }

  std::span<const std::int64_t> row_cols(std::int64_t r) const {
    return {cols_.data() + row_ptr_[r], static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
  }
  std::span<const double> row_values(std::int64_t r) const {
    return {vals_.data() + row_ptr_[r], static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
  }

  double coeff(std::int64_t r, std::int64_t c) const {
    auto cc = row_cols(r);
    auto it = std::lower_bound(cc.begin(), cc.end(), c);
    if (it == cc.end() || *it != c) return 0.0;
    return vals_[row_ptr_[r] + (it - cc.begin())];
  }

  std::vector<double> apply(std::span<const double> x) const {
    if (static_cast<std::int64_t>(x.size()) != n_cols_)
      throw std::invalid_argument("SparseMatrix::apply: size mismatch");
    std::vector<double> y(n_rows_, 0.0);
    for (std::int64_t r = 0; r < n_rows_; ++r) {
      double s = 0.0;
      for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += vals_[k] * x[cols_[k]];
      y[r] = s;
    }
    return y;
  }

  std::vector<double> apply_transpose(std::span<const double> x) const {
    if (static_cast<std::int64_t>(x.size()) != n_rows_)
      throw std::invalid_argument("SparseMatrix::apply_transpose: size mismatch");
    std::vector<double> y(n_cols_, 0.0);
    for (std::int64_t r = 0; r < n_rows_; ++r)
      for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        y[cols_[k]] += vals_[k] * x[r];
    return y;
  }

  SparseMatrix transposed() const {
    std::vector<Triplet> t;
    t.reserve(vals_.size());
    for (std::int64_t r = 0; r < n_rows_; ++r)
      for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        t.push_back({cols_[k], r, vals_[k]});
    return SparseMatrix(n_cols_, n_rows_, std::move(t));
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> t;
    t.reserve(vals_.size());
    for (std::int64_t r = 0; r < n_rows_; ++r)
      for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        t.push_back({r, cols_[k], vals_[k]});
    return t;
  }

  std::int64_t max_row_nnz() const {
    std::int64_t m = 0;
    for (std::int64_t r = 0; r < n_rows_; ++r) m = std::max(m, row_ptr_[r + 1] - row_ptr_[r]);
    return m;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : vals_) m = std::max(m, std::abs(v));
    return m;
  }

  // max_{ij} |A_ij - B_ij|, pattern-insensitive
  double max_abs_diff(const SparseMatrix& other) const {
    if (rows() != other.rows() || cols() != other.cols())
      throw std::invalid_argument("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::int64_t r = 0; r < n_rows_; ++r) {
      for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        m = std::max(m, std::abs(vals_[k] - other.coeff(r, cols_[k])));
      auto oc = other.row_cols(r);
      auto ov = other.row_values(r);
      for (std::size_t k = 0; k < oc.size(); ++k)
        m = std::max(m, std::abs(ov[k] - coeff(r, oc[k])));
    }
    return m;
  }

  // Coordinate text format, one "row col value" per line.
  void dump(std::ostream& os) const {
    os.precision(17);
    for (std::int64_t r = 0; r < n_rows_; ++r)
      for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        os << r << " " << cols_[k] << " " << vals_[k] << "\n";
  }

 private:
  std::int64_t n_rows_ = 0, n_cols_ = 0;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<std::int64_t> cols_;
  std::vector<double> vals_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace mvmfem
