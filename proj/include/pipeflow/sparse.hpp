#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace pipeflow {

// Compressed sparse row matrix with a fixed, deterministically built pattern.
// Row-parallel products give bit-identical results for any thread count
// because each output entry is accumulated by exactly one thread in a fixed
// order.
struct CsrMatrix {
  int nrows = 0, ncols = 0;
  std::vector<int> row_ptr;   // size nrows+1
  std::vector<int> col_idx;   // sorted within each row
  std::vector<double> vals;
  bool symmetric = false;

  int nnz() const { return static_cast<int>(col_idx.size()); }
  void set_zero() { std::fill(vals.begin(), vals.end(), 0.0); }

  // index into vals for entry (r, c); the pair must be in the pattern
  int find(int r, int c) const;
  void add(int r, int c, double v) { vals[static_cast<std::size_t>(find(r, c))] += v; }

  void mult(const double* x, double* y) const;         // y = A x
  void mult_transpose(const double* x, double* y) const;  // y = A^T x (serial)
  std::vector<double> diagonal() const;

  // adds a * other into this; patterns must be identical
  void axpy_same_pattern(double a, const CsrMatrix& other);

  CsrMatrix transposed() const;

  // Symmetric homogeneous Dirichlet elimination: zero the masked rows and
  // columns and put 1 on the masked diagonal entries.
  void eliminate_dirichlet(const std::vector<std::uint8_t>& mask, bool unit_diagonal = true);
  // Rectangular variant: zero the masked columns only.
  void eliminate_dirichlet_columns(const std::vector<std::uint8_t>& mask);
};

// Deterministic pattern construction from element dof tuples: for every
// element, all (row_dof, col_dof) pairs enter the pattern.
class PatternBuilder {
 public:
  PatternBuilder(int nrows, int ncols) : nrows_(nrows), ncols_(ncols), rows_(static_cast<std::size_t>(nrows)) {}
  void add_element(const int* rdofs, int nr, const int* cdofs, int nc);
  CsrMatrix build() const;

 private:
  int nrows_, ncols_;
  std::vector<std::vector<int>> rows_;
};

}  // namespace pipeflow
