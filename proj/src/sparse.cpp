#include "pipeflow/sparse.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>

namespace pipeflow {

int CsrMatrix::find(int r, int c) const {
  const int lo = row_ptr[static_cast<std::size_t>(r)];
  const int hi = row_ptr[static_cast<std::size_t>(r) + 1];
  const auto first = col_idx.begin() + lo;
  const auto last = col_idx.begin() + hi;
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) throw std::logic_error("CsrMatrix: entry outside pattern");
  return static_cast<int>(it - col_idx.begin());
}

void CsrMatrix::mult(const double* x, double* y) const {
#ifdef PIPEFLOW_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int r = 0; r < nrows; ++r) {
    double acc = 0.0;
    for (int k = row_ptr[static_cast<std::size_t>(r)]; k < row_ptr[static_cast<std::size_t>(r) + 1]; ++k)
      acc += vals[static_cast<std::size_t>(k)] * x[col_idx[static_cast<std::size_t>(k)]];
    y[r] = acc;
  }
}

void CsrMatrix::mult_transpose(const double* x, double* y) const {
  for (int c = 0; c < ncols; ++c) y[c] = 0.0;
  for (int r = 0; r < nrows; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (int k = row_ptr[static_cast<std::size_t>(r)]; k < row_ptr[static_cast<std::size_t>(r) + 1]; ++k)
      y[col_idx[static_cast<std::size_t>(k)]] += vals[static_cast<std::size_t>(k)] * xr;
  }
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(static_cast<std::size_t>(nrows), 0.0);
  for (int r = 0; r < nrows; ++r) {
    for (int k = row_ptr[static_cast<std::size_t>(r)]; k < row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      if (col_idx[static_cast<std::size_t>(k)] == r) {
        d[static_cast<std::size_t>(r)] = vals[static_cast<std::size_t>(k)];
        break;
      }
    }
  }
  return d;
}

void CsrMatrix::axpy_same_pattern(double a, const CsrMatrix& other) {
  if (other.nrows != nrows || other.col_idx.size() != col_idx.size() || other.row_ptr != row_ptr)
    throw std::logic_error("CsrMatrix::axpy_same_pattern: patterns differ");
  for (std::size_t k = 0; k < vals.size(); ++k) vals[k] += a * other.vals[k];
  symmetric = symmetric && other.symmetric;
}

CsrMatrix CsrMatrix::transposed() const {
  CsrMatrix t;
  t.nrows = ncols;
  t.ncols = nrows;
  t.row_ptr.assign(static_cast<std::size_t>(ncols) + 1, 0);
  for (int c : col_idx) ++t.row_ptr[static_cast<std::size_t>(c) + 1];
  for (int r = 0; r < t.nrows; ++r) t.row_ptr[static_cast<std::size_t>(r) + 1] += t.row_ptr[static_cast<std::size_t>(r)];
  t.col_idx.resize(col_idx.size());
  t.vals.resize(vals.size());
  std::vector<int> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (int r = 0; r < nrows; ++r) {
    for (int k = row_ptr[static_cast<std::size_t>(r)]; k < row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      const int c = col_idx[static_cast<std::size_t>(k)];
      const int pos = next[static_cast<std::size_t>(c)]++;
      t.col_idx[static_cast<std::size_t>(pos)] = r;
      t.vals[static_cast<std::size_t>(pos)] = vals[static_cast<std::size_t>(k)];
    }
  }
  t.symmetric = symmetric;
  return t;
}

void CsrMatrix::eliminate_dirichlet(const std::vector<std::uint8_t>& mask, bool unit_diagonal) {
  for (int r = 0; r < nrows; ++r) {
    const bool rmask = mask[static_cast<std::size_t>(r)] != 0;
    for (int k = row_ptr[static_cast<std::size_t>(r)]; k < row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      const int c = col_idx[static_cast<std::size_t>(k)];
      if (rmask || mask[static_cast<std::size_t>(c)] != 0)
        vals[static_cast<std::size_t>(k)] = (rmask && c == r && unit_diagonal) ? 1.0 : 0.0;
    }
  }
}

void CsrMatrix::eliminate_dirichlet_columns(const std::vector<std::uint8_t>& mask) {
  for (int r = 0; r < nrows; ++r) {
    for (int k = row_ptr[static_cast<std::size_t>(r)]; k < row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
      if (mask[static_cast<std::size_t>(col_idx[static_cast<std::size_t>(k)])] != 0) vals[static_cast<std::size_t>(k)] = 0.0;
    }
  }
}

void PatternBuilder::add_element(const int* rdofs, int nr, const int* cdofs, int nc) {
  for (int i = 0; i < nr; ++i) {
    auto& row = rows_[static_cast<std::size_t>(rdofs[i])];
    row.insert(row.end(), cdofs, cdofs + nc);
  }
}

CsrMatrix PatternBuilder::build() const {
  CsrMatrix m;
  m.nrows = nrows_;
  m.ncols = ncols_;
  m.row_ptr.assign(static_cast<std::size_t>(nrows_) + 1, 0);
  std::vector<std::vector<int>> sorted(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    sorted[r] = rows_[r];
    std::sort(sorted[r].begin(), sorted[r].end());
    sorted[r].erase(std::unique(sorted[r].begin(), sorted[r].end()), sorted[r].end());
    m.row_ptr[r + 1] = m.row_ptr[r] + static_cast<int>(sorted[r].size());
  }
  m.col_idx.reserve(static_cast<std::size_t>(m.row_ptr.back()));
  for (const auto& row : sorted) m.col_idx.insert(m.col_idx.end(), row.begin(), row.end());
  m.vals.assign(m.col_idx.size(), 0.0);
  return m;
}

}  // namespace pipeflow
