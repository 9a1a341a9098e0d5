#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace depbreak {

/// Dense column-major matrix of doubles. Rows are time points, columns are series.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[c * rows_ + r];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[c * rows_ + r];
  }

  std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const double> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

  std::vector<double> row(std::size_t r) const {
    std::vector<double> out(cols_);
    for (std::size_t c = 0; c < cols_; ++c) out[c] = (*this)(r, c);
    return out;
  }

  /// Rows [first, first + count) as a new matrix.
  Matrix slice_rows(std::size_t first, std::size_t count) const {
    assert(first + count <= rows_);
    Matrix out(count, cols_);
    for (std::size_t c = 0; c < cols_; ++c)
      for (std::size_t r = 0; r < count; ++r) out(r, c) = (*this)(first + r, c);
    return out;
  }

  /// Row-gather: out.row(k) = row(indices[k]).
  Matrix gather_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t c = 0; c < cols_; ++c)
      for (std::size_t k = 0; k < indices.size(); ++k) out(k, c) = (*this)(indices[k], c);
    return out;
  }

  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace depbreak
