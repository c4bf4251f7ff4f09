#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "grom3/errors.hpp"

namespace grom3 {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Hard cap on materialized tensor/product sizes; desk-scale models stay far
/// below it and anything larger is a caller bug.
inline constexpr std::int64_t kMaxTensorEntries = 100'000'000;

/// Dense nonnegative tensor stored flat with the FIRST mode varying fastest,
/// i.e. entry (c1,...,cp) lives at flat index (c1-1) + (c2-1)*d1 + ... so the
/// flat storage is exactly vec(.) and vec_tensor() is a zero-copy view.
class ProbTensor {
 public:
  explicit ProbTensor(std::vector<int> mode_dims);

  int modes() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& mode_dims() const { return dims_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  double operator[](std::int64_t flat) const { return data_[flat]; }
  double& operator[](std::int64_t flat) { return data_[flat]; }

  /// index uses 1-based categories, one per mode.
  std::int64_t flat_index(std::span<const int> index) const;
  double at(std::span<const int> index) const { return data_[flat_index(index)]; }
  double& at(std::span<const int> index) { return data_[flat_index(index)]; }

  std::span<const double> vec() const { return data_; }
  std::span<double> vec() { return data_; }

  double sum() const;

 private:
  std::vector<int> dims_;
  std::vector<double> data_;
};

/// Block-layout Kronecker product: entry ((i-1)s+q, (j-1)t+r) = a(i,j)*b(q,r),
/// so the SECOND factor's indices vary fastest.
Matrix kronecker(const Matrix& a, const Matrix& b);

/// Column-wise Kronecker product; requires equal column counts.
Matrix khatri_rao(const Matrix& c, const Matrix& d);

/// Zero-copy vectorization under the first-index-fastest ordering.
inline std::span<const double> vec_tensor(const ProbTensor& t) { return t.vec(); }

/// Number of singular values exceeding tol * (largest singular value).
int numeric_column_rank(const Matrix& m, double tol = 1e-8);

}  // namespace grom3
