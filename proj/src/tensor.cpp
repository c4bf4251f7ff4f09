#include "grom3/tensor.hpp"

#include <Eigen/SVD>
#include <string>

namespace grom3 {

ProbTensor::ProbTensor(std::vector<int> mode_dims) : dims_(std::move(mode_dims)) {
  std::int64_t total = 1;
  for (int d : dims_) {
    if (d < 1) throw DimGuard("ProbTensor: mode dimension must be >= 1");
    total *= d;
    if (total > kMaxTensorEntries) throw DimGuard("ProbTensor: more than 1e8 entries");
  }
  data_.assign(static_cast<std::size_t>(total), 0.0);
}

std::int64_t ProbTensor::flat_index(std::span<const int> index) const {
  if (static_cast<int>(index.size()) != modes())
    throw DimGuard("ProbTensor: index arity does not match mode count");
  std::int64_t flat = 0;
  std::int64_t stride = 1;
  for (std::size_t m = 0; m < dims_.size(); ++m) {
    if (index[m] < 1 || index[m] > dims_[m])
      throw CategoryOutOfRange("ProbTensor: index " + std::to_string(index[m]) +
                               " out of 1.." + std::to_string(dims_[m]));
    flat += stride * (index[m] - 1);
    stride *= dims_[m];
  }
  return flat;
}

double ProbTensor::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  if (a.size() == 0 || b.size() == 0) throw DimGuard("kronecker: empty operand");
  const std::int64_t rows = static_cast<std::int64_t>(a.rows()) * b.rows();
  const std::int64_t cols = static_cast<std::int64_t>(a.cols()) * b.cols();
  if (rows * cols > kMaxTensorEntries) throw DimGuard("kronecker: result exceeds 1e8 entries");
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix khatri_rao(const Matrix& c, const Matrix& d) {
  if (c.cols() != d.cols())
    throw ColumnMismatch("khatri_rao: " + std::to_string(c.cols()) + " vs " +
                         std::to_string(d.cols()) + " columns");
  if (c.size() == 0 || d.size() == 0) throw DimGuard("khatri_rao: empty operand");
  const std::int64_t rows = static_cast<std::int64_t>(c.rows()) * d.rows();
  if (rows * c.cols() > kMaxTensorEntries)
    throw DimGuard("khatri_rao: result exceeds 1e8 entries");
  Matrix out(rows, c.cols());
  for (Eigen::Index k = 0; k < c.cols(); ++k)
    for (Eigen::Index i = 0; i < c.rows(); ++i)
      for (Eigen::Index q = 0; q < d.rows(); ++q)
        out(i * d.rows() + q, k) = c(i, k) * d(q, k);
  return out;
}

int numeric_column_rank(const Matrix& m, double tol) {
  if (tol <= 0.0) throw NumericError("numeric_column_rank: tol must be > 0");
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  const double cutoff = tol * sv(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return rank;
}

}  // namespace grom3
