#include "grom3/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "grom3/numerics.hpp"

namespace grom3 {

namespace {

constexpr std::int64_t kMaxEnumeratedConfigs = 10'000'000;  // K^G cap for exact evaluation

// Running sum that tolerates -inf terms (log of a zero probability entry).
struct NegInfSum {
  double finite = 0.0;
  int ninf = 0;
  void add(double x) {
    if (x == -std::numeric_limits<double>::infinity())
      ++ninf;
    else
      finite += x;
  }
  void sub(double x) {
    if (x == -std::numeric_limits<double>::infinity())
      --ninf;
    else
      finite -= x;
  }
  double value() const {
    return ninf > 0 ? -std::numeric_limits<double>::infinity() : finite;
  }
};

std::int64_t checked_pow(std::int64_t base, int exp, std::int64_t cap, const char* what) {
  std::int64_t v = 1;
  for (int i = 0; i < exp; ++i) {
    v *= base;
    if (v > cap) throw DimGuard(std::string(what) + ": configuration count exceeds guard");
  }
  return v;
}

// lg(k, m) = lgamma(alpha_k + m) - lgamma(alpha_k) for m = 0..G.
Matrix dirichlet_lgamma_table(const DirichletParams& alpha, int G) {
  const int K = alpha.K();
  Matrix lg(K, G + 1);
  for (int k = 0; k < K; ++k)
    for (int m = 0; m <= G; ++m)
      lg(k, m) = std::lgamma(alpha.alpha[k] + m) - std::lgamma(alpha.alpha[k]);
  return lg;
}

}  // namespace

void ModelDims::validate() const {
  if (p < 1) throw NumericError("ModelDims: p must be >= 1");
  if (G < 1 || G > p) throw NumericError("ModelDims: need 1 <= G <= p");
  if (K < 1) throw NumericError("ModelDims: K must be >= 1");
  if (static_cast<int>(d.size()) != p) throw ShapeMismatch("ModelDims: d has wrong length");
  for (int dj : d)
    if (dj < 2) throw NumericError("ModelDims: every d_j must be >= 2");
}

std::vector<int> GroupAssignment::members(int g) const {
  std::vector<int> out;
  for (std::size_t j = 0; j < s.size(); ++j)
    if (s[j] == g) out.push_back(static_cast<int>(j));
  return out;
}

std::vector<int> GroupAssignment::group_counts() const {
  std::vector<int> counts(G, 0);
  for (int v : s) ++counts[v - 1];
  return counts;
}

int GroupAssignment::occupied_groups() const {
  const auto counts = group_counts();
  return static_cast<int>(std::count_if(counts.begin(), counts.end(),
                                        [](int c) { return c > 0; }));
}

void GroupAssignment::validate() const {
  if (G < 1) throw NumericError("GroupAssignment: G must be >= 1");
  for (int v : s)
    if (v < 1 || v > G)
      throw NumericError("GroupAssignment: entry " + std::to_string(v) + " outside 1.." +
                         std::to_string(G));
}

void CondProbTables::validate(double tol) const {
  for (std::size_t j = 0; j < tables.size(); ++j) {
    const Matrix& t = tables[j];
    if (t.rows() < 2 || t.cols() < 1)
      throw ShapeMismatch("CondProbTables: table " + std::to_string(j + 1) + " is degenerate");
    if (t.cols() != tables[0].cols())
      throw ShapeMismatch("CondProbTables: inconsistent profile counts");
    for (Eigen::Index k = 0; k < t.cols(); ++k) {
      double colsum = 0.0;
      for (Eigen::Index c = 0; c < t.rows(); ++c) {
        if (t(c, k) < 0.0 || !std::isfinite(t(c, k)))
          throw NumericError("CondProbTables: negative or non-finite entry");
        colsum += t(c, k);
      }
      if (std::abs(colsum - 1.0) > tol)
        throw NumericError("CondProbTables: column " + std::to_string(k + 1) + " of table " +
                           std::to_string(j + 1) + " does not sum to 1");
    }
  }
}

double DirichletParams::total() const {
  return std::accumulate(alpha.begin(), alpha.end(), 0.0);
}

void DirichletParams::validate() const {
  if (alpha.empty()) throw NumericError("DirichletParams: empty alpha");
  for (double a : alpha)
    if (!(a > 0.0) || !std::isfinite(a))
      throw NumericError("DirichletParams: alpha entries must be positive and finite");
}

void Model::validate() const {
  dims.validate();
  grouping.validate();
  lambda.validate();
  alpha.validate();
  if (grouping.p() != dims.p || lambda.p() != dims.p)
    throw ShapeMismatch("Model: grouping/lambda length does not match p");
  if (grouping.G != dims.G) throw ShapeMismatch("Model: grouping G does not match dims");
  if (alpha.K() != dims.K || lambda.K() != dims.K)
    throw ShapeMismatch("Model: profile count mismatch");
  for (int j = 0; j < dims.p; ++j)
    if (lambda.tables[j].rows() != dims.d[j])
      throw ShapeMismatch("Model: table " + std::to_string(j + 1) + " has wrong category count");
}

ProbTensor core_tensor(const DirichletParams& alpha, int G) {
  alpha.validate();
  if (G < 1) throw NumericError("core_tensor: G must be >= 1");
  const int K = alpha.K();
  ProbTensor phi(std::vector<int>(G, K));  // ctor guards K^G
  const double a0 = alpha.total();
  const double base = std::lgamma(a0) - std::lgamma(a0 + G);
  const Matrix lg = dirichlet_lgamma_table(alpha, G);

  std::vector<int> digit(G, 0);
  std::vector<int> mult(K, 0);
  mult[0] = G;
  double core = lg(0, G);
  for (std::int64_t t = 0;; ) {
    phi[t] = std::exp(base + core);
    if (++t == phi.size()) break;
    int g = 0;
    while (digit[g] == K - 1) {
      core += lg(K - 1, mult[K - 1] - 1) - lg(K - 1, mult[K - 1]);
      --mult[K - 1];
      core += lg(0, mult[0] + 1) - lg(0, mult[0]);
      ++mult[0];
      digit[g] = 0;
      ++g;
    }
    const int v = digit[g];
    core += lg(v, mult[v] - 1) - lg(v, mult[v]);
    --mult[v];
    core += lg(v + 1, mult[v + 1] + 1) - lg(v + 1, mult[v + 1]);
    ++mult[v + 1];
    digit[g] = v + 1;
  }
  return phi;
}

double response_log_prob(const Model& model, std::span<const int> y) {
  const int p = model.dims.p, G = model.dims.G, K = model.dims.K;
  if (static_cast<int>(y.size()) != p) throw ShapeMismatch("response_log_prob: wrong length");
  for (int j = 0; j < p; ++j)
    if (y[j] < 1 || y[j] > model.dims.d[j])
      throw CategoryOutOfRange("response_log_prob: y_" + std::to_string(j + 1) + " = " +
                               std::to_string(y[j]));
  const std::int64_t configs = checked_pow(K, G, kMaxEnumeratedConfigs, "response_log_prob");

  // logw(g,k) = sum over group-g members of log lambda_j(y_j, k)
  Matrix logw = Matrix::Zero(G, K);
  for (int j = 0; j < p; ++j) {
    const int g = model.grouping.s[j] - 1;
    for (int k = 0; k < K; ++k) logw(g, k) += std::log(model.lambda.tables[j](y[j] - 1, k));
  }

  const double a0 = model.alpha.total();
  const double base = std::lgamma(a0) - std::lgamma(a0 + G);
  const Matrix lg = dirichlet_lgamma_table(model.alpha, G);

  std::vector<int> digit(G, 0);
  std::vector<int> mult(K, 0);
  mult[0] = G;
  double core = lg(0, G);
  NegInfSum wsum;
  for (int g = 0; g < G; ++g) wsum.add(logw(g, 0));

  LogSumExp acc;
  for (std::int64_t t = 0;; ) {
    acc.add(base + core + wsum.value());
    if (++t == configs) break;
    int g = 0;
    while (digit[g] == K - 1) {
      wsum.sub(logw(g, K - 1));
      wsum.add(logw(g, 0));
      core += lg(K - 1, mult[K - 1] - 1) - lg(K - 1, mult[K - 1]);
      --mult[K - 1];
      core += lg(0, mult[0] + 1) - lg(0, mult[0]);
      ++mult[0];
      digit[g] = 0;
      ++g;
    }
    const int v = digit[g];
    wsum.sub(logw(g, v));
    wsum.add(logw(g, v + 1));
    core += lg(v, mult[v] - 1) - lg(v, mult[v]);
    --mult[v];
    core += lg(v + 1, mult[v + 1] + 1) - lg(v + 1, mult[v + 1]);
    ++mult[v + 1];
    digit[g] = v + 1;
  }
  return acc.value();
}

ProbTensor marginal_probability_tensor(const Model& model) {
  const int G = model.dims.G, K = model.dims.K;
  std::int64_t cells = 1;
  for (int dj : model.dims.d) {
    cells *= dj;
    if (cells > kMaxTensorEntries) throw DimGuard("marginal_probability_tensor: cell count");
  }
  const std::int64_t configs = checked_pow(K, G, kMaxTensorEntries, "marginal_probability_tensor");
  if (cells * configs > kMaxTensorEntries)
    throw DimGuard("marginal_probability_tensor: product matrix exceeds guard");

  // One factor per group; the first member listed varies fastest, so fold the
  // Khatri-Rao from the left: acc <- kr(next, acc). Empty groups contribute a
  // row of ones (their latent coordinate is marginalized out).
  std::vector<Matrix> w(G);
  for (int g = 0; g < G; ++g) {
    const auto members = model.grouping.members(g + 1);
    if (members.empty()) {
      w[g] = Matrix::Ones(1, K);
      continue;
    }
    Matrix acc = model.lambda.tables[members[0]];
    for (std::size_t m = 1; m < members.size(); ++m)
      acc = khatri_rao(model.lambda.tables[members[m]], acc);
    w[g] = std::move(acc);
  }
  // Kronecker over groups with group 1 varying fastest, matching the
  // first-index-fastest vec ordering on both rows and columns.
  Matrix big = w[0];
  for (int g = 1; g < G; ++g) big = kronecker(w[g], big);

  const ProbTensor phi = core_tensor(model.alpha, G);
  Eigen::Map<const Eigen::VectorXd> vphi(phi.vec().data(), phi.size());
  const Eigen::VectorXd v = big * vphi;

  // Rows of v are indexed by categories in block order; scatter back to the
  // original variable order.
  std::vector<int> order;
  for (int g = 1; g <= G; ++g)
    for (int j : model.grouping.members(g)) order.push_back(j);
  std::vector<std::int64_t> stride(model.dims.p);
  std::int64_t st = 1;
  for (int j = 0; j < model.dims.p; ++j) {
    stride[j] = st;
    st *= model.dims.d[j];
  }
  ProbTensor out(model.dims.d);
  for (std::int64_t t = 0; t < v.size(); ++t) {
    std::int64_t rem = t, orig = 0;
    for (int m = 0; m < model.dims.p; ++m) {
      const int dj = model.dims.d[order[m]];
      orig += (rem % dj) * stride[order[m]];
      rem /= dj;
    }
    out[orig] = v(t);
  }
  return out;
}

Matrix pairwise_joint(const Model& model, int j, int m) {
  if (j == m) throw SameVariable("pairwise_joint: j == m");
  const int K = model.dims.K;
  const double a0 = model.alpha.total();
  const Matrix& lj = model.lambda.tables[j];
  const Matrix& lm = model.lambda.tables[m];
  if (model.grouping.s[j] == model.grouping.s[m]) {
    // shared latent assignment: single mixture over profiles with weights E[pi_k]
    Eigen::VectorXd weights(K);
    for (int k = 0; k < K; ++k) weights(k) = model.alpha.alpha[k] / a0;
    return lj * weights.asDiagonal() * lm.transpose();
  }
  Matrix mom2(K, K);  // E[pi_k pi_l]
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) {
      const double ak = model.alpha.alpha[k], al = model.alpha.alpha[l];
      mom2(k, l) = (k == l ? ak * (ak + 1.0) : ak * al) / (a0 * (a0 + 1.0));
    }
  return lj * mom2 * lm.transpose();
}

double cramers_v_from_joint(const Matrix& joint) {
  const Eigen::VectorXd pj = joint.rowwise().sum();
  const Eigen::VectorXd pm = joint.colwise().sum();
  double chi2 = 0.0;
  for (Eigen::Index c1 = 0; c1 < joint.rows(); ++c1)
    for (Eigen::Index c2 = 0; c2 < joint.cols(); ++c2) {
      const double denom = pj(c1) * pm(c2);
      if (denom <= 0.0) continue;  // zero marginal product: 0/0 cell, dropped
      const double diff = joint(c1, c2) - denom;
      chi2 += diff * diff / denom;
    }
  const double v = std::sqrt(chi2 / std::min(joint.rows(), joint.cols()));
  return std::clamp(v, 0.0, 1.0);
}

double model_cramers_v(const Model& model, int j, int m) {
  if (j == m) throw SameVariable("model_cramers_v: j == m");
  return cramers_v_from_joint(pairwise_joint(model, j, m));
}

GroupAssignment lcm_grouping(int p) {
  if (p < 1) throw NumericError("lcm_grouping: p must be >= 1");
  return GroupAssignment{1, std::vector<int>(p, 1)};
}

GroupAssignment gom_grouping(int p) {
  if (p < 1) throw NumericError("gom_grouping: p must be >= 1");
  GroupAssignment g{p, std::vector<int>(p)};
  std::iota(g.s.begin(), g.s.end(), 1);
  return g;
}

}  // namespace grom3
