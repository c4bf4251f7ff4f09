#pragma once

#include <span>
#include <vector>

#include "grom3/tensor.hpp"

namespace grom3 {

struct ModelDims {
  int p = 0;
  int G = 0;
  int K = 0;
  std::vector<int> d;  // per-variable category counts, each >= 2

  void validate() const;
};

/// Variable grouping as the assignment vector s (values 1..G); equivalent to
/// the p x G binary grouping matrix with one 1 per row.
struct GroupAssignment {
  int G = 1;
  std::vector<int> s;

  int p() const { return static_cast<int>(s.size()); }
  /// 0-based variable indices of group g (g in 1..G).
  std::vector<int> members(int g) const;
  std::vector<int> group_counts() const;
  int occupied_groups() const;
  void validate() const;
};

/// Per-variable conditional probability tables; table j is d_j x K with
/// column k the categorical distribution of variable j under profile k.
struct CondProbTables {
  std::vector<Matrix> tables;

  int p() const { return static_cast<int>(tables.size()); }
  int K() const { return tables.empty() ? 0 : static_cast<int>(tables[0].cols()); }
  void validate(double tol = 1e-10) const;
};

struct DirichletParams {
  std::vector<double> alpha;

  int K() const { return static_cast<int>(alpha.size()); }
  double total() const;
  void validate() const;
};

struct Model {
  ModelDims dims;
  GroupAssignment grouping;
  CondProbTables lambda;
  DirichletParams alpha;

  void validate() const;
};

/// G-mode K x ... x K tensor of Dirichlet moments E[pi_{k1} ... pi_{kG}],
/// computed in closed form from gamma-function ratios; entries sum to 1.
ProbTensor core_tensor(const DirichletParams& alpha, int G);

/// log P(y) for one response vector (1-based categories), evaluated by exact
/// enumeration of the K^G latent configurations in log space.
double response_log_prob(const Model& model, std::span<const int> y);

/// Full d_1 x ... x d_p probability tensor built through the structured
/// Kronecker / Khatri-Rao product acting on vec of the core tensor.
ProbTensor marginal_probability_tensor(const Model& model);

/// Joint distribution of variables j and m (0-based indices), d_j x d_m.
Matrix pairwise_joint(const Model& model, int j, int m);

/// Association between variables j and m on the model-implied joint:
/// sqrt( (1/min(d_j,d_m)) * sum (p_jm - p_j p_m)^2 / (p_j p_m) ), cells with a
/// zero marginal product dropped. Zero iff the pair is independent.
double model_cramers_v(const Model& model, int j, int m);

/// Same statistic evaluated on an arbitrary joint table (rows sum to 1 jointly).
double cramers_v_from_joint(const Matrix& joint);

GroupAssignment lcm_grouping(int p);  // all variables in one group
GroupAssignment gom_grouping(int p);  // each variable its own group

}  // namespace grom3
