#pragma once

#include <array>
#include <string>
#include <vector>

#include "grom3/model.hpp"

namespace grom3 {

struct PartitionWitness {
  int group = 0;                           // 1-based group label
  std::array<std::vector<int>, 3> parts;   // 0-based variable indices
  std::array<std::int64_t, 3> detail{};    // observed ranks (thm 1/2) or category products (thm 3)
};

struct IdentifiabilityReport {
  std::string theorem;
  bool satisfied = false;
  std::vector<std::string> failures;  // empty iff satisfied
  std::vector<std::string> notes;
  std::vector<PartitionWitness> witnesses;

  std::string to_string() const;
};

/// Strict conditions via per-table ranks: every group needs >= 3 members whose
/// individual tables have numeric column rank K (part a), and no table may
/// have all-identical columns (part b).
IdentifiabilityReport check_theorem1(const Model& model, double tol = 1e-8);

/// Relaxed conditions: each group splits into three nonempty parts whose
/// Khatri-Rao products have full column rank K. The search enumerates candidate
/// sub-products for groups of <= 12 members and falls back to a greedy
/// accumulation for larger groups; the found partition is recorded.
IdentifiabilityReport check_theorem2(const Model& model, double tol = 1e-8);

/// Generic-parameter conditions: purely combinatorial, each group must split
/// into three parts with prod d_j >= K in each part.
IdentifiabilityReport check_theorem3(const ModelDims& dims, const GroupAssignment& grouping);

/// Inverts the Dirichlet moment tensor: from phi with G >= 2 modes of dim K,
/// recovers alpha through the ratio identities u=(a_k+1)/a_l, v=(a_l+1)/a_k,
/// averaging over all eligible index tuples, then verifies the round trip
/// through core_tensor to 1e-6 relative.
DirichletParams recover_alpha_from_core(const ProbTensor& phi);

}  // namespace grom3
