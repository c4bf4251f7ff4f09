#include "grom3/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace grom3 {

namespace {

constexpr std::int64_t kRankRowCap = 20000;  // largest Khatri-Rao product we SVD
constexpr int kExhaustiveGroupLimit = 12;

std::string join_vars(const std::vector<int>& vars) {
  std::string out = "{";
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(vars[i] + 1);
  }
  return out + "}";
}

bool columns_all_identical(const Matrix& t, double tol) {
  for (Eigen::Index k = 1; k < t.cols(); ++k)
    if ((t.col(k) - t.col(0)).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

Matrix khatri_rao_over(const CondProbTables& lambda, const std::vector<int>& vars) {
  Matrix acc = lambda.tables[vars[0]];
  for (std::size_t i = 1; i < vars.size(); ++i) acc = khatri_rao(lambda.tables[vars[i]], acc);
  return acc;
}

std::vector<int> mask_to_vars(std::uint32_t mask, const std::vector<int>& members) {
  std::vector<int> out;
  for (std::size_t i = 0; i < members.size(); ++i)
    if (mask & (1u << i)) out.push_back(members[i]);
  return out;
}

// Subsets whose Khatri-Rao product reaches rank K, minimal under inclusion.
// A part containing any such subset is itself full rank because every extra
// factor has strictly positive column sums.
struct SubsetSearch {
  std::vector<std::uint32_t> minimal_good;
  bool truncated = false;
};

SubsetSearch find_rank_witnesses(const CondProbTables& lambda, const std::vector<int>& members,
                                 int K, double tol) {
  SubsetSearch out;
  const int m = static_cast<int>(members.size());
  std::vector<std::uint32_t> masks;
  // the full set can never join a disjoint triple, so skip it
  for (std::uint32_t mask = 1; mask + 1 < (1u << m); ++mask) masks.push_back(mask);
  std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
    const int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  for (std::uint32_t mask : masks) {
    bool covered = false;
    for (std::uint32_t good : out.minimal_good)
      if ((mask & good) == good) {
        covered = true;
        break;
      }
    if (covered) continue;
    const auto vars = mask_to_vars(mask, members);
    std::int64_t rows = 1;
    for (int j : vars) rows *= lambda.tables[j].rows();
    if (rows < K) continue;
    if (rows > kRankRowCap) {
      out.truncated = true;
      continue;
    }
    if (numeric_column_rank(khatri_rao_over(lambda, vars), tol) == K)
      out.minimal_good.push_back(mask);
  }
  return out;
}

// Three pairwise-disjoint masks from the list, if any.
bool pick_three_disjoint(const std::vector<std::uint32_t>& masks,
                         std::array<std::uint32_t, 3>& chosen) {
  const std::size_t n = masks.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      if (masks[a] & masks[b]) continue;
      for (std::size_t c = b + 1; c < n; ++c) {
        if ((masks[c] & masks[a]) || (masks[c] & masks[b])) continue;
        chosen = {masks[a], masks[b], masks[c]};
        return true;
      }
    }
  return false;
}

}  // namespace

std::string IdentifiabilityReport::to_string() const {
  std::ostringstream os;
  os << theorem << ": " << (satisfied ? "satisfied" : "NOT satisfied") << "\n";
  for (const auto& w : witnesses) {
    os << "  group " << w.group << ": parts";
    for (int m = 0; m < 3; ++m)
      if (!w.parts[m].empty()) os << " " << join_vars(w.parts[m]);
    os << "  [" << w.detail[0] << "/" << w.detail[1] << "/" << w.detail[2] << "]\n";
  }
  for (const auto& f : failures) os << "  failure: " << f << "\n";
  for (const auto& n : notes) os << "  note: " << n << "\n";
  return os.str();
}

IdentifiabilityReport check_theorem1(const Model& model, double tol) {
  if (tol <= 0.0) throw NumericError("check_theorem1: tol must be > 0");
  model.validate();
  IdentifiabilityReport rep;
  rep.theorem = "theorem 1 (strict, per-table ranks)";
  const int K = model.dims.K;
  for (int g = 1; g <= model.dims.G; ++g) {
    const auto members = model.grouping.members(g);
    std::vector<int> full_rank_members;
    for (int j : members)
      if (numeric_column_rank(model.lambda.tables[j], tol) == K) full_rank_members.push_back(j);
    if (full_rank_members.size() < 3) {
      rep.failures.push_back("part (a): group " + std::to_string(g) + " has " +
                             std::to_string(full_rank_members.size()) +
                             " member(s) with full-rank tables; needs 3");
    } else {
      PartitionWitness w;
      w.group = g;
      for (int m = 0; m < 3; ++m) {
        w.parts[m] = {full_rank_members[m]};
        w.detail[m] = K;
      }
      rep.witnesses.push_back(std::move(w));
    }
  }
  for (int j = 0; j < model.dims.p; ++j)
    if (columns_all_identical(model.lambda.tables[j], tol))
      rep.failures.push_back("part (b): all columns of table " + std::to_string(j + 1) +
                             " are identical");
  rep.satisfied = rep.failures.empty();
  return rep;
}

IdentifiabilityReport check_theorem2(const Model& model, double tol) {
  if (tol <= 0.0) throw NumericError("check_theorem2: tol must be > 0");
  model.validate();
  IdentifiabilityReport rep;
  rep.theorem = "theorem 2 (strict, Khatri-Rao ranks)";
  const int K = model.dims.K;
  for (int g = 1; g <= model.dims.G; ++g) {
    const auto members = model.grouping.members(g);
    if (static_cast<int>(members.size()) < 3)
      throw GroupTooSmall("check_theorem2: group " + std::to_string(g) + " has " +
                          std::to_string(members.size()) + " member(s)");
    if (static_cast<int>(members.size()) <= kExhaustiveGroupLimit) {
      const SubsetSearch search = find_rank_witnesses(model.lambda, members, K, tol);
      std::array<std::uint32_t, 3> chosen{};
      if (pick_three_disjoint(search.minimal_good, chosen)) {
        PartitionWitness w;
        w.group = g;
        const std::uint32_t used = chosen[0] | chosen[1] | chosen[2];
        for (int m = 0; m < 3; ++m) {
          w.parts[m] = mask_to_vars(chosen[m], members);
          w.detail[m] = K;
        }
        // leftovers join the third part; extra Khatri-Rao factors with
        // positive column sums cannot lower the rank
        for (std::size_t i = 0; i < members.size(); ++i)
          if (!(used & (1u << i))) w.parts[2].push_back(members[i]);
        rep.witnesses.push_back(std::move(w));
      } else {
        rep.failures.push_back("group " + std::to_string(g) +
                               ": no split into three parts of Khatri-Rao rank " +
                               std::to_string(K));
        if (search.truncated)
          rep.notes.push_back("group " + std::to_string(g) + ": sub-products above " +
                              std::to_string(kRankRowCap) + " rows were not tested");
      }
    } else {
      // greedy accumulation for large groups
      std::array<std::vector<int>, 3> parts;
      std::array<std::int64_t, 3> ranks{};
      int part = 0;
      std::vector<int> pending;
      for (int j : members) {
        if (part >= 3) {
          parts[2].push_back(j);
          continue;
        }
        pending.push_back(j);
        std::int64_t rows = 1;
        for (int v : pending) rows *= model.lambda.tables[v].rows();
        if (rows >= K && rows <= kRankRowCap &&
            numeric_column_rank(khatri_rao_over(model.lambda, pending), tol) == K) {
          parts[part] = pending;
          ranks[part] = K;
          pending.clear();
          ++part;
        }
      }
      if (part >= 3) {
        PartitionWitness w;
        w.group = g;
        w.parts = parts;
        w.detail = ranks;
        rep.witnesses.push_back(std::move(w));
      } else {
        rep.failures.push_back("group " + std::to_string(g) +
                               ": greedy split did not reach three full-rank parts");
        rep.notes.push_back("group " + std::to_string(g) + " has more than " +
                            std::to_string(kExhaustiveGroupLimit) +
                            " members; only the greedy split was tried");
      }
    }
  }
  for (int j = 0; j < model.dims.p; ++j)
    if (columns_all_identical(model.lambda.tables[j], tol))
      rep.failures.push_back("all columns of table " + std::to_string(j + 1) + " are identical");
  rep.satisfied = rep.failures.empty();
  return rep;
}

IdentifiabilityReport check_theorem3(const ModelDims& dims, const GroupAssignment& grouping) {
  dims.validate();
  grouping.validate();
  if (grouping.p() != dims.p) throw ShapeMismatch("check_theorem3: grouping length");
  IdentifiabilityReport rep;
  rep.theorem = "theorem 3 (generic, category-count products)";
  const int K = dims.K;
  for (int g = 1; g <= dims.G; ++g) {
    const auto members = grouping.members(g);
    const int m = static_cast<int>(members.size());
    if (m < 3) {
      rep.failures.push_back("group " + std::to_string(g) + " has fewer than 3 members");
      continue;
    }
    auto product_of = [&](std::uint32_t mask) {
      std::int64_t prod = 1;
      for (int i = 0; i < m; ++i)
        if (mask & (1u << i)) prod = std::min<std::int64_t>(prod * dims.d[members[i]], 1 << 30);
      return prod;
    };
    bool found = false;
    std::array<std::uint32_t, 3> chosen{};
    if (m <= kExhaustiveGroupLimit) {
      // minimal subsets with prod d_j >= K, then three disjoint ones
      std::vector<std::uint32_t> minimal;
      std::vector<std::uint32_t> masks;
      for (std::uint32_t mask = 1; mask < (1u << m); ++mask) masks.push_back(mask);
      std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
        const int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
        return pa != pb ? pa < pb : a < b;
      });
      for (std::uint32_t mask : masks) {
        bool covered = false;
        for (std::uint32_t good : minimal)
          if ((mask & good) == good) {
            covered = true;
            break;
          }
        if (!covered && product_of(mask) >= K) minimal.push_back(mask);
      }
      found = pick_three_disjoint(minimal, chosen);
    } else {
      // greedy by capacity: grow the part with the smallest product
      std::array<std::uint32_t, 3> parts{0, 0, 0};
      for (int i = 0; i < m; ++i) {
        int target = 0;
        for (int q = 1; q < 3; ++q)
          if (product_of(parts[q]) < product_of(parts[target])) target = q;
        parts[target] |= (1u << i);
      }
      found = product_of(parts[0]) >= K && product_of(parts[1]) >= K && product_of(parts[2]) >= K;
      chosen = parts;
    }
    if (found) {
      PartitionWitness w;
      w.group = g;
      const std::uint32_t used = chosen[0] | chosen[1] | chosen[2];
      for (int q = 0; q < 3; ++q) {
        w.parts[q] = mask_to_vars(chosen[q], members);
        w.detail[q] = product_of(chosen[q]);
      }
      for (int i = 0; i < m; ++i)
        if (!(used & (1u << i))) w.parts[2].push_back(members[i]);
      rep.witnesses.push_back(std::move(w));
    } else {
      rep.failures.push_back("group " + std::to_string(g) +
                             ": no split into three parts with category product >= " +
                             std::to_string(K));
    }
  }
  rep.satisfied = rep.failures.empty();
  return rep;
}

DirichletParams recover_alpha_from_core(const ProbTensor& phi) {
  const int G = phi.modes();
  if (G < 2) throw NumericError("recover_alpha_from_core: need G >= 2 modes");
  const int K = phi.mode_dims()[0];
  for (int d : phi.mode_dims())
    if (d != K) throw ShapeMismatch("recover_alpha_from_core: modes must all have dim K");
  if (K < 2) throw NumericError("recover_alpha_from_core: alpha is not identified for K = 1");
  for (std::int64_t t = 0; t < phi.size(); ++t)
    if (!(phi[t] > 0.0))
      throw NotDirichletConsistent("core tensor has a nonpositive entry");

  std::int64_t tails = 1;
  for (int m = 2; m < G; ++m) tails *= K;
  std::vector<double> sum(K, 0.0);
  std::vector<std::int64_t> count(K, 0);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) {
      if (k == l) continue;
      for (std::int64_t t = 0; t < tails; ++t) {
        const std::int64_t base = t * K * K;
        const double num_kk = phi[base + k + K * k];
        const double num_ll = phi[base + l + K * l];
        const double den = phi[base + k + K * l];
        const double u = num_kk / den;
        const double v = num_ll / den;
        if (u * v <= 1.0)
          throw NotDirichletConsistent("ratio identity u*v <= 1 for profiles " +
                                       std::to_string(k + 1) + "," + std::to_string(l + 1));
        sum[k] += (u + 1.0) / (u * v - 1.0);
        ++count[k];
      }
    }
  DirichletParams out;
  out.alpha.resize(K);
  for (int k = 0; k < K; ++k) out.alpha[k] = sum[k] / static_cast<double>(count[k]);
  out.validate();

  const ProbTensor check = core_tensor(out, G);
  for (std::int64_t t = 0; t < phi.size(); ++t) {
    const double rel = std::abs(check[t] - phi[t]) / std::max(std::abs(phi[t]), 1e-300);
    if (rel > 1e-6)
      throw NotDirichletConsistent("round trip through core_tensor misses by " +
                                   std::to_string(rel));
  }
  return out;
}

}  // namespace grom3
