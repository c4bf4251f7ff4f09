#pragma once

#include <limits>
#include <span>

#include "grom3/mcmc.hpp"

namespace grom3 {

struct PosteriorSummary {
  ModelDims dims;
  CondProbTables lambda_mean;
  DirichletParams alpha_mean;
  GroupAssignment s_mode;
  int occupied_groups = 0;
  double waic = 0.0, lppd = 0.0, p_waic2 = 0.0;
  double mean_accept_ratio = std::numeric_limits<double>::quiet_NaN();  // MH, post burn-in
};

/// Per-variable posterior mode of the group assignment; ties break to the
/// smallest group label.
GroupAssignment summarize_grouping(const Trace& trace);

/// Profile alignment by stacking both table sets to (sum d_j) x K matrices and
/// taking row-wise argmax of truth^T * est; falls back to a greedy assignment
/// on the same score matrix when the argmaxes collide. Entry k of the result
/// is the est column to place at truth position k.
std::vector<int> align_profiles(const CondProbTables& est, const CondProbTables& truth);

double rmse(std::span<const double> est, std::span<const double> truth);

/// Hubert-Arabie adjusted Rand index between two clusterings.
double ari(std::span<const int> a, std::span<const int> b);

struct WaicResult {
  double waic = 0.0, lppd = 0.0, p_waic2 = 0.0;
};
WaicResult waic(const Trace& trace, const Dataset& data);

double sample_cramers_v(const Dataset& data, int j, int m);

PosteriorSummary summarize(const Trace& trace, const Dataset& data);

/// RMSE of the tables after profile alignment.
double aligned_lambda_rmse(const CondProbTables& est, const CondProbTables& truth);
/// RMSE of alpha after applying the Lambda-based profile alignment.
double aligned_alpha_rmse(const CondProbTables& est_lambda, const DirichletParams& est_alpha,
                          const CondProbTables& truth_lambda, const DirichletParams& truth_alpha);

struct ScanEntry {
  int G = 0, K = 0;
  double waic = 0.0, lppd = 0.0, p_waic2 = 0.0;
  int occupied_groups = 0;
  bool kept = false;  // false once the fitted grouping leaves a group empty
  std::uint64_t seed = 0;
};
struct ScanResult {
  std::vector<ScanEntry> table;
  int best = -1;  // index into table
};

/// One chain per (G, K) candidate (or chains_per_candidate, median WAIC);
/// candidates with empty groups in the fitted s-mode are discarded, then the
/// smallest WAIC wins.
ScanResult model_selection_scan(const Dataset& data, std::span<const int> G_list,
                                std::span<const int> K_list, const SamplerConfig& base,
                                int chains_per_candidate = 1, int threads = 0);

}  // namespace grom3
