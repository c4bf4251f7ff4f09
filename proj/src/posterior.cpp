#include "grom3/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "grom3/numerics.hpp"
#include "grom3/parallel.hpp"

namespace grom3 {

GroupAssignment summarize_grouping(const Trace& trace) {
  if (trace.states.empty()) throw TooFewSamples("summarize_grouping: empty trace");
  const int p = trace.states[0].s.p();
  const int G = trace.states[0].s.G;
  GroupAssignment mode;
  mode.G = G;
  mode.s.resize(p);
  std::vector<int> counts(G);
  for (int j = 0; j < p; ++j) {
    std::fill(counts.begin(), counts.end(), 0);
    for (const ChainState& st : trace.states) ++counts[st.s.s[j] - 1];
    int best = 0;
    for (int g = 1; g < G; ++g)
      if (counts[g] > counts[best]) best = g;
    mode.s[j] = best + 1;
  }
  return mode;
}

namespace {

Matrix stack_tables(const CondProbTables& t) {
  int rows = 0;
  for (const Matrix& m : t.tables) rows += static_cast<int>(m.rows());
  Matrix out(rows, t.K());
  int at = 0;
  for (const Matrix& m : t.tables) {
    out.middleRows(at, m.rows()) = m;
    at += static_cast<int>(m.rows());
  }
  return out;
}

bool is_permutation(const std::vector<int>& perm) {
  std::vector<bool> seen(perm.size(), false);
  for (int v : perm) {
    if (v < 0 || v >= static_cast<int>(perm.size()) || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

}  // namespace

std::vector<int> align_profiles(const CondProbTables& est, const CondProbTables& truth) {
  if (est.p() != truth.p() || est.K() != truth.K())
    throw ShapeMismatch("align_profiles: table shapes differ");
  const int K = est.K();
  const Matrix score = stack_tables(truth).transpose() * stack_tables(est);  // K x K
  std::vector<int> perm(K);
  for (int k = 0; k < K; ++k) {
    int best = 0;
    for (int c = 1; c < K; ++c)
      if (score(k, c) > score(k, best)) best = c;
    perm[k] = best;
  }
  if (is_permutation(perm)) return perm;

  // greedy fallback on the same scores: largest first, no column reuse
  std::vector<std::tuple<double, int, int>> cells;
  cells.reserve(K * K);
  for (int k = 0; k < K; ++k)
    for (int c = 0; c < K; ++c) cells.emplace_back(score(k, c), k, c);
  std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });
  std::fill(perm.begin(), perm.end(), -1);
  std::vector<bool> row_done(K, false), col_done(K, false);
  for (const auto& [sc, k, c] : cells) {
    if (row_done[k] || col_done[c]) continue;
    perm[k] = c;
    row_done[k] = true;
    col_done[c] = true;
  }
  return perm;
}

double rmse(std::span<const double> est, std::span<const double> truth) {
  if (est.size() != truth.size() || est.empty())
    throw ShapeMismatch("rmse: length mismatch or empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double diff = est[i] - truth[i];
    acc += diff * diff;
  }
  return std::sqrt(acc / static_cast<double>(est.size()));
}

double ari(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw LengthMismatch("ari: clusterings differ in length");
  const int n = static_cast<int>(a.size());
  std::map<int, int> la, lb;
  for (int v : a) la.emplace(v, static_cast<int>(la.size()));
  for (int v : b) lb.emplace(v, static_cast<int>(lb.size()));
  Matrix table = Matrix::Zero(static_cast<int>(la.size()), static_cast<int>(lb.size()));
  for (int i = 0; i < n; ++i) table(la[a[i]], lb[b[i]]) += 1.0;

  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, suma = 0.0, sumb = 0.0;
  for (Eigen::Index r = 0; r < table.rows(); ++r)
    for (Eigen::Index c = 0; c < table.cols(); ++c) index += comb2(table(r, c));
  for (Eigen::Index r = 0; r < table.rows(); ++r) suma += comb2(table.row(r).sum());
  for (Eigen::Index c = 0; c < table.cols(); ++c) sumb += comb2(table.col(c).sum());
  const double total = comb2(static_cast<double>(n));
  if (total == 0.0) return 1.0;
  const double expected = suma * sumb / total;
  const double max_index = 0.5 * (suma + sumb);
  if (max_index == expected) return 1.0;  // both clusterings trivial and equal
  return (index - expected) / (max_index - expected);
}

WaicResult waic(const Trace& trace, const Dataset& data) {
  const int T = static_cast<int>(trace.states.size());
  if (T < 2) throw TooFewSamples("waic: need at least 2 posterior samples");
  const int n = data.n();
  Matrix logp(n, T);
  std::vector<double> lw, lpi;
  for (int t = 0; t < T; ++t) {
    const ChainState& st = trace.states[t];
    const int K = st.alpha.K(), G = st.s.G;
    lw.resize(K);
    lpi.resize(K);
    std::vector<Matrix> logl;
    logl.reserve(data.p());
    for (const Matrix& tab : st.lambda.tables) logl.push_back(tab.array().log().matrix());
    std::vector<std::vector<int>> members(G);
    for (int j = 0; j < data.p(); ++j) members[st.s.s[j] - 1].push_back(j);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < K; ++k) lpi[k] = safe_log(st.pi(i, k));
      double lp = 0.0;
      for (int g = 0; g < G; ++g) {
        for (int k = 0; k < K; ++k) lw[k] = lpi[k];
        for (int j : members[g]) {
          const double* row = logl[j].data() + (data.responses(i, j) - 1) * K;
          for (int k = 0; k < K; ++k) lw[k] += row[k];
        }
        lp += log_sum_exp(lw);
      }
      logp(i, t) = lp;
    }
  }

  WaicResult res;
  const double logT = std::log(static_cast<double>(T));
  for (int i = 0; i < n; ++i) {
    LogSumExp acc;
    double mean = 0.0;
    for (int t = 0; t < T; ++t) {
      acc.add(logp(i, t));
      mean += logp(i, t);
    }
    mean /= T;
    double var = 0.0;
    for (int t = 0; t < T; ++t) {
      const double dev = logp(i, t) - mean;
      var += dev * dev;
    }
    var /= (T - 1);
    res.lppd += acc.value() - logT;
    res.p_waic2 += var;
  }
  res.waic = -2.0 * (res.lppd - res.p_waic2);
  return res;
}

double sample_cramers_v(const Dataset& data, int j, int m) {
  if (j == m) throw SameVariable("sample_cramers_v: j == m");
  Matrix joint = Matrix::Zero(data.d[j], data.d[m]);
  for (int i = 0; i < data.n(); ++i)
    joint(data.responses(i, j) - 1, data.responses(i, m) - 1) += 1.0;
  joint /= static_cast<double>(data.n());
  return cramers_v_from_joint(joint);
}

PosteriorSummary summarize(const Trace& trace, const Dataset& data) {
  if (trace.states.empty()) throw TooFewSamples("summarize: empty trace");
  const int T = static_cast<int>(trace.states.size());
  const int p = data.p(), K = trace.config.K, G = trace.config.G;

  PosteriorSummary out;
  out.dims = ModelDims{p, G, K, data.d};
  out.lambda_mean.tables.reserve(p);
  for (int j = 0; j < p; ++j) out.lambda_mean.tables.push_back(Matrix::Zero(data.d[j], K));
  out.alpha_mean.alpha.assign(K, 0.0);
  for (const ChainState& st : trace.states) {
    for (int j = 0; j < p; ++j) out.lambda_mean.tables[j] += st.lambda.tables[j];
    for (int k = 0; k < K; ++k) out.alpha_mean.alpha[k] += st.alpha.alpha[k];
  }
  for (int j = 0; j < p; ++j) out.lambda_mean.tables[j] /= static_cast<double>(T);
  for (int k = 0; k < K; ++k) out.alpha_mean.alpha[k] /= static_cast<double>(T);

  out.s_mode = summarize_grouping(trace);
  out.occupied_groups = out.s_mode.occupied_groups();
  const WaicResult w = waic(trace, data);
  out.waic = w.waic;
  out.lppd = w.lppd;
  out.p_waic2 = w.p_waic2;

  if (!trace.accept_log.empty()) {
    double acc = 0.0;
    int count = 0;
    for (const AcceptRecord& r : trace.accept_log)
      if (r.iteration > trace.config.burn_in) {
        acc += r.ratio;
        ++count;
      }
    if (count > 0) out.mean_accept_ratio = acc / count;
  }
  return out;
}

double aligned_lambda_rmse(const CondProbTables& est, const CondProbTables& truth) {
  const std::vector<int> perm = align_profiles(est, truth);
  std::vector<double> ve, vt;
  for (int j = 0; j < truth.p(); ++j) {
    const Matrix& te = est.tables[j];
    const Matrix& tt = truth.tables[j];
    for (Eigen::Index c = 0; c < tt.rows(); ++c)
      for (int k = 0; k < truth.K(); ++k) {
        ve.push_back(te(c, perm[k]));
        vt.push_back(tt(c, k));
      }
  }
  return rmse(ve, vt);
}

double aligned_alpha_rmse(const CondProbTables& est_lambda, const DirichletParams& est_alpha,
                          const CondProbTables& truth_lambda,
                          const DirichletParams& truth_alpha) {
  const std::vector<int> perm = align_profiles(est_lambda, truth_lambda);
  std::vector<double> ve, vt;
  for (int k = 0; k < truth_alpha.K(); ++k) {
    ve.push_back(est_alpha.alpha[perm[k]]);
    vt.push_back(truth_alpha.alpha[k]);
  }
  return rmse(ve, vt);
}

ScanResult model_selection_scan(const Dataset& data, std::span<const int> G_list,
                                std::span<const int> K_list, const SamplerConfig& base,
                                int chains_per_candidate, int threads) {
  if (G_list.empty() || K_list.empty())
    throw UsageError("model_selection_scan: empty candidate list");
  if (chains_per_candidate < 1)
    throw UsageError("model_selection_scan: chains_per_candidate must be >= 1");
  if (base.fixed_grouping)
    throw UsageError("model_selection_scan: cannot scan G with a fixed grouping");
  if (threads <= 0) threads = default_threads();

  ScanResult out;
  for (int g : G_list)
    for (int k : K_list) out.table.push_back(ScanEntry{g, k});

  const int candidates = static_cast<int>(out.table.size());
  const int jobs = candidates * chains_per_candidate;
  std::vector<WaicResult> job_waic(jobs);
  std::vector<int> job_occupied(jobs);
  std::vector<std::uint64_t> job_seed(jobs);
  for (int idx = 0; idx < jobs; ++idx)
    job_seed[idx] = splitmix64(base.seed + 0x9e3779b97f4a7c15ULL * (idx + 1));

  parallel_for(jobs, threads, [&](int idx) {
    const ScanEntry& cand = out.table[idx / chains_per_candidate];
    SamplerConfig cfg = base;
    cfg.G = cand.G;
    cfg.K = cand.K;
    cfg.seed = job_seed[idx];
    const Trace trace = run_chain(data, cfg);
    job_waic[idx] = waic(trace, data);
    job_occupied[idx] = summarize_grouping(trace).occupied_groups();
  });

  for (int c = 0; c < candidates; ++c) {
    std::vector<int> order(chains_per_candidate);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return job_waic[c * chains_per_candidate + a].waic <
             job_waic[c * chains_per_candidate + b].waic;
    });
    const int mid = c * chains_per_candidate + order[(chains_per_candidate - 1) / 2];
    ScanEntry& e = out.table[c];
    e.waic = job_waic[mid].waic;
    e.lppd = job_waic[mid].lppd;
    e.p_waic2 = job_waic[mid].p_waic2;
    e.occupied_groups = job_occupied[mid];
    e.seed = job_seed[mid];
    e.kept = (e.occupied_groups == e.G);
  }

  for (int c = 0; c < candidates; ++c) {
    if (!out.table[c].kept) continue;
    if (out.best < 0 || out.table[c].waic < out.table[out.best].waic) out.best = c;
  }
  if (out.best < 0) throw AllDiscarded("model_selection_scan: every candidate left empty groups");
  return out;
}

}  // namespace grom3
