#include "grom3/mcmc.hpp"

#include <cmath>

#include "grom3/numerics.hpp"

namespace grom3 {

namespace {

std::vector<Matrix> log_tables(const CondProbTables& lambda) {
  std::vector<Matrix> out;
  out.reserve(lambda.tables.size());
  for (const Matrix& t : lambda.tables) out.push_back(t.array().log().matrix());
  return out;
}

std::vector<std::vector<int>> members_by_group(const GroupAssignment& s) {
  std::vector<std::vector<int>> out(s.G);
  for (int j = 0; j < s.p(); ++j) out[s.s[j] - 1].push_back(j);
  return out;
}

}  // namespace

void SamplerConfig::validate() const {
  if (iterations < 1) throw NumericError("SamplerConfig: iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations)
    throw NumericError("SamplerConfig: need 0 <= burn_in < iterations");
  if (thin < 1) throw NumericError("SamplerConfig: thin must be >= 1");
  if (!(sigma_alpha > 0.0)) throw NumericError("SamplerConfig: sigma_alpha must be > 0");
  if (!(a_alpha > 0.0) || !(b_alpha > 0.0) || !(a0 > 0.0) || !(b0 > 0.0))
    throw NumericError("SamplerConfig: hyperparameters must be > 0");
  if (G < 1 || K < 1) throw NumericError("SamplerConfig: G and K must be >= 1");
  if (fixed_grouping) {
    fixed_grouping->validate();
    if (fixed_grouping->G != G)
      throw NumericError("SamplerConfig: fixed grouping G does not match config G");
  }
}

ChainState init_state(const Dataset& data, const SamplerConfig& config, Rng& rng) {
  config.validate();
  data.validate();
  if (config.fixed_grouping && config.fixed_grouping->p() != data.p())
    throw ShapeMismatch("init_state: fixed grouping length does not match data");
  const int n = data.n(), p = data.p(), G = config.G, K = config.K;

  ChainState st;
  st.lambda.tables.reserve(p);
  std::vector<double> ones_d, buf;
  for (int j = 0; j < p; ++j) {
    const int dj = data.d[j];
    Matrix t(dj, K);
    ones_d.assign(dj, 1.0);
    buf.resize(dj);
    for (int k = 0; k < K; ++k) {
      rng.dirichlet(ones_d, buf);
      for (int c = 0; c < dj; ++c) t(c, k) = buf[c];
    }
    st.lambda.tables.push_back(std::move(t));
  }

  st.xi.assign(G, 0.0);
  std::vector<double> ones_g(G, 1.0);
  rng.dirichlet(ones_g, st.xi);
  st.s.G = G;
  st.s.s.resize(p);
  if (config.fixed_grouping) {
    st.s = *config.fixed_grouping;
  } else {
    for (int j = 0; j < p; ++j) st.s.s[j] = rng.categorical_index(st.xi) + 1;
  }

  const double alpha0 = rng.gamma(config.a_alpha) / config.b_alpha;
  std::vector<double> eta(K), ones_k(K, 1.0);
  rng.dirichlet(ones_k, eta);
  st.alpha.alpha.resize(K);
  for (int k = 0; k < K; ++k) st.alpha.alpha[k] = alpha0 * eta[k];

  st.pi.resize(n, K);
  for (int i = 0; i < n; ++i)
    rng.dirichlet(st.alpha.alpha, std::span<double>(st.pi.data() + i * K, K));
  st.z.resize(n, G);
  for (int i = 0; i < n; ++i) {
    const std::span<const double> row(st.pi.data() + i * K, K);
    for (int g = 0; g < G; ++g) st.z(i, g) = rng.categorical_index(row) + 1;
  }
  return st;
}

ChainState init_state_from_model(const Model& model, const Dataset& data,
                                 const SamplerConfig& config, Rng& rng) {
  config.validate();
  model.validate();
  data.validate();
  if (model.dims.p != data.p() || model.dims.d != data.d)
    throw ShapeMismatch("init_state_from_model: model and data shapes differ");
  if (model.dims.G != config.G || model.dims.K != config.K)
    throw ShapeMismatch("init_state_from_model: model G/K do not match config");
  const int n = data.n(), G = config.G, K = config.K;

  ChainState st;
  st.lambda = model.lambda;
  st.alpha = model.alpha;
  st.s = model.grouping;
  st.xi.assign(G, 1.0 / G);
  st.pi.resize(n, K);
  for (int i = 0; i < n; ++i)
    rng.dirichlet(st.alpha.alpha, std::span<double>(st.pi.data() + i * K, K));
  st.z.resize(n, G);
  for (int i = 0; i < n; ++i) {
    const std::span<const double> row(st.pi.data() + i * K, K);
    for (int g = 0; g < G; ++g) st.z(i, g) = rng.categorical_index(row) + 1;
  }
  return st;
}

std::vector<double> lambda_posterior_params(const ChainState& state, const Dataset& data, int j,
                                            int k) {
  const int g = state.s.s[j] - 1;
  std::vector<double> params(data.d[j], 1.0);
  for (int i = 0; i < data.n(); ++i)
    if (state.z(i, g) == k + 1) params[data.responses(i, j) - 1] += 1.0;
  return params;
}

std::vector<double> pi_posterior_params(const ChainState& state, int i) {
  std::vector<double> params(state.alpha.alpha);
  for (int g = 0; g < state.s.G; ++g) params[state.z(i, g) - 1] += 1.0;
  return params;
}

std::vector<double> z_posterior_log_weights(const ChainState& state, const Dataset& data, int i,
                                            int g) {
  const int K = state.alpha.K();
  std::vector<double> lw(K);
  for (int k = 0; k < K; ++k) lw[k] = safe_log(state.pi(i, k));
  for (int j = 0; j < data.p(); ++j) {
    if (state.s.s[j] != g + 1) continue;
    for (int k = 0; k < K; ++k)
      lw[k] += std::log(state.lambda.tables[j](data.responses(i, j) - 1, k));
  }
  return lw;
}

std::vector<double> grouping_posterior_log_weights(const ChainState& state, const Dataset& data,
                                                   int j) {
  std::vector<double> lw(state.s.G);
  for (int g = 0; g < state.s.G; ++g) {
    double acc = std::log(state.xi[g]);
    for (int i = 0; i < data.n(); ++i)
      acc += std::log(state.lambda.tables[j](data.responses(i, j) - 1, state.z(i, g) - 1));
    lw[g] = acc;
  }
  return lw;
}

void step_lambda(ChainState& state, const Dataset& data, Rng& rng) {
  const int n = data.n(), K = state.alpha.K();
  std::vector<double> params, draw;
  for (int j = 0; j < data.p(); ++j) {
    const int dj = data.d[j];
    const int g = state.s.s[j] - 1;
    Matrix counts = Matrix::Zero(dj, K);
    for (int i = 0; i < n; ++i) counts(data.responses(i, j) - 1, state.z(i, g) - 1) += 1.0;
    params.resize(dj);
    draw.resize(dj);
    for (int k = 0; k < K; ++k) {
      for (int c = 0; c < dj; ++c) params[c] = 1.0 + counts(c, k);
      rng.dirichlet(params, draw);
      for (int c = 0; c < dj; ++c) state.lambda.tables[j](c, k) = draw[c];
    }
  }
}

void step_pi(ChainState& state, Rng& rng) {
  const int n = state.n(), K = state.alpha.K(), G = state.s.G;
  std::vector<double> params(K);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) params[k] = state.alpha.alpha[k];
    for (int g = 0; g < G; ++g) params[state.z(i, g) - 1] += 1.0;
    rng.dirichlet(params, std::span<double>(state.pi.data() + i * K, K));
  }
}

void step_z(ChainState& state, const Dataset& data, Rng& rng) {
  const int n = data.n(), G = state.s.G, K = state.alpha.K();
  const auto logl = log_tables(state.lambda);
  const auto members = members_by_group(state.s);
  std::vector<double> lw(K), lpi(K);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) lpi[k] = safe_log(state.pi(i, k));
    for (int g = 0; g < G; ++g) {
      for (int k = 0; k < K; ++k) lw[k] = lpi[k];
      for (int j : members[g]) {
        const double* row = logl[j].data() + (data.responses(i, j) - 1) * K;
        for (int k = 0; k < K; ++k) lw[k] += row[k];
      }
      state.z(i, g) = rng.categorical_index_from_log(lw) + 1;
    }
  }
}

void step_grouping(ChainState& state, const Dataset& data, Rng& rng) {
  const int n = data.n(), p = data.p(), G = state.s.G;
  const auto logl = log_tables(state.lambda);
  std::vector<double> lw(G);
  std::vector<int> ycol(n);
  for (int j = 0; j < p; ++j) {
    const int K = state.alpha.K();
    for (int i = 0; i < n; ++i) ycol[i] = data.responses(i, j) - 1;
    const double* lt = logl[j].data();
    for (int g = 0; g < G; ++g) {
      double acc = std::log(state.xi[g]);
      for (int i = 0; i < n; ++i) acc += lt[ycol[i] * K + (state.z(i, g) - 1)];
      lw[g] = acc;
    }
    state.s.s[j] = rng.categorical_index_from_log(lw) + 1;
  }
  std::vector<double> params(G, 1.0);
  for (int j = 0; j < p; ++j) params[state.s.s[j] - 1] += 1.0;
  rng.dirichlet(params, state.xi);
}

double log_alpha_accept_ratio(std::span<const double> alpha, std::span<const double> alpha_star,
                              std::span<const double> sum_log_pi, int n, double a_alpha,
                              double b_alpha) {
  double a0 = 0.0, a0s = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    a0 += alpha[k];
    a0s += alpha_star[k];
  }
  double lr = (a_alpha - 1.0) * (std::log(a0s) - std::log(a0)) - b_alpha * (a0s - a0) +
              n * (std::lgamma(a0s) - std::lgamma(a0));
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    lr += n * (std::lgamma(alpha[k]) - std::lgamma(alpha_star[k]));
    lr += (alpha_star[k] - alpha[k]) * sum_log_pi[k];
    lr += std::log(alpha_star[k]) - std::log(alpha[k]);  // lognormal proposal Jacobian
  }
  return lr;
}

AlphaMhResult step_alpha_mh(ChainState& state, const SamplerConfig& config, Rng& rng) {
  const int n = state.n(), K = state.alpha.K();
  std::vector<double> sum_log_pi(K, 0.0);
  // exact zeros (underflowed Dirichlet draws) are clamped rather than raised
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < K; ++k) sum_log_pi[k] += safe_log(state.pi(i, k));
  std::vector<double> proposal(K);
  for (int k = 0; k < K; ++k)
    proposal[k] = state.alpha.alpha[k] * std::exp(config.sigma_alpha * rng.normal());
  const double lr = log_alpha_accept_ratio(state.alpha.alpha, proposal, sum_log_pi, n,
                                           config.a_alpha, config.b_alpha);
  AlphaMhResult res;
  res.ratio = std::min(1.0, std::exp(lr));
  res.accepted = std::log(rng.uniform()) < lr;
  if (res.accepted) state.alpha.alpha = proposal;
  return res;
}

int sample_crt(int m, double a, Rng& rng) {
  if (m < 0) throw NumericError("sample_crt: m must be >= 0");
  if (!(a > 0.0)) throw NumericError("sample_crt: a must be > 0");
  int t = 0;
  for (int i = 1; i <= m; ++i)
    if (rng.uniform() < a / (a + i - 1.0)) ++t;
  return t;
}

void step_alpha_gibbs(ChainState& state, const SamplerConfig& config, Rng& rng) {
  const int n = state.n(), G = state.s.G, K = state.alpha.K();
  const double a0 = state.alpha.total();
  // rate = b0 - sum_i log(1 - q_i); the Beta(G, a0) tail is drawn in log space
  // so tiny a0 cannot push q_i to exactly 1
  double rate = config.b0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(rng.gamma(static_cast<double>(G)));
    const double ly = rng.log_gamma_draw(a0);
    rate -= ly - log_sum_exp(lx, ly);
  }
  std::vector<int> zmult(K);
  std::vector<double> tsum(K, 0.0);
  for (int i = 0; i < n; ++i) {
    std::fill(zmult.begin(), zmult.end(), 0);
    for (int g = 0; g < G; ++g) ++zmult[state.z(i, g) - 1];
    for (int k = 0; k < K; ++k) tsum[k] += sample_crt(zmult[k], state.alpha.alpha[k], rng);
  }
  for (int k = 0; k < K; ++k) state.alpha.alpha[k] = rng.gamma(config.a0 + tsum[k]) / rate;
}

double state_log_likelihood(const ChainState& state, const Dataset& data) {
  const int n = data.n(), G = state.s.G, K = state.alpha.K();
  const auto logl = log_tables(state.lambda);
  const auto members = members_by_group(state.s);
  std::vector<double> lw(K), lpi(K);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) lpi[k] = safe_log(state.pi(i, k));
    for (int g = 0; g < G; ++g) {
      for (int k = 0; k < K; ++k) lw[k] = lpi[k];
      for (int j : members[g]) {
        const double* row = logl[j].data() + (data.responses(i, j) - 1) * K;
        for (int k = 0; k < K; ++k) lw[k] += row[k];
      }
      total += log_sum_exp(lw);
    }
  }
  return total;
}

namespace {

Trace run_chain_impl(const Dataset& data, const SamplerConfig& config, ChainState state,
                     Rng& rng) {
  Trace trace;
  trace.config = config;
  trace.d = data.d;
  trace.states.reserve(config.stored_states());
  trace.loglik_log.reserve(config.iterations);
  if (config.variant == SamplerVariant::mh_within_gibbs)
    trace.accept_log.reserve(config.iterations);

  for (int it = 1; it <= config.iterations; ++it) {
    step_lambda(state, data, rng);
    step_pi(state, rng);
    step_z(state, data, rng);
    if (!config.fixed_grouping) step_grouping(state, data, rng);
    if (config.variant == SamplerVariant::mh_within_gibbs) {
      const AlphaMhResult res = step_alpha_mh(state, config, rng);
      trace.accept_log.push_back({it, res.accepted, res.ratio});
    } else {
      step_alpha_gibbs(state, config, rng);
    }
    trace.loglik_log.push_back(state_log_likelihood(state, data));
    if (it > config.burn_in && (it - config.burn_in) % config.thin == 0) {
      trace.states.push_back(state);
      trace.state_iterations.push_back(it);
    }
  }
  return trace;
}

}  // namespace

Trace run_chain(const Dataset& data, const SamplerConfig& config) {
  Rng rng(config.seed);
  ChainState state = init_state(data, config, rng);
  return run_chain_impl(data, config, std::move(state), rng);
}

Trace run_chain(const Dataset& data, const SamplerConfig& config, ChainState state) {
  config.validate();
  data.validate();
  Rng rng(config.seed);
  return run_chain_impl(data, config, std::move(state), rng);
}

}  // namespace grom3
