#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "grom3/model.hpp"
#include "grom3/rng.hpp"
#include "grom3/simulate.hpp"

namespace grom3 {

enum class SamplerVariant { mh_within_gibbs, full_gibbs };

struct SamplerConfig {
  int iterations = 15000;
  int burn_in = 10000;
  int thin = 5;
  double sigma_alpha = 0.02;  // lognormal proposal scale; 0.002 for small-alpha data
  double a_alpha = 2.0, b_alpha = 1.0;  // Gamma prior on alpha_0 (MH variant)
  double a0 = 1.0, b0 = 1.0;            // Gamma prior on each alpha_k (Gibbs variant)
  std::uint64_t seed = 1;
  SamplerVariant variant = SamplerVariant::mh_within_gibbs;
  std::optional<GroupAssignment> fixed_grouping;  // set: grouping step is skipped
  int G = 1;
  int K = 1;

  int stored_states() const { return (iterations - burn_in) / thin; }
  void validate() const;
};

struct ChainState {
  CondProbTables lambda;
  DirichletParams alpha;
  GroupAssignment s;
  std::vector<double> xi;  // length G, prior weights of the grouping
  Matrix pi;               // n x K
  IntMatrix z;             // n x G, values 1..K

  int n() const { return static_cast<int>(pi.rows()); }
};

struct AcceptRecord {
  int iteration = 0;  // 1-based
  bool accepted = false;
  double ratio = 0.0;  // min(1, r*)
};

struct Trace {
  SamplerConfig config;
  std::vector<int> d;  // data category counts, echoed for serialization
  std::vector<ChainState> states;
  std::vector<int> state_iterations;     // 1-based iteration of each stored state
  std::vector<AcceptRecord> accept_log;  // per iteration; empty for the Gibbs variant
  std::vector<double> loglik_log;        // observed-data log-likelihood per iteration
};

ChainState init_state(const Dataset& data, const SamplerConfig& config, Rng& rng);

/// Chain started at the given parameter values (latents drawn forward).
ChainState init_state_from_model(const Model& model, const Dataset& data,
                                 const SamplerConfig& config, Rng& rng);

// Full-conditional parameters, exposed so tests can check the deterministic
// part of each update separately from the draws.
std::vector<double> lambda_posterior_params(const ChainState& state, const Dataset& data, int j,
                                            int k);
std::vector<double> pi_posterior_params(const ChainState& state, int i);
std::vector<double> z_posterior_log_weights(const ChainState& state, const Dataset& data, int i,
                                            int g);
std::vector<double> grouping_posterior_log_weights(const ChainState& state, const Dataset& data,
                                                   int j);

void step_lambda(ChainState& state, const Dataset& data, Rng& rng);
void step_pi(ChainState& state, Rng& rng);
void step_z(ChainState& state, const Dataset& data, Rng& rng);
void step_grouping(ChainState& state, const Dataset& data, Rng& rng);

/// log of the Metropolis-Hastings ratio for the lognormal random-walk move on
/// alpha, including the proposal Jacobian; antisymmetric under swapping the
/// two argument vectors.
double log_alpha_accept_ratio(std::span<const double> alpha, std::span<const double> alpha_star,
                              std::span<const double> sum_log_pi, int n, double a_alpha,
                              double b_alpha);

struct AlphaMhResult {
  bool accepted = false;
  double ratio = 0.0;
};
AlphaMhResult step_alpha_mh(ChainState& state, const SamplerConfig& config, Rng& rng);

/// Number of occupied tables after m seatings at concentration a:
/// sum of Bernoulli(a / (a + i - 1)), i = 1..m.
int sample_crt(int m, double a, Rng& rng);

void step_alpha_gibbs(ChainState& state, const SamplerConfig& config, Rng& rng);

/// sum_i log p(y_i | Lambda, s, pi_i), the collapsed-over-z likelihood.
double state_log_likelihood(const ChainState& state, const Dataset& data);

Trace run_chain(const Dataset& data, const SamplerConfig& config);
Trace run_chain(const Dataset& data, const SamplerConfig& config, ChainState state);

}  // namespace grom3
