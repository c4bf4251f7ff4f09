#include "grom3/simulate.hpp"

#include <array>

#include "grom3/parallel.hpp"
#include "grom3/rng.hpp"

namespace grom3 {

void Dataset::validate() const {
  if (static_cast<int>(d.size()) != p() || static_cast<int>(item_names.size()) != p())
    throw ShapeMismatch("Dataset: header/d length mismatch");
  for (int j = 0; j < p(); ++j) {
    if (d[j] < 2) throw NumericError("Dataset: d_j must be >= 2");
    for (int i = 0; i < n(); ++i)
      if (responses(i, j) < 1 || responses(i, j) > d[j])
        throw CategoryOutOfRange("Dataset: cell (" + std::to_string(i + 1) + "," +
                                 std::to_string(j + 1) + ") outside 1.." + std::to_string(d[j]));
  }
}

std::pair<Dataset, LatentRecord> sample_dataset(const Model& model, int n, std::uint64_t seed,
                                                int threads) {
  model.validate();
  if (n < 1) throw NumericError("sample_dataset: n must be >= 1");
  const int p = model.dims.p, G = model.dims.G, K = model.dims.K;

  Dataset data;
  data.d = model.dims.d;
  data.item_names.reserve(p);
  for (int j = 0; j < p; ++j) data.item_names.push_back("V" + std::to_string(j + 1));
  data.responses.resize(n, p);

  LatentRecord latent;
  latent.pi.resize(n, K);
  latent.z.resize(n, G);

  if (threads <= 0) threads = default_threads();
  parallel_for(n, threads, [&](int i) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
    std::vector<double> pi(K);
    rng.dirichlet(model.alpha.alpha, pi);
    for (int k = 0; k < K; ++k) latent.pi(i, k) = pi[k];
    for (int g = 0; g < G; ++g) latent.z(i, g) = rng.categorical_index(pi) + 1;
    for (int j = 0; j < p; ++j) {
      const int zk = latent.z(i, model.grouping.s[j] - 1);
      const Matrix& table = model.lambda.tables[j];
      const int dj = static_cast<int>(table.rows());
      std::vector<double> col(dj);
      for (int c = 0; c < dj; ++c) col[c] = table(c, zk - 1);
      data.responses(i, j) = rng.categorical_index(col) + 1;
    }
  });
  return {std::move(data), std::move(latent)};
}

namespace {

// The six 3x4 tables that seed every scenario; the last row of each column is
// derived as 1 - (first two rows) so every column sums to 1.0 exactly.
Matrix preset_table(int which, int K) {
  static constexpr std::array<std::array<std::array<double, 4>, 2>, 6> kTopRows{{
      {{{0.1, 0.7, 0.3, 0.1}, {0.8, 0.2, 0.4, 0.1}}},
      {{{0.1, 0.8, 0.1, 0.2}, {0.2, 0.1, 0.6, 0.5}}},
      {{{0.1, 0.8, 0.2, 0.9}, {0.2, 0.1, 0.5, 0.05}}},
      {{{0.1, 0.1, 0.8, 0.3}, {0.8, 0.2, 0.1, 0.6}}},
      {{{0.2, 0.7, 0.3, 0.1}, {0.6, 0.2, 0.4, 0.1}}},
      {{{0.1, 0.8, 0.1, 0.2}, {0.2, 0.1, 0.1, 0.6}}},
  }};
  Matrix t(3, K);
  for (int k = 0; k < K; ++k) {
    t(0, k) = kTopRows[which][0][k];
    t(1, k) = kTopRows[which][1][k];
    t(2, k) = 1.0 - t(0, k) - t(1, k);
  }
  return t;
}

}  // namespace

Model preset_scenario(const std::string& name) {
  int K = 0, p = 0;
  for (const int kk : {2, 3, 4})
    for (const int pp : {30, 60, 90})
      if (name == "K" + std::to_string(kk) + "-p" + std::to_string(pp)) {
        K = kk;
        p = pp;
      }
  if (K == 0) throw UnknownScenario(name);
  const int G = (p == 30) ? 6 : (p == 60) ? 12 : 15;

  Model m;
  m.dims = ModelDims{p, G, K, std::vector<int>(p, 3)};
  m.grouping.G = G;
  m.grouping.s.resize(p);
  for (int j = 0; j < p; ++j) m.grouping.s[j] = (j % G) + 1;  // round-robin
  m.lambda.tables.reserve(p);
  for (int j = 0; j < p; ++j) m.lambda.tables.push_back(preset_table(j % 6, K));
  m.alpha.alpha.assign({0.4, 0.5, 0.6, 0.7});
  m.alpha.alpha.resize(K);
  m.validate();
  return m;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const int k : {2, 3, 4})
    for (const int p : {30, 60, 90})
      names.push_back("K" + std::to_string(k) + "-p" + std::to_string(p));
  return names;
}

}  // namespace grom3
