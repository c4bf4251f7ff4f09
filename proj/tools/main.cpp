// Command-line front end: simulate | fit | select | eval | crv | check-id.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "grom3/identifiability.hpp"
#include "grom3/io.hpp"
#include "grom3/parallel.hpp"

namespace fs = std::filesystem;
using namespace grom3;

namespace {

std::vector<int> parse_int_list(const std::string& raw, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(raw);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw UsageError(what + ": '" + tok + "' is not an integer");
    }
  }
  if (out.empty()) throw UsageError(what + ": empty list");
  return out;
}

// Applies `key = value` entries from --config to options the user did not set
// on the command line (flags win).
class ConfigMerge {
 public:
  ConfigMerge(CLI::App* cmd, const std::string& config_path) : cmd_(cmd) {
    if (!config_path.empty()) values_ = io::read_config_file(config_path);
  }

  template <typename T>
  void apply(const std::string& flag, const std::string& key, T& value) {
    if (cmd_->count(flag) > 0) return;
    const auto it = values_.find(key);
    if (it == values_.end()) return;
    std::istringstream is(it->second);
    T parsed;
    if constexpr (std::is_same_v<T, std::string>) {
      parsed = it->second;
    } else {
      if (!(is >> parsed)) throw UsageError("config key '" + key + "': bad value");
    }
    value = parsed;
  }

 private:
  CLI::App* cmd_;
  std::map<std::string, std::string> values_;
};

struct SamplerOpts {
  int iterations = 15000, burn_in = 10000, thin = 5;
  double sigma_alpha = 0.02, a_alpha = 2.0, b_alpha = 1.0, a0 = 1.0, b0 = 1.0;
  std::uint64_t seed = 1;
  std::string variant = "mh";
  int G = 1, K = 1;
  std::string fixed_grouping;  // "", "identity", "ones", or a path

  void add_options(CLI::App* cmd, bool with_gk = true) {
    cmd->add_option("--iterations", iterations, "MCMC iterations");
    cmd->add_option("--burn-in", burn_in, "Burn-in iterations");
    cmd->add_option("--thin", thin, "Keep every thin-th post-burn-in state");
    cmd->add_option("--sigma-alpha", sigma_alpha, "Lognormal proposal scale for alpha");
    cmd->add_option("--a-alpha", a_alpha, "Gamma prior shape on alpha_0");
    cmd->add_option("--b-alpha", b_alpha, "Gamma prior rate on alpha_0");
    cmd->add_option("--a0", a0, "Gamma prior shape on alpha_k (gibbs variant)");
    cmd->add_option("--b0", b0, "Gamma prior rate on alpha_k (gibbs variant)");
    cmd->add_option("--seed", seed, "RNG seed");
    cmd->add_option("--variant", variant, "Sampler variant: mh | gibbs");
    if (with_gk) {
      cmd->add_option("--G", G, "Number of variable groups");
      cmd->add_option("--K", K, "Number of extreme latent profiles");
      cmd->add_option("--fixed-grouping", fixed_grouping,
                      "identity | ones | path to a whitespace-separated s vector");
    }
  }

  void merge(ConfigMerge& m, bool with_gk = true) {
    m.apply("--iterations", "iterations", iterations);
    m.apply("--burn-in", "burn_in", burn_in);
    m.apply("--thin", "thin", thin);
    m.apply("--sigma-alpha", "sigma_alpha", sigma_alpha);
    m.apply("--a-alpha", "a_alpha", a_alpha);
    m.apply("--b-alpha", "b_alpha", b_alpha);
    m.apply("--a0", "a0", a0);
    m.apply("--b0", "b0", b0);
    m.apply("--seed", "seed", seed);
    m.apply("--variant", "variant", variant);
    if (with_gk) {
      m.apply("--G", "G", G);
      m.apply("--K", "K", K);
      m.apply("--fixed-grouping", "fixed_grouping", fixed_grouping);
    }
  }

  SamplerConfig build(const Dataset& data, bool with_gk = true) const {
    SamplerConfig cfg;
    cfg.iterations = iterations;
    cfg.burn_in = burn_in;
    cfg.thin = thin;
    cfg.sigma_alpha = sigma_alpha;
    cfg.a_alpha = a_alpha;
    cfg.b_alpha = b_alpha;
    cfg.a0 = a0;
    cfg.b0 = b0;
    cfg.seed = seed;
    if (variant == "mh")
      cfg.variant = SamplerVariant::mh_within_gibbs;
    else if (variant == "gibbs")
      cfg.variant = SamplerVariant::full_gibbs;
    else
      throw UsageError("--variant must be mh or gibbs");
    if (with_gk) {
      cfg.G = G;
      cfg.K = K;
      if (!fixed_grouping.empty()) {
        GroupAssignment s;
        if (fixed_grouping == "identity") {
          s = gom_grouping(data.p());
        } else if (fixed_grouping == "ones") {
          s = lcm_grouping(data.p());
        } else {
          std::ifstream in(fixed_grouping);
          if (!in) throw DataError("cannot open grouping file " + fixed_grouping);
          int v;
          while (in >> v) s.s.push_back(v);
          if (static_cast<int>(s.s.size()) != data.p())
            throw DataError("grouping file has " + std::to_string(s.s.size()) +
                            " entries for p = " + std::to_string(data.p()));
          s.G = *std::max_element(s.s.begin(), s.s.end());
        }
        cfg.fixed_grouping = s;
        cfg.G = s.G;
      }
    }
    cfg.validate();
    return cfg;
  }

  std::vector<std::pair<std::string, std::string>> manifest(bool with_gk = true) const {
    std::vector<std::pair<std::string, std::string>> kv{
        {"iterations", std::to_string(iterations)},
        {"burn_in", std::to_string(burn_in)},
        {"thin", std::to_string(thin)},
        {"sigma_alpha", io::format_double(sigma_alpha)},
        {"a_alpha", io::format_double(a_alpha)},
        {"b_alpha", io::format_double(b_alpha)},
        {"a0", io::format_double(a0)},
        {"b0", io::format_double(b0)},
        {"seed", std::to_string(seed)},
        {"variant", variant},
    };
    if (with_gk) {
      kv.emplace_back("G", std::to_string(G));
      kv.emplace_back("K", std::to_string(K));
      if (!fixed_grouping.empty()) kv.emplace_back("fixed_grouping", fixed_grouping);
    }
    return kv;
  }
};

void cmd_simulate(const std::string& config_path, CLI::App* cmd, std::string scenario,
                  std::string model_path, int n, std::uint64_t seed, std::string output) {
  ConfigMerge merge(cmd, config_path);
  merge.apply("--scenario", "scenario", scenario);
  merge.apply("--model", "model", model_path);
  merge.apply("--n", "n", n);
  merge.apply("--seed", "seed", seed);
  if (output.empty()) throw UsageError("simulate: --output is required");
  if (scenario.empty() == model_path.empty())
    throw UsageError("simulate: give exactly one of --scenario or --model");
  if (n < 1) throw UsageError("simulate: --n must be >= 1");

  const Model model = scenario.empty() ? io::read_model(model_path) : preset_scenario(scenario);
  const auto [data, latent] = sample_dataset(model, n, seed);
  const fs::path dir(output);
  io::write_dataset(dir / "data.csv", data);
  io::write_model(dir / "truth_model.txt", model);
  std::vector<std::pair<std::string, std::string>> kv{{"command", "simulate"}};
  if (!scenario.empty()) kv.emplace_back("scenario", scenario);
  if (!model_path.empty()) kv.emplace_back("model", model_path);
  kv.emplace_back("n", std::to_string(n));
  kv.emplace_back("seed", std::to_string(seed));
  io::write_manifest(dir / "manifest.txt", kv);
  std::cout << "wrote " << (dir / "data.csv").string() << " (" << data.n() << " x " << data.p()
            << ")\n";
}

void cmd_fit(const std::string& config_path, CLI::App* cmd, SamplerOpts opts, std::string input,
             std::string output) {
  ConfigMerge merge(cmd, config_path);
  merge.apply("--input", "input", input);
  opts.merge(merge);
  if (input.empty()) throw UsageError("fit: --input is required");
  if (output.empty()) throw UsageError("fit: --output is required");

  const io::ReadResult read = io::read_dataset(input);
  if (read.dropped_rows > 0)
    std::cerr << "warning: dropped " << read.dropped_rows << " row(s) with missing entries\n";
  const SamplerConfig cfg = opts.build(read.data);
  const Trace trace = run_chain(read.data, cfg);
  const PosteriorSummary summary = summarize(trace, read.data);

  const fs::path dir(output);
  io::write_trace(dir, trace);
  io::write_summary(dir / "summary.txt", summary);
  std::vector<std::pair<std::string, std::string>> kv{{"command", "fit"}, {"input", input}};
  for (auto& e : opts.manifest()) kv.push_back(e);
  io::write_manifest(dir / "manifest.txt", kv);
  std::cout << "fit done: " << trace.states.size() << " states, waic = " << summary.waic << "\n";
}

void cmd_select(const std::string& config_path, CLI::App* cmd, SamplerOpts opts,
                std::string input, std::string g_list_raw, std::string k_list_raw,
                int replicates, std::string output) {
  ConfigMerge merge(cmd, config_path);
  merge.apply("--input", "input", input);
  merge.apply("--G-list", "G_list", g_list_raw);
  merge.apply("--K-list", "K_list", k_list_raw);
  merge.apply("--replicates", "replicates", replicates);
  opts.merge(merge, /*with_gk=*/false);
  if (input.empty()) throw UsageError("select: --input is required");
  if (output.empty()) throw UsageError("select: --output is required");
  if (g_list_raw.empty() || k_list_raw.empty())
    throw UsageError("select: --G-list and --K-list are required");

  const std::vector<int> g_list = parse_int_list(g_list_raw, "--G-list");
  const std::vector<int> k_list = parse_int_list(k_list_raw, "--K-list");
  const io::ReadResult read = io::read_dataset(input);
  if (read.dropped_rows > 0)
    std::cerr << "warning: dropped " << read.dropped_rows << " row(s) with missing entries\n";
  SamplerConfig base = opts.build(read.data, /*with_gk=*/false);
  const ScanResult scan =
      model_selection_scan(read.data, g_list, k_list, base, std::max(1, replicates));

  const fs::path dir(output);
  fs::create_directories(dir);
  std::ofstream table(dir / "waic_table.csv");
  table << "G,K,waic,lppd,p_waic2,occupied_groups,kept,seed,selected\n";
  for (std::size_t i = 0; i < scan.table.size(); ++i) {
    const ScanEntry& e = scan.table[i];
    table << e.G << "," << e.K << "," << io::format_double(e.waic) << ","
          << io::format_double(e.lppd) << "," << io::format_double(e.p_waic2) << ","
          << e.occupied_groups << "," << (e.kept ? 1 : 0) << "," << e.seed << ","
          << (static_cast<int>(i) == scan.best ? 1 : 0) << "\n";
  }
  table.close();
  const ScanEntry& best = scan.table[scan.best];
  std::ofstream sel(dir / "selected.txt");
  sel << "G = " << best.G << "\nK = " << best.K << "\nwaic = " << io::format_double(best.waic)
      << "\n";
  sel.close();
  std::vector<std::pair<std::string, std::string>> kv{
      {"command", "select"}, {"input", input},       {"G_list", g_list_raw},
      {"K_list", k_list_raw}, {"replicates", std::to_string(std::max(1, replicates))}};
  for (auto& e : opts.manifest(false)) kv.push_back(e);
  io::write_manifest(dir / "manifest.txt", kv);
  std::cout << "selected G = " << best.G << ", K = " << best.K << "\n";
}

void cmd_eval(const std::string& config_path, CLI::App* cmd, std::string summary_path,
              std::string truth_path, std::string output) {
  ConfigMerge merge(cmd, config_path);
  merge.apply("--summary", "summary", summary_path);
  merge.apply("--truth", "truth", truth_path);
  if (summary_path.empty() || truth_path.empty())
    throw UsageError("eval: --summary and --truth are required");
  if (output.empty()) throw UsageError("eval: --output is required");

  const Model est = io::read_model(summary_path);
  const Model truth = io::read_model(truth_path);
  if (est.dims.p != truth.dims.p) throw ShapeMismatch("eval: p differs between summary and truth");
  const double a = ari(est.grouping.s, truth.grouping.s);
  const double rl = aligned_lambda_rmse(est.lambda, truth.lambda);
  const double ra = (est.dims.K == truth.dims.K)
                        ? aligned_alpha_rmse(est.lambda, est.alpha, truth.lambda, truth.alpha)
                        : std::numeric_limits<double>::quiet_NaN();

  const fs::path dir(output);
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "eval.csv");
  out << "metric,value\n";
  out << "ari," << io::format_double(a) << "\n";
  out << "rmse_lambda," << io::format_double(rl) << "\n";
  out << "rmse_alpha," << io::format_double(ra) << "\n";
  out.close();
  io::write_manifest(dir / "manifest.txt", {{"command", "eval"},
                                            {"summary", summary_path},
                                            {"truth", truth_path}});
  std::cout << "ari = " << a << ", rmse_lambda = " << rl << ", rmse_alpha = " << ra << "\n";
}

void write_crv_matrix(const fs::path& path, const std::vector<std::string>& names,
                      const Matrix& m) {
  std::ofstream out(path);
  out << "item";
  for (const auto& n : names) out << "," << n;
  out << "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << names[r];
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << "," << io::format_double(m(r, c));
    out << "\n";
  }
}

void cmd_crv(const std::string& config_path, CLI::App* cmd, std::string input,
             std::string model_path, std::string output) {
  ConfigMerge merge(cmd, config_path);
  merge.apply("--input", "input", input);
  merge.apply("--model", "model", model_path);
  if (input.empty() && model_path.empty())
    throw UsageError("crv: need --input (sample matrix) and/or --model (model matrix)");
  if (output.empty()) throw UsageError("crv: --output is required");
  const fs::path dir(output);
  std::filesystem::create_directories(dir);

  std::vector<std::pair<std::string, std::string>> kv{{"command", "crv"}};
  if (!input.empty()) {
    const io::ReadResult read = io::read_dataset(input);
    const int p = read.data.p();
    Matrix m = Matrix::Ones(p, p);
    for (int j = 0; j < p; ++j)
      for (int k = j + 1; k < p; ++k) m(j, k) = m(k, j) = sample_cramers_v(read.data, j, k);
    write_crv_matrix(dir / "sample_crv.csv", read.data.item_names, m);
    kv.emplace_back("input", input);
  }
  if (!model_path.empty()) {
    const Model model = io::read_model(model_path);
    const int p = model.dims.p;
    std::vector<std::string> names;
    for (int j = 0; j < p; ++j) names.push_back("V" + std::to_string(j + 1));
    Matrix m = Matrix::Ones(p, p);
    for (int j = 0; j < p; ++j)
      for (int k = j + 1; k < p; ++k) m(j, k) = m(k, j) = model_cramers_v(model, j, k);
    write_crv_matrix(dir / "model_crv.csv", names, m);
    kv.emplace_back("model", model_path);
  }
  io::write_manifest(dir / "manifest.txt", kv);
  std::cout << "wrote Cramer's V matrices to " << dir.string() << "\n";
}

void cmd_check_id(const std::string& config_path, CLI::App* cmd, std::string model_path,
                  double tol, std::string output) {
  ConfigMerge merge(cmd, config_path);
  merge.apply("--model", "model", model_path);
  merge.apply("--tol", "tol", tol);
  if (model_path.empty()) throw UsageError("check-id: --model is required");

  const Model model = io::read_model(model_path);
  std::ostringstream report;
  report << check_theorem1(model, tol).to_string();
  try {
    report << check_theorem2(model, tol).to_string();
  } catch (const GroupTooSmall& e) {
    report << "theorem 2 (strict, Khatri-Rao ranks): not checkable: " << e.what() << "\n";
  }
  try {
    report << check_theorem3(model.dims, model.grouping).to_string();
  } catch (const NumericError& e) {
    report << "theorem 3 (generic): not checkable: " << e.what() << "\n";
  }
  std::cout << report.str();
  if (!output.empty()) {
    const fs::path dir(output);
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "report.txt");
    out << report.str();
    out.close();
    io::write_manifest(dir / "manifest.txt",
                       {{"command", "check-id"}, {"model", model_path},
                        {"tol", io::format_double(tol)}});
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dimension-grouped mixed membership models for categorical data"};
  app.require_subcommand(1);

  std::string config_path, output;

  // simulate
  auto* sim = app.add_subcommand("simulate", "Sample a dataset from a preset or model file");
  std::string sim_scenario, sim_model;
  int sim_n = 1000;
  std::uint64_t sim_seed = 1;
  sim->add_option("--config", config_path, "Config file (key = value lines)");
  sim->add_option("--scenario", sim_scenario, "Preset name, e.g. K3-p30");
  sim->add_option("--model", sim_model, "Model file to sample from");
  sim->add_option("--n", sim_n, "Number of subjects");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--output", output, "Output directory");
  sim->callback([&] { cmd_simulate(config_path, sim, sim_scenario, sim_model, sim_n, sim_seed,
                                   output); });

  // fit
  auto* fit = app.add_subcommand("fit", "Run one MCMC chain and write trace + summary");
  SamplerOpts fit_opts;
  std::string fit_input;
  fit->add_option("--config", config_path, "Config file (key = value lines)");
  fit->add_option("--input", fit_input, "Dataset CSV");
  fit->add_option("--output", output, "Output directory");
  fit_opts.add_options(fit);
  fit->callback([&] { cmd_fit(config_path, fit, fit_opts, fit_input, output); });

  // select
  auto* sel = app.add_subcommand("select", "WAIC scan over (G, K) candidates");
  SamplerOpts sel_opts;
  std::string sel_input, sel_glist, sel_klist;
  int sel_replicates = 1;
  sel->add_option("--config", config_path, "Config file (key = value lines)");
  sel->add_option("--input", sel_input, "Dataset CSV");
  sel->add_option("--G-list", sel_glist, "Comma-separated G candidates");
  sel->add_option("--K-list", sel_klist, "Comma-separated K candidates");
  sel->add_option("--replicates", sel_replicates, "Chains per candidate (median WAIC)");
  sel->add_option("--output", output, "Output directory");
  sel_opts.add_options(sel, /*with_gk=*/false);
  sel->callback([&] {
    cmd_select(config_path, sel, sel_opts, sel_input, sel_glist, sel_klist, sel_replicates,
               output);
  });

  // eval
  auto* ev = app.add_subcommand("eval", "Compare a fitted summary against a truth manifest");
  std::string ev_summary, ev_truth;
  ev->add_option("--config", config_path, "Config file (key = value lines)");
  ev->add_option("--summary", ev_summary, "Summary file from fit");
  ev->add_option("--truth", ev_truth, "Truth model file from simulate");
  ev->add_option("--output", output, "Output directory");
  ev->callback([&] { cmd_eval(config_path, ev, ev_summary, ev_truth, output); });

  // crv
  auto* crv = app.add_subcommand("crv", "Pairwise Cramer's V matrices");
  std::string crv_input, crv_model;
  crv->add_option("--config", config_path, "Config file (key = value lines)");
  crv->add_option("--input", crv_input, "Dataset CSV (sample matrix)");
  crv->add_option("--model", crv_model, "Model/summary file (model matrix)");
  crv->add_option("--output", output, "Output directory");
  crv->callback([&] { cmd_crv(config_path, crv, crv_input, crv_model, output); });

  // check-id
  auto* chk = app.add_subcommand("check-id", "Run the identifiability checkers on a model file");
  std::string chk_model;
  double chk_tol = 1e-8;
  chk->add_option("--config", config_path, "Config file (key = value lines)");
  chk->add_option("--model", chk_model, "Model file");
  chk->add_option("--tol", chk_tol, "Rank tolerance");
  chk->add_option("--output", output, "Output directory (report.txt)");
  chk->callback([&] { cmd_check_id(config_path, chk, chk_model, chk_tol, output); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: data: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: numeric: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
