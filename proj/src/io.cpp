#include "grom3/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace grom3 {
namespace io {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

int parse_int(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  int value = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(where + ": '" + raw + "' is not an integer");
  return value;
}

double parse_double(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SchemaError(where + ": '" + raw + "' is not a number");
  }
}

std::vector<double> parse_doubles(const std::string& raw, const std::string& where) {
  std::istringstream is(raw);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(parse_double(tok, where));
  return out;
}

std::vector<int> parse_ints(const std::string& raw, const std::string& where) {
  std::istringstream is(raw);
  std::vector<int> out;
  std::string tok;
  while (is >> tok) out.push_back(parse_int(tok, where));
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ReadResult read_dataset(const std::filesystem::path& path, const ReadOptions& options) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> names = split(line, ',');
  for (auto& n : names) n = trim(n);
  const int p = static_cast<int>(names.size());
  if (p == 0 || names[0].empty()) throw ParseError(path.string() + ": missing header row");
  if (!options.d_override.empty() && static_cast<int>(options.d_override.size()) != p)
    throw DataError("d override has " + std::to_string(options.d_override.size()) +
                    " entries for " + std::to_string(p) + " columns");

  std::vector<std::vector<int>> rows;
  int dropped = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (static_cast<int>(cells.size()) != p)
      throw ParseError("row " + std::to_string(lineno) + ": expected " + std::to_string(p) +
                       " cells, found " + std::to_string(cells.size()));
    bool missing = false;
    std::vector<int> row(p);
    for (int j = 0; j < p && !missing; ++j) {
      const std::string cell = trim(cells[j]);
      if (std::find(options.missing_markers.begin(), options.missing_markers.end(), cell) !=
          options.missing_markers.end()) {
        missing = true;
        break;
      }
      row[j] = parse_int(cell, "row " + std::to_string(lineno) + ", column " +
                                   std::to_string(j + 1));
    }
    if (missing) {
      ++dropped;
      continue;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyAfterFiltering(path.string() + ": no usable rows");

  const int n = static_cast<int>(rows.size());
  ReadResult out;
  out.dropped_rows = dropped;
  out.data.item_names = std::move(names);
  out.data.responses.resize(n, p);
  out.data.d.resize(p);
  for (int j = 0; j < p; ++j) {
    int lo = rows[0][j], hi = rows[0][j];
    for (int i = 0; i < n; ++i) {
      lo = std::min(lo, rows[i][j]);
      hi = std::max(hi, rows[i][j]);
    }
    const int shift = (lo == 0) ? 1 : 0;  // 0-based disk coding becomes 1-based
    if (lo + shift < 1)
      throw ParseError("column " + std::to_string(j + 1) + ": negative category codes");
    for (int i = 0; i < n; ++i) out.data.responses(i, j) = rows[i][j] + shift;
    out.data.d[j] = std::max(2, hi + shift);
    if (!options.d_override.empty()) {
      if (options.d_override[j] < out.data.d[j])
        throw DataError("column " + std::to_string(j + 1) + ": override " +
                        std::to_string(options.d_override[j]) + " below observed maximum " +
                        std::to_string(out.data.d[j]));
      out.data.d[j] = options.d_override[j];
    }
  }
  out.data.validate();
  return out;
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out = open_output(path);
  for (int j = 0; j < data.p(); ++j) out << (j ? "," : "") << data.item_names[j];
  out << "\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.p(); ++j) out << (j ? "," : "") << data.responses(i, j);
    out << "\n";
  }
}

Model read_model(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::map<std::string, std::string> scalars;
  std::map<int, std::vector<std::vector<double>>> lambda_rows;
  std::string line;
  int lineno = 0;

  auto next_line = [&](std::string& dst) {
    while (std::getline(in, dst)) {
      ++lineno;
      const auto hash = dst.find('#');
      if (hash != std::string::npos) dst.erase(hash);
      dst = trim(dst);
      if (!dst.empty()) return true;
    }
    return false;
  };

  while (next_line(line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SchemaError(path.string() + " line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("lambda ", 0) == 0) {
      const int j = parse_int(key.substr(7), "lambda block index");
      std::vector<std::vector<double>> rows;
      // the block runs until the next 'key =' line; remember where we stopped
      while (in) {
        const auto pos = in.tellg();
        std::string row_line;
        if (!next_line(row_line)) break;
        if (row_line.find('=') != std::string::npos) {
          in.seekg(pos);
          --lineno;
          break;
        }
        rows.push_back(parse_doubles(row_line, "lambda " + std::to_string(j)));
      }
      lambda_rows[j] = std::move(rows);
    } else {
      scalars[key] = value;
    }
  }

  auto require = [&](const std::string& key) -> const std::string& {
    const auto it = scalars.find(key);
    if (it == scalars.end()) throw SchemaError(path.string() + ": missing field '" + key + "'");
    return it->second;
  };

  Model m;
  m.dims.p = parse_int(require("p"), "p");
  m.dims.G = parse_int(require("G"), "G");
  m.dims.K = parse_int(require("K"), "K");
  m.dims.d = parse_ints(require("d"), "d");
  m.grouping.G = m.dims.G;
  m.grouping.s = parse_ints(require("s"), "s");
  const std::vector<double> alpha = parse_doubles(require("alpha"), "alpha");
  m.alpha.alpha = alpha;
  for (int j = 1; j <= m.dims.p; ++j) {
    const auto it = lambda_rows.find(j);
    if (it == lambda_rows.end())
      throw SchemaError(path.string() + ": missing field 'lambda " + std::to_string(j) + "'");
    const auto& rows = it->second;
    if (static_cast<int>(rows.size()) != m.dims.d[j - 1])
      throw SchemaError("lambda " + std::to_string(j) + ": expected " +
                        std::to_string(m.dims.d[j - 1]) + " rows, found " +
                        std::to_string(rows.size()));
    Matrix t(m.dims.d[j - 1], m.dims.K);
    for (std::size_t c = 0; c < rows.size(); ++c) {
      if (static_cast<int>(rows[c].size()) != m.dims.K)
        throw SchemaError("lambda " + std::to_string(j) + " row " + std::to_string(c + 1) +
                          ": expected " + std::to_string(m.dims.K) + " values");
      for (int k = 0; k < m.dims.K; ++k) t(c, k) = rows[c][k];
    }
    m.lambda.tables.push_back(std::move(t));
  }
  try {
    m.validate();
  } catch (const std::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return m;
}

namespace {

void write_model_body(std::ofstream& out, const ModelDims& dims, const GroupAssignment& s,
                      const DirichletParams& alpha, const CondProbTables& lambda) {
  out << "p = " << dims.p << "\n";
  out << "G = " << dims.G << "\n";
  out << "K = " << dims.K << "\n";
  out << "d =";
  for (int dj : dims.d) out << " " << dj;
  out << "\n";
  out << "s =";
  for (int sj : s.s) out << " " << sj;
  out << "\n";
  out << "alpha =";
  for (double a : alpha.alpha) out << " " << format_double(a);
  out << "\n";
  for (int j = 0; j < dims.p; ++j) {
    out << "lambda " << (j + 1) << " =\n";
    const Matrix& t = lambda.tables[j];
    for (Eigen::Index c = 0; c < t.rows(); ++c) {
      for (Eigen::Index k = 0; k < t.cols(); ++k) out << (k ? " " : "") << format_double(t(c, k));
      out << "\n";
    }
  }
}

}  // namespace

void write_model(const std::filesystem::path& path, const Model& model) {
  std::ofstream out = open_output(path);
  write_model_body(out, model.dims, model.grouping, model.alpha, model.lambda);
}

void write_summary(const std::filesystem::path& path, const PosteriorSummary& summary) {
  std::ofstream out = open_output(path);
  write_model_body(out, summary.dims, summary.s_mode, summary.alpha_mean, summary.lambda_mean);
  out << "occupied_groups = " << summary.occupied_groups << "\n";
  out << "waic = " << format_double(summary.waic) << "\n";
  out << "lppd = " << format_double(summary.lppd) << "\n";
  out << "p_waic2 = " << format_double(summary.p_waic2) << "\n";
  if (std::isfinite(summary.mean_accept_ratio))
    out << "mean_accept_ratio = " << format_double(summary.mean_accept_ratio) << "\n";
}

void write_trace(const std::filesystem::path& directory, const Trace& trace) {
  std::filesystem::create_directories(directory);
  {
    std::ofstream out = open_output(directory / "alpha.csv");
    out << "iteration,k,value\n";
    for (std::size_t t = 0; t < trace.states.size(); ++t)
      for (int k = 0; k < trace.config.K; ++k)
        out << trace.state_iterations[t] << "," << (k + 1) << ","
            << format_double(trace.states[t].alpha.alpha[k]) << "\n";
  }
  {
    std::ofstream out = open_output(directory / "s.csv");
    out << "iteration,j,g\n";
    for (std::size_t t = 0; t < trace.states.size(); ++t)
      for (int j = 0; j < trace.states[t].s.p(); ++j)
        out << trace.state_iterations[t] << "," << (j + 1) << "," << trace.states[t].s.s[j]
            << "\n";
  }
  {
    std::ofstream out = open_output(directory / "lambda.csv");
    out << "iteration,j,c,k,value\n";
    for (std::size_t t = 0; t < trace.states.size(); ++t)
      for (std::size_t j = 0; j < trace.states[t].lambda.tables.size(); ++j) {
        const Matrix& tab = trace.states[t].lambda.tables[j];
        for (Eigen::Index c = 0; c < tab.rows(); ++c)
          for (Eigen::Index k = 0; k < tab.cols(); ++k)
            out << trace.state_iterations[t] << "," << (j + 1) << "," << (c + 1) << ","
                << (k + 1) << "," << format_double(tab(c, k)) << "\n";
      }
  }
  {
    std::ofstream out = open_output(directory / "accept.csv");
    out << "iteration,accepted,ratio\n";
    for (const AcceptRecord& r : trace.accept_log)
      out << r.iteration << "," << (r.accepted ? 1 : 0) << "," << format_double(r.ratio) << "\n";
  }
  {
    std::ofstream out = open_output(directory / "loglik.csv");
    out << "iteration,loglik\n";
    for (std::size_t it = 0; it < trace.loglik_log.size(); ++it)
      out << (it + 1) << "," << format_double(trace.loglik_log[it]) << "\n";
  }
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path.string() + " line " + std::to_string(lineno) +
                       ": expected 'key = value'");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out = open_output(path);
  out << "# run manifest; pass back via --config to reproduce\n";
  out << "version = " << kVersion << "\n";
  for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
}

}  // namespace io
}  // namespace grom3
