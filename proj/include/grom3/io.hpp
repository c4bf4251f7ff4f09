#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "grom3/posterior.hpp"

namespace grom3 {
namespace io {

struct ReadOptions {
  std::vector<std::string> missing_markers{"", "NA"};
  std::vector<int> d_override;  // optional per-column floor for category counts
};

struct ReadResult {
  Dataset data;
  int dropped_rows = 0;  // rows removed because of missing markers
};

/// CSV with a header row of item names and integer cells. Columns whose
/// minimum is 0 are shifted up by one (0/1 disk coding becomes 1/2); d_j is
/// the observed maximum, at least 2. Rows containing a missing marker are
/// dropped and counted.
ReadResult read_dataset(const std::filesystem::path& path, const ReadOptions& options = {});

void write_dataset(const std::filesystem::path& path, const Dataset& data);

/// Plain-text model file: scalar `key = value` lines plus one `lambda j =`
/// block of d_j rows per variable. Values round-trip exactly (printed with 17
/// significant digits).
Model read_model(const std::filesystem::path& path);
void write_model(const std::filesystem::path& path, const Model& model);

/// Summary file: a model file (s = posterior mode, alpha/lambda = posterior
/// means) extended with fit statistics; readable by read_model.
void write_summary(const std::filesystem::path& path, const PosteriorSummary& summary);

/// One CSV per parameter block (alpha.csv, s.csv, lambda.csv with
/// (iteration, index..., value) rows), plus accept.csv and loglik.csv.
void write_trace(const std::filesystem::path& directory, const Trace& trace);

/// `key = value` per line, '#' comments.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);

std::string format_double(double v);

inline constexpr const char* kVersion = "grom3 0.1.0";

}  // namespace io
}  // namespace grom3
