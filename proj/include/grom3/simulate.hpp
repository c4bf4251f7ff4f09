#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "grom3/model.hpp"

namespace grom3 {

struct Dataset {
  std::vector<std::string> item_names;
  std::vector<int> d;   // per-variable category counts
  IntMatrix responses;  // n x p, categories coded 1..d_j

  int n() const { return static_cast<int>(responses.rows()); }
  int p() const { return static_cast<int>(responses.cols()); }
  void validate() const;
};

struct LatentRecord {
  Matrix pi;     // n x K membership vectors
  IntMatrix z;   // n x G group-level assignments, values 1..K
};

/// Forward sample from the generative hierarchy. Subject i draws from its own
/// substream of (seed, i), so the output is a pure function of (model, n, seed)
/// no matter how the loop is scheduled.
std::pair<Dataset, LatentRecord> sample_dataset(const Model& model, int n, std::uint64_t seed,
                                                int threads = 0);

/// Simulation presets named K{2,3,4}-p{30,60,90}: d_j = 3 throughout, the six
/// fixed 3x4 tables cycled with period 6 (truncated to K columns), round-robin
/// grouping, and alpha = (0.4, 0.5[, 0.6[, 0.7]]).
Model preset_scenario(const std::string& name);

std::vector<std::string> preset_names();

}  // namespace grom3
