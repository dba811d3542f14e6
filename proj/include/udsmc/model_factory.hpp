#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "udsmc/model.hpp"
#include "udsmc/protein_model.hpp"
#include "udsmc/toy_models.hpp"

namespace udsmc {

// Parsed statistic request; `kind` decides which fields matter.
struct StatSpec {
  std::string kind;  // terminal_value | path_sum | terminal_equals |
                     // ca_distance | contacts
  std::string name;  // CSV label; defaults to kind
  int coord = 0;
  double value = 0.0;        // terminal_equals
  int res_i = 0, res_j = 0;  // ca_distance
  std::vector<int> residues;  // contacts
  double radius = 7.0;
  bool include_segment = true;
};

// A model plus its statistics, built from JSON configuration. The typed
// views (enumerable / chain / segment) are set when the model kind provides
// them; they alias `model` and share its lifetime.
struct ModelBundle {
  std::string kind;
  std::shared_ptr<SequentialModel> model;
  std::shared_ptr<const SegmentSampler> segment;
  const EnumerableModel* enumerable = nullptr;
  const ConstrainedChain* chain = nullptr;

  std::vector<StatSpec> specs;
  std::vector<std::unique_ptr<Statistic>> stats;  // parallel to specs
  // Flattened output dimensions: one name per emitted value, mapped back to
  // (statistic index, component index).
  std::vector<std::string> dim_names;
  std::vector<std::pair<size_t, size_t>> dim_map;
};

// model_json: {"kind": "toy-hmm" | "constrained-chain" | "protein", ...}.
// stats_json: JSON array of statistic specs; empty selects a default for the
// model kind. base_dir prefixes relative file paths in protein configs.
// parse_error / invalid_argument on malformed input; file and table errors
// propagate from the loaders.
ModelBundle build_bundle(const std::string& model_json,
                         const std::string& stats_json,
                         const std::string& base_dir = "");

}  // namespace udsmc
