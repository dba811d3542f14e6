#include "udsmc/model_factory.hpp"

#include <cmath>
#include <filesystem>
#include <set>

#include "json_util.hpp"
#include "udsmc/errors.hpp"
#include "udsmc/statistics.hpp"
#include "udsmc/tables.hpp"

namespace udsmc {
namespace {

using jsonu::json;
using jsonu::check_keys;
using jsonu::find;
using jsonu::int_of;
using jsonu::need_int;
using jsonu::need_str;
using jsonu::num_of;
using jsonu::opt_bool;
using jsonu::opt_int;
using jsonu::opt_num;
using jsonu::opt_str;

std::vector<double> need_vec(const json& j, const char* key, size_t n) {
  const json* v = find(j, key);
  if (!v) fail(errc::parse_error, std::string("missing field '") + key + "'");
  if (!v->is_array() || v->size() != n)
    fail_at(errc::bad_dimension,
            std::string(key) + ": expected an array of the state count",
            (long)n);
  std::vector<double> out;
  out.reserve(n);
  for (const auto& e : *v) out.push_back(num_of(e, key));
  return out;
}

// S x S nested rows, flattened row-major.
std::vector<double> need_matrix(const json& j, const char* key, size_t n) {
  const json* v = find(j, key);
  if (!v) fail(errc::parse_error, std::string("missing field '") + key + "'");
  if (!v->is_array() || v->size() != n)
    fail_at(errc::bad_dimension,
            std::string(key) + ": expected one row per state", (long)n);
  std::vector<double> out;
  out.reserve(n * n);
  for (const auto& row : *v) {
    if (!row.is_array() || row.size() != n)
      fail_at(errc::bad_dimension,
              std::string(key) + ": expected square rows", (long)n);
    for (const auto& e : row) out.push_back(num_of(e, key));
  }
  return out;
}

std::string resolve_path(const std::string& raw, const std::string& base_dir) {
  std::filesystem::path p(raw);
  if (base_dir.empty() || p.is_absolute()) return raw;
  return (std::filesystem::path(base_dir) / p).string();
}

void build_hmm(ModelBundle& b, const json& j) {
  check_keys(j,
             {"kind", "preset", "states", "horizon", "init_target",
              "init_proposal", "trans_target", "trans_proposal",
              "state_values"},
             "toy-hmm");
  std::string preset = opt_str(j, "preset", "");
  std::shared_ptr<FiniteHmm> hmm;
  if (!preset.empty()) {
    if (preset != "propriety")
      fail(errc::invalid_argument, "toy-hmm: unknown preset '" + preset + "'");
    hmm = std::make_shared<FiniteHmm>(FiniteHmm::propriety_reference());
  } else {
    FiniteHmm::Tables t;
    t.states = need_int(j, "states");
    t.horizon = (int)need_int(j, "horizon");
    require(t.states >= 1 && t.states <= 64, errc::invalid_argument,
            "toy-hmm: states must be in [1, 64]");
    require(t.horizon >= 0, errc::invalid_argument,
            "toy-hmm: horizon must be >= 0");
    size_t s = (size_t)t.states;
    t.init_target = need_vec(j, "init_target", s);
    t.init_proposal = need_vec(j, "init_proposal", s);
    t.trans_target = need_matrix(j, "trans_target", s);
    t.trans_proposal = need_matrix(j, "trans_proposal", s);
    if (find(j, "state_values")) t.state_values = need_vec(j, "state_values", s);
    hmm = std::make_shared<FiniteHmm>(std::move(t));
  }
  b.enumerable = hmm.get();
  b.model = std::move(hmm);
}

void build_chain(ModelBundle& b, const json& j) {
  check_keys(j,
             {"kind", "preset", "horizon", "accel", "width", "width_decay",
              "pull_sd", "lead", "ceiling_width", "decoy_height", "decoy_pos",
              "decoy_vel", "decoy_sd", "terminal_halfwidth", "target"},
             "constrained-chain");
  std::string preset = opt_str(j, "preset", "surrogate");
  ConstrainedChain::Params p;
  if (preset == "surrogate")
    p = ConstrainedChain::surrogate_default().params();
  else if (preset == "tight")
    p = ConstrainedChain::tight_default().params();
  else if (preset == "open")
    p = ConstrainedChain::open_default().params();
  else
    fail(errc::invalid_argument,
         "constrained-chain: unknown preset '" + preset + "'");
  p.horizon = (int)opt_int(j, "horizon", p.horizon);
  p.accel = opt_num(j, "accel", p.accel);
  p.width = opt_num(j, "width", p.width);
  p.width_decay = opt_num(j, "width_decay", p.width_decay);
  p.pull_sd = opt_num(j, "pull_sd", p.pull_sd);
  p.lead = opt_num(j, "lead", p.lead);
  if (find(j, "ceiling_width"))
    p.ceiling_width = opt_num(j, "ceiling_width", p.ceiling_width);
  p.decoy_height = opt_num(j, "decoy_height", p.decoy_height);
  p.decoy_pos = opt_num(j, "decoy_pos", p.decoy_pos);
  p.decoy_vel = opt_num(j, "decoy_vel", p.decoy_vel);
  p.decoy_sd = opt_num(j, "decoy_sd", p.decoy_sd);
  p.terminal_halfwidth = opt_num(j, "terminal_halfwidth", p.terminal_halfwidth);
  if (find(j, "target")) p.target = opt_num(j, "target", p.target);
  auto chain = std::make_shared<ConstrainedChain>(p);
  b.chain = chain.get();
  b.model = std::move(chain);
}

void build_protein(ModelBundle& b, const json& j, const std::string& base_dir) {
  check_keys(j,
             {"kind", "pdb", "potential", "dihedrals", "closure", "chain",
              "start", "end", "pair_weight", "include_hydrogens",
              "fallback_type"},
             "protein");
  ProteinStructure host =
      parse_pdb_file(resolve_path(need_str(j, "pdb"), base_dir));
  PotentialTable pot = load_potential_table_file(
      resolve_path(need_str(j, "potential"), base_dir));
  DihedralSet dih =
      load_dihedral_set_file(resolve_path(need_str(j, "dihedrals"), base_dir));
  ClosureTable clo =
      load_closure_table_file(resolve_path(need_str(j, "closure"), base_dir));
  SegmentSpec spec;
  std::string chain = opt_str(j, "chain", "A");
  require(chain.size() == 1, errc::invalid_argument,
          "protein: chain must be a single character");
  spec.chain = chain[0];
  spec.start = (int)need_int(j, "start");
  spec.end = (int)need_int(j, "end");
  spec.pair_weight = opt_num(j, "pair_weight", spec.pair_weight);
  spec.include_hydrogens = opt_bool(j, "include_hydrogens", false);
  spec.fallback_type = opt_str(j, "fallback_type", "");
  auto seg = std::make_shared<SegmentSampler>(host, spec, std::move(pot),
                                              std::move(dih), std::move(clo));
  b.segment = seg;
  b.model = std::move(seg);
}

StatSpec parse_stat(const json& s, const ModelBundle& b) {
  if (!s.is_object())
    fail(errc::parse_error, "statistics: each entry must be an object");
  check_keys(s,
             {"kind", "name", "coord", "value", "res_i", "res_j", "residues",
              "radius", "include_segment"},
             "statistic");
  StatSpec spec;
  spec.kind = need_str(s, "kind");
  spec.name = opt_str(s, "name", spec.kind);
  require(!spec.name.empty(), errc::invalid_argument,
          "statistic: name must be nonempty");
  spec.coord = (int)opt_int(s, "coord", 0);
  int dim = b.model->state_dim();
  if (spec.kind == "terminal_value" || spec.kind == "path_sum") {
    require(spec.coord >= 0 && spec.coord < dim, errc::invalid_argument,
            "statistic: coord out of range for the state dimension");
  } else if (spec.kind == "terminal_equals") {
    require(spec.coord >= 0 && spec.coord < dim, errc::invalid_argument,
            "statistic: coord out of range for the state dimension");
    const json* v = find(s, "value");
    if (!v) fail(errc::parse_error, "terminal_equals: missing field 'value'");
    spec.value = num_of(*v, "value");
  } else if (spec.kind == "ca_distance") {
    require(b.segment != nullptr, errc::invalid_argument,
            "ca_distance requires a protein model");
    spec.res_i = (int)need_int(s, "res_i");
    spec.res_j = (int)need_int(s, "res_j");
  } else if (spec.kind == "contacts") {
    require(b.segment != nullptr, errc::invalid_argument,
            "contacts requires a protein model");
    if (const json* r = find(s, "residues")) {
      if (!r->is_array() || r->empty())
        fail(errc::parse_error, "contacts: residues must be a nonempty array");
      for (const auto& e : *r) spec.residues.push_back((int)int_of(e, "residues"));
    } else {
      const SegmentSpec& seg = b.segment->segment();
      for (int r2 = seg.start; r2 <= seg.end; ++r2) spec.residues.push_back(r2);
    }
    spec.radius = opt_num(s, "radius", spec.radius);
    require(spec.radius > 0.0, errc::invalid_argument,
            "contacts: radius must be positive");
    spec.include_segment = opt_bool(s, "include_segment", true);
  } else {
    fail(errc::invalid_argument,
         "statistic: unknown kind '" + spec.kind + "'");
  }
  return spec;
}

std::unique_ptr<Statistic> make_stat(const StatSpec& s, const ModelBundle& b) {
  int dim = b.model->state_dim();
  int T = b.model->horizon();
  if (s.kind == "terminal_value") return make_terminal_value(dim, T, s.coord);
  if (s.kind == "path_sum") return make_path_sum(dim, T, s.coord);
  if (s.kind == "terminal_equals")
    return make_terminal_equals(dim, T, s.value, s.coord);
  if (s.kind == "ca_distance")
    return make_ca_distance(b.segment, s.res_i, s.res_j);
  ContactSpec c;
  c.residues = s.residues;
  c.radius = s.radius;
  c.include_segment = s.include_segment;
  return make_contact_counts(b.segment, c);
}

}  // namespace

ModelBundle build_bundle(const std::string& model_json,
                         const std::string& stats_json,
                         const std::string& base_dir) {
  ModelBundle b;
  json m = jsonu::parse(model_json, "model config");
  if (!m.is_object())
    fail(errc::parse_error, "model config: expected a JSON object");
  b.kind = need_str(m, "kind");
  if (b.kind == "toy-hmm")
    build_hmm(b, m);
  else if (b.kind == "constrained-chain")
    build_chain(b, m);
  else if (b.kind == "protein")
    build_protein(b, m, base_dir);
  else
    fail(errc::invalid_argument, "model config: unknown kind '" + b.kind + "'");

  json st;
  if (stats_json.empty()) {
    st = json::array();
  } else {
    st = jsonu::parse(stats_json, "statistics config");
    if (!st.is_array())
      fail(errc::parse_error, "statistics config: expected a JSON array");
  }
  if (st.empty()) {
    json dflt = json::object();
    dflt["kind"] = b.segment ? "contacts" : "terminal_value";
    st.push_back(dflt);
  }

  std::set<std::string> names;
  for (const auto& s : st) {
    StatSpec spec = parse_stat(s, b);
    require(names.insert(spec.name).second, errc::invalid_argument,
            "statistic: duplicate name '" + spec.name + "'");
    b.stats.push_back(make_stat(spec, b));
    b.specs.push_back(std::move(spec));
  }
  for (size_t i = 0; i < b.stats.size(); ++i) {
    int d = b.stats[i]->dim();
    for (int k = 0; k < d; ++k) {
      std::string nm = b.specs[i].name;
      if (b.specs[i].kind == "contacts")
        nm += "[" + std::to_string(b.specs[i].residues[(size_t)k]) + "]";
      else if (d > 1)
        nm += "[" + std::to_string(k) + "]";
      b.dim_names.push_back(std::move(nm));
      b.dim_map.emplace_back(i, (size_t)k);
    }
  }
  return b;
}

}  // namespace udsmc
