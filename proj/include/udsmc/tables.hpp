#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "udsmc/geometry.hpp"
#include "udsmc/pdb.hpp"

namespace udsmc {

// Distance-binned pairwise score table over an atom-type vocabulary.
// Scores are symmetric in the two types; a cell equal to `sentinel` marks a
// hard clash. Pairs at distance >= max_distance contribute zero.
struct PotentialTable {
  std::vector<std::string> type_names;
  double bin_width = 0.5;
  double max_distance = 8.0;
  double sentinel = 8.0;
  long n_bins = 16;
  std::vector<double> score;  // [i * T * B + j * B + b]

  int type_index(std::string_view name) const;
  double at(int ti, int tj, long bin) const {
    return score[((size_t)ti * type_names.size() + (size_t)tj) *
                     (size_t)n_bins +
                 (size_t)bin];
  }
  long bin_of(double dist) const { return (long)(dist / bin_width); }
  bool is_clash(double s) const { return s == sentinel; }
};

// 5-degree (phi, psi) bin masses for one amino acid; 72 x 72, sums to 1.
// Density is uniform inside a bin.
inline constexpr int kDihedralBins = 72;
inline constexpr double kDihedralBinDeg = 5.0;

struct DihedralTable {
  std::array<double, (size_t)kDihedralBins * kDihedralBins> p{};
  double mass(int phi_bin, int psi_bin) const {
    return p[(size_t)phi_bin * kDihedralBins + (size_t)psi_bin];
  }
};

struct DihedralSet {
  double omega_mean = 180.0;
  double omega_sd = 3.0;
  std::map<std::string, DihedralTable> by_aa;

  const DihedralTable& require_aa(const std::string& aa) const;
};

// Allowed end-anchor distance windows keyed by remaining step count:
// channel c is the placed carbonyl carbon, channel ca the placed next-CA.
struct ClosureRow {
  double c_min = 0.0, c_max = 0.0, ca_min = 0.0, ca_max = 0.0;
};

struct ClosureTable {
  std::vector<ClosureRow> rows;  // index = steps remaining
  const ClosureRow& require_steps(long steps_remaining) const;
};

// Text formats: UTF-8 lines, '#' comments, leading `format <kind> <version>`
// header. Loaders raise parse_error with the line number, plus
// asymmetric_entry / bad_dimension / bad_normalization / non_monotone_range
// for semantic violations. Dihedral matrices off unit mass by <= 1e-6 are
// renormalized; worse is an error.
PotentialTable load_potential_table(std::istream& in);
PotentialTable load_potential_table_file(const std::string& path);
void save_potential_table(const PotentialTable& t, std::ostream& out);
void save_potential_table_file(const PotentialTable& t,
                               const std::string& path);

DihedralSet load_dihedral_set(std::istream& in);
DihedralSet load_dihedral_set_file(const std::string& path);
void save_dihedral_set(const DihedralSet& d, std::ostream& out);
void save_dihedral_set_file(const DihedralSet& d, const std::string& path);

ClosureTable load_closure_table(std::istream& in);
ClosureTable load_closure_table_file(const std::string& path);
void save_closure_table(const ClosureTable& t, std::ostream& out);
void save_closure_table_file(const ClosureTable& t, const std::string& path);

// --- synthetic data -------------------------------------------------------

struct SyntheticSpec {
  std::vector<std::string> atom_types = {"N", "CA", "C", "O"};
  double bin_width = 0.5;
  double max_distance = 8.0;
  double clash_distance = 2.4;
  double sentinel = 8.0;
  double well_depth = 0.6;
  std::vector<std::string> amino_acids = {"ALA", "GLY", "SER"};
  int modes = 2;            // (phi, psi) density modes per amino acid
  double mode_sd_deg = 14.0;
  double omega_mean = 180.0;
  double omega_sd = 3.0;
  int max_steps = 24;       // closure rows 0..max_steps
  double span_margin = 0.05;
  BackboneGeometry geometry;
};

struct SyntheticTables {
  PotentialTable pot;
  DihedralSet dih;
  ClosureTable clo;
};

// Deterministic in (spec, seed). Clash bins carry the sentinel; closure row
// k has ca_max = (k+1) * single-step maximum span; the k = 0 row is the
// tight terminal window.
SyntheticTables generate_synthetic_tables(const SyntheticSpec& spec,
                                          uint64_t seed);

struct HostSpec {
  int residues = 30;
  DihedralTriple conformation{-63.0, -43.0, 180.0};
  std::vector<std::string> amino_acids = {"ALA", "GLY", "SER"};
  char chain = 'A';
};

// Ideal-geometry backbone host (N, CA, C, O per residue) built by repeated
// internal-coordinate extension; residue numbers start at 1.
ProteinStructure generate_synthetic_host(const HostSpec& spec,
                                         const BackboneGeometry& g);

}  // namespace udsmc
