#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "udsmc/geometry.hpp"
#include "udsmc/model.hpp"
#include "udsmc/pdb.hpp"
#include "udsmc/tables.hpp"

namespace udsmc {

// Backbone atom roles; also the placement order within one step.
namespace bb_role {
inline constexpr int8_t n = 0, ca = 1, c = 2, o = 3, other = -1;
}

// One typed atom of a conformation: host context or placed segment atom.
struct SegmentAtom {
  Vec3 pos;
  int residue = 0;  // host residue number
  int8_t role = bb_role::other;
  int16_t type = 0;  // potential-table type index
  char chain = 'A';
};

struct SegmentSpec {
  char chain = 'A';
  int start = 0;  // first resampled residue
  int end = 0;    // last resampled residue; horizon T = end - start
  double pair_weight = 0.1;  // weight on the pairwise term in the total
  bool include_hydrogens = false;
  std::string fallback_type;  // for unknown atom names; empty = error
};

struct EnergyBreakdown {
  double h_a = 0.0;      // pairwise term; +inf on clash
  double h_theta = 0.0;  // dihedral term; +inf on a zero-mass bin
  bool closure_ok = true;
  double total = 0.0;  // pair_weight * h_a + h_theta, or +inf
};

// Sequential model over backbone dihedral triples for one segment of a fixed
// host structure. States are (phi, psi, omega) degrees; step t places the
// quadruple C_t, O_t, N_{t+1}, CA_{t+1} continuing from the anchor frame
// (C_{start-1}, N_start, CA_start). The proposal samples the target's own
// dihedral factor, so the weight increment reduces to the pairwise term and
// the closure indicator; the dihedral term cancels analytically.
//
// Pairwise scoring: placed atoms against each other and against the host
// context (all atoms outside segment residues [start, end+1] on the segment
// chain), same-residue and peptide-bonded (C_i, N_{i+1}) pairs excluded,
// pairs at or beyond the table cutoff contribute zero, sentinel score means
// clash. Closure row k = horizon - t bounds the distances from C_t and
// CA_{t+1} to the fixed CA at residue end+2, both ends inclusive.
//
// Immutable after construction; all methods are pure.
class SegmentSampler : public SequentialModel {
 public:
  SegmentSampler(const ProteinStructure& host, const SegmentSpec& spec,
                 PotentialTable pot, DihedralSet dih, ClosureTable clo,
                 BackboneGeometry geom = BackboneGeometry{});

  int horizon() const override { return T_; }
  int state_dim() const override { return 3; }
  void propose(std::span<const double> prefix, int t, StreamRng& rng,
               std::span<double> out_state) const override;
  double log_increment(std::span<const double> prefix, int t,
                       std::span<const double> state) const override;

  // Full breakdown for the step (diagnostics and consistency checks; the
  // model increment itself never includes h_theta).
  EnergyBreakdown step_energy(std::span<const double> prefix, int t,
                              std::span<const double> state) const;

  // Places every segment atom of a full path (4 per step, residues in host
  // numbering). Path length must be (horizon+1) * 3.
  std::vector<SegmentAtom> place_path(std::span<const double> path) const;

  // Brute-force whole-segment pairwise term (all placed pairs plus placed x
  // context, standard exclusions); +inf on clash. Oracle for the sum of the
  // per-step increments.
  double whole_segment_h_a(std::span<const double> path) const;

  const std::vector<SegmentAtom>& context_atoms() const { return context_; }

  // Context atoms within `radius` of `pos` (ascending indices). Uses the
  // grid when the radius fits one neighborhood, full scan otherwise.
  std::vector<int32_t> nearby_context(const Vec3& pos, double radius) const;

  // The two fixed atoms inside the segment's residue range (anchor N and CA
  // of residue start), typed like placed atoms; the anchor carbonyl of
  // residue start-1 already belongs to the context.
  std::array<SegmentAtom, 2> anchor_segment_atoms() const;

  const SegmentSpec& segment() const { return spec_; }
  const PotentialTable& potential() const { return pot_; }
  const DihedralSet& dihedrals() const { return dih_; }
  const BackboneGeometry& geometry() const { return geom_; }
  Vec3 closure_target() const { return target_; }
  Vec3 anchor_c_prev() const { return anchor_c_prev_; }
  Vec3 anchor_n() const { return anchor_n_; }
  Vec3 anchor_ca() const { return anchor_ca_; }
  const std::string& step_aa(int t) const { return step_aa_[(size_t)t]; }

 private:
  struct Frame {
    Vec3 c_prev, n, ca;
  };

  // Replays placement through `steps` steps; appends atoms when `out` set.
  Frame replay(std::span<const double> path, int steps,
               std::vector<SegmentAtom>* out) const;
  // Score of one pair; folds clash detection into `clash`.
  double pair_score(const SegmentAtom& a, const SegmentAtom& b,
                    bool* clash) const;
  // New-quadruple pairwise sum against earlier atoms + within the quadruple.
  double step_pair_sum(const SegmentAtom* quad,
                       std::span<const SegmentAtom> earlier,
                       bool* clash) const;
  double context_pair_sum(const SegmentAtom& probe, bool* clash) const;
  bool closure_ok(const SegmentAtom* quad, int t) const;
  double h_theta_of(std::span<const double> state, int t) const;

  SegmentSpec spec_;
  int T_ = 0;
  PotentialTable pot_;
  DihedralSet dih_;
  ClosureTable clo_;
  BackboneGeometry geom_;
  Vec3 anchor_c_prev_, anchor_n_, anchor_ca_, target_;
  std::vector<std::string> step_aa_;               // residue start+t
  std::vector<const std::vector<double>*> step_cum_;  // sampling cumsums
  std::vector<const DihedralTable*> step_tbl_;
  std::map<std::string, std::vector<double>> cum_by_aa_;
  int8_t type_n_ = 0, type_ca_ = 0, type_c_ = 0, type_o_ = 0;

  // Context atoms plus a uniform grid over them (cell = table cutoff), so a
  // 3x3x3 neighborhood covers every in-range pair. Candidate indices are
  // sorted before summation; the result is byte-identical to the ascending
  // all-pairs order.
  std::vector<SegmentAtom> context_;
  Vec3 grid_origin_;
  int gx_ = 1, gy_ = 1, gz_ = 1;
  double cell_ = 8.0;
  std::vector<std::vector<int32_t>> grid_;

  long cell_of(const Vec3& p) const;
};

}  // namespace udsmc
