#pragma once

#include <memory>
#include <vector>

#include "udsmc/model.hpp"
#include "udsmc/protein_model.hpp"

namespace udsmc {

// --- generic path statistics (raw state coordinates) ------------------------

// Value of coordinate `coord` of the final state.
std::unique_ptr<Statistic> make_terminal_value(int state_dim, int horizon,
                                               int coord = 0);
// Sum of coordinate `coord` over all steps.
std::unique_ptr<Statistic> make_path_sum(int state_dim, int horizon,
                                         int coord = 0);
// 1 when the final state's coordinate equals `value` bitwise, else 0 (meant
// for integer-valued states).
std::unique_ptr<Statistic> make_terminal_equals(int state_dim, int horizon,
                                                double value, int coord = 0);

// --- protein conformation statistics ----------------------------------------

// Contact counting around the CA atoms of `residues`: atoms within `radius`
// (inclusive), minus same-residue and peptide-bonded partners. The counted
// set is the host context plus, when include_segment, the fixed anchor N/CA
// and every placed segment atom.
struct ContactSpec {
  std::vector<int> residues;
  double radius = 7.0;
  bool include_segment = true;
};

// CA-CA Euclidean distance between two residues (anchor, placed, or host).
double ca_distance(const SegmentSampler& s, std::span<const double> path,
                   int res_i, int res_j);
// Contact count for one residue per ContactSpec semantics.
long contact_count(const SegmentSampler& s, std::span<const double> path,
                   int residue, double radius, bool include_segment = true);

std::unique_ptr<Statistic> make_ca_distance(
    std::shared_ptr<const SegmentSampler> s, int res_i, int res_j);
std::unique_ptr<Statistic> make_contact_counts(
    std::shared_ptr<const SegmentSampler> s, ContactSpec spec);

// --- estimation --------------------------------------------------------------

// The weighted estimator applied per statistic (alias of estimate()).
EstimateReport boltzmann_average(const ParticleEnsemble& ens,
                                 const Statistic& f);
std::vector<EstimateReport> boltzmann_averages(
    const ParticleEnsemble& ens,
    std::span<const Statistic* const> stats);

}  // namespace udsmc
