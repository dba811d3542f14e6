#include "udsmc/statistics.hpp"

#include <cmath>

#include "udsmc/errors.hpp"

namespace udsmc {
namespace {

class TerminalValue : public Statistic {
 public:
  TerminalValue(int state_dim, int horizon, int coord)
      : off_((size_t)horizon * (size_t)state_dim + (size_t)coord) {}
  int dim() const override { return 1; }
  void eval(std::span<const double> path, std::span<double> out) const override {
    out[0] = path[off_];
  }

 private:
  size_t off_;
};

class PathSum : public Statistic {
 public:
  PathSum(int state_dim, int horizon, int coord)
      : state_dim_((size_t)state_dim),
        steps_((size_t)horizon + 1),
        coord_((size_t)coord) {}
  int dim() const override { return 1; }
  void eval(std::span<const double> path, std::span<double> out) const override {
    double s = 0.0;
    for (size_t t = 0; t < steps_; ++t) s += path[t * state_dim_ + coord_];
    out[0] = s;
  }

 private:
  size_t state_dim_, steps_, coord_;
};

class TerminalEquals : public Statistic {
 public:
  TerminalEquals(int state_dim, int horizon, double value, int coord)
      : off_((size_t)horizon * (size_t)state_dim + (size_t)coord),
        value_(value) {}
  int dim() const override { return 1; }
  void eval(std::span<const double> path, std::span<double> out) const override {
    out[0] = path[off_] == value_ ? 1.0 : 0.0;
  }

 private:
  size_t off_;
  double value_;
};

// Same-residue or peptide-bonded (C_i, N_{i+1}) on the same chain; the
// exclusion rule contacts share with the energy term.
bool contact_excluded(const SegmentAtom& center, const SegmentAtom& other) {
  if (center.chain != other.chain) return false;
  if (center.residue == other.residue) return true;
  if (center.role == bb_role::c && other.role == bb_role::n &&
      other.residue == center.residue + 1)
    return true;
  if (other.role == bb_role::c && center.role == bb_role::n &&
      center.residue == other.residue + 1)
    return true;
  return false;
}

// CA atom of `residue`: the anchor CA at start, a placed CA inside the
// segment, or a host CA elsewhere.
SegmentAtom resolve_ca(const SegmentSampler& s,
                       const std::vector<SegmentAtom>& placed, int residue) {
  const SegmentSpec& seg = s.segment();
  if (residue == seg.start) return s.anchor_segment_atoms()[1];
  if (residue > seg.start && residue <= seg.end + 1) {
    size_t idx = (size_t)(residue - seg.start - 1) * 4 + 3;
    return placed[idx];
  }
  for (const SegmentAtom& a : s.context_atoms())
    if (a.chain == seg.chain && a.residue == residue && a.role == bb_role::ca)
      return a;
  fail(errc::missing_atom,
       "statistics: no CA atom for residue " + std::to_string(residue));
}

long count_one(const SegmentSampler& s,
               const std::vector<SegmentAtom>& placed, int residue,
               double radius, bool include_segment) {
  require(radius > 0.0, errc::invalid_argument,
          "statistics: contact radius must be positive");
  SegmentAtom center = resolve_ca(s, placed, residue);
  long count = 0;
  const auto& ctx = s.context_atoms();
  for (int32_t i : s.nearby_context(center.pos, radius))
    if (!contact_excluded(center, ctx[(size_t)i])) ++count;
  if (include_segment) {
    for (const SegmentAtom& a : s.anchor_segment_atoms())
      if (distance(center.pos, a.pos) <= radius &&
          !contact_excluded(center, a))
        ++count;
    for (const SegmentAtom& a : placed)
      if (distance(center.pos, a.pos) <= radius &&
          !contact_excluded(center, a))
        ++count;
  }
  return count;
}

class CaDistance : public Statistic {
 public:
  CaDistance(std::shared_ptr<const SegmentSampler> s, int res_i, int res_j)
      : s_(std::move(s)), i_(res_i), j_(res_j) {}
  int dim() const override { return 1; }
  void eval(std::span<const double> path, std::span<double> out) const override {
    out[0] = ca_distance(*s_, path, i_, j_);
  }

 private:
  std::shared_ptr<const SegmentSampler> s_;
  int i_, j_;
};

class ContactCounts : public Statistic {
 public:
  ContactCounts(std::shared_ptr<const SegmentSampler> s, ContactSpec spec)
      : s_(std::move(s)), spec_(std::move(spec)) {
    require(!spec_.residues.empty(), errc::invalid_argument,
            "statistics: contact spec lists no residues");
    require(spec_.radius > 0.0, errc::invalid_argument,
            "statistics: contact radius must be positive");
  }
  int dim() const override { return (int)spec_.residues.size(); }
  void eval(std::span<const double> path, std::span<double> out) const override {
    std::vector<SegmentAtom> placed = s_->place_path(path);
    for (size_t k = 0; k < spec_.residues.size(); ++k)
      out[k] = (double)count_one(*s_, placed, spec_.residues[k], spec_.radius,
                                 spec_.include_segment);
  }

 private:
  std::shared_ptr<const SegmentSampler> s_;
  ContactSpec spec_;
};

}  // namespace

std::unique_ptr<Statistic> make_terminal_value(int state_dim, int horizon,
                                               int coord) {
  return std::make_unique<TerminalValue>(state_dim, horizon, coord);
}
std::unique_ptr<Statistic> make_path_sum(int state_dim, int horizon,
                                         int coord) {
  return std::make_unique<PathSum>(state_dim, horizon, coord);
}
std::unique_ptr<Statistic> make_terminal_equals(int state_dim, int horizon,
                                                double value, int coord) {
  return std::make_unique<TerminalEquals>(state_dim, horizon, value, coord);
}

double ca_distance(const SegmentSampler& s, std::span<const double> path,
                   int res_i, int res_j) {
  std::vector<SegmentAtom> placed = s.place_path(path);
  SegmentAtom a = resolve_ca(s, placed, res_i);
  SegmentAtom b = resolve_ca(s, placed, res_j);
  return distance(a.pos, b.pos);
}

long contact_count(const SegmentSampler& s, std::span<const double> path,
                   int residue, double radius, bool include_segment) {
  std::vector<SegmentAtom> placed = s.place_path(path);
  return count_one(s, placed, residue, radius, include_segment);
}

std::unique_ptr<Statistic> make_ca_distance(
    std::shared_ptr<const SegmentSampler> s, int res_i, int res_j) {
  return std::make_unique<CaDistance>(std::move(s), res_i, res_j);
}

std::unique_ptr<Statistic> make_contact_counts(
    std::shared_ptr<const SegmentSampler> s, ContactSpec spec) {
  return std::make_unique<ContactCounts>(std::move(s), std::move(spec));
}

EstimateReport boltzmann_average(const ParticleEnsemble& ens,
                                 const Statistic& f) {
  return estimate(ens, f);
}

std::vector<EstimateReport> boltzmann_averages(
    const ParticleEnsemble& ens, std::span<const Statistic* const> stats) {
  std::vector<EstimateReport> out;
  out.reserve(stats.size());
  for (const Statistic* f : stats) out.push_back(estimate(ens, *f));
  return out;
}

}  // namespace udsmc
