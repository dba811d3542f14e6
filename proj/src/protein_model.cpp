#include "udsmc/protein_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "udsmc/errors.hpp"

namespace udsmc {
namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // log(sqrt(2*pi))

// Same residue, or the peptide bond C_i - N_{i+1}. Only meaningful for
// placed-vs-placed pairs: context atoms can never form an excluded pair with
// a placed atom (context omits the segment's residue range on its chain, and
// cross-chain residue numbers name different residues).
bool excluded_pair(const SegmentAtom& a, const SegmentAtom& b) {
  if (a.chain != b.chain) return false;
  if (a.residue == b.residue) return true;
  if (a.role == bb_role::c && b.role == bb_role::n &&
      b.residue == a.residue + 1)
    return true;
  if (b.role == bb_role::c && a.role == bb_role::n &&
      a.residue == b.residue + 1)
    return true;
  return false;
}

int8_t role_of(const std::string& name) {
  if (name == "N") return bb_role::n;
  if (name == "CA") return bb_role::ca;
  if (name == "C") return bb_role::c;
  if (name == "O") return bb_role::o;
  return bb_role::other;
}

}  // namespace

SegmentSampler::SegmentSampler(const ProteinStructure& host,
                               const SegmentSpec& spec, PotentialTable pot,
                               DihedralSet dih, ClosureTable clo,
                               BackboneGeometry geom)
    : spec_(spec),
      pot_(std::move(pot)),
      dih_(std::move(dih)),
      clo_(std::move(clo)),
      geom_(geom) {
  require(spec.start <= spec.end, errc::invalid_argument,
          "segment: start must not exceed end");
  T_ = spec.end - spec.start;

  auto len_ok = [](double v) { return v > 0.8 && v < 2.0; };
  auto ang_ok = [](double v) { return v > 90.0 && v < 180.0; };
  require(len_ok(geom_.n_ca) && len_ok(geom_.ca_c) && len_ok(geom_.c_n) &&
              len_ok(geom_.c_o),
          errc::invalid_argument, "segment: bond length outside (0.8, 2.0)");
  require(ang_ok(geom_.ang_n_ca_c) && ang_ok(geom_.ang_ca_c_n) &&
              ang_ok(geom_.ang_c_n_ca) && ang_ok(geom_.ang_ca_c_o),
          errc::invalid_argument, "segment: bond angle outside (90, 180)");
  require((long)clo_.rows.size() > (long)T_, errc::range_table_miss,
          "segment: closure table must cover steps_remaining 0.." +
              std::to_string(T_));

  ProteinStructure host_f = spec.include_hydrogens
                                ? host
                                : filter_out_elements(host, {"H"});

  auto need_atom = [&](int res, const char* name) -> Vec3 {
    const Atom* a = host_f.find(spec.chain, res, name);
    if (!a)
      fail(errc::missing_atom,
           std::string("segment: host lacks atom ") + name + " of residue " +
               std::to_string(res));
    return a->pos;
  };
  anchor_c_prev_ = need_atom(spec.start - 1, "C");
  anchor_n_ = need_atom(spec.start, "N");
  anchor_ca_ = need_atom(spec.start, "CA");
  target_ = need_atom(spec.end + 2, "CA");

  if (!spec.fallback_type.empty())
    require(pot_.type_index(spec.fallback_type) >= 0, errc::invalid_argument,
            "segment: fallback type '" + spec.fallback_type +
                "' is not in the potential vocabulary");
  auto type_for = [&](const std::string& name) -> int16_t {
    int idx = pot_.type_index(name);
    if (idx < 0 && !spec_.fallback_type.empty())
      idx = pot_.type_index(spec_.fallback_type);
    if (idx < 0)
      fail(errc::missing_atom_type,
           "segment: atom name '" + name + "' has no potential type");
    return (int16_t)idx;
  };
  type_n_ = (int8_t)type_for("N");
  type_ca_ = (int8_t)type_for("CA");
  type_c_ = (int8_t)type_for("C");
  type_o_ = (int8_t)type_for("O");

  // Per-step amino-acid tables and sampling cumsums (top edge closed).
  step_aa_.resize((size_t)T_ + 1);
  step_cum_.resize((size_t)T_ + 1);
  step_tbl_.resize((size_t)T_ + 1);
  for (int t = 0; t <= T_; ++t) {
    std::string aa = host_f.residue_name(spec.chain, spec.start + t);
    if (aa.empty())
      fail(errc::unknown_amino_acid,
           "segment: residue " + std::to_string(spec.start + t) +
               " absent from host");
    const DihedralTable& tbl = dih_.require_aa(aa);
    auto [it, fresh] = cum_by_aa_.try_emplace(aa);
    if (fresh) {
      auto& cum = it->second;
      cum.resize(tbl.p.size());
      double run = 0.0;
      for (size_t k = 0; k < tbl.p.size(); ++k) {
        run += tbl.p[k];
        cum[k] = run;
      }
      cum.back() = 1.0;
    }
    step_aa_[(size_t)t] = aa;
    step_cum_[(size_t)t] = &it->second;
    step_tbl_[(size_t)t] = &tbl;
  }

  // Context: everything the segment does not re-place. Residues start..end+1
  // on the segment chain are dropped entirely (their backbone is resampled;
  // any side-chain positions there would be stale).
  for (const Atom& a : host_f.atoms) {
    if (a.chain == spec.chain && a.res_seq >= spec.start &&
        a.res_seq <= spec.end + 1)
      continue;
    SegmentAtom sa;
    sa.pos = a.pos;
    sa.residue = a.res_seq;
    sa.role = role_of(a.name);
    sa.type = type_for(a.name);
    sa.chain = a.chain;
    context_.push_back(sa);
  }

  cell_ = pot_.max_distance;
  Vec3 lo = context_.empty() ? Vec3{} : context_[0].pos;
  Vec3 hi = lo;
  for (const auto& a : context_) {
    lo.x = std::min(lo.x, a.pos.x);
    lo.y = std::min(lo.y, a.pos.y);
    lo.z = std::min(lo.z, a.pos.z);
    hi.x = std::max(hi.x, a.pos.x);
    hi.y = std::max(hi.y, a.pos.y);
    hi.z = std::max(hi.z, a.pos.z);
  }
  grid_origin_ = lo;
  gx_ = 1 + (int)std::floor((hi.x - lo.x) / cell_);
  gy_ = 1 + (int)std::floor((hi.y - lo.y) / cell_);
  gz_ = 1 + (int)std::floor((hi.z - lo.z) / cell_);
  grid_.assign((size_t)gx_ * gy_ * gz_, {});
  for (size_t i = 0; i < context_.size(); ++i)
    grid_[(size_t)cell_of(context_[i].pos)].push_back((int32_t)i);
}

long SegmentSampler::cell_of(const Vec3& p) const {
  long cx = (long)std::floor((p.x - grid_origin_.x) / cell_);
  long cy = (long)std::floor((p.y - grid_origin_.y) / cell_);
  long cz = (long)std::floor((p.z - grid_origin_.z) / cell_);
  cx = std::clamp(cx, 0L, (long)gx_ - 1);
  cy = std::clamp(cy, 0L, (long)gy_ - 1);
  cz = std::clamp(cz, 0L, (long)gz_ - 1);
  return (cx * gy_ + cy) * gz_ + cz;
}

void SegmentSampler::propose(std::span<const double> prefix, int t,
                             StreamRng& rng,
                             std::span<double> out_state) const {
  (void)prefix;
  const std::vector<double>& cum = *step_cum_[(size_t)t];
  double u = rng.uniform();
  size_t idx =
      (size_t)(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
  int bi = (int)(idx / kDihedralBins);
  int bj = (int)(idx % kDihedralBins);
  double phi =
      -180.0 + ((double)bi + rng.uniform()) * kDihedralBinDeg;
  double psi =
      -180.0 + ((double)bj + rng.uniform()) * kDihedralBinDeg;
  out_state[0] = wrap_degrees(phi);
  out_state[1] = wrap_degrees(psi);
  out_state[2] = wrap_degrees(rng.normal(dih_.omega_mean, dih_.omega_sd));
}

SegmentSampler::Frame SegmentSampler::replay(
    std::span<const double> path, int steps,
    std::vector<SegmentAtom>* out) const {
  Frame f{anchor_c_prev_, anchor_n_, anchor_ca_};
  for (int s = 0; s < steps; ++s) {
    DihedralTriple x{path[(size_t)s * 3], path[(size_t)s * 3 + 1],
                     path[(size_t)s * 3 + 2]};
    StepAtoms atoms = place_step(f.c_prev, f.n, f.ca, x, geom_);
    if (out) {
      int res = spec_.start + s;
      char ch = spec_.chain;
      out->push_back({atoms.c, res, bb_role::c, type_c_, ch});
      out->push_back({atoms.o, res, bb_role::o, type_o_, ch});
      out->push_back({atoms.n_next, res + 1, bb_role::n, type_n_, ch});
      out->push_back({atoms.ca_next, res + 1, bb_role::ca, type_ca_, ch});
    }
    f = {atoms.c, atoms.n_next, atoms.ca_next};
  }
  return f;
}

double SegmentSampler::pair_score(const SegmentAtom& a, const SegmentAtom& b,
                                  bool* clash) const {
  double d = distance(a.pos, b.pos);
  if (d >= pot_.max_distance) return 0.0;
  long bin = pot_.bin_of(d);
  if (bin >= pot_.n_bins) return 0.0;
  double s = pot_.at(a.type, b.type, bin);
  if (pot_.is_clash(s)) *clash = true;
  return s;
}

double SegmentSampler::context_pair_sum(const SegmentAtom& probe,
                                        bool* clash) const {
  long cx = (long)std::floor((probe.pos.x - grid_origin_.x) / cell_);
  long cy = (long)std::floor((probe.pos.y - grid_origin_.y) / cell_);
  long cz = (long)std::floor((probe.pos.z - grid_origin_.z) / cell_);
  // Gather 3x3x3 candidates, then sum in ascending index order so the grid
  // path reproduces the naive all-pairs accumulation bit for bit. No
  // exclusion checks: context never pairs excludably with a placed atom.
  std::vector<int32_t> cand;
  for (long dx = -1; dx <= 1; ++dx) {
    long x = cx + dx;
    if (x < 0 || x >= gx_) continue;
    for (long dy = -1; dy <= 1; ++dy) {
      long y = cy + dy;
      if (y < 0 || y >= gy_) continue;
      for (long dz = -1; dz <= 1; ++dz) {
        long z = cz + dz;
        if (z < 0 || z >= gz_) continue;
        const auto& cell = grid_[(size_t)((x * gy_ + y) * gz_ + z)];
        cand.insert(cand.end(), cell.begin(), cell.end());
      }
    }
  }
  std::sort(cand.begin(), cand.end());
  double sum = 0.0;
  for (int32_t i : cand) sum += pair_score(probe, context_[(size_t)i], clash);
  return sum;
}

double SegmentSampler::step_pair_sum(const SegmentAtom* quad,
                                     std::span<const SegmentAtom> earlier,
                                     bool* clash) const {
  double sum = 0.0;
  for (int q = 0; q < 4; ++q) {
    sum += context_pair_sum(quad[q], clash);
    for (const SegmentAtom& e : earlier)
      if (!excluded_pair(quad[q], e)) sum += pair_score(quad[q], e, clash);
    for (int p = 0; p < q; ++p)
      if (!excluded_pair(quad[q], quad[p]))
        sum += pair_score(quad[q], quad[p], clash);
    if (*clash) return std::numeric_limits<double>::infinity();
  }
  return sum;
}

bool SegmentSampler::closure_ok(const SegmentAtom* quad, int t) const {
  const ClosureRow& row = clo_.rows[(size_t)(T_ - t)];
  double dc = distance(quad[0].pos, target_);   // placed C_t
  double dca = distance(quad[3].pos, target_);  // placed CA_{t+1}
  return dc >= row.c_min && dc <= row.c_max && dca >= row.ca_min &&
         dca <= row.ca_max;
}

double SegmentSampler::h_theta_of(std::span<const double> state,
                                  int t) const {
  const DihedralTable& tbl = *step_tbl_[(size_t)t];
  auto bin = [](double deg) {
    int b = (int)std::floor((deg + 180.0) / kDihedralBinDeg);
    return b == kDihedralBins ? kDihedralBins - 1 : b;
  };
  double mass = tbl.mass(bin(state[0]), bin(state[1]));
  if (mass <= 0.0) return std::numeric_limits<double>::infinity();
  double density = mass / (kDihedralBinDeg * kDihedralBinDeg);
  double delta = wrap_degrees(state[2] - dih_.omega_mean) / dih_.omega_sd;
  double log_omega =
      -0.5 * delta * delta - std::log(dih_.omega_sd) - kHalfLog2Pi;
  return -std::log(density) - log_omega;
}

EnergyBreakdown SegmentSampler::step_energy(std::span<const double> prefix,
                                            int t,
                                            std::span<const double> state) const {
  require(t >= 0 && t <= T_, errc::invalid_argument, "segment: bad step");
  require(prefix.size() >= (size_t)t * 3 && state.size() >= 3,
          errc::invalid_argument, "segment: bad prefix/state size");
  std::vector<SegmentAtom> earlier;
  earlier.reserve((size_t)t * 4);
  Frame f = replay(prefix, t, &earlier);
  DihedralTriple x{state[0], state[1], state[2]};
  StepAtoms atoms = place_step(f.c_prev, f.n, f.ca, x, geom_);
  int res = spec_.start + t;
  char ch = spec_.chain;
  SegmentAtom quad[4] = {{atoms.c, res, bb_role::c, type_c_, ch},
                         {atoms.o, res, bb_role::o, type_o_, ch},
                         {atoms.n_next, res + 1, bb_role::n, type_n_, ch},
                         {atoms.ca_next, res + 1, bb_role::ca, type_ca_, ch}};

  EnergyBreakdown out;
  bool clash = false;
  out.h_a = step_pair_sum(quad, earlier, &clash);
  if (clash) out.h_a = std::numeric_limits<double>::infinity();
  out.h_theta = h_theta_of(state, t);
  out.closure_ok = closure_ok(quad, t);
  out.total = (!out.closure_ok || clash)
                  ? std::numeric_limits<double>::infinity()
                  : spec_.pair_weight * out.h_a + out.h_theta;
  return out;
}

double SegmentSampler::log_increment(std::span<const double> prefix, int t,
                                     std::span<const double> state) const {
  std::vector<SegmentAtom> earlier;
  earlier.reserve((size_t)t * 4);
  Frame f = replay(prefix, t, &earlier);
  DihedralTriple x{state[0], state[1], state[2]};
  StepAtoms atoms = place_step(f.c_prev, f.n, f.ca, x, geom_);
  int res = spec_.start + t;
  char ch = spec_.chain;
  SegmentAtom quad[4] = {{atoms.c, res, bb_role::c, type_c_, ch},
                         {atoms.o, res, bb_role::o, type_o_, ch},
                         {atoms.n_next, res + 1, bb_role::n, type_n_, ch},
                         {atoms.ca_next, res + 1, bb_role::ca, type_ca_, ch}};
  if (!closure_ok(quad, t)) return neg_inf;
  bool clash = false;
  double h_a = step_pair_sum(quad, earlier, &clash);
  if (clash) return neg_inf;
  // The dihedral term cancels against the proposal; only the weighted
  // pairwise term survives.
  return -spec_.pair_weight * h_a;
}

std::vector<SegmentAtom> SegmentSampler::place_path(
    std::span<const double> path) const {
  require(path.size() == (size_t)(T_ + 1) * 3, errc::invalid_argument,
          "segment: path length mismatch");
  std::vector<SegmentAtom> atoms;
  atoms.reserve((size_t)(T_ + 1) * 4);
  replay(path, T_ + 1, &atoms);
  return atoms;
}

std::vector<int32_t> SegmentSampler::nearby_context(const Vec3& pos,
                                                    double radius) const {
  std::vector<int32_t> out;
  if (radius > cell_) {
    for (size_t i = 0; i < context_.size(); ++i)
      if (distance(pos, context_[i].pos) <= radius) out.push_back((int32_t)i);
    return out;
  }
  long cx = (long)std::floor((pos.x - grid_origin_.x) / cell_);
  long cy = (long)std::floor((pos.y - grid_origin_.y) / cell_);
  long cz = (long)std::floor((pos.z - grid_origin_.z) / cell_);
  for (long dx = -1; dx <= 1; ++dx) {
    long x = cx + dx;
    if (x < 0 || x >= gx_) continue;
    for (long dy = -1; dy <= 1; ++dy) {
      long y = cy + dy;
      if (y < 0 || y >= gy_) continue;
      for (long dz = -1; dz <= 1; ++dz) {
        long z = cz + dz;
        if (z < 0 || z >= gz_) continue;
        for (int32_t i : grid_[(size_t)((x * gy_ + y) * gz_ + z)])
          if (distance(pos, context_[(size_t)i].pos) <= radius)
            out.push_back(i);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::array<SegmentAtom, 2> SegmentSampler::anchor_segment_atoms() const {
  SegmentAtom n{anchor_n_, spec_.start, bb_role::n, type_n_, spec_.chain};
  SegmentAtom ca{anchor_ca_, spec_.start, bb_role::ca, type_ca_, spec_.chain};
  return {n, ca};
}

double SegmentSampler::whole_segment_h_a(std::span<const double> path) const {
  std::vector<SegmentAtom> atoms = place_path(path);
  bool clash = false;
  double sum = 0.0;
  for (size_t i = 0; i < atoms.size(); ++i) {
    sum += context_pair_sum(atoms[i], &clash);
    for (size_t j = 0; j < i; ++j)
      if (!excluded_pair(atoms[i], atoms[j]))
        sum += pair_score(atoms[i], atoms[j], &clash);
    if (clash) return std::numeric_limits<double>::infinity();
  }
  return sum;
}

}  // namespace udsmc
