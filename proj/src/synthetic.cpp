#include <cmath>

#include "udsmc/errors.hpp"
#include "udsmc/rng.hpp"
#include "udsmc/tables.hpp"

namespace udsmc {
namespace {

constexpr double kDeg2Rad = 3.14159265358979323846 / 180.0;

// Planar CA->CA span across one peptide unit at the given omega extreme:
// trans (180) is the maximum over omega, cis (0) the minimum.
double planar_ca_ca(const BackboneGeometry& g, bool trans) {
  double a1 = (180.0 - g.ang_ca_c_n) * kDeg2Rad;
  double turn = (180.0 - g.ang_c_n_ca) * kDeg2Rad;
  double a2 = trans ? a1 - turn : a1 + turn;
  double px = g.ca_c + g.c_n * std::cos(a1) + g.n_ca * std::cos(a2);
  double py = g.c_n * std::sin(a1) + g.n_ca * std::sin(a2);
  return std::sqrt(px * px + py * py);
}

// Canonical (phi, psi) basin centers the dihedral modes jitter around.
constexpr double kBasins[3][2] = {
    {-63.0, -43.0}, {-120.0, 135.0}, {55.0, 45.0}};

}  // namespace

SyntheticTables generate_synthetic_tables(const SyntheticSpec& spec,
                                          uint64_t seed) {
  require(!spec.atom_types.empty(), errc::invalid_argument,
          "synthetic: empty atom-type vocabulary");
  require(spec.bin_width > 0.0, errc::invalid_argument,
          "synthetic: bin_width must be positive");
  require(spec.max_distance > spec.bin_width, errc::invalid_argument,
          "synthetic: max_distance must exceed bin_width");
  require(spec.clash_distance > 0.0 &&
              spec.clash_distance < spec.max_distance,
          errc::invalid_argument,
          "synthetic: clash_distance must lie in (0, max_distance)");
  require(spec.sentinel != 0.0, errc::invalid_argument,
          "synthetic: sentinel must be nonzero");
  require(!spec.amino_acids.empty(), errc::invalid_argument,
          "synthetic: empty amino-acid list");
  require(spec.modes >= 1 && spec.modes <= 8, errc::invalid_argument,
          "synthetic: modes must be in [1, 8]");
  require(spec.mode_sd_deg > 0.0, errc::invalid_argument,
          "synthetic: mode_sd_deg must be positive");
  require(spec.omega_sd > 0.0, errc::invalid_argument,
          "synthetic: omega_sd must be positive");
  require(spec.max_steps >= 1, errc::invalid_argument,
          "synthetic: max_steps must be at least 1");
  require(spec.span_margin >= 0.0, errc::invalid_argument,
          "synthetic: span_margin must be nonnegative");

  SyntheticTables out;

  // Pairwise potential: sentinel below the clash cutoff, one smooth
  // attractive well per type pair with jittered center/width/depth.
  PotentialTable& pot = out.pot;
  pot.type_names = spec.atom_types;
  pot.bin_width = spec.bin_width;
  pot.max_distance = spec.max_distance;
  pot.sentinel = spec.sentinel;
  pot.n_bins = (long)std::ceil(spec.max_distance / spec.bin_width - 1e-9);
  size_t T = pot.type_names.size();
  pot.score.assign(T * T * (size_t)pot.n_bins, 0.0);
  long clash_bins =
      (long)std::floor(spec.clash_distance / spec.bin_width + 1e-9);
  if (clash_bins > pot.n_bins) clash_bins = pot.n_bins;
  for (size_t i = 0; i < T; ++i) {
    for (size_t j = i; j < T; ++j) {
      StreamRng rng(seed, rng_role::table, i, j);
      double r0 = 3.5 + 2.0 * rng.uniform();
      double wsd = 0.6 + 0.4 * rng.uniform();
      double depth = spec.well_depth * (0.5 + rng.uniform());
      for (long b = 0; b < pot.n_bins; ++b) {
        double s;
        if (b < clash_bins) {
          s = spec.sentinel;
        } else {
          double rmid = ((double)b + 0.5) * spec.bin_width;
          double z = (rmid - r0) / wsd;
          s = -depth * std::exp(-0.5 * z * z);
          if (std::fabs(s) < 1e-4) s = 0.0;  // keep saved files compact
        }
        pot.score[(i * T + j) * (size_t)pot.n_bins + (size_t)b] = s;
        pot.score[(j * T + i) * (size_t)pot.n_bins + (size_t)b] = s;
      }
    }
  }

  // Dihedral densities: per amino acid, `modes` truncated Gaussian bumps
  // around jittered canonical basins; bins beyond 3.5 sd of every mode are
  // exactly zero; the matrix is normalized to unit mass.
  DihedralSet& dih = out.dih;
  dih.omega_mean = spec.omega_mean;
  dih.omega_sd = spec.omega_sd;
  double cutoff2 = 3.5 * 3.5 * spec.mode_sd_deg * spec.mode_sd_deg;
  for (size_t a = 0; a < spec.amino_acids.size(); ++a) {
    StreamRng rng(seed, rng_role::table, 1000000 + a, 0);
    std::vector<double> cphi(spec.modes), cpsi(spec.modes), wm(spec.modes);
    for (int m = 0; m < spec.modes; ++m) {
      cphi[m] = kBasins[m % 3][0] + 16.0 * (rng.uniform() - 0.5);
      cpsi[m] = kBasins[m % 3][1] + 16.0 * (rng.uniform() - 0.5);
      wm[m] = 0.5 + rng.uniform();
    }
    DihedralTable tbl;
    double total = 0.0;
    for (int i = 0; i < kDihedralBins; ++i) {
      double phi_c = -180.0 + ((double)i + 0.5) * kDihedralBinDeg;
      for (int j = 0; j < kDihedralBins; ++j) {
        double psi_c = -180.0 + ((double)j + 0.5) * kDihedralBinDeg;
        double mass = 0.0;
        for (int m = 0; m < spec.modes; ++m) {
          double dphi = wrap_degrees(phi_c - cphi[m]);
          double dpsi = wrap_degrees(psi_c - cpsi[m]);
          double d2 = dphi * dphi + dpsi * dpsi;
          if (d2 <= cutoff2)
            mass += wm[m] *
                    std::exp(-0.5 * d2 /
                             (spec.mode_sd_deg * spec.mode_sd_deg));
        }
        tbl.p[(size_t)i * kDihedralBins + (size_t)j] = mass;
        total += mass;
      }
    }
    require(total > 0.0, errc::internal, "synthetic: zero dihedral mass");
    for (double& v : tbl.p) v /= total;
    dih.by_aa.emplace(spec.amino_acids[a], tbl);
  }

  // Closure windows: row k bounds the distance from the freshly placed atoms
  // to the fixed anchor CA that sits k+1 peptide spans further down the
  // chain. Max span per unit is the planar trans CA->CA distance; the only
  // nonzero minimum is the single-span cis extreme at k = 0. The carbonyl
  // channel adds/removes the fixed C->CA offset inside one residue.
  ClosureTable& clo = out.clo;
  double span_max = planar_ca_ca(spec.geometry, true) + spec.span_margin;
  double span_min = planar_ca_ca(spec.geometry, false) - spec.span_margin;
  const BackboneGeometry& g = spec.geometry;
  double off = std::sqrt(g.c_n * g.c_n + g.n_ca * g.n_ca -
                         2.0 * g.c_n * g.n_ca *
                             std::cos(g.ang_c_n_ca * kDeg2Rad));
  for (int k = 0; k <= spec.max_steps; ++k) {
    ClosureRow row;
    row.ca_max = (double)(k + 1) * span_max;
    row.ca_min = k == 0 ? std::max(0.0, span_min) : 0.0;
    row.c_max = row.ca_max + off;
    row.c_min = std::max(0.0, row.ca_min - off);
    clo.rows.push_back(row);
  }
  return out;
}

ProteinStructure generate_synthetic_host(const HostSpec& spec,
                                         const BackboneGeometry& g) {
  require(spec.residues >= 1, errc::invalid_argument,
          "host: residues must be at least 1");
  require(!spec.amino_acids.empty(), errc::invalid_argument,
          "host: empty amino-acid list");

  // Seed frame: a virtual previous carbonyl C0 so residue 1 has a full
  // (C_prev, N, CA) frame; everything after comes from place_step.
  Vec3 c_prev{-g.c_n, 0.0, 0.0};
  Vec3 n{0.0, 0.0, 0.0};
  double a = (180.0 - g.ang_c_n_ca) * kDeg2Rad;
  Vec3 ca{g.n_ca * std::cos(a), g.n_ca * std::sin(a), 0.0};

  ProteinStructure s;
  int serial = 1;
  auto push = [&](const char* name, const char* element, int res,
                  const std::string& res_name, const Vec3& pos) {
    Atom atom;
    atom.serial = serial++;
    atom.name = name;
    atom.res_name = res_name;
    atom.chain = spec.chain;
    atom.res_seq = res;
    atom.pos = pos;
    atom.element = element;
    s.atoms.push_back(std::move(atom));
  };

  for (int r = 1; r <= spec.residues; ++r) {
    const std::string& aa =
        spec.amino_acids[(size_t)(r - 1) % spec.amino_acids.size()];
    StepAtoms step = place_step(c_prev, n, ca, spec.conformation, g);
    push("N", "N", r, aa, n);
    push("CA", "C", r, aa, ca);
    push("C", "C", r, aa, step.c);
    push("O", "O", r, aa, step.o);
    c_prev = step.c;
    n = step.n_next;
    ca = step.ca_next;
  }
  return s;
}

}  // namespace udsmc
