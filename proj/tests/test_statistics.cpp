// Path statistics and conformation statistics against brute-force oracles:
// contact counting with exclusion rules, CA distances across anchor, placed,
// and host residues, and the weighted-average alias.
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "doctest.h"
#include "udsmc/errors.hpp"
#include "udsmc/pdb.hpp"
#include "udsmc/protein_model.hpp"
#include "udsmc/rng.hpp"
#include "udsmc/statistics.hpp"
#include "udsmc/tables.hpp"

using namespace udsmc;

namespace {

errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return errc::ok;
}

struct Fix {
  SyntheticTables tabs;
  ProteinStructure host;
  std::shared_ptr<SegmentSampler> model;
  std::vector<double> native;
};

const Fix& fix() {
  static Fix f = [] {
    Fix x;
    x.tabs = generate_synthetic_tables(SyntheticSpec{}, 7);
    HostSpec hs;
    x.host = generate_synthetic_host(hs, BackboneGeometry{});
    SegmentSpec sp;
    sp.start = 5;
    sp.end = 9;
    x.model = std::make_shared<SegmentSampler>(x.host, sp, x.tabs.pot,
                                               x.tabs.dih, x.tabs.clo);
    for (int t = 0; t <= 4; ++t) {
      x.native.push_back(hs.conformation.phi);
      x.native.push_back(hs.conformation.psi);
      x.native.push_back(hs.conformation.omega);
    }
    return x;
  }();
  return f;
}

// Same-residue or peptide-bonded (C_i, N_{i+1}) on one chain.
bool excluded(const SegmentAtom& a, const SegmentAtom& b) {
  if (a.chain != b.chain) return false;
  if (a.residue == b.residue) return true;
  if (a.role == bb_role::c && b.role == bb_role::n && b.residue == a.residue + 1)
    return true;
  if (b.role == bb_role::c && a.role == bb_role::n && a.residue == b.residue + 1)
    return true;
  return false;
}

// Independent CA lookup: anchor at start, placed CA inside (start, end+1],
// host CA elsewhere.
SegmentAtom oracle_ca(const SegmentSampler& s,
                      const std::vector<SegmentAtom>& placed, int residue) {
  const SegmentSpec& seg = s.segment();
  if (residue == seg.start) return s.anchor_segment_atoms()[1];
  if (residue > seg.start && residue <= seg.end + 1) {
    for (const SegmentAtom& a : placed)
      if (a.residue == residue && a.role == bb_role::ca) return a;
  }
  for (const SegmentAtom& a : s.context_atoms())
    if (a.chain == seg.chain && a.residue == residue && a.role == bb_role::ca)
      return a;
  fail(errc::missing_atom, "oracle: no CA");
}

// Full-scan contact oracle over context (+ anchors + placed when asked).
long oracle_contacts(const SegmentSampler& s, std::span<const double> path,
                     int residue, double radius, bool include_segment) {
  std::vector<SegmentAtom> placed = s.place_path(path);
  SegmentAtom center = oracle_ca(s, placed, residue);
  long count = 0;
  auto tally = [&](const SegmentAtom& a) {
    if (distance(center.pos, a.pos) <= radius && !excluded(center, a)) ++count;
  };
  for (const SegmentAtom& a : s.context_atoms()) tally(a);
  if (include_segment) {
    for (const SegmentAtom& a : s.anchor_segment_atoms()) tally(a);
    for (const SegmentAtom& a : placed) tally(a);
  }
  return count;
}

}  // namespace

TEST_CASE("generic path statistics read the coordinates they claim") {
  std::vector<double> path = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0};
  auto tv0 = make_terminal_value(3, 2, 0);
  auto tv2 = make_terminal_value(3, 2, 2);
  auto ps0 = make_path_sum(3, 2, 0);
  auto ps1 = make_path_sum(3, 2, 1);
  auto eq = make_terminal_equals(3, 2, 7.0, 0);
  auto ne = make_terminal_equals(3, 2, 7.1, 0);
  CHECK(tv0->dim() == 1);
  double out;
  tv0->eval(path, {&out, 1});
  CHECK(out == 7.0);
  tv2->eval(path, {&out, 1});
  CHECK(out == 9.0);
  ps0->eval(path, {&out, 1});
  CHECK(out == 12.0);
  ps1->eval(path, {&out, 1});
  CHECK(out == 15.0);
  eq->eval(path, {&out, 1});
  CHECK(out == 1.0);
  ne->eval(path, {&out, 1});
  CHECK(out == 0.0);

  // Equality is bitwise, not approximate.
  double almost = 0.1 + 0.2;  // != 0.3 in binary
  std::vector<double> p1 = {0.3};
  std::vector<double> p2 = {almost};
  auto eq3 = make_terminal_equals(1, 0, almost, 0);
  eq3->eval(p1, {&out, 1});
  CHECK(out == 0.0);
  eq3->eval(p2, {&out, 1});
  CHECK(out == 1.0);
}

TEST_CASE("contact counts match a full-scan oracle everywhere") {
  const Fix& f = fix();
  const SegmentSampler& m = *f.model;
  std::vector<std::vector<double>> paths;
  paths.push_back(f.native);
  for (int r = 0; r < 10; ++r) {
    StreamRng rng(6100, 0, 0, (uint64_t)r);
    std::vector<double> p(f.native);
    for (double& v : p) v = wrap_degrees(v + rng.normal(0.0, 12.0));
    paths.push_back(p);
  }
  for (int r = 0; r < 5; ++r) {
    StreamRng rng(6101, 0, 0, (uint64_t)r);
    std::vector<double> p(15, 0.0);
    for (int t = 0; t <= 4; ++t)
      m.propose(std::span<const double>(p.data(), (size_t)t * 3), t, rng,
                std::span<double>(p.data() + (size_t)t * 3, 3));
    paths.push_back(p);
  }

  const int residues[] = {3, 5, 6, 8, 10, 12, 20};
  const double radii[] = {4.0, 7.0, 9.5};
  long nonzero = 0;
  for (const auto& p : paths) {
    for (int res : residues) {
      long prev = -1;
      for (double r : radii) {
        for (bool seg : {true, false}) {
          long got = contact_count(m, p, res, r, seg);
          long want = oracle_contacts(m, p, res, r, seg);
          CHECK(got == want);
          if (got > 0) ++nonzero;
        }
        long with_seg = contact_count(m, p, res, r, true);
        CHECK(with_seg >= contact_count(m, p, res, r, false));
        if (prev >= 0) CHECK(with_seg >= prev);  // monotone in radius
        prev = with_seg;
      }
    }
  }
  REQUIRE(nonzero > 100);

  // Segment atoms only ever add contacts; near the segment they must.
  CHECK(contact_count(m, f.native, 8, 7.0, true) >
        contact_count(m, f.native, 8, 7.0, false));
}

TEST_CASE("contact radius is inclusive at the exact boundary") {
  const Fix& f = fix();
  const SegmentSampler& m = *f.model;
  // Center on a host CA far from the segment; take its nearest context
  // distance as the radius, bitwise.
  SegmentAtom center = oracle_ca(m, m.place_path(f.native), 20);
  double nearest = std::numeric_limits<double>::infinity();
  for (const SegmentAtom& a : m.context_atoms()) {
    if (excluded(center, a)) continue;
    double d = distance(center.pos, a.pos);
    if (d > 0.0 && d < nearest) nearest = d;
  }
  REQUIRE(std::isfinite(nearest));
  long at = contact_count(m, f.native, 20, nearest, false);
  long below = contact_count(m, f.native, 20,
                             std::nextafter(nearest, 0.0), false);
  CHECK(at >= 1);
  CHECK(at > below);
  CHECK(at == oracle_contacts(m, f.native, 20, nearest, false));
}

TEST_CASE("ca distances span anchor, placed, and host residues") {
  const Fix& f = fix();
  const SegmentSampler& m = *f.model;
  std::vector<SegmentAtom> placed = m.place_path(f.native);

  // anchor (5) to host (11)
  const Atom* ca11 = f.host.find('A', 11, "CA");
  REQUIRE(ca11);
  CHECK(ca_distance(m, f.native, 5, 11) ==
        distance(m.anchor_ca(), ca11->pos));
  // placed (6) to placed (10 = end + 1)
  CHECK(ca_distance(m, f.native, 6, 10) ==
        distance(placed[3].pos, placed[19].pos));
  // host to host
  const Atom* ca3 = f.host.find('A', 3, "CA");
  const Atom* ca25 = f.host.find('A', 25, "CA");
  REQUIRE(ca3);
  REQUIRE(ca25);
  CHECK(ca_distance(m, f.native, 3, 25) == distance(ca3->pos, ca25->pos));
  CHECK(ca_distance(m, f.native, 7, 7) == 0.0);
  CHECK(ca_distance(m, f.native, 11, 6) == ca_distance(m, f.native, 6, 11));

  CHECK(code_of([&] { (void)ca_distance(m, f.native, 5, 31); }) ==
        errc::missing_atom);
  CHECK(code_of([&] { (void)ca_distance(m, f.native, 0, 5); }) ==
        errc::missing_atom);
}

TEST_CASE("statistic wrappers delegate and validate their specs") {
  const Fix& f = fix();
  auto dist_stat = make_ca_distance(f.model, 5, 11);
  CHECK(dist_stat->dim() == 1);
  double out1;
  dist_stat->eval(f.native, {&out1, 1});
  CHECK(out1 == ca_distance(*f.model, f.native, 5, 11));

  ContactSpec cs;
  cs.residues = {6, 8, 20};
  cs.radius = 7.0;
  auto counts = make_contact_counts(f.model, cs);
  REQUIRE(counts->dim() == 3);
  double out3[3];
  counts->eval(f.native, {out3, 3});
  for (size_t k = 0; k < 3; ++k)
    CHECK(out3[k] == (double)contact_count(*f.model, f.native,
                                           cs.residues[k], cs.radius, true));
  cs.include_segment = false;
  auto counts_ctx = make_contact_counts(f.model, cs);
  counts_ctx->eval(f.native, {out3, 3});
  for (size_t k = 0; k < 3; ++k)
    CHECK(out3[k] == (double)contact_count(*f.model, f.native,
                                           cs.residues[k], cs.radius, false));

  ContactSpec empty;
  empty.radius = 7.0;
  CHECK(code_of([&] { (void)make_contact_counts(f.model, empty); }) ==
        errc::invalid_argument);
  ContactSpec bad_r;
  bad_r.residues = {6};
  bad_r.radius = 0.0;
  CHECK(code_of([&] { (void)make_contact_counts(f.model, bad_r); }) ==
        errc::invalid_argument);
  CHECK(code_of([&] { (void)contact_count(*f.model, f.native, 6, -1.0); }) ==
        errc::invalid_argument);
}

TEST_CASE("boltzmann_average is the weighted estimator, exactly") {
  ParticleEnsemble ens(1, 0, 3);
  ens.mutable_path(0)[0] = 1.0;
  ens.mutable_path(1)[0] = 5.0;
  ens.mutable_path(2)[0] = 9.0;
  ens.set_log_weight(0, std::log(0.2));
  ens.set_log_weight(1, std::log(0.3));
  ens.set_log_weight(2, std::log(0.5));
  ens.normalize();
  auto tv = make_terminal_value(1, 0, 0);
  EstimateReport a = boltzmann_average(ens, *tv);
  EstimateReport b = estimate(ens, *tv);
  REQUIRE(a.value.size() == 1);
  CHECK(a.value[0] == b.value[0]);
  CHECK(a.value[0] == doctest::Approx(0.2 * 1.0 + 0.3 * 5.0 + 0.5 * 9.0)
                          .epsilon(1e-12));
  CHECK(a.n_particles == b.n_particles);
  CHECK(a.n_distinct == b.n_distinct);
  CHECK(a.weight_entropy == b.weight_entropy);

  auto ps = make_path_sum(1, 0, 0);
  const Statistic* stats[] = {tv.get(), ps.get()};
  std::vector<EstimateReport> many = boltzmann_averages(ens, stats);
  REQUIRE(many.size() == 2);
  CHECK(many[0].value[0] == a.value[0]);
  CHECK(many[1].value[0] == estimate(ens, *ps).value[0]);
}
