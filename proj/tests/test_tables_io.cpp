#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "udsmc/errors.hpp"
#include "udsmc/tables.hpp"

using namespace udsmc;

namespace {

bool same_bits(double a, double b) {
  return std::bit_cast<uint64_t>(a) == std::bit_cast<uint64_t>(b);
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!same_bits(a[i], b[i])) return false;
  return true;
}

template <class T, class Save, class Load>
std::pair<T, std::string> round_trip(const T& t, Save save, Load load) {
  std::ostringstream out;
  save(t, out);
  std::istringstream in(out.str());
  return {load(in), out.str()};
}

errc code_of(const std::function<void()>& fn, long* line = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (line) *line = e.detail();
    return e.code();
  }
  return errc::ok;
}

// Replaces 1-based line `no` of `text` with `repl` (drop when repl is null).
std::string edit_line(const std::string& text, long no, const char* repl) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  long k = 0;
  while (std::getline(in, line)) {
    ++k;
    if (k == no) {
      if (repl) out << repl << '\n';
    } else {
      out << line << '\n';
    }
  }
  return out.str();
}

}  // namespace

TEST_CASE("synthetic tables round trip bit-exactly") {
  SyntheticTables gen = generate_synthetic_tables(SyntheticSpec{}, 7);

  auto [pot, pot_text] =
      round_trip(gen.pot, save_potential_table, load_potential_table);
  CHECK(pot.type_names == gen.pot.type_names);
  CHECK(same_bits(pot.bin_width, gen.pot.bin_width));
  CHECK(same_bits(pot.max_distance, gen.pot.max_distance));
  CHECK(same_bits(pot.sentinel, gen.pot.sentinel));
  CHECK(pot.n_bins == gen.pot.n_bins);
  CHECK(same_bits(pot.score, gen.pot.score));

  auto [dih, dih_text] =
      round_trip(gen.dih, save_dihedral_set, load_dihedral_set);
  CHECK(same_bits(dih.omega_mean, gen.dih.omega_mean));
  CHECK(same_bits(dih.omega_sd, gen.dih.omega_sd));
  REQUIRE(dih.by_aa.size() == gen.dih.by_aa.size());
  for (const auto& [aa, tbl] : gen.dih.by_aa) {
    REQUIRE(dih.by_aa.count(aa) == 1);
    const auto& got = dih.by_aa.at(aa);
    bool all_same = true;
    for (size_t i = 0; i < tbl.p.size(); ++i)
      all_same = all_same && same_bits(tbl.p[i], got.p[i]);
    CHECK(all_same);
  }

  auto [clo, clo_text] =
      round_trip(gen.clo, save_closure_table, load_closure_table);
  REQUIRE(clo.rows.size() == gen.clo.rows.size());
  for (size_t k = 0; k < clo.rows.size(); ++k) {
    CHECK(same_bits(clo.rows[k].c_min, gen.clo.rows[k].c_min));
    CHECK(same_bits(clo.rows[k].c_max, gen.clo.rows[k].c_max));
    CHECK(same_bits(clo.rows[k].ca_min, gen.clo.rows[k].ca_min));
    CHECK(same_bits(clo.rows[k].ca_max, gen.clo.rows[k].ca_max));
  }

  // Serializing the reloaded tables reproduces the text byte for byte.
  std::ostringstream p2, d2, c2;
  save_potential_table(pot, p2);
  save_dihedral_set(dih, d2);
  save_closure_table(clo, c2);
  CHECK(p2.str() == pot_text);
  CHECK(d2.str() == dih_text);
  CHECK(c2.str() == clo_text);
}

TEST_CASE("potential loader reports precise failures") {
  SyntheticTables gen = generate_synthetic_tables(SyntheticSpec{}, 7);
  std::ostringstream out;
  save_potential_table(gen.pot, out);
  std::string good = out.str();
  long line = -1;

  auto load_text = [](const std::string& text) {
    std::istringstream in(text);
    return load_potential_table(in);
  };

  CHECK(code_of([&] { load_text(edit_line(good, 1, "format potential 2")); },
                &line) == errc::parse_error);
  CHECK(line == 1);
  CHECK(code_of([&] { load_text(edit_line(good, 3, "bin_width nope")); },
                &line) == errc::parse_error);
  CHECK(line == 3);
  CHECK(code_of([&] { load_text(edit_line(good, 4, "wat 1 2 3")); }, &line) ==
        errc::parse_error);
  CHECK(line == 4);
  CHECK(code_of([&] { load_text(good + "entry N CA 999 1.0\n"); }) ==
        errc::parse_error);
  CHECK(code_of([&] { load_text(good + "entry N XX 0 1.0\n"); }) ==
        errc::parse_error);
  // Comments and blank lines are invisible to the parser.
  CHECK(code_of([&] { load_text("# hi\n\n" + good + "# bye\n"); }) == errc::ok);

  // Mirrored-entry conflicts, on a table small enough to write by hand.
  const std::string tiny =
      "format potential 1\ntypes N CA\nbin_width 0.5\nmax_distance 2\n"
      "sentinel 8\n";
  CHECK(code_of([&] {
    load_text(tiny + "entry N CA 1 1.5\nentry CA N 1 2.5\n");
  }, &line) == errc::asymmetric_entry);
  CHECK(line == 7);
  // Re-declaring the same value is not a conflict.
  CHECK(code_of([&] {
    load_text(tiny + "entry N CA 1 1.5\nentry CA N 1 1.5\n");
  }) == errc::ok);
  {
    std::istringstream in(tiny + "entry N CA 1 1.5\n");
    PotentialTable t = load_potential_table(in);
    CHECK(t.n_bins == 4);
    CHECK(t.at(0, 1, 1) == 1.5);
    CHECK(t.at(1, 0, 1) == 1.5);  // mirror filled automatically
    CHECK(t.at(0, 1, 2) == 0.0);  // undeclared cells default to zero
  }
}

TEST_CASE("dihedral loader normalizes tiny drift and rejects real drift") {
  DihedralSet d;
  d.omega_mean = 181.0;
  d.omega_sd = 2.5;
  DihedralTable uni;
  double cell = 1.0 / (double)(kDihedralBins * kDihedralBins);
  for (double& v : uni.p) v = cell;
  d.by_aa["ALA"] = uni;

  auto reload = [&](double bump) {
    DihedralSet copy = d;
    copy.by_aa["ALA"].p[0] += bump;
    std::ostringstream out;
    save_dihedral_set(copy, out);
    std::istringstream in(out.str());
    return load_dihedral_set(in);
  };

  // Exactly normalized: reload reproduces the doubles untouched.
  DihedralSet same = reload(0.0);
  CHECK(same_bits(same.by_aa.at("ALA").p[0], cell));
  CHECK(same_bits(same.omega_mean, 181.0));

  // Off by 3e-7: accepted and renormalized to unit mass.
  DihedralSet renorm = reload(3e-7);
  double sum = 0.0;
  for (double v : renorm.by_aa.at("ALA").p) sum += v;
  CHECK(std::abs(sum - 1.0) < 1e-12);

  // Off by 1e-3: rejected.
  CHECK(code_of([&] { reload(1e-3); }) == errc::bad_normalization);
  // Negative mass: rejected even though the sum could be fixed.
  CHECK(code_of([&] {
    DihedralSet copy = d;
    copy.by_aa["ALA"].p[0] = -cell;
    copy.by_aa["ALA"].p[1] = 3.0 * cell;
    std::ostringstream out;
    save_dihedral_set(copy, out);
    std::istringstream in(out.str());
    load_dihedral_set(in);
  }) == errc::bad_normalization);
}

TEST_CASE("dihedral loader rejects structural breakage") {
  DihedralSet d;
  DihedralTable uni;
  for (double& v : uni.p) v = 1.0 / (double)(kDihedralBins * kDihedralBins);
  d.by_aa["GLY"] = uni;
  std::ostringstream out;
  save_dihedral_set(d, out);
  std::string good = out.str();
  long line = -1;

  auto load_text = [](const std::string& text) {
    std::istringstream in(text);
    return load_dihedral_set(in);
  };

  // Dropping a row leaves 71 rows: dimension error at the closing line.
  CHECK(code_of([&] { load_text(edit_line(good, 40, nullptr)); }) ==
        errc::bad_dimension);
  // Renumbering a row breaks contiguity where it happens.
  std::string renum = good;
  size_t at = renum.find("\nrow 10 ");
  REQUIRE(at != std::string::npos);
  renum.replace(at, 8, "\nrow 11 ");
  CHECK(code_of([&] { load_text(renum); }, &line) == errc::bad_dimension);
  CHECK(line == 14);  // header + omega + aa + rows 0..10
  // A row before any aa block.
  CHECK(code_of([&] {
    load_text(edit_line(good, 3, "row 0 0.1"));
  }) == errc::parse_error);
  // Missing omega line.
  CHECK(code_of([&] { load_text(edit_line(good, 2, nullptr)); }) ==
        errc::parse_error);
  // Empty set.
  CHECK(code_of([&] { load_text("format dihedral 1\nomega 180 3\n"); }) ==
        errc::parse_error);
}

TEST_CASE("closure loader rejects inverted and ragged rows") {
  long line = -1;
  auto load_text = [](const std::string& text) {
    std::istringstream in(text);
    return load_closure_table(in);
  };
  CHECK(code_of([&] {
    load_text("format closure 1\nrow 0 1 2 3 4\nrow 1 2 1 0 4\n");
  }, &line) == errc::non_monotone_range);
  CHECK(line == 3);
  CHECK(code_of([&] {
    load_text("format closure 1\nrow 0 1 2 3 4\nrow 2 1 2 3 4\n");
  }, &line) == errc::parse_error);  // keys must be contiguous
  CHECK(line == 3);
  CHECK(code_of([&] { load_text("format closure 1\nrow 0 -1 2 0 4\n"); }) ==
        errc::parse_error);  // negative bound
  CHECK(code_of([&] { load_text("format closure 1\n"); }) == errc::parse_error);
  CHECK(code_of([&] { load_text("format closure 1\nrow 0 1 2 3\n"); }) ==
        errc::parse_error);  // short row
}

TEST_CASE("generated potential has the clash wall and symmetry") {
  SyntheticSpec spec;
  SyntheticTables gen = generate_synthetic_tables(spec, 7);
  const PotentialTable& pot = gen.pot;
  REQUIRE(pot.n_bins == 16);
  REQUIRE(pot.type_names.size() == 4);

  long clash_bins = (long)(spec.clash_distance / spec.bin_width + 1e-9);
  int T = (int)pot.type_names.size();
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < T; ++j)
      for (long b = 0; b < pot.n_bins; ++b) {
        CHECK(same_bits(pot.at(i, j, b), pot.at(j, i, b)));
        if (b < clash_bins) {
          CHECK(pot.is_clash(pot.at(i, j, b)));
        } else {
          // Smooth well values; well_depth sets their scale, not a bound.
          CHECK_FALSE(pot.is_clash(pot.at(i, j, b)));
          CHECK(std::isfinite(pot.at(i, j, b)));
        }
      }
  CHECK(pot.bin_of(0.49) == 0);
  CHECK(pot.bin_of(0.5) == 1);
  CHECK(pot.bin_of(7.99) == 15);
}

TEST_CASE("generated closure rows follow the span arithmetic") {
  SyntheticSpec spec;
  SyntheticTables gen = generate_synthetic_tables(spec, 7);
  const ClosureTable& clo = gen.clo;
  REQUIRE(clo.rows.size() == (size_t)spec.max_steps + 1);

  const BackboneGeometry& g = spec.geometry;
  double span_max = trans_ca_ca_distance(g) + spec.span_margin;
  double rad = g.ang_c_n_ca * std::numbers::pi / 180.0;
  double off = std::sqrt(g.c_n * g.c_n + g.n_ca * g.n_ca -
                         2.0 * g.c_n * g.n_ca * std::cos(rad));
  for (size_t k = 0; k < clo.rows.size(); ++k) {
    const ClosureRow& row = clo.rows[k];
    CHECK(row.ca_max ==
          doctest::Approx((double)(k + 1) * span_max).epsilon(1e-12));
    CHECK(row.c_max == doctest::Approx(row.ca_max + off).epsilon(1e-12));
    CHECK(row.c_min ==
          doctest::Approx(std::max(0.0, row.ca_min - off)).epsilon(1e-12));
    if (k == 0) {
      CHECK(row.ca_min > 0.0);  // single span cannot contract to zero
    } else {
      CHECK(row.ca_min == 0.0);
    }
    CHECK(row.c_min <= row.c_max);
    CHECK(row.ca_min <= row.ca_max);
  }
}

TEST_CASE("generated dihedral masses are unit and keyed by amino acid") {
  SyntheticSpec spec;
  SyntheticTables gen = generate_synthetic_tables(spec, 7);
  REQUIRE(gen.dih.by_aa.size() == spec.amino_acids.size());
  CHECK(gen.dih.omega_mean == 180.0);
  CHECK(gen.dih.omega_sd == 3.0);
  for (const auto& aa : spec.amino_acids) {
    const DihedralTable& tbl = gen.dih.require_aa(aa);
    double sum = 0.0, peak = 0.0;
    for (double v : tbl.p) {
      CHECK(v >= 0.0);
      sum += v;
      peak = std::max(peak, v);
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
    // Modal structure, not a uniform sheet.
    CHECK(peak > 5.0 / (double)(kDihedralBins * kDihedralBins));
  }
  CHECK_THROWS_AS(gen.dih.require_aa("TRP"), Error);
  CHECK(code_of([&] { gen.dih.require_aa("TRP"); }) ==
        errc::unknown_amino_acid);
  CHECK(code_of([&] { gen.clo.require_steps(-1); }) == errc::range_table_miss);
  CHECK(code_of([&] { gen.clo.require_steps(25); }) == errc::range_table_miss);
  CHECK(gen.pot.type_index("CA") == 1);
  CHECK(gen.pot.type_index("XX") == -1);
}

TEST_CASE("generation is deterministic in the seed") {
  SyntheticSpec spec;
  SyntheticTables a = generate_synthetic_tables(spec, 7);
  SyntheticTables b = generate_synthetic_tables(spec, 7);
  CHECK(same_bits(a.pot.score, b.pot.score));
  bool dih_same = true;
  for (const auto& [aa, tbl] : a.dih.by_aa)
    for (size_t i = 0; i < tbl.p.size(); ++i)
      dih_same = dih_same && same_bits(tbl.p[i], b.dih.by_aa.at(aa).p[i]);
  CHECK(dih_same);

  SyntheticTables c = generate_synthetic_tables(spec, 8);
  bool dih_differs = false;
  for (const auto& [aa, tbl] : a.dih.by_aa)
    for (size_t i = 0; i < tbl.p.size(); ++i)
      dih_differs = dih_differs || !same_bits(tbl.p[i], c.dih.by_aa.at(aa).p[i]);
  CHECK(dih_differs);
}

TEST_CASE("synthetic host is an ideal-geometry backbone") {
  HostSpec spec;
  spec.residues = 6;
  BackboneGeometry g;
  ProteinStructure host = generate_synthetic_host(spec, g);
  REQUIRE(host.atoms.size() == 24u);  // N, CA, C, O per residue

  auto atom = [&](int res, const char* name) {
    const Atom* a = host.find('A', res, name);
    REQUIRE(a != nullptr);
    return a->pos;
  };
  for (int r = 1; r <= 6; ++r) {
    CHECK(host.residue_name('A', r) ==
          spec.amino_acids[(size_t)(r - 1) % spec.amino_acids.size()]);
    CHECK(distance(atom(r, "N"), atom(r, "CA")) ==
          doctest::Approx(g.n_ca).epsilon(1e-9));
    CHECK(distance(atom(r, "CA"), atom(r, "C")) ==
          doctest::Approx(g.ca_c).epsilon(1e-9));
    CHECK(distance(atom(r, "C"), atom(r, "O")) ==
          doctest::Approx(g.c_o).epsilon(1e-9));
    if (r < 6)
      CHECK(distance(atom(r, "C"), atom(r + 1, "N")) ==
            doctest::Approx(g.c_n).epsilon(1e-9));
  }
  for (int r = 2; r <= 6; ++r) {
    double phi = measure_dihedral(atom(r - 1, "C"), atom(r, "N"),
                                  atom(r, "CA"), atom(r, "C"));
    CHECK(phi == doctest::Approx(-63.0).epsilon(1e-6));
  }
  for (int r = 1; r <= 5; ++r) {
    double psi = measure_dihedral(atom(r, "N"), atom(r, "CA"), atom(r, "C"),
                                  atom(r + 1, "N"));
    double omg = measure_dihedral(atom(r, "CA"), atom(r, "C"),
                                  atom(r + 1, "N"), atom(r + 1, "CA"));
    CHECK(psi == doctest::Approx(-43.0).epsilon(1e-6));
    CHECK(std::abs(wrap_degrees(omg - 180.0)) < 1e-6);
  }
}
