#include "udsmc/tables.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "udsmc/errors.hpp"
#include "udsmc/textio.hpp"

namespace udsmc {
namespace {

// Line-oriented reader: strips '#' comments, skips blanks, tokenizes on
// whitespace, tracks the 1-based line number for error reports.
struct LineReader {
  std::istream& in;
  long line_no = 0;
  std::vector<std::string> tokens;

  bool next() {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      tokens.clear();
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (!tokens.empty()) return true;
    }
    return false;
  }
};

double need_double(const LineReader& r, size_t i) {
  double v = 0.0;
  if (i >= r.tokens.size() || !parse_double(r.tokens[i], v) ||
      !std::isfinite(v))
    fail_at(errc::parse_error, "expected a finite number", r.line_no);
  return v;
}

long need_long(const LineReader& r, size_t i) {
  long v = 0;
  if (i >= r.tokens.size() || !parse_long(r.tokens[i], v))
    fail_at(errc::parse_error, "expected an integer", r.line_no);
  return v;
}

void need_header(LineReader& r, const char* kind) {
  if (!r.next() || r.tokens.size() != 3 || r.tokens[0] != "format" ||
      r.tokens[1] != kind || r.tokens[2] != "1")
    fail_at(errc::parse_error,
            std::string("expected header 'format ") + kind + " 1'",
            r.line_no);
}

long bins_for(double max_distance, double bin_width) {
  return (long)std::ceil(max_distance / bin_width - 1e-9);
}

template <typename Load>
auto load_file(const std::string& path, Load load) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open " + path);
  return load(in);
}

template <typename T, typename Save>
void save_file(const T& t, const std::string& path, Save save) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot write " + path);
  save(t, out);
  out.flush();
  if (!out) fail(errc::io_error, "write failed for " + path);
}

}  // namespace

int PotentialTable::type_index(std::string_view name) const {
  for (size_t i = 0; i < type_names.size(); ++i)
    if (type_names[i] == name) return (int)i;
  return -1;
}

const DihedralTable& DihedralSet::require_aa(const std::string& aa) const {
  auto it = by_aa.find(aa);
  if (it == by_aa.end())
    fail(errc::unknown_amino_acid, "no dihedral table for '" + aa + "'");
  return it->second;
}

const ClosureRow& ClosureTable::require_steps(long steps_remaining) const {
  if (steps_remaining < 0 || (size_t)steps_remaining >= rows.size())
    fail(errc::range_table_miss,
         "closure table has no row for steps_remaining=" +
             std::to_string(steps_remaining));
  return rows[(size_t)steps_remaining];
}

// --- potential --------------------------------------------------------------

PotentialTable load_potential_table(std::istream& in) {
  LineReader r{in};
  need_header(r, "potential");

  PotentialTable t;
  t.type_names.clear();
  bool have_types = false, have_bw = false, have_max = false, have_sent = false;
  bool body = false;
  std::vector<uint8_t> declared;

  auto finalize_header = [&](long line) {
    if (!have_types || !have_bw || !have_max || !have_sent)
      fail_at(errc::parse_error,
              "entry before complete header (types/bin_width/max_distance/"
              "sentinel required)",
              line);
    t.n_bins = bins_for(t.max_distance, t.bin_width);
    size_t cells = t.type_names.size() * t.type_names.size() * (size_t)t.n_bins;
    t.score.assign(cells, 0.0);
    declared.assign(cells, 0);
    body = true;
  };

  while (r.next()) {
    const auto& tk = r.tokens;
    if (tk[0] == "types") {
      if (body || have_types)
        fail_at(errc::parse_error, "misplaced 'types'", r.line_no);
      if (tk.size() < 2)
        fail_at(errc::parse_error, "empty type vocabulary", r.line_no);
      for (size_t i = 1; i < tk.size(); ++i) {
        if (t.type_index(tk[i]) >= 0)
          fail_at(errc::parse_error, "duplicate type '" + tk[i] + "'",
                  r.line_no);
        t.type_names.push_back(tk[i]);
      }
      have_types = true;
    } else if (tk[0] == "bin_width") {
      if (body) fail_at(errc::parse_error, "misplaced 'bin_width'", r.line_no);
      t.bin_width = need_double(r, 1);
      if (t.bin_width <= 0.0)
        fail_at(errc::parse_error, "bin_width must be positive", r.line_no);
      have_bw = true;
    } else if (tk[0] == "max_distance") {
      if (body)
        fail_at(errc::parse_error, "misplaced 'max_distance'", r.line_no);
      t.max_distance = need_double(r, 1);
      if (t.max_distance <= 0.0)
        fail_at(errc::parse_error, "max_distance must be positive", r.line_no);
      have_max = true;
    } else if (tk[0] == "sentinel") {
      if (body) fail_at(errc::parse_error, "misplaced 'sentinel'", r.line_no);
      t.sentinel = need_double(r, 1);
      have_sent = true;
    } else if (tk[0] == "entry") {
      if (!body) finalize_header(r.line_no);
      if (tk.size() != 5)
        fail_at(errc::parse_error, "entry wants: entry TYPE TYPE BIN SCORE",
                r.line_no);
      int ti = t.type_index(tk[1]);
      int tj = t.type_index(tk[2]);
      if (ti < 0 || tj < 0)
        fail_at(errc::parse_error, "unknown atom type in entry", r.line_no);
      long bin = need_long(r, 3);
      if (bin < 0 || bin >= t.n_bins)
        fail_at(errc::parse_error, "entry bin out of range", r.line_no);
      double score = need_double(r, 4);
      size_t T = t.type_names.size(), B = (size_t)t.n_bins;
      size_t ij = ((size_t)ti * T + (size_t)tj) * B + (size_t)bin;
      size_t ji = ((size_t)tj * T + (size_t)ti) * B + (size_t)bin;
      if ((declared[ij] && t.score[ij] != score) ||
          (declared[ji] && t.score[ji] != score))
        fail_at(errc::asymmetric_entry,
                "conflicting mirrored entries for (" + tk[1] + ", " + tk[2] +
                    ", bin " + std::to_string(bin) + ")",
                r.line_no);
      t.score[ij] = t.score[ji] = score;
      declared[ij] = declared[ji] = 1;
    } else {
      fail_at(errc::parse_error, "unknown keyword '" + tk[0] + "'", r.line_no);
    }
  }
  if (!body) finalize_header(r.line_no);  // header-only file: all-zero table
  return t;
}

void save_potential_table(const PotentialTable& t, std::ostream& out) {
  out << "format potential 1\n";
  out << "types";
  for (const auto& n : t.type_names) out << ' ' << n;
  out << '\n';
  out << "bin_width " << fmt_double(t.bin_width) << '\n';
  out << "max_distance " << fmt_double(t.max_distance) << '\n';
  out << "sentinel " << fmt_double(t.sentinel) << '\n';
  size_t T = t.type_names.size();
  for (size_t i = 0; i < T; ++i)
    for (size_t j = i; j < T; ++j)
      for (long b = 0; b < t.n_bins; ++b) {
        double s = t.at((int)i, (int)j, b);
        if (s != 0.0)
          out << "entry " << t.type_names[i] << ' ' << t.type_names[j] << ' '
              << b << ' ' << fmt_double(s) << '\n';
      }
}

// --- dihedrals ---------------------------------------------------------------

namespace {

// Accept sums within 1e-6 of one; renormalize unless already within 1e-9
// (so save/load round trips reproduce every stored double bit-exactly).
void close_normalization(DihedralTable& tbl, const std::string& aa,
                         long line) {
  double sum = 0.0;
  for (double v : tbl.p) sum += v;
  if (!(std::fabs(sum - 1.0) < 1e-6))
    fail_at(errc::bad_normalization,
            "dihedral matrix for '" + aa + "' sums to " + fmt_double(sum),
            line);
  if (std::fabs(sum - 1.0) > 1e-9)
    for (double& v : tbl.p) v /= sum;
}

}  // namespace

DihedralSet load_dihedral_set(std::istream& in) {
  LineReader r{in};
  need_header(r, "dihedral");

  DihedralSet d;
  bool have_omega = false;
  std::string aa;
  DihedralTable tbl;
  int next_row = 0;
  long block_line = 0;

  auto close_block = [&](long line) {
    if (aa.empty()) return;
    if (next_row != kDihedralBins)
      fail_at(errc::bad_dimension,
              "dihedral matrix for '" + aa + "' has " +
                  std::to_string(next_row) + " rows, expected " +
                  std::to_string(kDihedralBins),
              line);
    close_normalization(tbl, aa, block_line);
    d.by_aa.emplace(aa, tbl);
    aa.clear();
  };

  while (r.next()) {
    const auto& tk = r.tokens;
    if (tk[0] == "omega") {
      if (have_omega)
        fail_at(errc::parse_error, "duplicate omega line", r.line_no);
      d.omega_mean = need_double(r, 1);
      d.omega_sd = need_double(r, 2);
      if (d.omega_sd <= 0.0)
        fail_at(errc::parse_error, "omega sd must be positive", r.line_no);
      have_omega = true;
    } else if (tk[0] == "aa") {
      close_block(r.line_no);
      if (tk.size() != 2)
        fail_at(errc::parse_error, "aa wants a single name", r.line_no);
      if (d.by_aa.count(tk[1]))
        fail_at(errc::parse_error, "duplicate amino acid '" + tk[1] + "'",
                r.line_no);
      aa = tk[1];
      tbl = DihedralTable{};
      next_row = 0;
      block_line = r.line_no;
    } else if (tk[0] == "row") {
      if (aa.empty())
        fail_at(errc::parse_error, "row outside an aa block", r.line_no);
      if (tk.size() != 2 + (size_t)kDihedralBins)
        fail_at(errc::bad_dimension,
                "row wants " + std::to_string(kDihedralBins) + " values",
                r.line_no);
      long idx = need_long(r, 1);
      if (idx != next_row)
        fail_at(errc::bad_dimension,
                "rows must be contiguous from 0; got " + std::to_string(idx) +
                    ", expected " + std::to_string(next_row),
                r.line_no);
      for (int j = 0; j < kDihedralBins; ++j) {
        double v = need_double(r, 2 + (size_t)j);
        if (v < 0.0)
          fail_at(errc::bad_normalization, "negative dihedral mass",
                  r.line_no);
        tbl.p[(size_t)next_row * kDihedralBins + (size_t)j] = v;
      }
      ++next_row;
    } else {
      fail_at(errc::parse_error, "unknown keyword '" + tk[0] + "'", r.line_no);
    }
  }
  close_block(r.line_no);
  if (!have_omega)
    fail_at(errc::parse_error, "missing omega line", r.line_no);
  if (d.by_aa.empty())
    fail_at(errc::parse_error, "no amino-acid blocks", r.line_no);
  return d;
}

void save_dihedral_set(const DihedralSet& d, std::ostream& out) {
  out << "format dihedral 1\n";
  out << "omega " << fmt_double(d.omega_mean) << ' ' << fmt_double(d.omega_sd)
      << '\n';
  for (const auto& [aa, tbl] : d.by_aa) {
    out << "aa " << aa << '\n';
    for (int i = 0; i < kDihedralBins; ++i) {
      out << "row " << i;
      for (int j = 0; j < kDihedralBins; ++j)
        out << ' ' << fmt_double(tbl.p[(size_t)i * kDihedralBins + (size_t)j]);
      out << '\n';
    }
  }
}

// --- closure ----------------------------------------------------------------

ClosureTable load_closure_table(std::istream& in) {
  LineReader r{in};
  need_header(r, "closure");

  ClosureTable t;
  while (r.next()) {
    const auto& tk = r.tokens;
    if (tk[0] != "row")
      fail_at(errc::parse_error, "unknown keyword '" + tk[0] + "'", r.line_no);
    if (tk.size() != 6)
      fail_at(errc::parse_error, "row wants: row K CMIN CMAX CAMIN CAMAX",
              r.line_no);
    long k = need_long(r, 1);
    if (k != (long)t.rows.size())
      fail_at(errc::parse_error,
              "row keys must be contiguous from 0; got " + std::to_string(k),
              r.line_no);
    ClosureRow row;
    row.c_min = need_double(r, 2);
    row.c_max = need_double(r, 3);
    row.ca_min = need_double(r, 4);
    row.ca_max = need_double(r, 5);
    if (row.c_min < 0.0 || row.ca_min < 0.0)
      fail_at(errc::parse_error, "closure bounds must be nonnegative",
              r.line_no);
    if (row.c_min > row.c_max || row.ca_min > row.ca_max)
      fail_at(errc::non_monotone_range, "closure row has min > max",
              r.line_no);
    t.rows.push_back(row);
  }
  if (t.rows.empty())
    fail_at(errc::parse_error, "closure table has no rows", r.line_no);
  return t;
}

void save_closure_table(const ClosureTable& t, std::ostream& out) {
  out << "format closure 1\n";
  for (size_t k = 0; k < t.rows.size(); ++k) {
    const auto& row = t.rows[k];
    out << "row " << k << ' ' << fmt_double(row.c_min) << ' '
        << fmt_double(row.c_max) << ' ' << fmt_double(row.ca_min) << ' '
        << fmt_double(row.ca_max) << '\n';
  }
}

// --- file wrappers -----------------------------------------------------------

PotentialTable load_potential_table_file(const std::string& path) {
  return load_file(path, [](std::istream& in) {
    return load_potential_table(in);
  });
}
void save_potential_table_file(const PotentialTable& t,
                               const std::string& path) {
  save_file(t, path, [](const PotentialTable& x, std::ostream& out) {
    save_potential_table(x, out);
  });
}

DihedralSet load_dihedral_set_file(const std::string& path) {
  return load_file(path,
                   [](std::istream& in) { return load_dihedral_set(in); });
}
void save_dihedral_set_file(const DihedralSet& d, const std::string& path) {
  save_file(d, path, [](const DihedralSet& x, std::ostream& out) {
    save_dihedral_set(x, out);
  });
}

ClosureTable load_closure_table_file(const std::string& path) {
  return load_file(path,
                   [](std::istream& in) { return load_closure_table(in); });
}
void save_closure_table_file(const ClosureTable& t, const std::string& path) {
  save_file(t, path, [](const ClosureTable& x, std::ostream& out) {
    save_closure_table(x, out);
  });
}

}  // namespace udsmc
