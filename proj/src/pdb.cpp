#include "udsmc/pdb.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "udsmc/errors.hpp"
#include "udsmc/textio.hpp"

namespace udsmc {

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool parse_long(std::string_view s, long& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

namespace {

std::string_view field(const std::string& line, size_t from0, size_t to_excl) {
  if (line.size() <= from0) return {};
  size_t n = std::min(to_excl, line.size()) - from0;
  return std::string_view(line).substr(from0, n);
}

std::string derive_element(std::string_view name) {
  for (char ch : name) {
    if (ch >= 'A' && ch <= 'Z') return std::string(1, ch);
    if (ch >= 'a' && ch <= 'z') return std::string(1, (char)(ch - 32));
  }
  return "";
}

}  // namespace

const Atom* ProteinStructure::find(char chain, int res_seq,
                                   std::string_view name) const {
  for (const auto& a : atoms) {
    if (a.chain == chain && a.res_seq == res_seq && a.name == name) return &a;
  }
  return nullptr;
}

std::string ProteinStructure::residue_name(char chain, int res_seq) const {
  for (const auto& a : atoms) {
    if (a.chain == chain && a.res_seq == res_seq) return a.res_name;
  }
  return "";
}

ProteinStructure parse_pdb(std::istream& in) {
  ProteinStructure s;
  std::string line;
  long lineno = 0;
  std::map<char, int> last_seq;  // residue numbering must not decrease
  while (std::getline(in, line)) {
    ++lineno;
    if (line.size() < 6 || field(line, 0, 6) != "ATOM  ") continue;
    Atom a;
    long serial = 0;
    if (!parse_long(field(line, 6, 11), serial))
      fail_at(errc::parse_error, "pdb: bad serial", lineno);
    a.serial = (int)serial;
    a.name = std::string(trim(field(line, 12, 16)));
    a.res_name = std::string(trim(field(line, 17, 20)));
    auto chain_f = field(line, 21, 22);
    a.chain = chain_f.empty() ? ' ' : chain_f[0];
    long seq = 0;
    if (!parse_long(field(line, 22, 26), seq))
      fail_at(errc::parse_error, "pdb: bad residue number", lineno);
    a.res_seq = (int)seq;
    if (!parse_double(field(line, 30, 38), a.pos.x) ||
        !parse_double(field(line, 38, 46), a.pos.y) ||
        !parse_double(field(line, 46, 54), a.pos.z) ||
        !std::isfinite(a.pos.x) || !std::isfinite(a.pos.y) ||
        !std::isfinite(a.pos.z))
      fail_at(errc::parse_error, "pdb: bad coordinates", lineno);
    auto it = last_seq.find(a.chain);
    if (it != last_seq.end() && a.res_seq < it->second)
      fail_at(errc::parse_error, "pdb: residue numbering decreases", lineno);
    last_seq[a.chain] = a.res_seq;
    a.element = std::string(trim(field(line, 76, 78)));
    if (a.element.empty()) a.element = derive_element(a.name);
    s.atoms.push_back(std::move(a));
  }
  if (s.atoms.empty())
    fail(errc::empty_structure, "pdb: no ATOM records found");
  return s;
}

ProteinStructure parse_pdb_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "pdb: cannot open " + path);
  return parse_pdb(in);
}

ProteinStructure filter_out_elements(const ProteinStructure& s,
                                     const std::vector<std::string>& drop) {
  ProteinStructure out;
  for (const auto& a : s.atoms) {
    bool dropped = false;
    for (const auto& e : drop) {
      if (a.element == e) {
        dropped = true;
        break;
      }
    }
    if (!dropped) out.atoms.push_back(a);
  }
  return out;
}

void write_pdb(const ProteinStructure& s, std::ostream& out) {
  for (const auto& a : s.atoms) {
    // Names shorter than 4 chars sit one column in, per the fixed layout.
    std::string name = a.name.size() >= 4 ? a.name : " " + a.name;
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "ATOM  %5d %-4s %-3s %c%4d    %8.3f%8.3f%8.3f%6.2f%6.2f"
                  "          %2s\n",
                  a.serial, name.c_str(), a.res_name.c_str(), a.chain,
                  a.res_seq, a.pos.x, a.pos.y, a.pos.z, 1.0, 0.0,
                  a.element.c_str());
    out << buf;
  }
  out << "END\n";
}

void write_pdb_file(const ProteinStructure& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "pdb: cannot write " + path);
  write_pdb(s, out);
}

}  // namespace udsmc
