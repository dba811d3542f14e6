#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "udsmc/geometry.hpp"

namespace udsmc {

struct Atom {
  int serial = 0;
  std::string name;      // e.g. "CA"
  std::string res_name;  // e.g. "ALA"
  char chain = 'A';
  int res_seq = 0;
  Vec3 pos;
  std::string element;  // derived from the name when the column is blank
};

struct ProteinStructure {
  std::vector<Atom> atoms;

  const Atom* find(char chain, int res_seq, std::string_view name) const;
  std::string residue_name(char chain, int res_seq) const;
};

// Fixed-column ATOM records only; every other record type is skipped.
// parse_error (with line number) on malformed numeric fields,
// empty_structure when nothing was parsed.
ProteinStructure parse_pdb(std::istream& in);
ProteinStructure parse_pdb_file(const std::string& path);

// Standard-width ATOM records; occupancy/tempFactor fixed at 1.00/0.00.
// Coordinates are written at 3 decimals, so values beyond that precision do
// not round-trip; everything else does.
void write_pdb(const ProteinStructure& s, std::ostream& out);
void write_pdb_file(const ProteinStructure& s, const std::string& path);

// Copy without atoms whose element matches any entry of `drop` exactly
// (e.g. {"H"} strips hydrogens before energy evaluation).
ProteinStructure filter_out_elements(const ProteinStructure& s,
                                     const std::vector<std::string>& drop);

}  // namespace udsmc
