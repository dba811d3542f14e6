#include "udsmc/errors.hpp"

namespace udsmc {

const char* errc_name(errc c) {
  switch (c) {
    case errc::ok: return "ok";
    case errc::invalid_argument: return "invalid_argument";
    case errc::parse_error: return "parse_error";
    case errc::io_error: return "io_error";
    case errc::all_particles_dead: return "all_particles_dead";
    case errc::budget_exhausted: return "budget_exhausted";
    case errc::no_mass: return "no_mass";
    case errc::too_few_positive: return "too_few_positive";
    case errc::too_large: return "too_large";
    case errc::degenerate_frame: return "degenerate_frame";
    case errc::unknown_amino_acid: return "unknown_amino_acid";
    case errc::missing_atom_type: return "missing_atom_type";
    case errc::range_table_miss: return "range_table_miss";
    case errc::asymmetric_entry: return "asymmetric_entry";
    case errc::bad_dimension: return "bad_dimension";
    case errc::bad_normalization: return "bad_normalization";
    case errc::non_monotone_range: return "non_monotone_range";
    case errc::empty_structure: return "empty_structure";
    case errc::missing_atom: return "missing_atom";
    case errc::oracle_unavailable: return "oracle_unavailable";
    case errc::internal: return "internal";
  }
  return "unknown";
}

void fail(errc code, std::string msg) { throw Error(code, std::move(msg)); }

void fail_at(errc code, std::string msg, long detail) {
  throw Error(code, std::move(msg)).with_detail(detail);
}

}  // namespace udsmc
