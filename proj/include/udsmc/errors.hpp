#pragma once

#include <stdexcept>
#include <string>

namespace udsmc {

// Stable failure identifiers, mirrored one-to-one by the C API status codes.
enum class errc : int {
  ok = 0,
  invalid_argument,
  parse_error,
  io_error,
  all_particles_dead,
  budget_exhausted,
  no_mass,
  too_few_positive,
  too_large,
  degenerate_frame,
  unknown_amino_acid,
  missing_atom_type,
  range_table_miss,
  asymmetric_entry,
  bad_dimension,
  bad_normalization,
  non_monotone_range,
  empty_structure,
  missing_atom,
  oracle_unavailable,
  internal,
};

const char* errc_name(errc c);

class Error : public std::runtime_error {
 public:
  Error(errc code, std::string msg)
      : std::runtime_error(std::move(msg)), code_(code) {}

  errc code() const { return code_; }

  // Locating index when one applies: step for run failures, line for parse
  // failures. -1 when unset.
  long detail() const { return detail_; }
  Error& with_detail(long d) {
    detail_ = d;
    return *this;
  }

 private:
  errc code_;
  long detail_ = -1;
};

[[noreturn]] void fail(errc code, std::string msg);
[[noreturn]] void fail_at(errc code, std::string msg, long detail);

inline void require(bool ok, errc code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

}  // namespace udsmc
