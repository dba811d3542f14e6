#pragma once

#include <string>
#include <string_view>

namespace udsmc {

// Shortest round-trip decimal form of a double (locale-free, deterministic);
// the one formatter used for every numeric field we emit.
std::string fmt_double(double v);

// Whitespace-trimmed copy.
std::string_view trim(std::string_view s);

// Strict double / long parsers over trimmed text; false on any leftover.
bool parse_double(std::string_view s, double& out);
bool parse_long(std::string_view s, long& out);

}  // namespace udsmc
