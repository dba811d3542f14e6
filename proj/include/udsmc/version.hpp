#pragma once

namespace udsmc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace udsmc
