#pragma once

namespace ptb {

inline constexpr const char* version = "0.1.0";

} // namespace ptb
