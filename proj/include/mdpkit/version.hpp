#pragma once

namespace mdpkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mdpkit
