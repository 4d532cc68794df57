#pragma once

namespace gt {

inline constexpr const char* kVersion = "0.1.0";

} // namespace gt
