#pragma once

namespace selfsim {

inline constexpr const char* kVersion = "1.0.0";

} // namespace selfsim
