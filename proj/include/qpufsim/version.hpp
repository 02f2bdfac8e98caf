#pragma once

namespace qpufsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qpufsim
