#pragma once

#include <string>

#include "qpufsim/qmath.hpp"

namespace qpufsim {

// Text matrix format: a "qpufsim-unitary v1" header, a "dim d" line, then
// row-major "re im" decimal pairs at 17 significant digits, which round-trips
// doubles losslessly and is independent of machine endianness.
void save_unitary(const std::string& path, const UnitaryOp& u);
UnitaryOp load_unitary(const std::string& path);

}  // namespace qpufsim
