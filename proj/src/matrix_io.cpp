#include "qpufsim/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qpufsim/errors.hpp"

namespace qpufsim {

namespace {
constexpr const char* kMagic = "qpufsim-unitary v1";
}

void save_unitary(const std::string& path, const UnitaryOp& u) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_unitary: cannot open '" + path + "' for writing");
  const int d = u.dim();
  out << kMagic << "\n";
  out << "dim " << d << "\n";
  out << "# row-major re/im pairs, %.17g decimal text (endianness-independent)\n";
  char buf[64];
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const Complex v = u.entries()(i, j);
      std::snprintf(buf, sizeof buf, "%.17g %.17g", v.real(), v.imag());
      out << buf << (j + 1 == d ? "" : " ");
    }
    out << "\n";
  }
  if (!out) throw ConfigError("save_unitary: write to '" + path + "' failed");
}

UnitaryOp load_unitary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_unitary: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMagic)
    throw ConfigError("load_unitary: '" + path + "' is not a qpufsim-unitary v1 file");

  int d = 0;
  if (!std::getline(in, line)) throw ConfigError("load_unitary: truncated header");
  {
    std::istringstream hs(line);
    std::string tag;
    if (!(hs >> tag >> d) || tag != "dim" || d < 2)
      throw ConfigError("load_unitary: malformed dim line '" + line + "'");
  }

  // skip comment lines, then read d*d re/im pairs
  std::stringstream data;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    data << line << "\n";
  }
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double re = 0.0, im = 0.0;
      if (!(data >> re >> im))
        throw ConfigError("load_unitary: expected " + std::to_string(2 * d * d) +
                          " numbers in '" + path + "'");
      m(i, j) = Complex(re, im);
    }
  double extra;
  if (data >> extra) throw ConfigError("load_unitary: trailing data in '" + path + "'");

  try {
    return UnitaryOp(std::move(m));
  } catch (const NumericError& e) {
    throw ConfigError("load_unitary: '" + path + "' does not hold a unitary matrix (" +
                      e.what() + ")");
  }
}

}  // namespace qpufsim
