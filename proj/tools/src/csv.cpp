#include "rlo_cli/csv.hpp"

#include <array>
#include <cstdio>

namespace rlo::cli {

std::string format_real(double x) {
  std::array<char, 40> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.17g", x);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

void write_trace(std::ostream& out, std::span<const DiagnosticsRecord> records,
                 std::int64_t log_every) {
  out << kTraceHeader << '\n';
  for (const auto& r : records) {
    if (r.k % log_every != 0) continue;
    out << r.k;
    for (double x : {r.f_val, r.grad_norm, r.z_norm, r.delta_norm, r.V, r.r, r.cos_vd,
                     r.q_perp, r.h, r.eta}) {
      out << ',' << format_real(x);
    }
    out << '\n';
  }
}

}  // namespace rlo::cli
