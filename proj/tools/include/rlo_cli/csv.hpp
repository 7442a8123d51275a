#pragma once

#include <ostream>
#include <span>
#include <string>

#include "rlo/diagnostics.hpp"

namespace rlo::cli {

/// Shortest round-trippable form: 17 significant digits, '.' decimal point.
std::string format_real(double x);

inline constexpr const char* kTraceHeader =
    "k,f_val,grad_norm,z_norm,delta_norm,V,r,cos_vd,q_perp,h,eta";

/// Writes the header and every `log_every`-th record (k % log_every == 0),
/// LF-terminated.
void write_trace(std::ostream& out, std::span<const DiagnosticsRecord> records,
                 std::int64_t log_every);

}  // namespace rlo::cli
