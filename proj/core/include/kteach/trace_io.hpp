#pragma once

#include <string>
#include <vector>

#include "kteach/teaching.hpp"

namespace kteach {

/// CSV schema: iteration,loss,disagreement,psnr,comm_applied,selected_xs
/// Values are written with 9 significant digits; a saturated PSNR prints as
/// "inf". selected_xs joins learners with ';' and 2-D coordinates with ':'.
/// Output bytes are a pure function of the trace.
void write_trace(const std::vector<TraceRecord>& trace, const std::string& path);

std::string format_trace(const std::vector<TraceRecord>& trace);

/// Parses the serialized columns back (diagnostic fields are not stored).
std::vector<TraceRecord> read_trace(const std::string& path);

}  // namespace kteach
