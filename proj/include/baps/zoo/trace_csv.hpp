#pragma once

#include <fstream>
#include <ostream>
#include <span>
#include <string>

#include "baps/core/error.hpp"
#include "baps/core/format.hpp"
#include "baps/zoo/spsa.hpp"

namespace baps::zoo {

inline constexpr const char* kTraceHeader = "iteration,loss,grad_rms,alpha_eff,c_eff,strike,boost_active";

inline void write_trace_row(std::ostream& os, const TraceRow& r) {
    os << r.iteration << ',' << format_double(r.loss) << ',' << format_double(r.grad_rms) << ','
       << format_double(r.alpha_eff) << ',' << format_double(r.c_eff) << ',' << r.strike << ','
       << (r.boost_active ? 1 : 0) << '\n';
}

inline void write_trace_csv(std::ostream& os, std::span<const TraceRow> rows) {
    os << kTraceHeader << '\n';
    for (const auto& r : rows) write_trace_row(os, r);
}

inline void write_trace_csv(const std::string& path, std::span<const TraceRow> rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open trace file for writing: " + path);
    write_trace_csv(out, rows);
    if (!out) throw DataError("failed writing trace file: " + path);
}

}  // namespace baps::zoo
