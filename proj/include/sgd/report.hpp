#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sgd {

struct ReportRow {
    std::string mode;
    std::size_t questions = 0;
    std::size_t tokens = 0;      // completion tokens across all traces
    double time_s = 0;           // summed per-trace wall time
    double tokens_per_s = 0;
    std::optional<double> speedup_vs_ar;  // present when an "ar" row exists
};

/// Aggregates every *.jsonl trace under `trace_dir` into per-mode throughput
/// rows (mode, questions, tokens, time, tokens/s, speedup vs the ar rows).
/// An empty or missing directory yields an empty table.
std::vector<ReportRow> aggregate_traces(const std::string& trace_dir);

std::string report_csv(const std::vector<ReportRow>& rows);

}  // namespace sgd
