#include "sgd/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace sgd {

using nlohmann::json;

std::vector<ReportRow> aggregate_traces(const std::string& trace_dir) {
    struct Bucket {
        std::size_t questions = 0;
        std::size_t tokens = 0;
        double time_s = 0;
    };
    std::map<std::string, Bucket> buckets;

    std::filesystem::path dir(trace_dir);
    if (std::filesystem::is_directory(dir)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            std::ifstream in(file);
            std::string line;
            std::string mode;
            std::size_t tokens = 0;
            double wall = 0;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                json event = json::parse(line, nullptr, false);
                if (event.is_discarded()) continue;
                wall = std::max(wall, event.value("t", 0.0));
                std::string kind = event.value("event", "");
                if (kind == "run-started") mode = event.value("mode", "");
                if (kind == "node-completed") tokens += event.value("tokens", 0u);
            }
            if (mode.empty()) continue;
            Bucket& b = buckets[mode];
            ++b.questions;
            b.tokens += tokens;
            b.time_s += wall;
        }
    }

    std::optional<double> ar_rate;
    auto ar = buckets.find("ar");
    if (ar != buckets.end() && ar->second.time_s > 0) {
        ar_rate = static_cast<double>(ar->second.tokens) / ar->second.time_s;
    }

    std::vector<ReportRow> rows;
    for (const auto& [mode, b] : buckets) {
        ReportRow row;
        row.mode = mode;
        row.questions = b.questions;
        row.tokens = b.tokens;
        row.time_s = b.time_s;
        row.tokens_per_s = b.time_s > 0 ? static_cast<double>(b.tokens) / b.time_s : 0;
        if (ar_rate && *ar_rate > 0) row.speedup_vs_ar = row.tokens_per_s / *ar_rate;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    out << "mode,questions,tokens,time_s,tokens_per_s,speedup_vs_ar\n";
    for (const ReportRow& r : rows) {
        out << r.mode << ',' << r.questions << ',' << r.tokens << ',' << r.time_s << ','
            << r.tokens_per_s << ',';
        if (r.speedup_vs_ar) out << *r.speedup_vs_ar;
        out << '\n';
    }
    return out.str();
}

}  // namespace sgd
