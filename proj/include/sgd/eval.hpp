#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sgd/backend.hpp"
#include "sgd/prompts.hpp"

namespace sgd {

enum class JudgeVerdict { WinA, WinB, Tie };

std::string_view to_string(JudgeVerdict verdict);

struct MatchRecord {
    std::string question_id;
    std::string category;
    std::string method_a;
    std::string method_b;
    JudgeVerdict verdict = JudgeVerdict::Tie;
    // First element: judged in presented order; second: judged with the
    // answers swapped, already mapped back to (a, b) orientation.
    std::pair<JudgeVerdict, JudgeVerdict> raw_verdicts{JudgeVerdict::Tie, JudgeVerdict::Tie};
};

class UnparseableVerdict : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyRecordSet : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ZeroTime : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Scans a judge reply for its final [[A]] / [[B]] / [[C]] marker.
std::optional<JudgeVerdict> extract_verdict(std::string_view reply);

struct JudgeConfig {
    std::string model_id;
    std::string template_id = "judge-pairwise";
    int max_tokens = 512;
    double temperature = 0.0;
};

struct PairContext {
    std::string question_id;
    std::string category;
    std::string question;
    std::string method_a;
    std::string method_b;
};

/// Calls the judge twice, once with the answers swapped to cancel position
/// bias (the swapped verdict is mapped back before aggregation). Agreement
/// keeps the verdict; any disagreement is scored a tie. A reply without a
/// verdict marker is re-asked once, then UnparseableVerdict propagates.
MatchRecord judge_pair(const PairContext& ctx, const std::string& answer_a,
                       const std::string& answer_b, Backend& judge, const PromptLibrary& prompts,
                       const JudgeConfig& config);

/// (#wins - #losses) / #records for the given method; ties count in the
/// denominator only. Throws EmptyRecordSet on no records and
/// std::invalid_argument when a record does not involve the method.
double net_win_rate(const std::vector<MatchRecord>& records, const std::string& for_method);

std::map<std::string, double> breakdown_by_category(const std::vector<MatchRecord>& records,
                                                    const std::string& for_method);

struct ThroughputSample {
    std::string method;
    std::size_t total_tokens = 0;
    double total_time = 0;  // seconds
};

/// (tokens_m / time_m) / (tokens_b / time_b). Throws ZeroTime when either
/// sample has a non-positive time.
double throughput_ratio(const ThroughputSample& method, const ThroughputSample& baseline);

// --- corpus evaluation -------------------------------------------------------

struct AnswerEntry {
    std::string question_id;
    std::string category;
    std::string method;
    std::string answer;
    std::string question;  // optional in the corpus; question_id stands in
};

std::vector<AnswerEntry> parse_answer_corpus(const std::string& jsonl);
std::vector<AnswerEntry> load_answer_corpus(const std::string& path);

struct CorpusEvaluation {
    std::vector<MatchRecord> records;
    std::size_t skipped = 0;  // unparseable verdicts
};

/// Judges every question that has answers from both methods. Judge calls may
/// fan out over `parallelism` threads; record order follows question order.
CorpusEvaluation evaluate_corpus(const std::vector<AnswerEntry>& corpus,
                                 const std::string& method_a, const std::string& method_b,
                                 Backend& judge, const PromptLibrary& prompts,
                                 const JudgeConfig& config, std::size_t parallelism = 1);

std::string records_to_jsonl(const std::vector<MatchRecord>& records);
std::string summary_table(const std::vector<MatchRecord>& records, const std::string& method_a,
                          const std::string& method_b);

}  // namespace sgd
