#include "sgd/eval.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace sgd {

using nlohmann::json;

std::string_view to_string(JudgeVerdict verdict) {
    switch (verdict) {
        case JudgeVerdict::WinA: return "win_a";
        case JudgeVerdict::WinB: return "win_b";
        case JudgeVerdict::Tie: return "tie";
    }
    return "unknown";
}

std::optional<JudgeVerdict> extract_verdict(std::string_view reply) {
    std::optional<JudgeVerdict> verdict;
    std::size_t best = 0;
    for (auto [marker, value] : {std::pair{"[[A]]", JudgeVerdict::WinA},
                                 std::pair{"[[B]]", JudgeVerdict::WinB},
                                 std::pair{"[[C]]", JudgeVerdict::Tie}}) {
        std::size_t pos = reply.rfind(marker);
        if (pos != std::string_view::npos && (!verdict || pos > best)) {
            best = pos;
            verdict = value;
        }
    }
    return verdict;
}

namespace {

JudgeVerdict ask_judge(Backend& judge, const PromptLibrary& prompts, const JudgeConfig& config,
                       const PairContext& ctx, const std::string& first, const std::string& second,
                       const std::string& request_id) {
    std::string prompt = render_judge_prompt(prompts, config.template_id, ctx.question, first, second);
    GenerationRequest request{config.model_id, prompt, config.max_tokens, config.temperature,
                              request_id, {}};
    for (int attempt = 0; attempt < 2; ++attempt) {
        GenerationResult result = judge.generate(request);
        if (auto verdict = extract_verdict(result.text)) return *verdict;
        request.request_id += "-reask";
    }
    throw UnparseableVerdict("judge reply for " + ctx.question_id + " carries no [[A]]/[[B]]/[[C]] marker");
}

JudgeVerdict unswap(JudgeVerdict verdict) {
    switch (verdict) {
        case JudgeVerdict::WinA: return JudgeVerdict::WinB;
        case JudgeVerdict::WinB: return JudgeVerdict::WinA;
        case JudgeVerdict::Tie: return JudgeVerdict::Tie;
    }
    return JudgeVerdict::Tie;
}

}  // namespace

MatchRecord judge_pair(const PairContext& ctx, const std::string& answer_a,
                       const std::string& answer_b, Backend& judge, const PromptLibrary& prompts,
                       const JudgeConfig& config) {
    MatchRecord record;
    record.question_id = ctx.question_id;
    record.category = ctx.category;
    record.method_a = ctx.method_a;
    record.method_b = ctx.method_b;

    JudgeVerdict in_order =
        ask_judge(judge, prompts, config, ctx, answer_a, answer_b, ctx.question_id + "-j1");
    JudgeVerdict swapped =
        ask_judge(judge, prompts, config, ctx, answer_b, answer_a, ctx.question_id + "-j2");
    record.raw_verdicts = {in_order, unswap(swapped)};
    record.verdict = record.raw_verdicts.first == record.raw_verdicts.second
                         ? record.raw_verdicts.first
                         : JudgeVerdict::Tie;
    return record;
}

double net_win_rate(const std::vector<MatchRecord>& records, const std::string& for_method) {
    if (records.empty()) {
        throw EmptyRecordSet("net_win_rate over an empty record set");
    }
    long wins = 0;
    long losses = 0;
    for (const MatchRecord& r : records) {
        bool is_a = r.method_a == for_method;
        bool is_b = r.method_b == for_method;
        if (!is_a && !is_b) {
            throw std::invalid_argument("record " + r.question_id + " does not involve method " +
                                        for_method);
        }
        if (r.verdict == JudgeVerdict::Tie) continue;
        bool won = (r.verdict == JudgeVerdict::WinA && is_a) ||
                   (r.verdict == JudgeVerdict::WinB && is_b);
        won ? ++wins : ++losses;
    }
    return static_cast<double>(wins - losses) / static_cast<double>(records.size());
}

std::map<std::string, double> breakdown_by_category(const std::vector<MatchRecord>& records,
                                                    const std::string& for_method) {
    std::map<std::string, std::vector<MatchRecord>> buckets;
    for (const MatchRecord& r : records) buckets[r.category].push_back(r);
    std::map<std::string, double> out;
    for (const auto& [category, subset] : buckets) {
        out[category] = net_win_rate(subset, for_method);
    }
    return out;
}

double throughput_ratio(const ThroughputSample& method, const ThroughputSample& baseline) {
    if (method.total_time <= 0 || baseline.total_time <= 0) {
        throw ZeroTime("throughput samples need positive total_time");
    }
    double method_rate = static_cast<double>(method.total_tokens) / method.total_time;
    double baseline_rate = static_cast<double>(baseline.total_tokens) / baseline.total_time;
    return method_rate / baseline_rate;
}

std::vector<AnswerEntry> parse_answer_corpus(const std::string& jsonl) {
    std::vector<AnswerEntry> out;
    std::istringstream in(jsonl);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded()) {
            throw std::invalid_argument("corpus line " + std::to_string(line_no) +
                                        " is not valid JSON");
        }
        AnswerEntry entry;
        entry.question_id = doc.at("question_id").get<std::string>();
        entry.category = doc.value("category", "");
        entry.method = doc.at("method").get<std::string>();
        entry.answer = doc.at("answer").get<std::string>();
        entry.question = doc.value("question", entry.question_id);
        out.push_back(std::move(entry));
    }
    return out;
}

std::vector<AnswerEntry> load_answer_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open corpus file: " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_answer_corpus(text.str());
}

CorpusEvaluation evaluate_corpus(const std::vector<AnswerEntry>& corpus,
                                 const std::string& method_a, const std::string& method_b,
                                 Backend& judge, const PromptLibrary& prompts,
                                 const JudgeConfig& config, std::size_t parallelism) {
    struct Pair {
        PairContext ctx;
        std::string answer_a;
        std::string answer_b;
    };
    std::vector<Pair> pairs;
    std::vector<std::string> order;
    std::map<std::string, std::map<std::string, const AnswerEntry*>> by_question;
    for (const AnswerEntry& entry : corpus) {
        if (!by_question.contains(entry.question_id)) order.push_back(entry.question_id);
        by_question[entry.question_id][entry.method] = &entry;
    }
    for (const std::string& qid : order) {
        const auto& methods = by_question[qid];
        auto a = methods.find(method_a);
        auto b = methods.find(method_b);
        if (a == methods.end() || b == methods.end()) continue;
        Pair p;
        p.ctx = {qid, a->second->category, a->second->question, method_a, method_b};
        p.answer_a = a->second->answer;
        p.answer_b = b->second->answer;
        pairs.push_back(std::move(p));
    }

    std::vector<std::optional<MatchRecord>> slots(pairs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> skipped{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= pairs.size()) return;
            try {
                slots[i] = judge_pair(pairs[i].ctx, pairs[i].answer_a, pairs[i].answer_b, judge,
                                      prompts, config);
            } catch (const UnparseableVerdict&) {
                skipped.fetch_add(1);
            }
        }
    };
    std::size_t threads = std::max<std::size_t>(1, std::min(parallelism, pairs.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    CorpusEvaluation out;
    out.skipped = skipped.load();
    for (auto& slot : slots) {
        if (slot) out.records.push_back(std::move(*slot));
    }
    return out;
}

std::string records_to_jsonl(const std::vector<MatchRecord>& records) {
    std::string out;
    for (const MatchRecord& r : records) {
        json line = {{"question_id", r.question_id},
                     {"category", r.category},
                     {"method_a", r.method_a},
                     {"method_b", r.method_b},
                     {"verdict", std::string(to_string(r.verdict))},
                     {"raw_verdicts", json::array({std::string(to_string(r.raw_verdicts.first)),
                                                   std::string(to_string(r.raw_verdicts.second))})}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

std::string summary_table(const std::vector<MatchRecord>& records, const std::string& method_a,
                          const std::string& method_b) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3);
    if (records.empty()) {
        out << "no records\n";
        return out.str();
    }
    long wins_a = 0, wins_b = 0, ties = 0;
    for (const MatchRecord& r : records) {
        if (r.verdict == JudgeVerdict::WinA) ++wins_a;
        else if (r.verdict == JudgeVerdict::WinB) ++wins_b;
        else ++ties;
    }
    out << "records: " << records.size() << "  " << method_a << " wins: " << wins_a << "  "
        << method_b << " wins: " << wins_b << "  ties: " << ties << "\n";
    out << "net win rate (" << method_a << "): " << net_win_rate(records, method_a) << "\n";
    out << "net win rate (" << method_b << "): " << net_win_rate(records, method_b) << "\n";
    out << "by category (" << method_a << "):\n";
    for (const auto& [category, rate] : breakdown_by_category(records, method_a)) {
        out << "  " << (category.empty() ? "(uncategorized)" : category) << ": " << rate << "\n";
    }
    return out.str();
}

}  // namespace sgd
