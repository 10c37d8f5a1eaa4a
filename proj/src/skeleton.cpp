#include "sgd/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace sgd {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

enum class QuoteClass { None, Single, Double };

// Recognizes ASCII and typographic quote glyphs. Returns the glyph length in
// bytes (0 when `pos` does not start a quote).
std::size_t quote_at(std::string_view s, std::size_t pos, QuoteClass& cls) {
    cls = QuoteClass::None;
    if (pos >= s.size()) return 0;
    char c = s[pos];
    if (c == '\'') { cls = QuoteClass::Single; return 1; }
    if (c == '"') { cls = QuoteClass::Double; return 1; }
    // U+2018/U+2019 -> E2 80 98/99, U+201C/U+201D -> E2 80 9C/9D
    if (pos + 2 < s.size() && static_cast<unsigned char>(s[pos]) == 0xE2 &&
        static_cast<unsigned char>(s[pos + 1]) == 0x80) {
        unsigned char b = static_cast<unsigned char>(s[pos + 2]);
        if (b == 0x98 || b == 0x99) { cls = QuoteClass::Single; return 3; }
        if (b == 0x9C || b == 0x9D) { cls = QuoteClass::Double; return 3; }
    }
    return 0;
}

// Finds a quote glyph of class `cls` whose last byte sits at `end_pos - 1`.
// Returns its start position, or npos.
std::size_t quote_ending_at(std::string_view s, std::size_t end_pos, QuoteClass cls) {
    for (std::size_t len : {std::size_t{1}, std::size_t{3}}) {
        if (end_pos < len) continue;
        QuoteClass got;
        if (quote_at(s, end_pos - len, got) == len && got == cls) return end_pos - len;
    }
    return std::string_view::npos;
}

void skip_ws(std::string_view s, std::size_t& pos) {
    while (pos < s.size() && is_space(s[pos])) ++pos;
}

std::size_t rewind_ws(std::string_view s, std::size_t pos) {
    while (pos > 0 && is_space(s[pos - 1])) --pos;
    return pos;
}

// Strips leading list-item decoration: bullets ("- ", "* ", "+ ", U+2022) and
// enumerators ("3. ", "3) "), possibly stacked.
std::string_view strip_list_prefix(std::string_view s) {
    for (;;) {
        s = trim(s);
        if (s.empty()) return s;
        if ((s[0] == '-' || s[0] == '*' || s[0] == '+') && s.size() > 1 && is_space(s[1])) {
            s.remove_prefix(2);
            continue;
        }
        if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xE2 &&
            static_cast<unsigned char>(s[1]) == 0x80 &&
            static_cast<unsigned char>(s[2]) == 0xA2) {  // U+2022 bullet
            s.remove_prefix(3);
            continue;
        }
        std::size_t d = 0;
        while (d < s.size() && std::isdigit(static_cast<unsigned char>(s[d]))) ++d;
        if (d > 0 && d < s.size() && (s[d] == '.' || s[d] == ')')) {
            s.remove_prefix(d + 1);
            continue;
        }
        return s;
    }
}

struct RawNodeLine {
    std::string summary;
    std::vector<long long> deps;          // emission order, unvalidated
    std::optional<double> difficulty;
};

// Parses one candidate line. On failure fills `error` and returns nullopt.
std::optional<RawNodeLine> parse_node_line(std::string_view line, std::string& error) {
    std::size_t pos = 4;  // past "Node"
    skip_ws(line, pos);
    if (pos >= line.size() || line[pos] != '(') {
        error = "expected '(' after Node";
        return std::nullopt;
    }
    ++pos;
    skip_ws(line, pos);

    QuoteClass open_cls;
    std::size_t open_len = quote_at(line, pos, open_cls);
    if (open_len == 0) {
        error = "expected quoted summary";
        return std::nullopt;
    }
    std::size_t summary_begin = pos + open_len;

    // Locate the real dependency key: the last occurrence of "dependency"
    // preceded (modulo whitespace) by a comma preceded by a closing quote of
    // the opening class. Scanning from the end lets summaries themselves
    // contain quotes or the word "dependency".
    constexpr std::string_view kKey = "dependency";
    std::size_t search_from = line.size();
    std::size_t key_pos = std::string_view::npos;
    std::size_t summary_end = std::string_view::npos;
    while (search_from > summary_begin) {
        std::size_t k = line.rfind(kKey, search_from - 1);
        if (k == std::string_view::npos || k < summary_begin) break;
        search_from = k;
        std::size_t after = k + kKey.size();
        std::size_t eq = after;
        skip_ws(line, eq);
        if (eq >= line.size() || line[eq] != '=') continue;
        std::size_t before = rewind_ws(line, k);
        if (before == 0 || line[before - 1] != ',') continue;
        before = rewind_ws(line, before - 1);
        std::size_t q = quote_ending_at(line, before, open_cls);
        if (q == std::string_view::npos || q < summary_begin) continue;
        key_pos = k;
        summary_end = q;
        break;
    }
    if (key_pos == std::string_view::npos) {
        error = "no dependency list found";
        return std::nullopt;
    }

    RawNodeLine out;
    out.summary = std::string(line.substr(summary_begin, summary_end - summary_begin));
    if (trim(out.summary).empty()) {
        error = "summary is blank";
        return std::nullopt;
    }

    pos = key_pos + kKey.size();
    skip_ws(line, pos);
    ++pos;  // '=' verified above
    skip_ws(line, pos);
    if (pos >= line.size() || line[pos] != '[') {
        error = "expected '[' after dependency=";
        return std::nullopt;
    }
    ++pos;
    for (;;) {
        skip_ws(line, pos);
        if (pos < line.size() && line[pos] == ']') {
            ++pos;
            break;
        }
        std::size_t start = pos;
        if (pos < line.size() && (line[pos] == '-' || line[pos] == '+')) ++pos;
        while (pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos]))) ++pos;
        if (pos == start || (pos == start + 1 && !std::isdigit(static_cast<unsigned char>(line[start])))) {
            error = "bad dependency element";
            return std::nullopt;
        }
        out.deps.push_back(std::strtoll(std::string(line.substr(start, pos - start)).c_str(), nullptr, 10));
        skip_ws(line, pos);
        if (pos < line.size() && line[pos] == ',') {
            ++pos;
            continue;
        }
        if (pos < line.size() && line[pos] == ']') {
            ++pos;
            break;
        }
        error = "expected ',' or ']' in dependency list";
        return std::nullopt;
    }

    skip_ws(line, pos);
    if (pos < line.size() && line[pos] == ',') {
        ++pos;
        skip_ws(line, pos);
        constexpr std::string_view kDifficulty = "difficulty";
        if (line.substr(pos, kDifficulty.size()) != kDifficulty) {
            error = "expected difficulty clause";
            return std::nullopt;
        }
        pos += kDifficulty.size();
        skip_ws(line, pos);
        if (pos >= line.size() || line[pos] != '=') {
            error = "expected '=' after difficulty";
            return std::nullopt;
        }
        ++pos;
        skip_ws(line, pos);
        const char* begin = line.data() + pos;
        char* end = nullptr;
        double value = std::strtod(begin, &end);
        if (end == begin) {
            error = "bad difficulty value";
            return std::nullopt;
        }
        out.difficulty = value;
        pos += static_cast<std::size_t>(end - begin);
        skip_ws(line, pos);
    }

    if (pos >= line.size() || line[pos] != ')') {
        error = "expected ')'";
        return std::nullopt;
    }
    ++pos;
    while (pos < line.size() && (is_space(line[pos]) || line[pos] == '.' || line[pos] == ',' || line[pos] == ';')) ++pos;
    if (pos != line.size()) {
        error = "trailing text after ')'";
        return std::nullopt;
    }
    return out;
}

int round_half_up(double v) {
    return static_cast<int>(std::floor(v + 0.5));
}

}  // namespace

std::string_view to_string(ParseDiagnostic::Kind kind) {
    switch (kind) {
        case ParseDiagnostic::Kind::UnparseableLine: return "unparseable-line";
        case ParseDiagnostic::Kind::DroppedForwardRef: return "dropped-forward-ref";
        case ParseDiagnostic::Kind::DroppedSelfRef: return "dropped-self-ref";
        case ParseDiagnostic::Kind::ClampedDifficulty: return "clamped-difficulty";
        case ParseDiagnostic::Kind::MissingDifficulty: return "missing-difficulty";
    }
    return "unknown";
}

const SkeletonNode& SkeletonGraph::node(std::size_t index) const {
    if (index < 1 || index > nodes.size()) {
        throw std::out_of_range("skeleton node index out of range: " + std::to_string(index));
    }
    return nodes[index - 1];
}

void SkeletonGraph::validate() const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const SkeletonNode& n = nodes[i];
        if (n.index != i + 1) {
            throw std::invalid_argument("node indices must be contiguous 1..n");
        }
        if (trim(n.summary).empty()) {
            throw std::invalid_argument("node summary must be non-empty");
        }
        if (n.summary.find('\n') != std::string::npos || n.summary.find('\r') != std::string::npos) {
            throw std::invalid_argument("node summary must be single-line");
        }
        for (std::size_t d : n.deps) {
            if (d < 1 || d >= n.index) {
                throw std::invalid_argument("dependencies must point strictly backward");
            }
        }
        if (mode == SkeletonMode::NonAdaptive) {
            if (n.difficulty.has_value()) {
                throw std::invalid_argument("non-adaptive nodes must not carry a difficulty");
            }
        } else {
            if (!n.difficulty.has_value()) {
                throw std::invalid_argument("adaptive nodes must carry a difficulty");
            }
            if (*n.difficulty < kMinDifficulty || *n.difficulty > kMaxDifficulty) {
                throw std::invalid_argument("difficulty must lie in [1,10]");
            }
        }
    }
}

ParseResult parse_skeleton(std::string_view raw, SkeletonMode mode) {
    ParseResult result;
    result.graph.mode = mode;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        std::size_t nl = raw.find('\n', pos);
        std::string_view line = raw.substr(pos, nl == std::string_view::npos ? raw.size() - pos : nl - pos);
        pos = (nl == std::string_view::npos) ? raw.size() + 1 : nl + 1;
        ++line_no;

        std::string_view body = strip_list_prefix(line);
        // A candidate is "Node" followed (after whitespace) by '('. Everything
        // else is surrounding prose and is skipped without comment.
        if (!body.starts_with("Node")) continue;
        std::size_t after = 4;
        skip_ws(body, after);
        if (after >= body.size() || body[after] != '(') continue;

        std::string error;
        std::optional<RawNodeLine> parsed = parse_node_line(body, error);
        if (!parsed) {
            result.diagnostics.push_back({ParseDiagnostic::Kind::UnparseableLine, line_no, error});
            continue;
        }

        SkeletonNode node;
        node.index = result.graph.nodes.size() + 1;
        node.summary = std::move(parsed->summary);

        for (long long ref : parsed->deps) {
            if (ref == static_cast<long long>(node.index)) {
                result.diagnostics.push_back({ParseDiagnostic::Kind::DroppedSelfRef, line_no,
                                              "node " + std::to_string(node.index) + " references itself"});
                continue;
            }
            if (ref <= 0 || ref > static_cast<long long>(node.index)) {
                result.diagnostics.push_back({ParseDiagnostic::Kind::DroppedForwardRef, line_no,
                                              "reference " + std::to_string(ref) + " is outside [1," +
                                                  std::to_string(node.index - 1) + "]"});
                continue;
            }
            node.deps.insert(static_cast<std::size_t>(ref));  // duplicates collapse silently
        }

        if (mode == SkeletonMode::Adaptive) {
            if (parsed->difficulty.has_value()) {
                double value = *parsed->difficulty;
                int normalized = std::clamp(round_half_up(value), kMinDifficulty, kMaxDifficulty);
                if (static_cast<double>(normalized) != value) {
                    std::ostringstream detail;
                    detail << "difficulty " << value << " adjusted to " << normalized;
                    result.diagnostics.push_back(
                        {ParseDiagnostic::Kind::ClampedDifficulty, line_no, detail.str()});
                }
                node.difficulty = normalized;
            } else {
                node.difficulty = kDefaultDifficulty;
                result.diagnostics.push_back({ParseDiagnostic::Kind::MissingDifficulty, line_no,
                                              "defaulted to " + std::to_string(kDefaultDifficulty)});
            }
        }
        // Non-adaptive mode ignores any difficulty clause: the clause is legal
        // syntax there but not part of the graph.

        result.graph.nodes.push_back(std::move(node));
    }

    if (result.graph.nodes.empty()) {
        throw NoNodesFound("no skeleton nodes found (" + std::to_string(result.diagnostics.size()) +
                           " unparseable candidate line(s))");
    }
    result.graph.validate();
    return result;
}

std::string render_skeleton(const SkeletonGraph& graph) {
    graph.validate();
    std::string out;
    for (const SkeletonNode& n : graph.nodes) {
        out += "Node('";
        out += n.summary;
        out += "', dependency=[";
        bool first = true;
        for (std::size_t d : n.deps) {
            if (!first) out += ',';
            out += std::to_string(d);
            first = false;
        }
        out += ']';
        if (n.difficulty.has_value()) {
            out += ", difficulty=";
            out += std::to_string(*n.difficulty);
        }
        out += ")\n";
    }
    return out;
}

}  // namespace sgd
