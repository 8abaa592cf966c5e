#include "guidelm/cleanse.hpp"

#include <set>

#include "guidelm/errors.hpp"
#include "guidelm/util/utf8.hpp"

namespace guidelm::cleanse {
namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string collapse_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += c;
    }
    return out;
}

std::string delete_templates(std::string text, const std::vector<std::string>& templates) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& t : templates) {
            if (t.empty()) continue;
            for (auto pos = text.find(t); pos != std::string::npos; pos = text.find(t, pos)) {
                text.erase(pos, t.size());
                changed = true;
            }
        }
    }
    return text;
}

std::string escape_regex(std::string_view s) {
    static constexpr std::string_view special = R"(\^$.|?*+()[]{}/-)";
    std::string out;
    for (char c : s) {
        if (special.find(c) != std::string_view::npos) out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::vector<PiiPattern> CleanseConfig::default_pii_patterns() {
    // Student IDs are assumed to look like z1234567; deployments adjust these in config.
    return {
        {"email", R"([A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,})"},
        {"student_id", R"(\b[zZ][0-9]{7}\b)"},
        {"long_number", R"(\b[0-9]{7,10}\b)"},
        {"url", R"((https?://|www\.)[^\s]+)"},
    };
}

Cleanser::Cleanser(CleanseConfig config) : config_(std::move(config)) {
    if (config_.min_question_chars < 1 || config_.min_answer_chars < 1)
        throw ConfigError("length thresholds must be at least 1");
    std::set<std::string> names;
    for (const auto& p : config_.pii_patterns) {
        if (p.rule_name.empty()) throw ConfigError("PII rule with empty name");
        if (p.rule_name == kNameRule) throw ConfigError("PII rule name '" + p.rule_name + "' is reserved");
        if (!names.insert(p.rule_name).second) throw ConfigError("duplicate PII rule name '" + p.rule_name + "'");
        try {
            pii_.emplace_back(p.rule_name, std::regex(p.source, std::regex::ECMAScript | std::regex::optimize));
        } catch (const std::regex_error& e) {
            throw ConfigError("PII rule '" + p.rule_name + "' does not compile: " + e.what());
        }
    }
    std::string alternatives;
    for (const auto& n : config_.name_blacklist) {
        if (n.empty()) continue;
        if (!alternatives.empty()) alternatives += '|';
        alternatives += escape_regex(n);
    }
    if (!alternatives.empty()) {
        names_ = std::make_unique<std::regex>("(^|[^A-Za-z0-9_])(" + alternatives + ")(?=[^A-Za-z0-9_]|$)",
                                              std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    }
}

Cleanser::Result Cleanser::clean_text(std::string_view input) const {
    Result result;
    std::string text(input);
    for (;;) {
        std::string next = delete_templates(text, config_.template_blacklist);

        for (const auto& [rule, re] : pii_) {
            std::string replaced;
            std::size_t last = 0;
            for (auto it = std::sregex_iterator(next.begin(), next.end(), re); it != std::sregex_iterator(); ++it) {
                const auto& m = *it;
                if (m.length(0) == 0) continue;
                const auto pos = static_cast<std::size_t>(m.position(0));
                replaced.append(next, last, pos - last);
                replaced += ' ';
                last = pos + static_cast<std::size_t>(m.length(0));
                result.notes.push_back({rule, utf8::scalar_count(m.str(0))});
            }
            if (last == 0 && replaced.empty()) continue;
            replaced.append(next, last, std::string::npos);
            next = std::move(replaced);
        }

        if (names_) {
            std::string replaced;
            std::size_t last = 0;
            for (auto it = std::sregex_iterator(next.begin(), next.end(), *names_); it != std::sregex_iterator();
                 ++it) {
                const auto& m = *it;
                const auto pos = static_cast<std::size_t>(m.position(2));
                replaced.append(next, last, pos - last);
                replaced += ' ';
                last = pos + static_cast<std::size_t>(m.length(2));
                result.notes.push_back({std::string(kNameRule), utf8::scalar_count(m.str(2))});
            }
            if (last != 0 || !replaced.empty()) {
                replaced.append(next, last, std::string::npos);
                next = std::move(replaced);
            }
        }

        next = collapse_whitespace(next);
        if (next == text) break;
        text = std::move(next);
    }
    result.text = std::move(text);
    return result;
}

LengthDecision length_filter(const corpus::QAPair& pair, const CleanseConfig& config) {
    const bool short_question = utf8::scalar_count(pair.question_text) < config.min_question_chars;
    const bool short_answer = utf8::scalar_count(pair.answer_text) < config.min_answer_chars;
    return (short_question || short_answer) ? LengthDecision::drop : LengthDecision::keep;
}

json to_json(const CleanseStats& stats) {
    json by_rule = json::object();
    for (const auto& [rule, count] : stats.redactions_by_rule) by_rule[rule] = count;
    return json{{"input_count", stats.input_count},
                {"kept_count", stats.kept_count},
                {"dropped_short_count", stats.dropped_short_count},
                {"redactions_by_rule", by_rule}};
}

CleanseOutput run_cleanse(const std::vector<corpus::QAPair>& pairs, const CleanseConfig& config) {
    const Cleanser cleanser(config);
    CleanseOutput out;
    out.stats.input_count = pairs.size();
    for (const auto& p : cleanser.config().pii_patterns) out.stats.redactions_by_rule[p.rule_name] = 0;
    if (!config.name_blacklist.empty()) out.stats.redactions_by_rule[std::string(kNameRule)] = 0;

    for (const auto& original : pairs) {
        if (original.stage > corpus::Stage::cleansed)
            throw ValidationError("pair " + original.id + " is already at stage " +
                                  std::string(corpus::to_string(original.stage)));
        corpus::QAPair pair = original;
        auto q = cleanser.clean_text(pair.question_text);
        auto a = cleanser.clean_text(pair.answer_text);
        pair.question_text = std::move(q.text);
        pair.answer_text = std::move(a.text);
        for (auto* notes : {&q.notes, &a.notes}) {
            for (auto& n : *notes) {
                ++out.stats.redactions_by_rule[n.rule_name];
                pair.redactions.push_back(std::move(n));
            }
        }
        if (length_filter(pair, config) == LengthDecision::drop) {
            ++out.stats.dropped_short_count;
            continue;
        }
        pair.advance(corpus::Stage::cleansed);
        out.pairs.push_back(std::move(pair));
        ++out.stats.kept_count;
    }
    return out;
}

std::vector<std::string> load_blacklist(const std::filesystem::path& path) {
    std::vector<std::string> entries;
    for_each_line(path, [&](std::size_t, std::string_view line) {
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string_view::npos) return;
        const auto last = line.find_last_not_of(" \t");
        entries.emplace_back(line.substr(first, last - first + 1));
    });
    return entries;
}

}  // namespace guidelm::cleanse
