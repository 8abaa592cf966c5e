#include "guidelm/review.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "guidelm/errors.hpp"
#include "guidelm/util/random.hpp"

namespace guidelm::review {

std::string_view to_string(Criterion c) {
    switch (c) {
        case Criterion::good_quality: return "good_quality";
        case Criterion::self_contained: return "self_contained";
        case Criterion::not_overhelpful: return "not_overhelpful";
        case Criterion::formal_tone: return "formal_tone";
        case Criterion::demonstrative_code_only: return "demonstrative_code_only";
        case Criterion::unidentifiable: return "unidentifiable";
        case Criterion::no_assessment_details: return "no_assessment_details";
        case Criterion::c_language_focus: return "c_language_focus";
    }
    return "";
}

std::optional<Criterion> parse_criterion(std::string_view name) {
    for (auto c : kAllCriteria) {
        if (to_string(c) == name) return c;
    }
    return std::nullopt;
}

std::string_view to_string(ReviewCategory c) {
    switch (c) {
        case ReviewCategory::yes: return "yes";
        case ReviewCategory::no: return "no";
        case ReviewCategory::not_applicable: return "not_applicable";
    }
    return "";
}

json to_json(const ReviewDecision& d) {
    json criteria = json::object();
    for (const auto& [c, v] : d.criteria) criteria[std::string(to_string(c))] = v;
    return json{{"pair_id", d.pair_id},
                {"reviewer_id", d.reviewer_id},
                {"criteria", criteria},
                {"not_applicable", d.not_applicable},
                {"note", d.note ? json(*d.note) : json(nullptr)},
                {"timestamp", format_iso8601(d.timestamp)}};
}

void validate(const ReviewDecision& d) {
    if (d.pair_id.empty()) throw ValidationError("pair_id: must be non-empty");
    if (d.reviewer_id.empty()) throw ValidationError("reviewer_id: must be non-empty");
    if (!d.not_applicable) {
        for (auto c : kAllCriteria) {
            if (!d.criteria.contains(c))
                throw ValidationError("criteria: missing '" + std::string(to_string(c)) +
                                      "' (all 8 are required unless not_applicable)");
        }
    }
}

ReviewDecision decision_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("decision must be a JSON object");
    ReviewDecision d;
    auto str = [&](const char* key) -> std::string {
        if (!j.contains(key) || !j[key].is_string()) throw ValidationError(std::string(key) + ": must be a string");
        return j[key].get<std::string>();
    };
    d.pair_id = str("pair_id");
    d.reviewer_id = str("reviewer_id");
    if (j.contains("not_applicable") && !j["not_applicable"].is_null()) {
        if (!j["not_applicable"].is_boolean()) throw ValidationError("not_applicable: must be a boolean");
        d.not_applicable = j["not_applicable"].get<bool>();
    }
    if (j.contains("criteria") && !j["criteria"].is_null()) {
        if (!j["criteria"].is_object()) throw ValidationError("criteria: must be an object");
        for (const auto& [key, value] : j["criteria"].items()) {
            const auto c = parse_criterion(key);
            if (!c) throw ValidationError("criteria: unknown criterion '" + key + "'");
            if (!value.is_boolean()) throw ValidationError("criteria." + key + ": must be a boolean");
            d.criteria[*c] = value.get<bool>();
        }
    }
    if (j.contains("note") && !j["note"].is_null()) {
        if (!j["note"].is_string()) throw ValidationError("note: must be a string");
        d.note = j["note"].get<std::string>();
    }
    d.timestamp = parse_iso8601(str("timestamp"));
    validate(d);
    return d;
}

ReviewCategory categorize(const ReviewDecision& d) {
    if (d.not_applicable) return ReviewCategory::not_applicable;
    for (auto c : kAllCriteria) {
        auto it = d.criteria.find(c);
        if (it == d.criteria.end() || !it->second) return ReviewCategory::no;
    }
    return ReviewCategory::yes;
}

std::map<std::string, std::vector<std::string>> sample_assignments(const std::vector<corpus::QAPair>& pairs,
                                                                   const std::vector<std::string>& reviewers,
                                                                   std::size_t per_reviewer, std::uint64_t seed) {
    const std::unordered_set<std::string> distinct(reviewers.begin(), reviewers.end());
    if (distinct.size() != reviewers.size()) throw ValidationError("reviewer ids must be distinct");
    const std::size_t needed = per_reviewer * reviewers.size();
    if (needed > pairs.size()) {
        throw ValidationError("insufficient pairs: " + std::to_string(reviewers.size()) + " reviewers x " +
                              std::to_string(per_reviewer) + " = " + std::to_string(needed) + " > " +
                              std::to_string(pairs.size()));
    }
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span(order));

    std::map<std::string, std::vector<std::string>> out;
    std::size_t next = 0;
    for (const auto& r : reviewers) {
        auto& ids = out[r];
        for (std::size_t k = 0; k < per_reviewer; ++k) ids.push_back(pairs[order[next++]].id);
    }
    return out;
}

json assignments_to_json(const std::map<std::string, std::vector<std::string>>& assignments) {
    json j = json::object();
    for (const auto& [reviewer, ids] : assignments) j[reviewer] = ids;
    return j;
}

std::map<std::string, std::vector<std::string>> assignments_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("assignments must be a JSON object");
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& [reviewer, ids] : j.items()) {
        if (!ids.is_array()) throw ValidationError("assignments for '" + reviewer + "' must be an array");
        out[reviewer] = ids.get<std::vector<std::string>>();
    }
    return out;
}

std::vector<ReviewDecision> fold_decisions(const std::vector<ReviewDecision>& decisions) {
    std::vector<ReviewDecision> out;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    for (const auto& d : decisions) {
        auto [it, inserted] = index.try_emplace({d.pair_id, d.reviewer_id}, out.size());
        if (inserted) {
            out.push_back(d);
        } else if (d.timestamp >= out[it->second].timestamp) {
            out[it->second] = d;
        }
    }
    return out;
}

std::map<std::string, ReviewCategory> pair_categories(const std::vector<ReviewDecision>& decisions) {
    std::map<std::string, ReviewCategory> out;
    for (const auto& d : fold_decisions(decisions)) {
        const auto c = categorize(d);
        auto [it, inserted] = out.try_emplace(d.pair_id, c);
        if (inserted) continue;
        auto& current = it->second;
        if (current == ReviewCategory::no || c == ReviewCategory::no) {
            current = ReviewCategory::no;
        } else if (current != c) {
            current = ReviewCategory::not_applicable;
        }
    }
    return out;
}

std::vector<corpus::QAPair> accept_set(const std::vector<ReviewDecision>& decisions,
                                       const std::vector<corpus::QAPair>& pairs) {
    std::unordered_map<std::string, std::size_t> known;
    for (std::size_t i = 0; i < pairs.size(); ++i) known.emplace(pairs[i].id, i);
    for (const auto& d : decisions) {
        if (!known.contains(d.pair_id)) throw ValidationError("decision references unknown pair '" + d.pair_id + "'");
    }
    const auto categories = pair_categories(decisions);
    std::vector<corpus::QAPair> out;
    for (const auto& p : pairs) {
        auto it = categories.find(p.id);
        if (it == categories.end() || it->second != ReviewCategory::yes) continue;
        out.push_back(p);
        out.back().advance(corpus::Stage::reviewed);
    }
    return out;
}

std::map<ReviewCategory, CategoryStat> review_stats(const std::vector<ReviewDecision>& decisions) {
    const auto categories = pair_categories(decisions);
    std::map<ReviewCategory, CategoryStat> out;
    for (const auto& [id, c] : categories) ++out[c].count;
    const auto total = static_cast<std::int64_t>(categories.size());
    for (auto& [c, stat] : out) stat.percentage = Tenths::percentage(static_cast<std::int64_t>(stat.count), total);
    return out;
}

json stats_to_json(const std::map<ReviewCategory, CategoryStat>& stats) {
    json j = json::object();
    std::size_t total = 0;
    for (const auto& [c, s] : stats) {
        j[std::string(to_string(c))] = {{"count", s.count}, {"percentage", s.percentage.to_double()}};
        total += s.count;
    }
    j["total"] = total;
    return j;
}

DecisionLogContents read_decision_log(const std::filesystem::path& path) {
    DecisionLogContents out;
    if (!std::filesystem::exists(path)) return out;
    for (auto& [line, j] : read_json_lines(path, out.errors)) {
        try {
            out.decisions.push_back(decision_from_json(j));
        } catch (const ValidationError& e) {
            out.errors.push_back({line, e.what()});
        }
    }
    return out;
}

}  // namespace guidelm::review
