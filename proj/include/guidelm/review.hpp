#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guidelm/corpus.hpp"
#include "guidelm/util/decimal.hpp"
#include "guidelm/util/timestamp.hpp"

namespace guidelm::review {

/// The eight inclusion criteria a reviewer checks for each pair.
enum class Criterion {
    good_quality,
    self_contained,
    not_overhelpful,
    formal_tone,
    demonstrative_code_only,
    unidentifiable,
    no_assessment_details,
    c_language_focus,
};

inline constexpr std::array<Criterion, 8> kAllCriteria = {
    Criterion::good_quality,          Criterion::self_contained, Criterion::not_overhelpful,
    Criterion::formal_tone,           Criterion::demonstrative_code_only,
    Criterion::unidentifiable,        Criterion::no_assessment_details,
    Criterion::c_language_focus,
};

std::string_view to_string(Criterion c);
std::optional<Criterion> parse_criterion(std::string_view name);

enum class ReviewCategory { yes, no, not_applicable };

std::string_view to_string(ReviewCategory c);

struct ReviewDecision {
    std::string pair_id;
    std::string reviewer_id;
    std::map<Criterion, bool> criteria;
    bool not_applicable = false;
    std::optional<std::string> note;  // reviewer-only; never exported
    Timestamp timestamp{};

    friend bool operator==(const ReviewDecision&, const ReviewDecision&) = default;
};

json to_json(const ReviewDecision& d);

/// Throws ValidationError naming the offending field. Enforces that all 8 criteria are present
/// unless not_applicable is set.
ReviewDecision decision_from_json(const json& j);

/// Throws ValidationError if the decision breaks its invariants.
void validate(const ReviewDecision& d);

/// not_applicable wins; otherwise yes iff all 8 criteria are true.
ReviewCategory categorize(const ReviewDecision& d);

/// Disjoint random sample: each reviewer gets exactly per_reviewer pair ids.
/// Throws ValidationError when per_reviewer * reviewers exceeds the pair count.
std::map<std::string, std::vector<std::string>> sample_assignments(const std::vector<corpus::QAPair>& pairs,
                                                                   const std::vector<std::string>& reviewers,
                                                                   std::size_t per_reviewer, std::uint64_t seed);

json assignments_to_json(const std::map<std::string, std::vector<std::string>>& assignments);
std::map<std::string, std::vector<std::string>> assignments_from_json(const json& j);

/// Keeps one decision per (pair_id, reviewer_id): the later timestamp wins, and on equal
/// timestamps the later position in `decisions` wins. Output is ordered by first appearance.
std::vector<ReviewDecision> fold_decisions(const std::vector<ReviewDecision>& decisions);

/// Category of each pair after folding. A pair reviewed by several reviewers is yes only if
/// every surviving decision is yes, no if any is no, otherwise not_applicable.
std::map<std::string, ReviewCategory> pair_categories(const std::vector<ReviewDecision>& decisions);

/// Pairs categorized yes, in corpus order, advanced to Stage::reviewed.
/// Throws ValidationError if a decision references an unknown pair.
std::vector<corpus::QAPair> accept_set(const std::vector<ReviewDecision>& decisions,
                                       const std::vector<corpus::QAPair>& pairs);

struct CategoryStat {
    std::size_t count = 0;
    Tenths percentage;

    friend bool operator==(const CategoryStat&, const CategoryStat&) = default;
};

/// Count and share of decided pairs per category. Categories with no pairs are omitted.
std::map<ReviewCategory, CategoryStat> review_stats(const std::vector<ReviewDecision>& decisions);

json stats_to_json(const std::map<ReviewCategory, CategoryStat>& stats);

/// Append-only decision log; the current state is a fold over all lines.
struct DecisionLogContents {
    std::vector<ReviewDecision> decisions;
    std::vector<LineError> errors;
};
DecisionLogContents read_decision_log(const std::filesystem::path& path);

}  // namespace guidelm::review
