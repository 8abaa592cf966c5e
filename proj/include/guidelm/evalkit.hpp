#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "guidelm/llmclient.hpp"
#include "guidelm/promptgen.hpp"
#include "guidelm/util/decimal.hpp"
#include "guidelm/util/jsonl.hpp"

namespace guidelm::evalkit {

using promptgen::EventKind;

inline constexpr std::array<EventKind, 2> kEventKinds = {EventKind::compile_time, EventKind::run_time};

/// Rubric properties C1..C9, in rubric order.
enum class RubricProperty {
    conceptually_accurate,
    inaccuracy_present,
    suggestions_correct,
    relevant_to_error,
    relevant_to_novice,
    complete_explanation,
    overhelpful,
    economy_of_words,
    socratic_guidance,
};

inline constexpr std::array<RubricProperty, 9> kAllProperties = {
    RubricProperty::conceptually_accurate, RubricProperty::inaccuracy_present, RubricProperty::suggestions_correct,
    RubricProperty::relevant_to_error,     RubricProperty::relevant_to_novice, RubricProperty::complete_explanation,
    RubricProperty::overhelpful,           RubricProperty::economy_of_words,   RubricProperty::socratic_guidance,
};

/// "conceptually_accurate" etc.
std::string_view to_string(RubricProperty p);
/// "C1".."C9".
std::string key(RubricProperty p);
/// Row label used in the delta table, e.g. "Conceptual Accuracy".
std::string_view display_name(RubricProperty p);
/// Accepts either the label or the C-key.
std::optional<RubricProperty> parse_property(std::string_view name);

struct ModelResponse {
    std::string model_id;
    std::string text;

    friend bool operator==(const ModelResponse&, const ModelResponse&) = default;
};

/// One error event with one response per model. Raters see slots, never model ids.
struct EvalItem {
    std::string item_id;
    EventKind event_kind = EventKind::compile_time;
    std::vector<ModelResponse> responses;  // in session model order
    std::vector<std::string> blind_labels;  // display slot -> model id
    bool calibration = false;
    std::string source_code;
    std::string error_and_explanation;

    const std::string& model_for_slot(std::size_t slot) const { return blind_labels.at(slot); }
    const std::string& text_for_slot(std::size_t slot) const;
    std::size_t slot_count() const { return blind_labels.size(); }

    friend bool operator==(const EvalItem&, const EvalItem&) = default;
};

/// "A", "B", ... for display slot indices.
std::string slot_label(std::size_t slot);

struct Session {
    std::uint64_t seed = 0;
    std::vector<std::string> models;
    std::vector<EvalItem> items;
    /// rater -> item ids in the order they are served (calibration items first).
    std::map<std::string, std::vector<std::string>> rater_items;

    const EvalItem* find(std::string_view item_id) const;

    friend bool operator==(const Session&, const Session&) = default;
};

/// model id -> item id -> response text.
using ModelOutputs = std::map<std::string, std::map<std::string, std::string>>;

/// One item per event with a seeded blind permutation per item; the first calibration_count
/// items are calibration items. Throws ValidationError when a model lacks an output for an
/// event or calibration_count exceeds the event count.
Session make_sessions(const std::vector<promptgen::ErrorEvent>& events, const std::vector<std::string>& models,
                      const ModelOutputs& outputs, std::uint64_t seed, std::size_t calibration_count);

/// Every rater gets all calibration items, then a disjoint round-robin share of the rest.
void assign_raters(Session& session, const std::vector<std::string>& raters);

/// Asks each model for a response to the tutor prompt of each event.
ModelOutputs generate_outputs(const std::vector<promptgen::ErrorEvent>& events,
                              const std::vector<std::pair<std::string, llm::ChatClient*>>& models);

json to_json(const Session& session);
Session session_from_json(const json& j);

struct RatingRecord {
    std::string item_id;
    std::string rater_id;
    std::size_t slot = 0;
    std::map<RubricProperty, bool> properties;
    std::optional<int> rank;  // 1 (best) .. 4, or unranked

    friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

json to_json(const RatingRecord& r);
/// Shape check only; session-dependent checks happen in RatingBook.
RatingRecord rating_from_json(const json& j);

struct RecordResult {
    bool accepted = false;
    bool calibration = false;  // accepted but excluded from aggregates
    std::string reason;        // why it was rejected
};

/// Current rating state: one record per (item, rater, slot), last write wins.
class RatingBook {
public:
    /// Validates against the session and stores the record. Rejections: unknown item, slot out
    /// of range, missing properties, rank outside 1..4, or a rank already held by another slot
    /// of the same item and rater.
    RecordResult record(const RatingRecord& r, const Session& session);

    /// Same checks for several records of one item/rater taken together; all or nothing.
    RecordResult record_all(const std::vector<RatingRecord>& records, const Session& session);

    /// Records in first-insertion order.
    const std::vector<RatingRecord>& records() const { return records_; }

    bool has(const std::string& item_id, const std::string& rater_id, std::size_t slot) const;

private:
    std::string check(const RatingRecord& r, const Session& session,
                      const std::vector<RatingRecord>& batch) const;
    void store(const RatingRecord& r);

    std::vector<RatingRecord> records_;
    std::map<std::tuple<std::string, std::string, std::size_t>, std::size_t> index_;
};

struct RatingLogContents {
    std::vector<RatingRecord> records;
    std::vector<LineError> errors;
};
RatingLogContents read_rating_log(const std::filesystem::path& path);

/// Replays a rating log through a RatingBook; rejected lines are reported as errors.
RatingBook replay(const RatingLogContents& log, const Session& session, std::vector<LineError>& errors);

using RateKey = std::tuple<EventKind, std::string, RubricProperty>;  // kind, model, property
using RateTable = std::map<RateKey, Rate>;

/// 100 * trues / rows for every (kind, model, property) cell with at least one row, after
/// unblinding; calibration items and records for unknown items are excluded.
RateTable acceptance_rates(const std::vector<RatingRecord>& ratings, const Session& session);

struct Pairing {
    std::string name;  // column name, e.g. "4o"
    std::string base;
    std::string fine_tune;

    friend bool operator==(const Pairing&, const Pairing&) = default;
};

/// 4o -> 4o FT and 4o mini -> 4o mini FT.
std::vector<Pairing> default_pairings();
std::vector<std::string> default_models();

using DeltaKey = std::tuple<EventKind, std::string, RubricProperty>;  // kind, pairing name, property
using DeltaTable = std::map<DeltaKey, Tenths>;

/// fine-tune rate minus base rate at one decimal. The difference of two-decimal rates is exact,
/// and ties go to the even tenth. For every event kind present in `rates`, both members of every
/// pairing must be present; throws ValidationError otherwise.
DeltaTable delta_table(const RateTable& rates, const std::vector<Pairing>& pairings);

struct RankCounts {
    std::size_t first = 0;
    std::size_t second = 0;
    std::size_t third = 0;
    std::size_t fourth = 0;
    std::size_t unranked = 0;

    std::size_t total() const { return first + second + third + fourth + unranked; }
    friend bool operator==(const RankCounts&, const RankCounts&) = default;
};

using RankKey = std::pair<EventKind, std::string>;
using RankTable = std::map<RankKey, RankCounts>;

/// Counts per (kind, model) over non-calibration rows; every session model appears for both kinds.
RankTable rank_distribution(const std::vector<RatingRecord>& ratings, const Session& session);

/// 100 * first / total (unranked rows included) at one decimal. Throws on all-zero counts.
Tenths first_choice_share(const RankCounts& counts);

/// Mean of the compile-time and run-time delta, rounded to an integer percentage.
/// Throws ValidationError if either delta is missing.
std::int64_t headline_average(const DeltaTable& deltas, const std::string& pairing, RubricProperty property);

struct AggregateReport {
    std::vector<std::string> models;
    std::vector<Pairing> pairings;
    RateTable acceptance;
    DeltaTable deltas;
    RankTable ranks;
    std::map<RankKey, Tenths> first_choice;
    std::map<std::pair<std::string, RubricProperty>, std::int64_t> headlines;

    friend bool operator==(const AggregateReport&, const AggregateReport&) = default;
};

/// Derives deltas, first-choice shares and headline averages from rates and rank counts.
AggregateReport build_report(std::vector<std::string> models, std::vector<Pairing> pairings, RateTable rates,
                             RankTable ranks);

/// Full aggregation over a session's rating rows.
AggregateReport aggregate(const Session& session, const std::vector<RatingRecord>& ratings,
                          const std::vector<Pairing>& pairings);

}  // namespace guidelm::evalkit
