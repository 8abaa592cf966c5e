#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "guidelm/util/jsonl.hpp"

namespace guidelm::corpus {

/// Pipeline position of a pair. Transitions only move forward.
enum class Stage { raw, cleansed, reviewed, enhanced, exported };

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

struct RedactionNote {
    std::string rule_name;
    std::size_t span_length = 1;  // Unicode scalars removed, >= 1

    friend bool operator==(const RedactionNote&, const RedactionNote&) = default;
};

struct QAPair {
    std::string id;
    std::string course_code;
    std::string term;
    std::string question_text;
    std::string answer_text;
    bool is_cs1 = false;
    Stage stage = Stage::raw;
    std::vector<RedactionNote> redactions;

    /// Moves to `next`; throws ValidationError if that would go backwards.
    void advance(Stage next);

    friend bool operator==(const QAPair&, const QAPair&) = default;
};

enum class Format { jsonl, csv };
std::optional<Format> parse_format(std::string_view name);

struct IngestResult {
    std::vector<QAPair> pairs;
    std::vector<LineError> errors;
};

/// Reads a forum dump. Required keys: id, course_code, term, question, answer.
/// Canonical corpus files also carry is_cs1, stage and redactions, which are preserved;
/// records without them start at Stage::raw. Malformed records land in `errors` with their
/// starting line number and never abort the read. Throws IoError if the file is unreadable.
IngestResult ingest(const std::filesystem::path& path, Format format);

/// Canonical JSON form of one pair.
json to_json(const QAPair& pair);

/// Throws ValidationError naming the offending field.
QAPair pair_from_json(const json& j);

/// Canonical corpus JSONL. Returns number of lines written.
std::size_t write_corpus(const std::filesystem::path& path, const std::vector<QAPair>& pairs);

/// Pairs whose course_code is in `cs1_courses`, flagged is_cs1, in input order.
std::vector<QAPair> filter_cs1(const std::vector<QAPair>& pairs, const std::set<std::string>& cs1_courses);

/// Parses RFC 4180 CSV (quoted fields may span lines). Each row carries its starting line.
struct CsvRow {
    std::size_t line = 0;
    std::vector<std::string> fields;
};
/// An unterminated quoted field is reported in `errors` and ends parsing.
std::vector<CsvRow> parse_csv(std::string_view text, std::vector<LineError>& errors);

}  // namespace guidelm::corpus
