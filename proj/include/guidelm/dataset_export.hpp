#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "guidelm/chat.hpp"
#include "guidelm/corpus.hpp"

namespace guidelm::dataset_export {

/// One chat-format training example: system, user, assistant, all non-empty.
struct FineTuneRecord {
    MessageList messages;

    friend bool operator==(const FineTuneRecord&, const FineTuneRecord&) = default;
};

/// Default system message placed in every training record.
std::string_view default_training_system_prompt();

/// question -> user, answer -> assistant. Throws ValidationError naming the pair id when a pair
/// is not yet enhanced or has an empty question or answer, or when system_prompt is empty.
std::vector<FineTuneRecord> to_finetune_records(const std::vector<corpus::QAPair>& pairs,
                                                std::string_view system_prompt);

json to_json(const FineTuneRecord& record);

/// `{"messages":[...]}` per line, LF endings. Returns the number of records written.
std::size_t write_jsonl(const std::vector<FineTuneRecord>& records, const std::filesystem::path& path);

struct Violation {
    std::size_t line = 0;
    std::string reason;
};

struct ValidationReport {
    std::size_t record_count = 0;  // lines that parsed into valid records
    std::vector<Violation> violations;
    std::vector<FineTuneRecord> records;

    bool ok() const { return violations.empty(); }
};

json to_json(const ValidationReport& report);

/// Checks every line: valid JSON, exactly system/user/assistant in that order, non-empty
/// contents, no extra keys. Violations are data, not exceptions; only an unreadable file throws.
ValidationReport validate_jsonl(const std::filesystem::path& path);

}  // namespace guidelm::dataset_export
