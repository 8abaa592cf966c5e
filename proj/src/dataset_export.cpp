#include "guidelm/dataset_export.hpp"

#include <fstream>

#include "guidelm/errors.hpp"
#include "guidelm/util/utf8.hpp"

namespace guidelm::dataset_export {
namespace {

std::string check_record(const json& j, FineTuneRecord& record) {
    if (!j.is_object()) return "line is not a JSON object";
    if (j.size() != 1 || !j.contains("messages")) return "record must contain exactly the key 'messages'";
    const auto& messages = j["messages"];
    if (!messages.is_array()) return "'messages' is not an array";
    if (messages.size() != 3) return "expected 3 messages, found " + std::to_string(messages.size());
    static constexpr Role expected[] = {Role::system, Role::user, Role::assistant};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& m = messages[i];
        if (!m.is_object() || m.size() != 2 || !m.contains("role") || !m.contains("content"))
            return "message " + std::to_string(i) + " must have exactly 'role' and 'content'";
        if (!m["role"].is_string() || m["role"].get<std::string>() != to_string(expected[i]))
            return "message " + std::to_string(i) + " must have role '" + std::string(to_string(expected[i])) + "'";
        if (!m["content"].is_string()) return "message " + std::to_string(i) + " content is not a string";
        if (m["content"].get<std::string>().empty())
            return "message " + std::to_string(i) + " (" + std::string(to_string(expected[i])) + ") is empty";
        record.messages.push_back({expected[i], m["content"].get<std::string>()});
    }
    return {};
}

}  // namespace

std::string_view default_training_system_prompt() {
    static constexpr std::string_view prompt =
        "You are a tutor helping a student. Do not fix the program. Do not give code.";
    return prompt;
}

std::vector<FineTuneRecord> to_finetune_records(const std::vector<corpus::QAPair>& pairs,
                                                std::string_view system_prompt) {
    if (system_prompt.empty()) throw ValidationError("system prompt must be non-empty");
    std::vector<FineTuneRecord> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        if (p.stage < corpus::Stage::enhanced)
            throw ValidationError("pair " + p.id + " is not enhanced (stage " + std::string(corpus::to_string(p.stage)) +
                                  ")");
        if (p.question_text.empty()) throw ValidationError("pair " + p.id + " has an empty question");
        if (p.answer_text.empty()) throw ValidationError("pair " + p.id + " has an empty answer");
        out.push_back({{{Role::system, std::string(system_prompt)},
                        {Role::user, p.question_text},
                        {Role::assistant, p.answer_text}}});
    }
    return out;
}

json to_json(const FineTuneRecord& record) {
    return json{{"messages", to_json(record.messages)}};
}

std::size_t write_jsonl(const std::vector<FineTuneRecord>& records, const std::filesystem::path& path) {
    std::vector<json> lines;
    lines.reserve(records.size());
    for (const auto& r : records) lines.push_back(to_json(r));
    return write_json_lines(path, lines);
}

json to_json(const ValidationReport& report) {
    json violations = json::array();
    for (const auto& v : report.violations) violations.push_back({{"line", v.line}, {"reason", v.reason}});
    return json{{"records", report.record_count}, {"violations", violations}};
}

ValidationReport validate_jsonl(const std::filesystem::path& path) {
    ValidationReport report;
    for_each_line(path, [&](std::size_t number, std::string_view line) {
        if (!utf8::is_valid(line)) {
            report.violations.push_back({number, "line is not valid UTF-8"});
            return;
        }
        const auto j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            report.violations.push_back({number, "line is not valid JSON"});
            return;
        }
        FineTuneRecord record;
        if (auto reason = check_record(j, record); !reason.empty()) {
            report.violations.push_back({number, std::move(reason)});
            return;
        }
        report.records.push_back(std::move(record));
        ++report.record_count;
    });
    // a final line without LF is tolerated by parsers but breaks the byte contract
    const auto size = std::filesystem::file_size(path);
    if (size > 0) {
        std::ifstream in(path, std::ios::binary);
        in.seekg(-1, std::ios::end);
        char last = 0;
        in.get(last);
        if (last != '\n') report.violations.push_back({0, "file does not end with LF"});
    }
    return report;
}

}  // namespace guidelm::dataset_export
