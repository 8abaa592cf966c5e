#include "guidelm/corpus.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "guidelm/errors.hpp"
#include "guidelm/util/utf8.hpp"

namespace guidelm::corpus {
namespace {

constexpr std::string_view kRequired[] = {"id", "course_code", "term", "question", "answer"};

void check_text(const std::string& value, std::string_view field) {
    if (!utf8::is_valid(value)) throw ValidationError("field '" + std::string(field) + "' is not valid UTF-8");
    if (utf8::contains_nul(value)) throw ValidationError("field '" + std::string(field) + "' contains NUL");
}

std::string required_string(const json& j, std::string_view key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) throw ValidationError("missing required field '" + std::string(key) + "'");
    if (!it->is_string()) throw ValidationError("field '" + std::string(key) + "' must be a string");
    auto value = it->get<std::string>();
    check_text(value, key);
    return value;
}

/// Builds a JSON object from a CSV row using the header; only string fields.
json row_to_json(const std::vector<std::string>& header, const std::vector<std::string>& fields) {
    if (fields.size() != header.size())
        throw ValidationError("expected " + std::to_string(header.size()) + " columns, found " +
                              std::to_string(fields.size()));
    json j = json::object();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "is_cs1") {
            if (fields[i] == "true" || fields[i] == "1") {
                j["is_cs1"] = true;
            } else if (fields[i] == "false" || fields[i] == "0" || fields[i].empty()) {
                j["is_cs1"] = false;
            } else {
                throw ValidationError("field 'is_cs1' must be true/false");
            }
        } else {
            j[header[i]] = fields[i];
        }
    }
    return j;
}

}  // namespace

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::raw: return "raw";
        case Stage::cleansed: return "cleansed";
        case Stage::reviewed: return "reviewed";
        case Stage::enhanced: return "enhanced";
        case Stage::exported: return "exported";
    }
    return "raw";
}

std::optional<Stage> parse_stage(std::string_view name) {
    for (auto s : {Stage::raw, Stage::cleansed, Stage::reviewed, Stage::enhanced, Stage::exported}) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

void QAPair::advance(Stage next) {
    if (next < stage) {
        throw ValidationError("pair " + id + ": cannot move from stage " + std::string(to_string(stage)) + " back to " +
                              std::string(to_string(next)));
    }
    stage = next;
}

std::optional<Format> parse_format(std::string_view name) {
    if (name == "jsonl") return Format::jsonl;
    if (name == "csv") return Format::csv;
    return std::nullopt;
}

json to_json(const QAPair& pair) {
    json redactions = json::array();
    for (const auto& r : pair.redactions) {
        redactions.push_back({{"rule_name", r.rule_name}, {"span_length", r.span_length}});
    }
    return json{{"id", pair.id},
                {"course_code", pair.course_code},
                {"term", pair.term},
                {"question", pair.question_text},
                {"answer", pair.answer_text},
                {"is_cs1", pair.is_cs1},
                {"stage", to_string(pair.stage)},
                {"redactions", redactions}};
}

QAPair pair_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("record is not a JSON object");
    QAPair p;
    p.id = required_string(j, "id");
    if (p.id.empty()) throw ValidationError("field 'id' is empty");
    p.course_code = required_string(j, "course_code");
    p.term = required_string(j, "term");
    p.question_text = required_string(j, "question");
    p.answer_text = required_string(j, "answer");
    if (auto it = j.find("is_cs1"); it != j.end() && !it->is_null()) {
        if (!it->is_boolean()) throw ValidationError("field 'is_cs1' must be a boolean");
        p.is_cs1 = it->get<bool>();
    }
    if (auto it = j.find("stage"); it != j.end() && !it->is_null()) {
        const auto stage = it->is_string() ? parse_stage(it->get<std::string>()) : std::nullopt;
        if (!stage) throw ValidationError("field 'stage' is not a known stage");
        p.stage = *stage;
    }
    if (auto it = j.find("redactions"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw ValidationError("field 'redactions' must be an array");
        for (const auto& r : *it) {
            if (!r.is_object() || !r.contains("rule_name") || !r["rule_name"].is_string() ||
                !r.contains("span_length") || !r["span_length"].is_number_unsigned() ||
                r["span_length"].get<std::size_t>() < 1) {
                throw ValidationError("malformed redaction note");
            }
            p.redactions.push_back({r["rule_name"].get<std::string>(), r["span_length"].get<std::size_t>()});
        }
    }
    return p;
}

std::vector<CsvRow> parse_csv(std::string_view text, std::vector<LineError>& errors) {
    std::vector<CsvRow> rows;
    std::size_t line = 1;
    std::size_t i = 0;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
    while (i < text.size()) {
        CsvRow row;
        row.line = line;
        std::string field;
        bool row_done = false;
        while (!row_done) {
            if (i < text.size() && text[i] == '"') {
                const std::size_t quote_line = line;
                ++i;
                bool closed = false;
                while (i < text.size()) {
                    if (text[i] == '"') {
                        if (i + 1 < text.size() && text[i + 1] == '"') {
                            field += '"';
                            i += 2;
                        } else {
                            ++i;
                            closed = true;
                            break;
                        }
                    } else {
                        if (text[i] == '\n') ++line;
                        field += text[i++];
                    }
                }
                if (!closed) {
                    errors.push_back({quote_line, "unterminated quoted field"});
                    return rows;
                }
            }
            while (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') field += text[i++];
            row.fields.push_back(std::move(field));
            field.clear();
            if (i >= text.size()) {
                row_done = true;
            } else if (text[i] == ',') {
                ++i;
            } else {
                if (text[i] == '\r') ++i;
                if (i < text.size() && text[i] == '\n') ++i;
                ++line;
                row_done = true;
            }
        }
        const bool blank = row.fields.size() == 1 && row.fields[0].empty();
        if (!blank) rows.push_back(std::move(row));
    }
    return rows;
}

IngestResult ingest(const std::filesystem::path& path, Format format) {
    IngestResult result;
    std::unordered_set<std::string> seen;
    auto accept = [&](std::size_t line, const json& j) {
        try {
            QAPair p = pair_from_json(j);
            if (!seen.insert(p.id).second) throw ValidationError("duplicate id '" + p.id + "'");
            result.pairs.push_back(std::move(p));
        } catch (const ValidationError& e) {
            result.errors.push_back({line, e.what()});
        }
    };

    if (format == Format::jsonl) {
        for (auto& [line, j] : read_json_lines(path, result.errors)) accept(line, j);
    } else {
        const std::string text = read_file(path);
        auto rows = parse_csv(text, result.errors);
        if (rows.empty()) return result;
        const auto& header = rows.front().fields;
        for (auto key : kRequired) {
            if (std::find(header.begin(), header.end(), key) == header.end()) {
                result.errors.push_back({rows.front().line, "header lacks required column '" + std::string(key) + "'"});
                return result;
            }
        }
        for (std::size_t r = 1; r < rows.size(); ++r) {
            try {
                accept(rows[r].line, row_to_json(header, rows[r].fields));
            } catch (const ValidationError& e) {
                result.errors.push_back({rows[r].line, e.what()});
            }
        }
    }
    std::stable_sort(result.errors.begin(), result.errors.end(),
                     [](const LineError& a, const LineError& b) { return a.line < b.line; });
    return result;
}

std::size_t write_corpus(const std::filesystem::path& path, const std::vector<QAPair>& pairs) {
    std::vector<json> lines;
    lines.reserve(pairs.size());
    for (const auto& p : pairs) lines.push_back(to_json(p));
    return write_json_lines(path, lines);
}

std::vector<QAPair> filter_cs1(const std::vector<QAPair>& pairs, const std::set<std::string>& cs1_courses) {
    std::vector<QAPair> out;
    for (const auto& p : pairs) {
        if (cs1_courses.contains(p.course_code)) {
            out.push_back(p);
            out.back().is_cs1 = true;
        }
    }
    return out;
}

}  // namespace guidelm::corpus
