#include "guidelm/promptgen.hpp"

#include "guidelm/errors.hpp"
#include "guidelm/util/utf8.hpp"

namespace guidelm::promptgen {
namespace {

std::optional<std::string> optional_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ValidationError(std::string(key) + ": must be a string");
    return it->get<std::string>();
}

void append_section(std::string& out, std::string_view label, const std::string& value) {
    out += label;
    out += value;
    out += '\n';
}

}  // namespace

std::string_view to_string(EventKind kind) {
    return kind == EventKind::compile_time ? "compile_time" : "run_time";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
    if (name == "compile_time") return EventKind::compile_time;
    if (name == "run_time") return EventKind::run_time;
    return std::nullopt;
}

void validate(const ErrorEvent& e) {
    if (e.id.empty()) throw ValidationError("id: must be non-empty");
    if (e.source_code.empty()) throw ValidationError("event " + e.id + ": source_code is empty");
    if (e.error_and_explanation.empty()) throw ValidationError("event " + e.id + ": error_and_explanation is empty");
    if (e.kind == EventKind::compile_time && (e.variables || e.call_stack))
        throw ValidationError("event " + e.id + ": compile-time events carry no variables or call stack");
    for (const std::string* text : {&e.source_code, &e.error_and_explanation}) {
        if (!utf8::is_valid(*text)) throw ValidationError("event " + e.id + ": text is not valid UTF-8");
    }
}

json to_json(const ErrorEvent& e) {
    json j{{"id", e.id},
           {"kind", to_string(e.kind)},
           {"source_code", e.source_code},
           {"error_and_explanation", e.error_and_explanation}};
    if (e.variables) j["variables"] = *e.variables;
    if (e.call_stack) j["call_stack"] = *e.call_stack;
    if (e.command_line) j["command_line"] = *e.command_line;
    if (e.stdin_input) j["stdin_input"] = *e.stdin_input;
    return j;
}

ErrorEvent event_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("event must be a JSON object");
    ErrorEvent e;
    auto required = [&](const char* key) {
        auto v = optional_string(j, key);
        if (!v) throw ValidationError(std::string(key) + ": required");
        return *v;
    };
    e.id = required("id");
    const auto kind = parse_event_kind(required("kind"));
    if (!kind) throw ValidationError("kind: must be compile_time or run_time");
    e.kind = *kind;
    e.source_code = required("source_code");
    e.error_and_explanation = required("error_and_explanation");
    e.variables = optional_string(j, "variables");
    e.call_stack = optional_string(j, "call_stack");
    e.command_line = optional_string(j, "command_line");
    e.stdin_input = optional_string(j, "stdin_input");
    validate(e);
    return e;
}

EventFile read_events(const std::filesystem::path& path) {
    EventFile out;
    for (auto& [line, j] : read_json_lines(path, out.errors)) {
        try {
            out.events.push_back(event_from_json(j));
        } catch (const ValidationError& e) {
            out.errors.push_back({line, e.what()});
        }
    }
    return out;
}

std::string_view tutor_system_prompt() {
    static constexpr std::string_view prompt =
        "You are a tutor helping a student.\nDo not fix the program. Do not give code.";
    return prompt;
}

MessageList build_prompt(const ErrorEvent& event) {
    validate(event);
    std::string user;
    append_section(user, kProgramLabel, event.source_code);
    append_section(user, kErrorLabel, event.error_and_explanation);
    if (event.variables) append_section(user, kVariablesLabel, *event.variables);
    if (event.call_stack) append_section(user, kCallStackLabel, *event.call_stack);
    if (event.command_line) append_section(user, kCommandLineLabel, *event.command_line);
    if (event.stdin_input) append_section(user, kStdinLabel, *event.stdin_input);
    user += kClosingLine;
    return {{Role::system, std::string(tutor_system_prompt())}, {Role::user, std::move(user)}};
}

json prompt_to_json(const ErrorEvent& event, const MessageList& messages) {
    return json{{"id", event.id}, {"messages", to_json(messages)}};
}

}  // namespace guidelm::promptgen
