#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guidelm/chat.hpp"
#include "guidelm/util/jsonl.hpp"

namespace guidelm::promptgen {

enum class EventKind { compile_time, run_time };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

/// A compiler or run-time error as reported by the educational compiler, plus its context.
struct ErrorEvent {
    std::string id;
    EventKind kind = EventKind::compile_time;
    std::string source_code;
    std::string error_and_explanation;
    std::optional<std::string> variables;   // run-time only
    std::optional<std::string> call_stack;  // run-time only
    std::optional<std::string> command_line;
    std::optional<std::string> stdin_input;

    friend bool operator==(const ErrorEvent&, const ErrorEvent&) = default;
};

/// Throws ValidationError: empty code or error text, or run-time fields on a compile-time event.
void validate(const ErrorEvent& event);

json to_json(const ErrorEvent& event);
ErrorEvent event_from_json(const json& j);

struct EventFile {
    std::vector<ErrorEvent> events;
    std::vector<LineError> errors;
};
EventFile read_events(const std::filesystem::path& path);

/// System message used for every tutor prompt.
std::string_view tutor_system_prompt();

// Section labels of the rendered user message.
inline constexpr std::string_view kProgramLabel = "This is my C program: ";
inline constexpr std::string_view kErrorLabel = "Help me understand this error: ";
inline constexpr std::string_view kVariablesLabel = "Variables: ";
inline constexpr std::string_view kCallStackLabel = "Call stack: ";
inline constexpr std::string_view kCommandLineLabel = "This was the command line: ";
inline constexpr std::string_view kStdinLabel = "It was given this input: ";
inline constexpr std::string_view kClosingLine = "Remember, you are tutor helping a student. Don't write code.";

/// Renders the tutor prompt. Sections appear in order program, error, variables, call stack,
/// command line, input, closing reminder, one per line; absent optional sections are left out.
MessageList build_prompt(const ErrorEvent& event);

/// `{"id":...,"messages":[...]}` for the prompt JSONL output.
json prompt_to_json(const ErrorEvent& event, const MessageList& messages);

}  // namespace guidelm::promptgen
