#include <doctest.h>

#include <set>

#include "guidelm/errors.hpp"
#include "guidelm/promptgen.hpp"
#include "synthetic.hpp"

using namespace guidelm;
using namespace guidelm::promptgen;

namespace {

ErrorEvent compile_event(std::string code, std::string error) {
    ErrorEvent e;
    e.id = "e";
    e.kind = EventKind::compile_time;
    e.source_code = std::move(code);
    e.error_and_explanation = std::move(error);
    return e;
}

std::vector<ErrorEvent> fixture_events() {
    auto file = read_events(testing::source_dir() / "data" / "fixtures" / "prompt_events.jsonl");
    REQUIRE(file.errors.empty());
    return file.events;
}

}  // namespace

TEST_CASE("tutor system prompt") {
    CHECK(tutor_system_prompt() == "You are a tutor helping a student.\nDo not fix the program. Do not give code.");
    CHECK(tutor_system_prompt().data() == tutor_system_prompt().data());
    CHECK(std::string(tutor_system_prompt()) == read_file(testing::source_dir() / "data" / "golden" / "system.txt"));
}

TEST_CASE("compile-time prompt omits absent sections") {
    auto m = build_prompt(compile_event("int main(){}", "missing return type"));
    REQUIRE(m.size() == 2);
    CHECK(m[0].role == Role::system);
    CHECK(m[1].role == Role::user);
    CHECK(m[1].content ==
          "This is my C program: int main(){}\n"
          "Help me understand this error: missing return type\n"
          "Remember, you are tutor helping a student. Don't write code.");
    CHECK(m[1].content.find("command line") == std::string::npos);
    CHECK(m[1].content.find("input") == std::string::npos);
}

TEST_CASE("run-time sections keep their order") {
    ErrorEvent e = compile_event("code", "err");
    e.kind = EventKind::run_time;
    e.variables = "i = 5";
    e.call_stack = "main";
    e.command_line = "./a.out";
    e.stdin_input = "7";
    const auto user = build_prompt(e)[1].content;
    const auto pos = [&](std::string_view label) { return user.find(label); };
    CHECK(pos(kErrorLabel) < pos(kVariablesLabel));
    CHECK(pos(kVariablesLabel) < pos(kCallStackLabel));
    CHECK(pos(kCallStackLabel) < pos(kCommandLineLabel));
    CHECK(pos(kCommandLineLabel) < pos(kStdinLabel));
    CHECK(pos(kStdinLabel) < pos(kClosingLine));
    CHECK(user.ends_with(kClosingLine));
}

TEST_CASE("builds are deterministic") {
    for (const auto& e : fixture_events()) CHECK(build_prompt(e) == build_prompt(e));
}

TEST_CASE("golden prompts") {
    const auto events = fixture_events();
    REQUIRE(events.size() == 6);
    for (const auto& e : events) {
        const auto golden = read_file(testing::source_dir() / "data" / "golden" / (e.id + ".user.txt"));
        const auto m = build_prompt(e);
        CHECK_MESSAGE(m[1].content == golden, e.id);
        CHECK(m[0].content == tutor_system_prompt());
    }
}

TEST_CASE("event invariants") {
    CHECK_THROWS_AS(validate(compile_event("", "err")), ValidationError);
    CHECK_THROWS_AS(validate(compile_event("code", "")), ValidationError);
    auto ct = compile_event("code", "err");
    ct.variables = "x = 1";
    CHECK_THROWS_AS(validate(ct), ValidationError);
    CHECK_THROWS_AS(build_prompt(ct), ValidationError);
    ct.variables.reset();
    ct.call_stack = "main";
    CHECK_THROWS_AS(validate(ct), ValidationError);
    ct.call_stack.reset();
    ct.command_line = "dcc a.c";
    CHECK_NOTHROW(validate(ct));
}

TEST_CASE("event JSON") {
    for (const auto& e : fixture_events()) CHECK(event_from_json(to_json(e)) == e);
    CHECK_THROWS_AS(event_from_json(json{{"id", "x"}, {"kind", "link_time"}, {"source_code", "c"},
                                         {"error_and_explanation", "e"}}),
                    ValidationError);
    CHECK_THROWS_AS(event_from_json(json{{"id", "x"}, {"kind", "run_time"}, {"source_code", "c"}}), ValidationError);

    testing::TempDir dir;
    write_file(dir / "ev.jsonl", to_json(compile_event("c", "e")).dump() + "\n{\"id\":\"y\"}\n");
    auto file = read_events(dir / "ev.jsonl");
    CHECK(file.events.size() == 1);
    REQUIRE(file.errors.size() == 1);
    CHECK(file.errors[0].line == 2);
}

TEST_CASE("prompt properties over generated events") {
    Rng rng(3);
    std::set<std::string> seen;
    for (int i = 0; i < 300; ++i) {
        ErrorEvent e = compile_event("int v" + std::to_string(i) + " = " + testing::random_text(rng) + ";",
                                     "error: " + testing::random_text(rng) + ".");
        e.id = "g" + std::to_string(i);
        if (rng.below(2)) {
            e.kind = EventKind::run_time;
            if (rng.below(2)) e.variables = "v = " + std::to_string(i);
            if (rng.below(2)) e.call_stack = "main";
        }
        if (rng.below(2)) e.command_line = "./prog";
        if (rng.below(2)) e.stdin_input = std::to_string(i);
        const auto m = build_prompt(e);
        CHECK(m[0].content == tutor_system_prompt());
        if (e.kind == EventKind::compile_time) {
            CHECK(m[1].content.find(kVariablesLabel) == std::string::npos);
            CHECK(m[1].content.find(kCallStackLabel) == std::string::npos);
        }
        CHECK(seen.insert(m[1].content).second);
    }
}

TEST_CASE("prompt JSONL shape") {
    const auto e = fixture_events()[0];
    const auto j = prompt_to_json(e, build_prompt(e));
    CHECK(j["id"] == "ct1");
    CHECK(j["messages"].size() == 2);
    CHECK(j["messages"][0]["role"] == "system");
}
