#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <regex>

#include "guidelm/cleanse.hpp"
#include "guidelm/errors.hpp"
#include "synthetic.hpp"

using namespace guidelm;
using cleanse::CleanseConfig;
using cleanse::Cleanser;
using cleanse::LengthDecision;

namespace {

CleanseConfig full_config() {
    CleanseConfig c;
    c.name_blacklist = testing::sample_names();
    c.template_blacklist = testing::sample_templates();
    return c;
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool contains_name(const std::string& text, const std::string& name) {
    auto lower = [](std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    const auto t = lower(text);
    const auto n = lower(name);
    for (auto pos = t.find(n); pos != std::string::npos; pos = t.find(n, pos + 1)) {
        const bool left = pos == 0 || !word_char(t[pos - 1]);
        const bool right = pos + n.size() == t.size() || !word_char(t[pos + n.size()]);
        if (left && right) return true;
    }
    return false;
}

std::size_t scalars(const std::string& s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

corpus::QAPair pair_of(std::string q, std::string a) {
    corpus::QAPair p;
    p.id = "p";
    p.question_text = std::move(q);
    p.answer_text = std::move(a);
    return p;
}

}  // namespace

TEST_CASE("email is replaced and noted once") {
    Cleanser c(CleanseConfig{});
    auto r = c.clean_text("email me at z1234567@uni.edu thanks");
    CHECK(r.text == "email me at thanks");
    REQUIRE(r.notes.size() == 1);
    CHECK(r.notes[0].rule_name == "email");
    CHECK(r.notes[0].span_length == 16);
}

TEST_CASE("whitespace collapses with empty pattern lists") {
    CleanseConfig config;
    config.pii_patterns.clear();
    Cleanser c(config);
    CHECK(c.clean_text("line1\n\nline2").text == "line1 line2");
    CHECK(c.clean_text("  \t a \r\n b  ").text == "a b");
    CHECK(c.clean_text("").text.empty());
}

TEST_CASE("a whole template entry vanishes without notes") {
    Cleanser c(full_config());
    auto r = c.clean_text(testing::sample_templates()[0]);
    CHECK(r.text.empty());
    CHECK(r.notes.empty());
}

TEST_CASE("template deletion can expose another template") {
    CleanseConfig config;
    config.template_blacklist = {"AB"};
    Cleanser c(config);
    CHECK(c.clean_text("AAB B").text == "A B");
    CHECK(c.clean_text("xAABBy").text == "xy");
}

TEST_CASE("PII categories") {
    Cleanser c(CleanseConfig{});
    CHECK(c.clean_text("my id is z5123456.").text == "my id is .");
    CHECK(c.clean_text("call 0412345678 now").text == "call now");
    CHECK(c.clean_text("see https://forum.example.com/t/42 or www.example.org").text == "see or");
    CHECK(c.clean_text("line 123456 is fine").text == "line 123456 is fine");
    CHECK(c.clean_text("z123456 is too short").text == "z123456 is too short");
    auto r = c.clean_text("a@b.co and c@d.org");
    CHECK(r.text == "and");
    CHECK(r.notes.size() == 2);
}

TEST_CASE("names are removed as whole tokens, case-insensitively") {
    Cleanser c(full_config());
    auto r = c.clean_text("Thanks jake, and BOB too. Bobby stays, as does Jakeline.");
    CHECK(r.text == "Thanks , and too. Bobby stays, as does Jakeline.");
    REQUIRE(r.notes.size() == 2);
    CHECK(r.notes[0].rule_name == cleanse::kNameRule);
    CHECK(r.notes[0].span_length == 4);
    CHECK(c.clean_text("Bob Bob Bob").text.empty());
}

TEST_CASE("config validation") {
    CleanseConfig bad_regex;
    bad_regex.pii_patterns.push_back({"broken", "(unclosed"});
    CHECK_THROWS_AS(Cleanser{bad_regex}, ConfigError);

    CleanseConfig dup;
    dup.pii_patterns.push_back({"email", "x"});
    CHECK_THROWS_AS(Cleanser{dup}, ConfigError);

    CleanseConfig zero;
    zero.min_answer_chars = 0;
    CHECK_THROWS_AS(Cleanser{zero}, ConfigError);

    CHECK_THROWS_AS(cleanse::run_cleanse({pair_of("question text", "answer")}, bad_regex), ConfigError);
}

TEST_CASE("length filter at the 9/2 thresholds") {
    const CleanseConfig c;
    CHECK(cleanse::length_filter(pair_of("hi", "see the docs"), c) == LengthDecision::drop);
    CHECK(cleanse::length_filter(pair_of("How do I?", "Ok"), c) == LengthDecision::keep);
    CHECK(cleanse::length_filter(pair_of("How do ?", "Ok"), c) == LengthDecision::drop);
    CHECK(cleanse::length_filter(pair_of(std::string(200, 'q'), "x"), c) == LengthDecision::drop);
    // counted in scalars, not bytes
    CHECK(cleanse::length_filter(pair_of("\xc3\xa9\xc3\xa9\xc3\xa9\xc3\xa9\xc3\xa9", "ok"), c) == LengthDecision::drop);
    CHECK(cleanse::length_filter(pair_of("\xe6\x95\xb0\xe7\xbb\x84\xe6\x95\xb0\xe7\xbb\x84\xe6\x95\xb0\xe7\xbb\x84"
                                         "\xe6\x95\xb0\xe7\xbb\x84\xe6\x95\xb0",
                                         "\xf0\x9f\x99\x82\xf0\x9f\x99\x82"),
                                 c) == LengthDecision::keep);
}

TEST_CASE("length filter matches a direct recount") {
    Rng rng(77);
    for (int i = 0; i < 500; ++i) {
        CleanseConfig c;
        c.min_question_chars = 1 + rng.below(12);
        c.min_answer_chars = 1 + rng.below(5);
        auto p = pair_of(testing::random_text(rng), testing::random_text(rng));
        const bool expect_drop =
            scalars(p.question_text) < c.min_question_chars || scalars(p.answer_text) < c.min_answer_chars;
        CHECK((cleanse::length_filter(p, c) == LengthDecision::drop) == expect_drop);
    }
}

TEST_CASE("run_cleanse on ten pairs, three with short answers") {
    std::vector<corpus::QAPair> pairs;
    for (int i = 0; i < 10; ++i) {
        auto p = pair_of("Why is my loop " + std::to_string(i) + " stuck?", i % 3 == 1 ? "k" : "Print the counter.");
        p.id = "p" + std::to_string(i);
        pairs.push_back(p);
    }
    auto out = cleanse::run_cleanse(pairs, CleanseConfig{});
    CHECK(out.stats.input_count == 10);
    CHECK(out.stats.kept_count == 7);
    CHECK(out.stats.dropped_short_count == 3);
    for (const auto& p : out.pairs) CHECK(p.stage == corpus::Stage::cleansed);
}

TEST_CASE("run_cleanse on empty input") {
    auto out = cleanse::run_cleanse({}, CleanseConfig{});
    CHECK(out.pairs.empty());
    CHECK(out.stats.input_count == 0);
    CHECK(out.stats.kept_count == 0);
    CHECK(out.stats.dropped_short_count == 0);
    for (const auto& [rule, n] : out.stats.redactions_by_rule) CHECK(n == 0);
}

TEST_CASE("run_cleanse refuses pairs past cleansed") {
    auto p = pair_of("question here", "answer");
    p.stage = corpus::Stage::reviewed;
    CHECK_THROWS_AS(cleanse::run_cleanse({p}, CleanseConfig{}), ValidationError);
}

TEST_CASE("clean_text is idempotent and leaves no pattern behind") {
    const auto config = full_config();
    Cleanser c(config);
    std::vector<std::regex> patterns;
    for (const auto& p : config.pii_patterns) patterns.emplace_back(p.source, std::regex::ECMAScript);

    Rng rng(20240601);
    for (int i = 0; i < 1000; ++i) {
        const auto text = testing::random_text(rng);
        const auto once = c.clean_text(text);
        const auto twice = c.clean_text(once.text);
        REQUIRE_MESSAGE(twice.text == once.text, text);
        CHECK(twice.notes.empty());
        for (const auto& re : patterns) CHECK_FALSE_MESSAGE(std::regex_search(once.text, re), once.text);
        for (const auto& n : config.name_blacklist) CHECK_FALSE_MESSAGE(contains_name(once.text, n), once.text);
        for (const auto& t : config.template_blacklist) CHECK(once.text.find(t) == std::string::npos);
        for (const auto& note : once.notes) CHECK(note.span_length >= 1);
        CHECK(once.text.find("  ") == std::string::npos);
        CHECK(once.text.find('\n') == std::string::npos);
    }
}

TEST_CASE("run_cleanse is idempotent and its ledger balances") {
    Rng rng(5);
    std::vector<corpus::QAPair> pairs;
    for (int i = 0; i < 300; ++i) {
        auto p = pair_of(testing::random_text(rng), testing::random_text(rng));
        p.id = "r" + std::to_string(i);
        pairs.push_back(p);
    }
    const auto config = full_config();
    auto first = cleanse::run_cleanse(pairs, config);
    CHECK(first.stats.kept_count + first.stats.dropped_short_count == first.stats.input_count);
    std::size_t notes = 0;
    for (const auto& p : first.pairs) notes += p.redactions.size();
    std::size_t counted = 0;
    for (const auto& [rule, n] : first.stats.redactions_by_rule) counted += n;
    CHECK(counted >= notes);  // dropped pairs also contributed notes

    auto second = cleanse::run_cleanse(first.pairs, config);
    REQUIRE(second.pairs.size() == first.pairs.size());
    for (std::size_t i = 0; i < first.pairs.size(); ++i) {
        CHECK(second.pairs[i].question_text == first.pairs[i].question_text);
        CHECK(second.pairs[i].answer_text == first.pairs[i].answer_text);
    }
    CHECK(second.stats.dropped_short_count == 0);
}

TEST_CASE("stats ledger equals emitted notes when nothing is dropped") {
    std::vector<corpus::QAPair> pairs = {pair_of("Mail a@b.com or see www.x.org please", "Ask Jake"),
                                         pair_of("My id z1234567 fails to compile", "Bob, check 1234567")};
    pairs[1].id = "q";
    auto out = cleanse::run_cleanse(pairs, full_config());
    REQUIRE(out.pairs.size() == 2);
    std::size_t notes = out.pairs[0].redactions.size() + out.pairs[1].redactions.size();
    std::size_t counted = 0;
    for (const auto& [rule, n] : out.stats.redactions_by_rule) counted += n;
    CHECK(notes == counted);
    CHECK(out.stats.redactions_by_rule.at("email") == 1);
    CHECK(out.stats.redactions_by_rule.at("url") == 1);
    CHECK(out.stats.redactions_by_rule.at("student_id") == 1);
    CHECK(out.stats.redactions_by_rule.at("long_number") == 1);
    CHECK(out.stats.redactions_by_rule.at("name") == 2);
}

TEST_CASE("load_blacklist trims and skips blanks") {
    testing::TempDir dir;
    write_file(dir / "names.txt", "  Alice \n\n\tBob\r\n");
    CHECK(cleanse::load_blacklist(dir / "names.txt") == std::vector<std::string>{"Alice", "Bob"});
}
