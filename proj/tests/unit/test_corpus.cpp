#include <doctest.h>

#include "guidelm/corpus.hpp"
#include "guidelm/errors.hpp"
#include "synthetic.hpp"

using namespace guidelm;
using corpus::Format;
using corpus::Stage;

TEST_CASE("ingest one JSONL record") {
    testing::TempDir dir;
    write_file(dir / "one.jsonl",
               R"({"id":"a1","course_code":"COMP1511","term":"T1","question":"Why segfault?","answer":"Check the index."})"
               "\n");
    auto r = corpus::ingest(dir / "one.jsonl", Format::jsonl);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.errors.empty());
    CHECK(r.pairs[0].stage == Stage::raw);
    CHECK(r.pairs[0].question_text == "Why segfault?");
    CHECK_FALSE(r.pairs[0].is_cs1);
}

TEST_CASE("ingest empty file") {
    testing::TempDir dir;
    write_file(dir / "empty.jsonl", "");
    auto r = corpus::ingest(dir / "empty.jsonl", Format::jsonl);
    CHECK(r.pairs.empty());
    CHECK(r.errors.empty());
}

TEST_CASE("ingest reports malformed records with their line") {
    testing::TempDir dir;
    write_file(dir / "three.jsonl",
               R"({"id":"a","course_code":"C","term":"T","question":"q1","answer":"a1"})"
               "\n"
               R"({"id":"b","course_code":"C","term":"T","question":"q2"})"
               "\n"
               R"({"id":"c","course_code":"C","term":"T","question":"q3","answer":"a3"})"
               "\n");
    auto r = corpus::ingest(dir / "three.jsonl", Format::jsonl);
    CHECK(r.pairs.size() == 2);
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].line == 2);
    CHECK(r.errors[0].reason.find("answer") != std::string::npos);
}

TEST_CASE("ingest rejects duplicates, NUL bytes and bad UTF-8") {
    testing::TempDir dir;
    std::string text = R"({"id":"a","course_code":"C","term":"T","question":"q","answer":"a"})"
                       "\n"
                       R"({"id":"a","course_code":"C","term":"T","question":"q","answer":"a"})"
                       "\n"
                       R"({"id":"n","course_code":"C","term":"T","question":"q\u0000","answer":"a"})"
                       "\n"
                       "{\"id\":\"u\",\"course_code\":\"C\",\"term\":\"T\",\"question\":\"\xff\",\"answer\":\"a\"}\n"
                       "not json\n";
    write_file(dir / "bad.jsonl", text);
    auto r = corpus::ingest(dir / "bad.jsonl", Format::jsonl);
    CHECK(r.pairs.size() == 1);
    CHECK(r.errors.size() == 4);
}

TEST_CASE("ingest CSV with quoted multi-line fields") {
    testing::TempDir dir;
    write_file(dir / "dump.csv",
               "id,course_code,term,question,answer\n"
               "1,COMP1511,T1,\"Line one\nline two, with comma\",\"He said \"\"hi\"\"\"\n"
               "2,COMP1511,T1,short\n"
               "3,COMP2521,T2,q3,a3\n");
    auto r = corpus::ingest(dir / "dump.csv", Format::csv);
    REQUIRE(r.pairs.size() == 2);
    CHECK(r.pairs[0].question_text == "Line one\nline two, with comma");
    CHECK(r.pairs[0].answer_text == "He said \"hi\"");
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].line == 4);
}

TEST_CASE("parse_csv reports unterminated quotes") {
    std::vector<LineError> errors;
    auto rows = corpus::parse_csv("a,b\n\"open,field\n", errors);
    CHECK(rows.size() == 1);
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].line == 2);
}

TEST_CASE("ingest missing file throws") {
    CHECK_THROWS_AS(corpus::ingest("/nonexistent/dump.jsonl", Format::jsonl), IoError);
}

TEST_CASE("round trip through the canonical corpus file") {
    testing::TempDir dir;
    auto pairs = testing::synthetic_corpus(200, 40, 9);
    pairs[3].question_text = "multi\nline \"quoted\" \xc3\xa9";
    pairs[3].redactions = {{"email", 12}, {"name", 4}};
    pairs[3].stage = Stage::cleansed;
    pairs[5].is_cs1 = true;
    corpus::write_corpus(dir / "c.jsonl", pairs);
    auto back = corpus::ingest(dir / "c.jsonl", Format::jsonl);
    CHECK(back.errors.empty());
    CHECK(back.pairs == pairs);
}

TEST_CASE("filter_cs1 on the full-size synthetic corpus") {
    const auto pairs = testing::synthetic_corpus(129000, 13000, 1);
    auto cs1 = corpus::filter_cs1(pairs, {testing::kCs1Course});
    CHECK(cs1.size() == 13000);
    for (const auto& p : cs1) CHECK_MESSAGE(p.is_cs1, p.id);
    CHECK(std::is_sorted(cs1.begin(), cs1.end(), [](const auto& a, const auto& b) { return a.id < b.id; }));
}

TEST_CASE("filter_cs1 edge cases and ledger") {
    const auto pairs = testing::synthetic_corpus(500, 120, 4);
    CHECK(corpus::filter_cs1(pairs, {}).empty());

    auto only = corpus::filter_cs1(pairs, {testing::kCs1Course});
    auto same = corpus::filter_cs1(only, {testing::kCs1Course});
    CHECK(same == only);

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const auto n = rng.below(300);
        const auto k = rng.below(n + 1);
        auto corpus_pairs = testing::synthetic_corpus(n, k, seed);
        auto kept = corpus::filter_cs1(corpus_pairs, {testing::kCs1Course});
        std::size_t rejected = 0;
        for (const auto& p : corpus_pairs) rejected += p.course_code != testing::kCs1Course;
        CHECK(kept.size() + rejected == corpus_pairs.size());
        CHECK(kept.size() == k);
    }
}

TEST_CASE("stage transitions are monotonic") {
    corpus::QAPair p;
    p.id = "x";
    p.advance(Stage::cleansed);
    p.advance(Stage::cleansed);
    p.advance(Stage::enhanced);
    CHECK(p.stage == Stage::enhanced);
    CHECK_THROWS_AS(p.advance(Stage::reviewed), ValidationError);
    CHECK(corpus::parse_stage("exported") == Stage::exported);
    CHECK_FALSE(corpus::parse_stage("done"));
}
