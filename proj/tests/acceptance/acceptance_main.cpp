// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "expected.hpp"
#include "guidelm/cleanse.hpp"
#include "guidelm/dataset_export.hpp"
#include "guidelm/errors.hpp"
#include "guidelm/evalkit.hpp"
#include "guidelm/promptgen.hpp"
#include "guidelm/report.hpp"
#include "guidelm/review.hpp"
#include "synthetic.hpp"

using namespace guidelm;
using namespace guidelm::evalkit;
using promptgen::EventKind;
namespace fs = std::filesystem;

namespace {

constexpr auto CT = EventKind::compile_time;
constexpr auto RT = EventKind::run_time;
constexpr double kTimeBudgetSeconds = 1.0;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            if (pass) detail << what;
            pass = false;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void delta_table_cells(Outcome& o) {
    const auto t0 = Clock::now();
    const auto report = load_figure_report(testing::figures_dir(), default_pairings());
    const auto deltas = delta_table(report.acceptance, default_pairings());
    const double elapsed = seconds_since(t0);
    const std::array<std::pair<EventKind, std::string>, 4> columns = {
        std::pair{CT, std::string("4o")}, std::pair{RT, std::string("4o")}, std::pair{CT, std::string("mini")},
        std::pair{RT, std::string("mini")}};
    int matched = 0;
    for (std::size_t row = 0; row < kAllProperties.size(); ++row) {
        for (std::size_t col = 0; col < columns.size(); ++col) {
            const DeltaKey k{columns[col].first, columns[col].second, kAllProperties[row]};
            const auto it = deltas.find(k);
            const std::string got = it == deltas.end() ? "missing" : it->second.str();
            const std::string want(testing::kPublishedDeltas[row][col]);
            if (got == want) {
                ++matched;
            } else {
                o.expect(false, key(kAllProperties[row]) + " col " + std::to_string(col) + ": " + got + " != " + want);
            }
        }
    }
    o.expect(elapsed < kTimeBudgetSeconds, "took " + std::to_string(elapsed) + " s");
    if (o.pass) o.detail << matched << "/36 cells, " << elapsed * 1000 << " ms";
}

void first_choice(Outcome& o) {
    const auto t0 = Clock::now();
    const auto report = load_figure_report(testing::figures_dir(), default_pairings());
    const auto rt = first_choice_share(report.ranks.at({RT, "4o FT"}));
    const auto ct = first_choice_share(report.ranks.at({CT, "4o FT"}));
    const double elapsed = seconds_since(t0);
    o.expect(rt.str() == testing::kPublishedRtFirstChoice, "RT 4o FT " + rt.str());
    o.expect(std::abs(ct.scaled - testing::kPublishedCtFirstChoiceTenths) <= testing::kCtFirstChoiceToleranceTenths,
             "CT 4o FT " + ct.str());
    o.expect(elapsed < kTimeBudgetSeconds, "took " + std::to_string(elapsed) + " s");
    if (o.pass) o.detail << "RT " << rt.str() << ", CT " << ct.str() << " (44.6 +-1.2)";
}

void headlines(Outcome& o) {
    const auto report = load_figure_report(testing::figures_dir(), default_pairings());
    const auto socratic = report.headlines.at({"4o", RubricProperty::socratic_guidance});
    const auto economy = report.headlines.at({"4o", RubricProperty::economy_of_words});
    o.expect(socratic == testing::kHeadlineSocratic, "C9 = " + std::to_string(socratic));
    o.expect(economy == testing::kHeadlineEconomy, "C8 = " + std::to_string(economy));
    if (o.pass) o.detail << "C9 " << socratic << ", C8 " << economy;
}

void review_statistics(Outcome& o) {
    const auto pairs = testing::synthetic_corpus(13000, 13000, 8);
    std::vector<std::string> ids;
    for (const auto& p : pairs) ids.push_back(p.id);
    const auto decisions = testing::synthetic_decisions(ids, testing::kReviewYes, 1340, 632, 40, 99);
    const auto stats = review::review_stats(decisions);
    std::size_t total = 0;
    for (const auto& [c, s] : stats) total += s.count;
    const auto yes = stats.at(review::ReviewCategory::yes);
    o.expect(total == testing::kReviewSample, "total " + std::to_string(total));
    o.expect(std::abs(yes.percentage.scaled - testing::kPublishedYesPercent * 10) <= 10, "yes " + yes.percentage.str());
    const auto accepted = review::accept_set(decisions, pairs);
    o.expect(accepted.size() == testing::kReviewYes, "accepted " + std::to_string(accepted.size()));
    if (o.pass) o.detail << "yes " << yes.percentage.str() << "%, accepted " << accepted.size();
}

void golden_prompts(Outcome& o) {
    const auto root = testing::source_dir() / "data";
    auto file = promptgen::read_events(root / "fixtures" / "prompt_events.jsonl");
    o.expect(file.errors.empty(), "fixture has malformed lines");
    std::size_t ct = 0, rt = 0;
    for (const auto& e : file.events) {
        const auto m = promptgen::build_prompt(e);
        o.expect(m.size() == 2, e.id + ": message count");
        if (m.size() != 2) continue;
        o.expect(m[1].content == read_file(root / "golden" / (e.id + ".user.txt")), e.id + ": user message differs");
        o.expect(m[0].content == read_file(root / "golden" / "system.txt"), e.id + ": system message differs");
        (e.kind == CT ? ct : rt)++;
    }
    o.expect(ct == 3 && rt == 3, "expected 3 + 3 events");
    if (o.pass) o.detail << ct << " compile-time + " << rt << " run-time goldens";
}

void property_suite(Outcome& o) {
    // cleanse idempotence and no residual match
    cleanse::CleanseConfig config;
    config.name_blacklist = testing::sample_names();
    config.template_blacklist = testing::sample_templates();
    const cleanse::Cleanser cleanser(config);
    std::vector<std::regex> patterns;
    for (const auto& p : config.pii_patterns) patterns.emplace_back(p.source);
    Rng rng(2024);
    for (int i = 0; i < 1000 && o.pass; ++i) {
        const auto once = cleanser.clean_text(testing::random_text(rng)).text;
        o.expect(cleanser.clean_text(once).text == once, "clean_text not idempotent");
        for (const auto& re : patterns) o.expect(!std::regex_search(once, re), "pattern survives cleanse");
        for (const auto& t : config.template_blacklist) o.expect(once.find(t) == std::string::npos, "template survives");
    }

    // length boundaries
    auto pair = [](std::string q, std::string a) {
        corpus::QAPair p;
        p.question_text = std::move(q);
        p.answer_text = std::move(a);
        return p;
    };
    using cleanse::LengthDecision;
    o.expect(cleanse::length_filter(pair("123456789", "12"), config) == LengthDecision::keep, "9/2 dropped");
    o.expect(cleanse::length_filter(pair("12345678", "12"), config) == LengthDecision::drop, "8/2 kept");
    o.expect(cleanse::length_filter(pair("123456789", "1"), config) == LengthDecision::drop, "9/1 kept");
    o.expect(cleanse::length_filter(pair("ééééééééé", "éé"), config) == LengthDecision::keep, "scalar count");

    // export round trip
    testing::TempDir dir;
    for (int round = 0; round < 20 && o.pass; ++round) {
        std::vector<corpus::QAPair> pairs;
        for (std::size_t i = 0, n = 1 + rng.below(30); i < n; ++i) {
            auto p = pair("q " + testing::random_text(rng) + " \"x\"\t\\", "a " + testing::random_text(rng) + "\n");
            p.id = "p" + std::to_string(i);
            p.stage = corpus::Stage::enhanced;
            pairs.push_back(p);
        }
        const auto records = dataset_export::to_finetune_records(pairs, "system prompt");
        dataset_export::write_jsonl(records, dir / "rt.jsonl");
        const auto report = dataset_export::validate_jsonl(dir / "rt.jsonl");
        o.expect(report.ok() && report.records == records, "export round trip differs");
    }

    // blinding bijection and calibration exclusion
    for (std::uint64_t seed = 1; seed <= 50 && o.pass; ++seed) {
        auto rs = testing::random_eval(seed);
        const std::set<std::string> models(rs.session.models.begin(), rs.session.models.end());
        for (const auto& item : rs.session.items) {
            const std::set<std::string> labels(item.blind_labels.begin(), item.blind_labels.end());
            o.expect(labels == models && item.blind_labels.size() == models.size(), "blind labels not a bijection");
        }
        std::vector<RatingRecord> no_calibration;
        for (const auto& r : rs.ratings)
            if (!rs.session.find(r.item_id)->calibration) no_calibration.push_back(r);
        o.expect(acceptance_rates(rs.ratings, rs.session) == acceptance_rates(no_calibration, rs.session),
                 "calibration rows change rates");
        o.expect(rank_distribution(rs.ratings, rs.session) == rank_distribution(no_calibration, rs.session),
                 "calibration rows change ranks");

        // brute-force oracles
        const auto rates = acceptance_rates(rs.ratings, rs.session);
        const auto oracle = testing::oracle_counts(rs.ratings, rs.session);
        o.expect(rates.size() == oracle.size(), "rate cell count differs from oracle");
        for (const auto& [k, c] : oracle) {
            const auto it = rates.find(k);
            o.expect(it != rates.end() && it->second == Rate::percentage(static_cast<std::int64_t>(c.first),
                                                                         static_cast<std::int64_t>(c.second)),
                     "rate differs from oracle");
        }
        o.expect(rank_distribution(rs.ratings, rs.session) == testing::oracle_ranks(rs.ratings, rs.session),
                 "ranks differ from oracle");
    }
    if (o.pass) o.detail << "1000 texts, 20 export rounds, 50 sessions";
}

void echo_pipeline(Outcome& o) {
    testing::TempDir a, b;
    const auto first = testing::run_echo_pipeline(a.path(), 11);
    const auto second = testing::run_echo_pipeline(b.path(), 11);
    o.expect(first.accepted > 0, "nothing accepted");
    o.expect(first.report.ok(), "export fails validation");
    o.expect(first.report.record_count == first.accepted,
             std::to_string(first.report.record_count) + " records for " + std::to_string(first.accepted) + " pairs");
    o.expect(first.export_bytes == second.export_bytes, "runs differ");
    if (o.pass) o.detail << first.accepted << " records, " << first.export_bytes.size() << " bytes, identical twice";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
        {"fine-tune delta table", delta_table_cells},
        {"first-choice shares", first_choice},
        {"headline averages", headlines},
        {"review statistics", review_statistics},
        {"prompt golden files", golden_prompts},
        {"pipeline property suite", property_suite},
        {"echo-mock end-to-end run", echo_pipeline},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            check(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail.str() << '\n';
        failures += o.pass ? 0 : 1;
    }
    return failures;
}
