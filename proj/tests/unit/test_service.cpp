#include <doctest.h>

#include <thread>

#include <httplib.h>

#include "guidelm/errors.hpp"
#include "guidelm/service.hpp"
#include "synthetic.hpp"

using namespace guidelm;
using namespace guidelm::service;

namespace {

const std::vector<std::string> kModels = {"model-alpha-x1", "model-beta-x2", "model-gamma-x3", "model-delta-x4"};

std::vector<corpus::QAPair> pairs() {
    auto p = testing::synthetic_corpus(40, 40, 6);
    for (auto& x : p) x.stage = corpus::Stage::cleansed;
    return p;
}

ReviewSetup review_setup(const std::filesystem::path& log, std::size_t per) {
    auto ps = pairs();
    auto assignments = review::sample_assignments(ps, {"ta1", "ta2"}, per, 3);
    return {ps, assignments, log};
}

EvalSetup eval_setup(const std::filesystem::path& log) {
    std::vector<promptgen::ErrorEvent> events;
    evalkit::ModelOutputs outputs;
    for (int i = 0; i < 6; ++i) {
        promptgen::ErrorEvent e;
        e.id = "ev" + std::to_string(i);
        e.kind = i % 2 ? promptgen::EventKind::run_time : promptgen::EventKind::compile_time;
        e.source_code = "int main(void) { return x" + std::to_string(i) + "; }";
        e.error_and_explanation = "use of undeclared identifier";
        events.push_back(e);
        for (std::size_t m = 0; m < kModels.size(); ++m)
            outputs[kModels[m]][e.id] = "Look at line " + std::to_string(m + 1) + " again.";
    }
    auto session = evalkit::make_sessions(events, kModels, outputs, 9, 2);
    evalkit::assign_raters(session, {"rater1", "rater2"});
    return {session, log};
}

json decision_body(const std::string& pair, bool all = true) {
    json criteria = json::object();
    for (auto c : review::kAllCriteria) criteria[std::string(review::to_string(c))] = true;
    if (!all) criteria["formal_tone"] = false;
    return {{"task_id", pair}, {"criteria", criteria}, {"not_applicable", false},
            {"timestamp", "2024-06-01T10:00:00Z"}};
}

json rating_body(const std::string& item, std::vector<std::optional<int>> ranks) {
    json ratings = json::array();
    for (std::size_t s = 0; s < ranks.size(); ++s) {
        json props = json::object();
        for (auto p : evalkit::kAllProperties) props[std::string(evalkit::to_string(p))] = s % 2 == 0;
        json r{{"slot", s}, {"properties", props}};
        r["rank"] = ranks[s] ? json(*ranks[s]) : json(nullptr);
        ratings.push_back(r);
    }
    return {{"item_id", item}, {"ratings", ratings}};
}

void check_blind(const std::string& body) {
    for (const auto& m : kModels) CHECK_MESSAGE(body.find(m) == std::string::npos, body);
    CHECK(body.find("blind_labels") == std::string::npos);
    CHECK(body.find("model_id") == std::string::npos);
}

}  // namespace

TEST_CASE("review queue walk") {
    testing::TempDir dir;
    Service svc(review_setup(dir / "d.jsonl", 5), std::nullopt);
    auto first = svc.next_task("ta1", TaskKind::review);
    REQUIRE(first.task_id);
    CHECK(first.position == 1);
    CHECK(first.total == 5);
    CHECK(first.remaining_count == 5);
    CHECK(svc.next_task("ta1", TaskKind::review).task_id == first.task_id);  // idempotent

    auto ack = svc.submit_review("ta1", decision_body(*first.task_id));
    CHECK(ack.remaining_count == 4);
    CHECK_FALSE(ack.revision);
    auto second = svc.next_task("ta1", TaskKind::review);
    CHECK(second.task_id != first.task_id);
    CHECK(second.position == 2);

    auto again = svc.submit_review("ta1", decision_body(*first.task_id, false));
    CHECK(again.revision);
    CHECK(again.remaining_count == 4);

    CHECK_THROWS_AS(svc.next_task("nobody", TaskKind::review), UnknownWorker);
    CHECK_THROWS_AS(svc.submit_review("ta1", decision_body("ghost")), UnknownTask);
    auto bad = decision_body(*second.task_id);
    bad["criteria"].erase("self_contained");
    CHECK_THROWS_AS(svc.submit_review("ta1", bad), ValidationError);

    for (int i = 0; i < 4; ++i) svc.submit_review("ta1", decision_body(*svc.next_task("ta1", TaskKind::review).task_id));
    auto done = svc.next_task("ta1", TaskKind::review);
    CHECK_FALSE(done.task_id);
    CHECK(done.remaining_count == 0);
    CHECK(done.payload.is_null());
}

TEST_CASE("fresh queue of 500") {
    testing::TempDir dir;
    auto ps = testing::synthetic_corpus(1200, 1200, 2);
    Service svc(ReviewSetup{ps, review::sample_assignments(ps, {"ta"}, 500, 1), dir / "d.jsonl"}, std::nullopt);
    auto env = svc.next_task("ta", TaskKind::review);
    CHECK(env.position == 1);
    CHECK(env.total == 500);
    CHECK(env.remaining_count == 500);
}

TEST_CASE("state survives a restart through the log") {
    testing::TempDir dir;
    auto setup = review_setup(dir / "d.jsonl", 5);
    std::string first;
    {
        Service svc(setup, std::nullopt);
        first = *svc.next_task("ta2", TaskKind::review).task_id;
        svc.submit_review("ta2", decision_body(first));
    }
    Service again(setup, std::nullopt);
    auto env = again.next_task("ta2", TaskKind::review);
    CHECK(env.remaining_count == 4);
    CHECK(env.task_id != first);
    CHECK(again.decisions().size() == 1);
}

TEST_CASE("rating queue, calibration and blinding") {
    testing::TempDir dir;
    auto setup = eval_setup(dir / "r.jsonl");
    Service svc(std::nullopt, setup);
    auto env = svc.next_task("rater1", TaskKind::rating);
    REQUIRE(env.task_id);
    CHECK(env.total == 4);  // 2 calibration + 2 of the remaining 4
    check_blind(to_json(env).dump());
    CHECK(env.payload["responses"].size() == 4);
    CHECK(env.payload["responses"][0]["label"] == "A");

    auto dup = rating_body(*env.task_id, {1, 1, 2, 3});
    CHECK_THROWS_WITH_AS(svc.submit_rating("rater1", dup), doctest::Contains("rank"), ValidationError);
    auto ack = svc.submit_rating("rater1", rating_body(*env.task_id, {1, 2, 3, std::nullopt}));
    CHECK(ack.calibration);
    CHECK(ack.remaining_count == 3);
    auto rev = svc.submit_rating("rater1", rating_body(*env.task_id, {2, 1, 3, 4}));
    CHECK(rev.revision);
    CHECK(rev.remaining_count == 3);
    CHECK(svc.ratings().size() == 4);
    check_blind(svc.summary().dump());

    CHECK_THROWS_AS(svc.next_task("rater9", TaskKind::rating), UnknownWorker);
    CHECK_THROWS_AS(svc.next_task("rater1", TaskKind::review), UnknownWorker);
}

TEST_CASE("HTTP API") {
    testing::TempDir dir;
    Service svc(review_setup(dir / "d.jsonl", 3), eval_setup(dir / "r.jsonl"));
    ServerOptions options;
    options.bearer_token = "s3cret";
    auto server = make_server(svc, options);
    const int port = server->bind_to_any_port("127.0.0.1");
    std::thread t([&] { server->listen_after_bind(); });
    server->wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    CHECK(client.Get("/healthz")->status == 200);
    CHECK(client.Get("/api/review/next?worker=ta1")->status == 401);

    client.set_bearer_token_auth("s3cret");
    auto next = client.Get("/api/review/next?worker=ta1");
    REQUIRE(next);
    CHECK(next->status == 200);
    auto env = json::parse(next->body);
    CHECK(env["kind"] == "review");
    CHECK(env["remaining_count"] == 3);
    const std::string pair = env["task_id"];

    auto body = decision_body(pair);
    body["reviewer_id"] = "ta1";
    auto posted = client.Post("/api/review/decision", body.dump(), "application/json");
    CHECK(posted->status == 200);
    CHECK(json::parse(posted->body)["remaining_count"] == 2);

    auto invalid = decision_body(pair);
    invalid["reviewer_id"] = "ta1";
    invalid["criteria"]["formal_tone"] = "yes";
    auto rejected = client.Post("/api/review/decision", invalid.dump(), "application/json");
    CHECK(rejected->status == 400);
    CHECK(json::parse(rejected->body)["field"] == "criteria.formal_tone");

    CHECK(client.Post("/api/review/decision", "{not json", "application/json")->status == 400);
    CHECK(client.Get("/api/review/next?worker=ghost")->status == 404);
    CHECK(client.Get("/api/review/next")->status == 400);

    // every rating task body stays blind
    for (const std::string rater : {"rater1", "rater2"}) {
        for (;;) {
            auto res = client.Get("/api/eval/next?worker=" + rater);
            REQUIRE(res->status == 200);
            check_blind(res->body);
            auto e = json::parse(res->body);
            if (e["task_id"].is_null()) break;
            auto rb = rating_body(e["task_id"], {4, 3, 2, 1});
            rb["rater_id"] = rater;
            auto ack = client.Post("/api/eval/rating", rb.dump(), "application/json");
            REQUIRE(ack->status == 200);
            check_blind(ack->body);
        }
    }
    auto dup = rating_body("ev0", {1, 1, 2, 3});
    dup["rater_id"] = "rater1";
    auto dup_res = client.Post("/api/eval/rating", dup.dump(), "application/json");
    CHECK(dup_res->status == 400);
    CHECK(json::parse(dup_res->body)["field"] == "rank");

    auto summary = client.Get("/api/reports/summary");
    CHECK(summary->status == 200);
    check_blind(summary->body);
    CHECK(json::parse(summary->body)["review"]["stats"]["total"] == 1);

    server->stop();
    t.join();

    // the logs on disk are the state
    CHECK(review::read_decision_log(dir / "d.jsonl").decisions.size() == 1);
    CHECK(evalkit::read_rating_log(dir / "r.jsonl").records.size() == 8 * 4);
}

TEST_CASE("concurrent submissions are all logged") {
    testing::TempDir dir;
    auto ps = testing::synthetic_corpus(400, 400, 4);
    std::vector<std::string> workers;
    for (int i = 0; i < 8; ++i) workers.push_back("w" + std::to_string(i));
    Service svc(ReviewSetup{ps, review::sample_assignments(ps, workers, 25, 5), dir / "d.jsonl"}, std::nullopt);
    std::vector<std::thread> threads;
    for (const auto& w : workers) {
        threads.emplace_back([&svc, w] {
            for (;;) {
                auto env = svc.next_task(w, TaskKind::review);
                if (!env.task_id) break;
                svc.submit_review(w, decision_body(*env.task_id));
            }
        });
    }
    for (auto& t : threads) t.join();
    auto log = review::read_decision_log(dir / "d.jsonl");
    CHECK(log.errors.empty());
    CHECK(log.decisions.size() == 200);
}

TEST_CASE("corrupt logs stop the service at startup") {
    testing::TempDir dir;
    write_file(dir / "d.jsonl", "{\"pair_id\":\n");
    CHECK_THROWS_AS(Service(review_setup(dir / "d.jsonl", 2), std::nullopt), ValidationError);
}
