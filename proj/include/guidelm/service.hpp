#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "guidelm/corpus.hpp"
#include "guidelm/evalkit.hpp"
#include "guidelm/review.hpp"

namespace httplib {
class Server;
}

namespace guidelm::service {

class UnknownWorker : public Error {
public:
    using Error::Error;
};

class UnknownTask : public Error {
public:
    using Error::Error;
};

enum class TaskKind { review, rating };

std::string_view to_string(TaskKind kind);

struct TaskEnvelope {
    std::optional<std::string> task_id;  // empty when the worker's queue is finished
    TaskKind kind = TaskKind::review;
    json payload;                        // pair view or blinded item view; null when finished
    std::size_t remaining_count = 0;
    std::size_t position = 0;            // 1-based index of this task in the worker's queue
    std::size_t total = 0;
};

json to_json(const TaskEnvelope& envelope);

struct Ack {
    std::string task_id;
    std::size_t remaining_count = 0;
    bool revision = false;     // the task had already been completed
    bool calibration = false;  // rating for a calibration item
};

json to_json(const Ack& ack);

struct ReviewSetup {
    std::vector<corpus::QAPair> pairs;
    std::map<std::string, std::vector<std::string>> assignments;
    std::filesystem::path decision_log;
};

struct EvalSetup {
    evalkit::Session session;
    std::filesystem::path rating_log;
};

/// Review and rating queues over the shared JSONL logs. Existing log lines are replayed at
/// construction; every accepted submission is appended before it is acknowledged.
class Service {
public:
    Service(std::optional<ReviewSetup> review, std::optional<EvalSetup> eval);
    ~Service();

    /// Lowest-index unfinished task of the worker. Throws UnknownWorker.
    TaskEnvelope next_task(const std::string& worker, TaskKind kind) const;

    /// Body is a ReviewDecision; pair_id may be given as task_id, reviewer_id defaults to the
    /// worker and timestamp to now. Throws UnknownWorker, UnknownTask or ValidationError.
    Ack submit_review(const std::string& worker, const json& body);

    /// Body is a RatingRecord, or {"task_id"|"item_id": ..., "ratings": [ ... ]} covering several
    /// slots of one item. Throws UnknownWorker, UnknownTask or ValidationError.
    Ack submit_rating(const std::string& worker, const json& body);

    /// Review category counts and per-worker progress. Contains no model identities.
    json summary() const;

    std::vector<review::ReviewDecision> decisions() const;
    std::vector<evalkit::RatingRecord> ratings() const;

private:
    bool review_done(const std::string& worker, const std::string& pair_id) const;
    bool rating_done(const std::string& worker, const std::string& item_id) const;
    json pair_view(const corpus::QAPair& pair) const;
    json item_view(const evalkit::EvalItem& item) const;

    mutable std::mutex mutex_;
    std::optional<ReviewSetup> review_;
    std::optional<EvalSetup> eval_;
    std::map<std::string, std::size_t> pair_index_;
    std::vector<review::ReviewDecision> decisions_;
    std::map<std::pair<std::string, std::string>, std::size_t> decided_;  // (worker, pair) -> count
    evalkit::RatingBook ratings_;
    std::unique_ptr<AppendLog> decision_log_;
    std::unique_ptr<AppendLog> rating_log_;
};

struct ServerOptions {
    std::string bearer_token;  // empty disables authentication
    std::optional<std::filesystem::path> static_dir;
};

/// Routes: GET /api/review/next, POST /api/review/decision, GET /api/eval/next,
/// POST /api/eval/rating, GET /api/reports/summary, GET /healthz.
std::unique_ptr<httplib::Server> make_server(Service& service, const ServerOptions& options);

}  // namespace guidelm::service
