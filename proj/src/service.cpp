#include "guidelm/service.hpp"

#include <httplib.h>

#include "guidelm/util/timestamp.hpp"

namespace guidelm::service {

std::string_view to_string(TaskKind kind) {
    return kind == TaskKind::review ? "review" : "rating";
}

json to_json(const TaskEnvelope& e) {
    return json{{"task_id", e.task_id ? json(*e.task_id) : json(nullptr)},
                {"kind", to_string(e.kind)},
                {"payload", e.payload},
                {"remaining_count", e.remaining_count},
                {"position", e.position},
                {"total", e.total}};
}

json to_json(const Ack& ack) {
    return json{{"ok", true},
                {"task_id", ack.task_id},
                {"remaining_count", ack.remaining_count},
                {"revision", ack.revision},
                {"calibration", ack.calibration}};
}

Service::Service(std::optional<ReviewSetup> review, std::optional<EvalSetup> eval)
    : review_(std::move(review)), eval_(std::move(eval)) {
    if (review_) {
        for (std::size_t i = 0; i < review_->pairs.size(); ++i) pair_index_.emplace(review_->pairs[i].id, i);
        for (const auto& [worker, ids] : review_->assignments) {
            for (const auto& id : ids) {
                if (!pair_index_.contains(id))
                    throw ValidationError("assignment of '" + worker + "' references unknown pair '" + id + "'");
            }
        }
        auto log = review::read_decision_log(review_->decision_log);
        if (!log.errors.empty())
            throw ValidationError("decision log line " + std::to_string(log.errors[0].line) + ": " +
                                  log.errors[0].reason);
        decisions_ = std::move(log.decisions);
        for (const auto& d : decisions_) ++decided_[{d.reviewer_id, d.pair_id}];
        decision_log_ = std::make_unique<AppendLog>(review_->decision_log);
    }
    if (eval_) {
        std::vector<LineError> errors;
        auto log = evalkit::read_rating_log(eval_->rating_log);
        ratings_ = evalkit::replay(log, eval_->session, errors);
        errors.insert(errors.end(), log.errors.begin(), log.errors.end());
        if (!errors.empty())
            throw ValidationError("rating log entry " + std::to_string(errors[0].line) + ": " + errors[0].reason);
        rating_log_ = std::make_unique<AppendLog>(eval_->rating_log);
    }
}

Service::~Service() = default;

bool Service::review_done(const std::string& worker, const std::string& pair_id) const {
    return decided_.contains({worker, pair_id});
}

bool Service::rating_done(const std::string& worker, const std::string& item_id) const {
    const auto* item = eval_->session.find(item_id);
    if (!item) return false;
    for (std::size_t s = 0; s < item->slot_count(); ++s) {
        if (!ratings_.has(item_id, worker, s)) return false;
    }
    return true;
}

json Service::pair_view(const corpus::QAPair& pair) const {
    return json{{"pair_id", pair.id},
                {"course_code", pair.course_code},
                {"term", pair.term},
                {"question", pair.question_text},
                {"answer", pair.answer_text}};
}

json Service::item_view(const evalkit::EvalItem& item) const {
    json responses = json::array();
    for (std::size_t s = 0; s < item.slot_count(); ++s) {
        responses.push_back({{"slot", s}, {"label", evalkit::slot_label(s)}, {"text", item.text_for_slot(s)}});
    }
    return json{{"item_id", item.item_id},
                {"event_kind", promptgen::to_string(item.event_kind)},
                {"source_code", item.source_code},
                {"error_and_explanation", item.error_and_explanation},
                {"responses", responses}};
}

TaskEnvelope Service::next_task(const std::string& worker, TaskKind kind) const {
    std::lock_guard lock(mutex_);
    TaskEnvelope env;
    env.kind = kind;
    if (kind == TaskKind::review) {
        if (!review_) throw UnknownWorker("no review queue is configured");
        auto it = review_->assignments.find(worker);
        if (it == review_->assignments.end()) throw UnknownWorker("unknown reviewer '" + worker + "'");
        const auto& ids = it->second;
        env.total = ids.size();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (review_done(worker, ids[i])) continue;
            ++env.remaining_count;
            if (!env.task_id) {
                env.task_id = ids[i];
                env.position = i + 1;
                env.payload = pair_view(review_->pairs[pair_index_.at(ids[i])]);
            }
        }
    } else {
        if (!eval_) throw UnknownWorker("no evaluation session is configured");
        auto it = eval_->session.rater_items.find(worker);
        if (it == eval_->session.rater_items.end()) throw UnknownWorker("unknown rater '" + worker + "'");
        const auto& ids = it->second;
        env.total = ids.size();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (rating_done(worker, ids[i])) continue;
            ++env.remaining_count;
            if (!env.task_id) {
                env.task_id = ids[i];
                env.position = i + 1;
                env.payload = item_view(*eval_->session.find(ids[i]));
            }
        }
    }
    return env;
}

Ack Service::submit_review(const std::string& worker, const json& body) {
    if (!body.is_object()) throw ValidationError("body: must be a JSON object");
    json j = body;
    if (!j.contains("pair_id") && j.contains("task_id")) j["pair_id"] = j["task_id"];
    if (!j.contains("reviewer_id")) j["reviewer_id"] = worker;
    if (!j.contains("timestamp") || j["timestamp"].is_null()) j["timestamp"] = format_iso8601(now_utc());
    auto decision = review::decision_from_json(j);
    if (decision.reviewer_id != worker) throw ValidationError("reviewer_id: does not match the worker");

    std::lock_guard lock(mutex_);
    if (!review_) throw UnknownWorker("no review queue is configured");
    auto it = review_->assignments.find(worker);
    if (it == review_->assignments.end()) throw UnknownWorker("unknown reviewer '" + worker + "'");
    if (std::find(it->second.begin(), it->second.end(), decision.pair_id) == it->second.end())
        throw UnknownTask("pair '" + decision.pair_id + "' is not in the queue of '" + worker + "'");

    Ack ack;
    ack.task_id = decision.pair_id;
    ack.revision = review_done(worker, decision.pair_id);
    decision_log_->append(review::to_json(decision));
    decisions_.push_back(decision);
    ++decided_[{worker, decision.pair_id}];
    for (const auto& id : it->second) ack.remaining_count += review_done(worker, id) ? 0 : 1;
    return ack;
}

Ack Service::submit_rating(const std::string& worker, const json& body) {
    if (!body.is_object()) throw ValidationError("body: must be a JSON object");
    std::vector<json> parts;
    std::string item_id;
    if (body.contains("ratings")) {
        if (!body["ratings"].is_array() || body["ratings"].empty())
            throw ValidationError("ratings: must be a non-empty array");
        const json& id = body.contains("item_id") ? body["item_id"] : body.value("task_id", json(nullptr));
        if (!id.is_string()) throw ValidationError("item_id: required with a ratings array");
        item_id = id.get<std::string>();
        for (const auto& r : body["ratings"]) {
            if (!r.is_object()) throw ValidationError("ratings: entries must be objects");
            parts.push_back(r);
        }
    } else {
        parts.push_back(body);
    }
    std::vector<evalkit::RatingRecord> records;
    for (auto j : parts) {
        if (!item_id.empty() && !j.contains("item_id")) j["item_id"] = item_id;
        if (!j.contains("item_id") && j.contains("task_id")) j["item_id"] = j["task_id"];
        if (!j.contains("rater_id")) j["rater_id"] = worker;
        auto r = evalkit::rating_from_json(j);
        if (r.rater_id != worker) throw ValidationError("rater_id: does not match the worker");
        records.push_back(std::move(r));
    }

    std::lock_guard lock(mutex_);
    if (!eval_) throw UnknownWorker("no evaluation session is configured");
    auto it = eval_->session.rater_items.find(worker);
    if (it == eval_->session.rater_items.end()) throw UnknownWorker("unknown rater '" + worker + "'");
    const auto& target = records.front().item_id;
    if (std::find(it->second.begin(), it->second.end(), target) == it->second.end())
        throw UnknownTask("item '" + target + "' is not in the queue of '" + worker + "'");

    Ack ack;
    ack.task_id = target;
    ack.revision = rating_done(worker, target);
    auto result = ratings_.record_all(records, eval_->session);
    if (!result.accepted) throw ValidationError(result.reason);
    for (const auto& r : records) rating_log_->append(evalkit::to_json(r));
    ack.calibration = result.calibration;
    for (const auto& id : it->second) ack.remaining_count += rating_done(worker, id) ? 0 : 1;
    return ack;
}

json Service::summary() const {
    std::lock_guard lock(mutex_);
    json out = json::object();
    if (review_) {
        json progress = json::object();
        for (const auto& [worker, ids] : review_->assignments) {
            std::size_t done = 0;
            for (const auto& id : ids) done += review_done(worker, id) ? 1 : 0;
            progress[worker] = {{"done", done}, {"total", ids.size()}};
        }
        out["review"] = {{"stats", review::stats_to_json(review::review_stats(decisions_))}, {"progress", progress}};
    }
    if (eval_) {
        json progress = json::object();
        for (const auto& [worker, ids] : eval_->session.rater_items) {
            std::size_t done = 0;
            for (const auto& id : ids) done += rating_done(worker, id) ? 1 : 0;
            progress[worker] = {{"done", done}, {"total", ids.size()}};
        }
        out["eval"] = {{"progress", progress}, {"rating_rows", ratings_.records().size()}};
    }
    return out;
}

std::vector<review::ReviewDecision> Service::decisions() const {
    std::lock_guard lock(mutex_);
    return decisions_;
}

std::vector<evalkit::RatingRecord> Service::ratings() const {
    std::lock_guard lock(mutex_);
    return ratings_.records();
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    json body{{"error", message}};
    // validation messages are "field: problem"
    if (auto colon = message.find(": "); status == 400 && colon != std::string::npos &&
                                         message.find(' ') > colon) {
        body["field"] = message.substr(0, colon);
    }
    send_json(res, status, body);
}

template <typename Fn>
httplib::Server::Handler guarded(const ServerOptions& options, Fn fn) {
    return [token = options.bearer_token, fn](const httplib::Request& req, httplib::Response& res) {
        if (!token.empty() && req.get_header_value("Authorization") != "Bearer " + token) {
            send_error(res, 401, "missing or invalid bearer token");
            return;
        }
        try {
            fn(req, res);
        } catch (const UnknownWorker& e) {
            send_error(res, 404, e.what());
        } catch (const UnknownTask& e) {
            send_error(res, 404, e.what());
        } catch (const ValidationError& e) {
            send_error(res, 400, e.what());
        } catch (const json::exception& e) {
            send_error(res, 400, std::string("body: ") + e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    };
}

std::string worker_of(const httplib::Request& req, const json* body, const char* body_key) {
    if (req.has_param("worker")) return req.get_param_value("worker");
    if (body && body->is_object() && body->contains(body_key) && (*body)[body_key].is_string())
        return (*body)[body_key].get<std::string>();
    throw ValidationError("worker: query parameter is required");
}

}  // namespace

std::unique_ptr<httplib::Server> make_server(Service& service, const ServerOptions& options) {
    auto server = std::make_unique<httplib::Server>();
    server->Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, json{{"status", "ok"}});
    });
    server->Get("/api/review/next", guarded(options, [&service](const httplib::Request& req, httplib::Response& res) {
                    send_json(res, 200, to_json(service.next_task(worker_of(req, nullptr, ""), TaskKind::review)));
                }));
    server->Get("/api/eval/next", guarded(options, [&service](const httplib::Request& req, httplib::Response& res) {
                    send_json(res, 200, to_json(service.next_task(worker_of(req, nullptr, ""), TaskKind::rating)));
                }));
    server->Post("/api/review/decision",
                 guarded(options, [&service](const httplib::Request& req, httplib::Response& res) {
                     const auto body = json::parse(req.body);
                     send_json(res, 200, to_json(service.submit_review(worker_of(req, &body, "reviewer_id"), body)));
                 }));
    server->Post("/api/eval/rating", guarded(options, [&service](const httplib::Request& req, httplib::Response& res) {
                     const auto body = json::parse(req.body);
                     send_json(res, 200, to_json(service.submit_rating(worker_of(req, &body, "rater_id"), body)));
                 }));
    server->Get("/api/reports/summary",
                guarded(options, [&service](const httplib::Request&, httplib::Response& res) {
                    send_json(res, 200, service.summary());
                }));
    if (options.static_dir) server->set_mount_point("/", options.static_dir->string());
    return server;
}

}  // namespace guidelm::service
