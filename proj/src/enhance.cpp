#include "guidelm/enhance.hpp"

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "guidelm/errors.hpp"

namespace guidelm::enhance {

std::string_view grammar_system_prompt() {
    static constexpr std::string_view prompt =
        "You are a grammar corrector. Correct the spelling, punctuation and spacing in each cell. "
        "Format code snippets with correct spacing and surround by backticks.";
    return prompt;
}

std::string_view to_string(Field f) {
    return f == Field::question ? "question" : "answer";
}

std::string_view to_string(JobStatus s) {
    switch (s) {
        case JobStatus::pending: return "pending";
        case JobStatus::done: return "done";
        case JobStatus::failed: return "failed";
    }
    return "pending";
}

json to_json(const EnhanceJob& job) {
    return json{{"pair_id", job.pair_id},
                {"field", to_string(job.field)},
                {"input_text", job.input_text},
                {"output_text", job.output_text ? json(*job.output_text) : json(nullptr)},
                {"attempts", job.attempts},
                {"status", to_string(job.status)},
                {"error", job.error}};
}

EnhanceJob job_from_json(const json& j) {
    try {
        EnhanceJob job;
        job.pair_id = j.at("pair_id").get<std::string>();
        const auto field = j.at("field").get<std::string>();
        if (field != "question" && field != "answer") throw ValidationError("unknown field '" + field + "'");
        job.field = field == "question" ? Field::question : Field::answer;
        job.input_text = j.at("input_text").get<std::string>();
        if (j.contains("output_text") && !j["output_text"].is_null())
            job.output_text = j["output_text"].get<std::string>();
        job.attempts = j.value("attempts", 0);
        const auto status = j.at("status").get<std::string>();
        if (status == "done") {
            job.status = JobStatus::done;
        } else if (status == "failed") {
            job.status = JobStatus::failed;
        } else if (status == "pending") {
            job.status = JobStatus::pending;
        } else {
            throw ValidationError("unknown status '" + status + "'");
        }
        job.error = j.value("error", std::string{});
        if (job.status == JobStatus::done && (!job.output_text || job.output_text->empty()))
            throw ValidationError("done job without output");
        return job;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed checkpoint record: ") + e.what());
    }
}

std::vector<EnhanceJob> read_checkpoint(const std::filesystem::path& path) {
    std::vector<EnhanceJob> out;
    if (path.empty() || !std::filesystem::exists(path)) return out;
    std::vector<LineError> errors;
    std::map<std::pair<std::string, Field>, std::size_t> index;
    for (auto& [line, j] : read_json_lines(path, errors)) {
        EnhanceJob job;
        try {
            job = job_from_json(j);
        } catch (const ValidationError&) {
            // a torn final line after a crash; the job simply runs again
            continue;
        }
        auto [it, inserted] = index.try_emplace({job.pair_id, job.field}, out.size());
        if (inserted) {
            out.push_back(std::move(job));
        } else {
            out[it->second] = std::move(job);
        }
    }
    return out;
}

EnhanceOutput batch_enhance(const std::vector<corpus::QAPair>& pairs, llm::ChatClient& client,
                            const EnhanceOptions& options) {
    for (const auto& p : pairs) {
        if (p.stage < corpus::Stage::reviewed)
            throw ValidationError("pair " + p.id + " has not been reviewed (stage " +
                                  std::string(corpus::to_string(p.stage)) + ")");
    }

    std::vector<EnhanceJob> jobs;
    jobs.reserve(pairs.size() * 2);
    for (const auto& p : pairs) {
        jobs.push_back({p.id, Field::question, p.question_text, std::nullopt, 0, JobStatus::pending, {}});
        jobs.push_back({p.id, Field::answer, p.answer_text, std::nullopt, 0, JobStatus::pending, {}});
    }

    EnhanceOutput out;
    std::map<std::pair<std::string, Field>, const EnhanceJob*> previous;
    const auto checkpointed = read_checkpoint(options.checkpoint);
    for (const auto& job : checkpointed) previous[{job.pair_id, job.field}] = &job;
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto it = previous.find({jobs[i].pair_id, jobs[i].field});
        if (it != previous.end() && it->second->status == JobStatus::done &&
            it->second->input_text == jobs[i].input_text) {
            jobs[i] = *it->second;
            ++out.jobs_resumed;
        } else {
            todo.push_back(i);
        }
    }

    std::unique_ptr<AppendLog> log;
    if (!options.checkpoint.empty()) log = std::make_unique<AppendLog>(options.checkpoint);

    const MessageList base{{Role::system, std::string(grammar_system_prompt())}};
    std::atomic<std::size_t> cursor{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (std::size_t k = cursor++; k < todo.size(); k = cursor++) {
            EnhanceJob& job = jobs[todo[k]];
            MessageList messages = base;
            messages.push_back({Role::user, job.input_text});
            try {
                auto completion = client.complete(messages);
                job.output_text = std::move(completion.text);
                job.attempts = completion.attempts;
                job.status = JobStatus::done;
            } catch (const llm::CompletionError& e) {
                job.attempts = e.attempts();
                job.status = JobStatus::failed;
                job.error = e.what();
            } catch (const std::exception& e) {
                job.attempts = std::max(job.attempts, 1);
                job.status = JobStatus::failed;
                job.error = e.what();
            }
            if (log) {
                try {
                    log->append(to_json(job));
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    cursor = todo.size();
                }
            }
        }
    };
    std::size_t threads = options.parallelism ? options.parallelism
                                              : static_cast<std::size_t>(client.config().max_in_flight);
    threads = std::max<std::size_t>(1, std::min(threads, todo.size()));
    if (todo.size() <= 1 || threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (first_error) std::rethrow_exception(first_error);
    out.jobs_run = todo.size();

    out.pairs = pairs;
    for (std::size_t i = 0; i < out.pairs.size(); ++i) {
        const EnhanceJob& q = jobs[2 * i];
        const EnhanceJob& a = jobs[2 * i + 1];
        auto& pair = out.pairs[i];
        if (q.status == JobStatus::done) pair.question_text = *q.output_text;
        if (a.status == JobStatus::done) pair.answer_text = *a.output_text;
        if (q.status != JobStatus::done) out.failures.push_back(q);
        if (a.status != JobStatus::done) out.failures.push_back(a);
        if (q.status == JobStatus::done && a.status == JobStatus::done) pair.advance(corpus::Stage::enhanced);
    }
    return out;
}

}  // namespace guidelm::enhance
