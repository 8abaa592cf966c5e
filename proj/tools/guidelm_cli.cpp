// guidelm: command-line driver for the curation, prompt and evaluation pipeline.
//
// Exit status: 0 success, 1 data errors, 2 usage or configuration errors.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "guidelm/cleanse.hpp"
#include "guidelm/config.hpp"
#include "guidelm/corpus.hpp"
#include "guidelm/dataset_export.hpp"
#include "guidelm/enhance.hpp"
#include "guidelm/evalkit.hpp"
#include "guidelm/promptgen.hpp"
#include "guidelm/report.hpp"
#include "guidelm/review.hpp"
#include "guidelm/service.hpp"

namespace fs = std::filesystem;
using namespace guidelm;

namespace {

constexpr int kDataError = 1;
constexpr int kUsageError = 2;

httplib::Server* g_server = nullptr;

void stop_server(int) {
    if (g_server) g_server->stop();
}

void print_json(const json& j) {
    std::cout << j.dump(2) << '\n';
}

std::vector<corpus::QAPair> read_corpus_or_throw(const fs::path& path) {
    auto result = corpus::ingest(path, corpus::Format::jsonl);
    if (!result.errors.empty()) {
        throw ValidationError(path.string() + ": line " + std::to_string(result.errors[0].line) + ": " +
                              result.errors[0].reason);
    }
    return result.pairs;
}

int serve(service::Service& svc, const PipelineConfig& config, const std::string& host, int port) {
    service::ServerOptions options;
    if (const char* token = std::getenv(config.service.token_env.c_str()); token && *token) {
        options.bearer_token = token;
    } else {
        std::cerr << "warning: " << config.service.token_env << " is not set; the API is unauthenticated\n";
    }
    options.static_dir = config.service.static_dir;
    auto server = service::make_server(svc, options);
    g_server = server.get();
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);
    std::cerr << "listening on http://" << host << ':' << port << '\n';
    const bool ok = server->listen(host, port);
    g_server = nullptr;
    if (!ok) {
        std::cerr << "error: could not listen on " << host << ':' << port << '\n';
        return kDataError;
    }
    return 0;
}

std::shared_ptr<llm::ChatClient> client_for(const PipelineConfig& config, const std::string& backend) {
    auto it = config.backends.find(backend);
    if (it == config.backends.end()) throw ConfigError("backend '" + backend + "' is not configured");
    return std::make_shared<llm::ChatClient>(llm::make_backend(it->second), it->second);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dataset curation, tutor prompt generation and blinded evaluation for a pedagogical C tutor"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    std::string config_path;
    app.add_option("-c,--config", config_path, "TOML configuration file")->check(CLI::ExistingFile);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Read a forum dump into the canonical corpus JSONL");
    std::string ingest_in, ingest_out, ingest_errors, ingest_format;
    std::vector<std::string> ingest_courses;
    ingest->add_option("--in", ingest_in, "JSONL or CSV dump")->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", ingest_out, "Canonical corpus JSONL")->required();
    ingest->add_option("--format", ingest_format, "jsonl or csv (default: from the extension)")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    ingest->add_option("--errors", ingest_errors, "Sidecar for malformed records (default: <out>.errors.jsonl)");
    ingest->add_option("--cs1-course", ingest_courses, "Keep only these course codes (repeatable)");

    // cleanse
    auto* cleanse_cmd = app.add_subcommand("cleanse", "Template removal, PII scrubbing and length filtering");
    std::string cleanse_in, cleanse_out, cleanse_stats;
    cleanse_cmd->add_option("--in", cleanse_in, "Corpus JSONL at stage raw")->required()->check(CLI::ExistingFile);
    cleanse_cmd->add_option("--out", cleanse_out, "Cleansed corpus JSONL")->required();
    cleanse_cmd->add_option("--stats", cleanse_stats, "Also write the stats JSON here");

    // review-serve
    auto* review_serve = app.add_subcommand("review-serve", "Serve the review queues over HTTP");
    std::string rs_corpus, rs_assignments, rs_log, rs_host;
    std::optional<int> rs_port;
    std::optional<std::size_t> rs_per_reviewer;
    std::optional<std::uint64_t> rs_seed;
    std::vector<std::string> rs_reviewers;
    bool rs_assign_only = false;
    review_serve->add_option("--corpus", rs_corpus, "Cleansed corpus JSONL")->required()->check(CLI::ExistingFile);
    review_serve->add_option("--assignments", rs_assignments, "Assignment JSON; sampled and written if missing");
    review_serve->add_option("--log", rs_log, "Decision log JSONL");
    review_serve->add_option("--reviewer", rs_reviewers, "Reviewer id (repeatable)");
    review_serve->add_option("--per-reviewer", rs_per_reviewer, "Pairs sampled per reviewer");
    review_serve->add_option("--seed", rs_seed, "Sampling seed");
    review_serve->add_option("--host", rs_host, "Bind address");
    review_serve->add_option("--port", rs_port, "Port");
    review_serve->add_flag("--assign-only", rs_assign_only, "Write the assignment file and exit");

    // review-stats
    auto* review_stats = app.add_subcommand("review-stats", "Category statistics and the accepted set");
    std::string rst_log, rst_corpus, rst_accepted;
    review_stats->add_option("--log", rst_log, "Decision log JSONL");
    review_stats->add_option("--corpus", rst_corpus, "Corpus the decisions refer to")->check(CLI::ExistingFile);
    review_stats->add_option("--accepted-out", rst_accepted, "Write accepted pairs (needs --corpus)");

    // enhance
    auto* enhance_cmd = app.add_subcommand("enhance", "Grammar-correct reviewed pairs through a chat backend");
    std::string en_in, en_out, en_checkpoint, en_backend;
    enhance_cmd->add_option("--in", en_in, "Reviewed corpus JSONL")->required()->check(CLI::ExistingFile);
    enhance_cmd->add_option("--out", en_out, "Enhanced corpus JSONL")->required();
    enhance_cmd->add_option("--checkpoint", en_checkpoint, "Checkpoint JSONL");
    enhance_cmd->add_option("--backend", en_backend, "Backend name from [backends]");

    // export
    auto* export_cmd = app.add_subcommand("export", "Write and validate the chat-format fine-tune JSONL");
    std::string ex_in, ex_out, ex_prompt;
    export_cmd->add_option("--in", ex_in, "Enhanced corpus JSONL")->required()->check(CLI::ExistingFile);
    export_cmd->add_option("--out", ex_out, "Training JSONL")->required();
    export_cmd->add_option("--system-prompt", ex_prompt, "System message for every record");

    // promptgen
    auto* promptgen_cmd = app.add_subcommand("promptgen", "Render tutor prompts from error events");
    std::string pg_events, pg_out;
    promptgen_cmd->add_option("--events", pg_events, "ErrorEvent JSONL")->required()->check(CLI::ExistingFile);
    promptgen_cmd->add_option("--out", pg_out, "Prompt JSONL (default: stdout)");

    // eval-make
    auto* eval_make = app.add_subcommand("eval-make", "Build a blinded evaluation session");
    std::string em_events, em_outputs, em_out;
    std::optional<std::uint64_t> em_seed;
    std::optional<std::size_t> em_calibration;
    std::vector<std::string> em_raters;
    bool em_generate = false;
    eval_make->add_option("--events", em_events, "ErrorEvent JSONL")->required()->check(CLI::ExistingFile);
    eval_make->add_option("--outputs", em_outputs, "JSONL of {model_id,item_id,text}")->check(CLI::ExistingFile);
    eval_make->add_flag("--generate", em_generate, "Ask each model's backend instead of reading --outputs");
    eval_make->add_option("--out", em_out, "Session JSON")->required();
    eval_make->add_option("--seed", em_seed, "Blinding seed");
    eval_make->add_option("--calibration-count", em_calibration, "Leading events used for calibration");
    eval_make->add_option("--rater", em_raters, "Rater id (repeatable)");

    // eval-serve
    auto* eval_serve = app.add_subcommand("eval-serve", "Serve the blinded rating queues over HTTP");
    std::string es_session, es_log, es_host;
    std::optional<int> es_port;
    eval_serve->add_option("--session", es_session, "Session JSON")->required()->check(CLI::ExistingFile);
    eval_serve->add_option("--log", es_log, "Rating log JSONL");
    eval_serve->add_option("--host", es_host, "Bind address");
    eval_serve->add_option("--port", es_port, "Port");

    // eval-report
    auto* eval_report = app.add_subcommand("eval-report", "Aggregate ratings; prints the fine-tune delta table");
    std::string er_ratings, er_session, er_out_dir;
    std::vector<std::string> er_formats{"csv", "json"};
    eval_report->add_option("--ratings", er_ratings, "Rating log JSONL, or a directory of figure-data CSVs")
        ->required()
        ->check(CLI::ExistingPath);
    eval_report->add_option("--session", er_session, "Session JSON (required with a rating log)")
        ->check(CLI::ExistingFile);
    eval_report->add_option("--out-dir", er_out_dir, "Write all report files here");
    eval_report->add_option("--format", er_formats, "csv and/or json")->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        PipelineConfig config = config_path.empty() ? default_config() : load_config(config_path);

        if (*ingest) {
            corpus::Format format = corpus::Format::jsonl;
            if (!ingest_format.empty()) {
                format = *corpus::parse_format(ingest_format);
            } else if (fs::path(ingest_in).extension() == ".csv") {
                format = corpus::Format::csv;
            }
            auto result = corpus::ingest(ingest_in, format);
            const std::size_t ingested = result.pairs.size();
            const auto courses = ingest_courses.empty() ? config.cs1_courses : ingest_courses;
            if (!courses.empty()) {
                result.pairs = corpus::filter_cs1(result.pairs, std::set<std::string>(courses.begin(), courses.end()));
            }
            corpus::write_corpus(ingest_out, result.pairs);
            const fs::path errors_path = ingest_errors.empty() ? fs::path(ingest_out + ".errors.jsonl") : fs::path(ingest_errors);
            write_line_errors(errors_path, result.errors);
            print_json({{"ingested", ingested},
                        {"written", result.pairs.size()},
                        {"malformed", result.errors.size()},
                        {"errors_file", errors_path.string()}});
            return 0;
        }

        if (*cleanse_cmd) {
            auto pairs = read_corpus_or_throw(cleanse_in);
            auto out = cleanse::run_cleanse(pairs, config.cleanse);
            corpus::write_corpus(cleanse_out, out.pairs);
            const auto stats = cleanse::to_json(out.stats);
            if (!cleanse_stats.empty()) write_file(cleanse_stats, stats.dump(2) + '\n');
            print_json(stats);
            return 0;
        }

        if (*review_serve) {
            const fs::path assignments_path =
                rs_assignments.empty() ? config.resolve(config.paths.assignments) : fs::path(rs_assignments);
            const fs::path log_path = rs_log.empty() ? config.resolve(config.paths.decision_log) : fs::path(rs_log);
            auto pairs = read_corpus_or_throw(rs_corpus);
            std::map<std::string, std::vector<std::string>> assignments;
            if (fs::exists(assignments_path)) {
                assignments = review::assignments_from_json(json::parse(read_file(assignments_path)));
            } else {
                const auto reviewers = rs_reviewers.empty() ? config.review.reviewers : rs_reviewers;
                if (reviewers.empty()) throw ConfigError("no reviewers configured (review.reviewers or --reviewer)");
                assignments = review::sample_assignments(pairs, reviewers,
                                                         rs_per_reviewer.value_or(config.review.per_reviewer),
                                                         rs_seed.value_or(config.review.seed));
                write_file(assignments_path, review::assignments_to_json(assignments).dump(2) + '\n');
            }
            if (rs_assign_only) {
                json counts = json::object();
                for (const auto& [r, ids] : assignments) counts[r] = ids.size();
                print_json({{"assignments", assignments_path.string()}, {"per_reviewer", counts}});
                return 0;
            }
            service::Service svc(service::ReviewSetup{std::move(pairs), std::move(assignments), log_path},
                                 std::nullopt);
            return serve(svc, config, rs_host.empty() ? config.service.host : rs_host,
                         rs_port.value_or(config.service.port));
        }

        if (*review_stats) {
            const fs::path log_path = rst_log.empty() ? config.resolve(config.paths.decision_log) : fs::path(rst_log);
            if (!fs::exists(log_path)) throw ValidationError("decision log not found: " + log_path.string());
            auto log = review::read_decision_log(log_path);
            json out = review::stats_to_json(review::review_stats(log.decisions));
            json errors = json::array();
            for (const auto& e : log.errors) errors.push_back(to_json(e));
            out["log_errors"] = errors;
            if (!rst_accepted.empty()) {
                if (rst_corpus.empty()) throw CLI::ValidationError("--accepted-out", "requires --corpus");
                auto accepted = review::accept_set(log.decisions, read_corpus_or_throw(rst_corpus));
                corpus::write_corpus(rst_accepted, accepted);
                out["accepted_written"] = accepted.size();
            }
            print_json(out);
            return log.errors.empty() ? 0 : kDataError;
        }

        if (*enhance_cmd) {
            auto pairs = read_corpus_or_throw(en_in);
            auto client = client_for(config, en_backend.empty() ? config.enhance_backend : en_backend);
            enhance::EnhanceOptions options;
            options.checkpoint =
                en_checkpoint.empty() ? config.resolve(config.paths.enhance_checkpoint) : fs::path(en_checkpoint);
            auto out = enhance::batch_enhance(pairs, *client, options);
            corpus::write_corpus(en_out, out.pairs);
            json failures = json::array();
            for (const auto& f : out.failures) failures.push_back(enhance::to_json(f));
            std::size_t enhanced = 0;
            for (const auto& p : out.pairs) enhanced += p.stage >= corpus::Stage::enhanced ? 1 : 0;
            print_json({{"pairs", out.pairs.size()},
                        {"enhanced", enhanced},
                        {"jobs_run", out.jobs_run},
                        {"jobs_resumed", out.jobs_resumed},
                        {"failures", failures}});
            return out.failures.empty() ? 0 : kDataError;
        }

        if (*export_cmd) {
            auto pairs = read_corpus_or_throw(ex_in);
            auto records =
                dataset_export::to_finetune_records(pairs, ex_prompt.empty() ? config.training_system_prompt : ex_prompt);
            dataset_export::write_jsonl(records, ex_out);
            auto report = dataset_export::validate_jsonl(ex_out);
            print_json(dataset_export::to_json(report));
            return report.ok() && report.record_count == pairs.size() ? 0 : kDataError;
        }

        if (*promptgen_cmd) {
            auto file = promptgen::read_events(pg_events);
            std::vector<json> lines;
            for (const auto& e : file.events) lines.push_back(promptgen::prompt_to_json(e, promptgen::build_prompt(e)));
            if (pg_out.empty()) {
                for (const auto& l : lines) write_json_line(std::cout, l);
            } else {
                write_json_lines(pg_out, lines);
            }
            for (const auto& e : file.errors) std::cerr << pg_events << ':' << e.line << ": " << e.reason << '\n';
            return file.errors.empty() ? 0 : kDataError;
        }

        if (*eval_make) {
            auto file = promptgen::read_events(em_events);
            if (!file.errors.empty())
                throw ValidationError(em_events + ":" + std::to_string(file.errors[0].line) + ": " +
                                      file.errors[0].reason);
            evalkit::ModelOutputs outputs;
            if (em_generate) {
                std::vector<std::shared_ptr<llm::ChatClient>> clients;
                std::vector<std::pair<std::string, llm::ChatClient*>> models;
                for (const auto& m : config.eval.models) {
                    auto it = config.eval.model_backends.find(m);
                    if (it == config.eval.model_backends.end())
                        throw ConfigError("eval.model_backends has no backend for model '" + m + "'");
                    clients.push_back(client_for(config, it->second));
                    models.emplace_back(m, clients.back().get());
                }
                outputs = evalkit::generate_outputs(file.events, models);
            } else {
                if (em_outputs.empty()) throw CLI::ValidationError("--outputs", "required unless --generate is given");
                std::vector<LineError> errors;
                for (auto& [line, j] : read_json_lines(em_outputs, errors)) {
                    if (!j.is_object() || !j.contains("model_id") || !j.contains("item_id") || !j.contains("text"))
                        throw ValidationError(em_outputs + ":" + std::to_string(line) +
                                              ": expected {model_id, item_id, text}");
                    outputs[j["model_id"].get<std::string>()][j["item_id"].get<std::string>()] =
                        j["text"].get<std::string>();
                }
                if (!errors.empty())
                    throw ValidationError(em_outputs + ":" + std::to_string(errors[0].line) + ": " + errors[0].reason);
            }
            auto session = evalkit::make_sessions(file.events, config.eval.models, outputs,
                                                  em_seed.value_or(config.eval.seed),
                                                  em_calibration.value_or(config.eval.calibration_count));
            evalkit::assign_raters(session, em_raters.empty() ? config.eval.raters : em_raters);
            write_file(em_out, evalkit::to_json(session).dump(2) + '\n');
            std::size_t calibration = 0;
            for (const auto& item : session.items) calibration += item.calibration ? 1 : 0;
            print_json({{"items", session.items.size()}, {"calibration", calibration}, {"session", em_out}});
            return 0;
        }

        if (*eval_serve) {
            auto session = evalkit::session_from_json(json::parse(read_file(es_session)));
            if (session.rater_items.empty() && !config.eval.raters.empty())
                evalkit::assign_raters(session, config.eval.raters);
            const fs::path log_path = es_log.empty() ? config.resolve(config.paths.rating_log) : fs::path(es_log);
            service::Service svc(std::nullopt, service::EvalSetup{std::move(session), log_path});
            return serve(svc, config, es_host.empty() ? config.service.host : es_host,
                         es_port.value_or(config.service.port));
        }

        if (*eval_report) {
            evalkit::AggregateReport report;
            int status = 0;
            if (fs::is_directory(er_ratings)) {
                report = evalkit::load_figure_report(er_ratings, config.eval.pairings);
            } else {
                if (er_session.empty()) throw CLI::ValidationError("--session", "required with a rating log");
                auto session = evalkit::session_from_json(json::parse(read_file(er_session)));
                auto log = evalkit::read_rating_log(er_ratings);
                std::vector<LineError> errors = log.errors;
                auto book = evalkit::replay(log, session, errors);
                for (const auto& e : errors) std::cerr << er_ratings << ": entry " << e.line << ": " << e.reason << '\n';
                if (!errors.empty()) status = kDataError;
                report = evalkit::aggregate(session, book.records(), config.eval.pairings);
            }
            if (!er_out_dir.empty()) {
                std::set<evalkit::ReportFormat> formats;
                for (const auto& f : er_formats)
                    formats.insert(f == "json" ? evalkit::ReportFormat::json : evalkit::ReportFormat::csv);
                evalkit::emit_report(report, formats, er_out_dir);
            }
            std::cout << evalkit::delta_csv(report);
            return status;
        }
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsageError;
}
