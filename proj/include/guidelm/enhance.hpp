#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guidelm/corpus.hpp"
#include "guidelm/llmclient.hpp"

namespace guidelm::enhance {

/// System message for the per-field grammar pass.
std::string_view grammar_system_prompt();

enum class Field { question, answer };
enum class JobStatus { pending, done, failed };

std::string_view to_string(Field f);
std::string_view to_string(JobStatus s);

struct EnhanceJob {
    std::string pair_id;
    Field field = Field::question;
    std::string input_text;
    std::optional<std::string> output_text;
    int attempts = 0;
    JobStatus status = JobStatus::pending;
    std::string error;  // last failure, empty otherwise

    friend bool operator==(const EnhanceJob&, const EnhanceJob&) = default;
};

json to_json(const EnhanceJob& job);
EnhanceJob job_from_json(const json& j);

struct EnhanceOptions {
    /// Checkpoint JSONL; every finished job is appended. Empty disables checkpointing.
    std::filesystem::path checkpoint;
    /// Worker threads; 0 uses the client's max_in_flight.
    std::size_t parallelism = 0;
};

struct EnhanceOutput {
    std::vector<corpus::QAPair> pairs;
    std::vector<EnhanceJob> failures;
    std::size_t jobs_run = 0;      // calls made in this run
    std::size_t jobs_resumed = 0;  // satisfied from the checkpoint
};

/// Grammar-corrects question and answer of every pair in separate calls. Jobs already done
/// in the checkpoint (same pair, field and input) are not re-run. A pair moves to
/// Stage::enhanced only when both of its jobs are done; failed fields keep their original text.
/// Output order equals input order whatever order jobs complete in.
EnhanceOutput batch_enhance(const std::vector<corpus::QAPair>& pairs, llm::ChatClient& client,
                            const EnhanceOptions& options = {});

/// Latest record per (pair_id, field) from a checkpoint file; empty if the file is missing.
std::vector<EnhanceJob> read_checkpoint(const std::filesystem::path& path);

}  // namespace guidelm::enhance
