#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "guidelm/cleanse.hpp"
#include "guidelm/evalkit.hpp"
#include "guidelm/llmclient.hpp"

namespace guidelm {

/// Everything the command-line tool reads from its TOML file. Relative paths are resolved
/// against the directory containing the file.
struct PipelineConfig {
    struct Paths {
        std::filesystem::path work_dir = ".";
        std::filesystem::path decision_log = "decisions.jsonl";
        std::filesystem::path assignments = "assignments.json";
        std::filesystem::path rating_log = "ratings.jsonl";
        std::filesystem::path enhance_checkpoint = "enhance_checkpoint.jsonl";
    } paths;

    cleanse::CleanseConfig cleanse;
    std::vector<std::string> cs1_courses;

    struct Review {
        std::vector<std::string> reviewers;
        std::size_t per_reviewer = 500;
        std::uint64_t seed = 1;
    } review;

    std::map<std::string, llm::BackendConfig> backends;
    std::string enhance_backend = "grammar";

    std::string training_system_prompt;

    struct Eval {
        std::uint64_t seed = 1;
        std::size_t calibration_count = 12;
        std::vector<std::string> raters;
        std::vector<std::string> models = evalkit::default_models();
        std::vector<evalkit::Pairing> pairings = evalkit::default_pairings();
        std::map<std::string, std::string> model_backends;  // model id -> backend name
    } eval;

    struct Service {
        std::string host = "127.0.0.1";
        int port = 8080;
        std::string token_env = "GUIDELM_SERVICE_TOKEN";
        std::optional<std::filesystem::path> static_dir;
    } service;

    /// Resolves `p` against work_dir.
    std::filesystem::path resolve(const std::filesystem::path& p) const;
};

PipelineConfig default_config();

/// Throws ConfigError with the offending key for type errors, invalid values, unreadable
/// blacklist files, or an api_key written inline instead of an environment variable name.
PipelineConfig load_config(const std::filesystem::path& path);

/// Same, from TOML text; `base_dir` anchors relative paths.
PipelineConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir);

}  // namespace guidelm
