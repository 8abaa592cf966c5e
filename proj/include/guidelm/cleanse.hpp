#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "guidelm/corpus.hpp"

namespace guidelm::cleanse {

struct PiiPattern {
    std::string rule_name;
    std::string source;  // ECMAScript regular expression
};

struct CleanseConfig {
    std::vector<PiiPattern> pii_patterns = default_pii_patterns();
    std::vector<std::string> template_blacklist;
    std::vector<std::string> name_blacklist;
    std::size_t min_question_chars = 9;
    std::size_t min_answer_chars = 2;

    /// email, student_id (z + 7 digits), long_number (standalone 7-10 digits), url.
    static std::vector<PiiPattern> default_pii_patterns();
};

/// Rule name recorded for name-blacklist removals.
inline constexpr std::string_view kNameRule = "name";

/// A validated config with compiled expressions. Construction throws ConfigError for
/// uncompilable patterns, duplicate rule names or zero thresholds.
class Cleanser {
public:
    explicit Cleanser(CleanseConfig config);

    struct Result {
        std::string text;
        std::vector<corpus::RedactionNote> notes;
    };

    /// Template deletion, PII replacement with a single space, name deletion, then whitespace
    /// collapse and trim. The steps repeat until the text stops changing, so the output is a
    /// fixpoint and no configured pattern matches it.
    Result clean_text(std::string_view text) const;

    const CleanseConfig& config() const { return config_; }

private:
    CleanseConfig config_;
    std::vector<std::pair<std::string, std::regex>> pii_;
    std::unique_ptr<std::regex> names_;
};

enum class LengthDecision { keep, drop };

/// Drop iff question has fewer than min_question_chars or answer fewer than min_answer_chars
/// Unicode scalars. The thresholds themselves are kept.
LengthDecision length_filter(const corpus::QAPair& pair, const CleanseConfig& config);

struct CleanseStats {
    std::size_t input_count = 0;
    std::size_t kept_count = 0;
    std::size_t dropped_short_count = 0;
    std::map<std::string, std::size_t> redactions_by_rule;

    friend bool operator==(const CleanseStats&, const CleanseStats&) = default;
};

json to_json(const CleanseStats& stats);

struct CleanseOutput {
    std::vector<corpus::QAPair> pairs;
    CleanseStats stats;
};

/// Cleans both texts of every pair, applies the length filter and advances survivors to
/// Stage::cleansed. Throws ConfigError before touching data if the config is invalid and
/// ValidationError if a pair is already past Stage::cleansed.
CleanseOutput run_cleanse(const std::vector<corpus::QAPair>& pairs, const CleanseConfig& config);

/// One entry per non-blank line, surrounding whitespace trimmed.
std::vector<std::string> load_blacklist(const std::filesystem::path& path);

}  // namespace guidelm::cleanse
