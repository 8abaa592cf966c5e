#include "guidelm/config.hpp"

#include <toml.hpp>

#include "guidelm/errors.hpp"

namespace guidelm {
namespace {

template <typename T>
std::optional<T> get(const toml::table& t, std::string_view key, std::string_view where) {
    const toml::node* node = t.get(key);
    if (!node) return std::nullopt;
    auto v = node->value<T>();
    if (!v) throw ConfigError(std::string(where) + "." + std::string(key) + " has the wrong type");
    return v;
}

std::vector<std::string> get_strings(const toml::table& t, std::string_view key, std::string_view where) {
    std::vector<std::string> out;
    const toml::node* node = t.get(key);
    if (!node) return out;
    const auto* arr = node->as_array();
    if (!arr) throw ConfigError(std::string(where) + "." + std::string(key) + " must be an array of strings");
    for (const auto& e : *arr) {
        auto s = e.value<std::string>();
        if (!s) throw ConfigError(std::string(where) + "." + std::string(key) + " must be an array of strings");
        out.push_back(*s);
    }
    return out;
}

std::uint64_t get_seed(const toml::table& t, std::string_view where, std::uint64_t fallback) {
    auto v = get<std::int64_t>(t, "seed", where);
    if (!v) return fallback;
    if (*v < 0) throw ConfigError(std::string(where) + ".seed must be non-negative");
    return static_cast<std::uint64_t>(*v);
}

const toml::table* section(const toml::table& root, std::string_view name) {
    const toml::node* node = root.get(name);
    if (!node) return nullptr;
    if (!node->is_table()) throw ConfigError("[" + std::string(name) + "] must be a table");
    return node->as_table();
}

llm::BackendConfig parse_backend(const toml::table& t, const std::string& where) {
    if (t.contains("api_key"))
        throw ConfigError(where + ".api_key is not allowed; set api_key_env to an environment variable name");
    llm::BackendConfig b;
    b.base_url = get<std::string>(t, "base_url", where).value_or("");
    b.model_name = get<std::string>(t, "model", where).value_or("");
    b.api_key_env = get<std::string>(t, "api_key_env", where).value_or("");
    if (auto v = get<double>(t, "timeout_seconds", where)) b.timeout_seconds = *v;
    if (auto v = get<std::int64_t>(t, "max_retries", where)) b.max_retries = static_cast<int>(*v);
    if (auto v = get<std::int64_t>(t, "max_in_flight", where)) b.max_in_flight = static_cast<int>(*v);
    if (t.contains("temperature")) {
        b.temperature = get<double>(t, "temperature", where);
    }
    try {
        b.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return b;
}

}  // namespace

std::filesystem::path PipelineConfig::resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : paths.work_dir / p;
}

PipelineConfig default_config() {
    PipelineConfig c;
    c.training_system_prompt = "You are a tutor helping a student. Do not fix the program. Do not give code.";
    c.backends["grammar"] = llm::BackendConfig{"mock:echo", "gpt-4o", "OPENAI_API_KEY", 60.0, 3, 4, 0.0};
    return c;
}

PipelineConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir) {
    toml::table root;
    try {
        root = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        throw ConfigError(std::string("config: ") + std::string(e.description()) + " at line " +
                          std::to_string(e.source().begin.line));
    }
    PipelineConfig c = default_config();
    c.paths.work_dir = base_dir;
    auto path_of = [&](const toml::table& t, std::string_view key, std::string_view where,
                       std::filesystem::path& target) {
        if (auto v = get<std::string>(t, key, where)) target = *v;
    };

    if (const auto* t = section(root, "paths")) {
        if (auto v = get<std::string>(*t, "work_dir", "paths")) {
            std::filesystem::path p = *v;
            c.paths.work_dir = p.is_absolute() ? p : base_dir / p;
        }
        path_of(*t, "decision_log", "paths", c.paths.decision_log);
        path_of(*t, "assignments", "paths", c.paths.assignments);
        path_of(*t, "rating_log", "paths", c.paths.rating_log);
        path_of(*t, "enhance_checkpoint", "paths", c.paths.enhance_checkpoint);
    }

    if (const auto* t = section(root, "cleanse")) {
        if (auto v = get<std::int64_t>(*t, "min_question_chars", "cleanse")) {
            if (*v < 1) throw ConfigError("cleanse.min_question_chars must be >= 1");
            c.cleanse.min_question_chars = static_cast<std::size_t>(*v);
        }
        if (auto v = get<std::int64_t>(*t, "min_answer_chars", "cleanse")) {
            if (*v < 1) throw ConfigError("cleanse.min_answer_chars must be >= 1");
            c.cleanse.min_answer_chars = static_cast<std::size_t>(*v);
        }
        c.cs1_courses = get_strings(*t, "cs1_courses", "cleanse");
        c.cleanse.template_blacklist = get_strings(*t, "templates", "cleanse");
        c.cleanse.name_blacklist = get_strings(*t, "names", "cleanse");
        auto blacklist = [&](const std::string& file) {
            try {
                return cleanse::load_blacklist(c.resolve(file));
            } catch (const IoError& e) {
                throw ConfigError(std::string("cleanse: ") + e.what());
            }
        };
        if (auto v = get<std::string>(*t, "template_file", "cleanse")) {
            auto more = blacklist(*v);
            c.cleanse.template_blacklist.insert(c.cleanse.template_blacklist.end(), more.begin(), more.end());
        }
        if (auto v = get<std::string>(*t, "name_file", "cleanse")) {
            auto more = blacklist(*v);
            c.cleanse.name_blacklist.insert(c.cleanse.name_blacklist.end(), more.begin(), more.end());
        }
        if (const toml::node* pii = t->get("pii")) {
            const auto* arr = pii->as_array();
            if (!arr) throw ConfigError("cleanse.pii must be an array of tables");
            c.cleanse.pii_patterns.clear();
            for (const auto& e : *arr) {
                const auto* rule = e.as_table();
                if (!rule) throw ConfigError("cleanse.pii entries must be tables");
                auto name = get<std::string>(*rule, "name", "cleanse.pii");
                auto pattern = get<std::string>(*rule, "pattern", "cleanse.pii");
                if (!name || !pattern) throw ConfigError("cleanse.pii entries need name and pattern");
                c.cleanse.pii_patterns.push_back({*name, *pattern});
            }
        }
        // compile now so a bad pattern fails at startup
        cleanse::Cleanser check(c.cleanse);
    }

    if (const auto* t = section(root, "review")) {
        c.review.reviewers = get_strings(*t, "reviewers", "review");
        if (auto v = get<std::int64_t>(*t, "per_reviewer", "review")) {
            if (*v < 0) throw ConfigError("review.per_reviewer must be >= 0");
            c.review.per_reviewer = static_cast<std::size_t>(*v);
        }
        c.review.seed = get_seed(*t, "review", c.review.seed);
    }

    if (const auto* t = section(root, "backends")) {
        for (const auto& [name, node] : *t) {
            const auto* b = node.as_table();
            if (!b) throw ConfigError("backends." + std::string(name.str()) + " must be a table");
            c.backends[std::string(name.str())] = parse_backend(*b, "backends." + std::string(name.str()));
        }
    }

    if (const auto* t = section(root, "enhance")) {
        if (auto v = get<std::string>(*t, "backend", "enhance")) c.enhance_backend = *v;
    }
    if (!c.backends.contains(c.enhance_backend))
        throw ConfigError("enhance.backend '" + c.enhance_backend + "' is not defined under [backends]");

    if (const auto* t = section(root, "export")) {
        if (auto v = get<std::string>(*t, "system_prompt", "export")) {
            if (v->empty()) throw ConfigError("export.system_prompt must be non-empty");
            c.training_system_prompt = *v;
        }
    }

    if (const auto* t = section(root, "eval")) {
        c.eval.seed = get_seed(*t, "eval", c.eval.seed);
        if (auto v = get<std::int64_t>(*t, "calibration_count", "eval")) {
            if (*v < 0) throw ConfigError("eval.calibration_count must be >= 0");
            c.eval.calibration_count = static_cast<std::size_t>(*v);
        }
        c.eval.raters = get_strings(*t, "raters", "eval");
        if (t->contains("models")) c.eval.models = get_strings(*t, "models", "eval");
        if (const toml::node* p = t->get("pairings")) {
            const auto* arr = p->as_array();
            if (!arr) throw ConfigError("eval.pairings must be an array of tables");
            c.eval.pairings.clear();
            for (const auto& e : *arr) {
                const auto* pt = e.as_table();
                if (!pt) throw ConfigError("eval.pairings entries must be tables");
                auto name = get<std::string>(*pt, "name", "eval.pairings");
                auto base = get<std::string>(*pt, "base", "eval.pairings");
                auto tuned = get<std::string>(*pt, "fine_tune", "eval.pairings");
                if (!name || !base || !tuned) throw ConfigError("eval.pairings entries need name, base, fine_tune");
                c.eval.pairings.push_back({*name, *base, *tuned});
            }
        }
        if (const auto* mb = t->get_as<toml::table>("model_backends")) {
            for (const auto& [model, node] : *mb) {
                auto v = node.value<std::string>();
                if (!v) throw ConfigError("eval.model_backends values must be backend names");
                if (!c.backends.contains(*v)) throw ConfigError("eval.model_backends: unknown backend '" + *v + "'");
                c.eval.model_backends[std::string(model.str())] = *v;
            }
        }
    }

    if (const auto* t = section(root, "service")) {
        if (auto v = get<std::string>(*t, "host", "service")) c.service.host = *v;
        if (auto v = get<std::int64_t>(*t, "port", "service")) {
            if (*v < 0 || *v > 65535) throw ConfigError("service.port out of range");
            c.service.port = static_cast<int>(*v);
        }
        if (auto v = get<std::string>(*t, "token_env", "service")) c.service.token_env = *v;
        if (auto v = get<std::string>(*t, "static_dir", "service")) {
            c.service.static_dir = c.resolve(*v);
            if (!std::filesystem::is_directory(*c.service.static_dir))
                throw ConfigError("service.static_dir does not exist: " + c.service.static_dir->string());
        }
    }
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    auto base = path.parent_path();
    if (base.empty()) base = ".";
    return parse_config(text, base);
}

}  // namespace guidelm
