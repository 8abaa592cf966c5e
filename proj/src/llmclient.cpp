#include "guidelm/llmclient.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <httplib.h>

namespace guidelm::llm {

void BackendConfig::validate() const {
    if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
    if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    if (!(timeout_seconds > 0)) throw ConfigError("timeout must be > 0");
    if (base_url.empty()) throw ConfigError("base_url is required");
}

std::chrono::milliseconds backoff_delay(int retry) {
    using namespace std::chrono_literals;
    std::chrono::milliseconds d = 500ms;
    for (int i = 1; i < retry && d < 8000ms; ++i) d *= 2;
    return std::min<std::chrono::milliseconds>(d, 8000ms);
}

ChatClient::ChatClient(std::shared_ptr<Backend> backend, BackendConfig config, Sleeper sleeper)
    : backend_(std::move(backend)),
      config_(std::move(config)),
      sleeper_(std::move(sleeper)),
      in_flight_((config_.validate(), config_.max_in_flight)) {
    if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

Completion ChatClient::complete(const MessageList& messages) {
    if (messages.empty()) throw std::invalid_argument("complete: empty message list");
    int attempts = 0;
    std::string last_detail;
    for (;;) {
        ++attempts;
        Attempt a;
        {
            in_flight_.acquire();
            try {
                a = backend_->send(messages, config_);
            } catch (...) {
                in_flight_.release();
                throw;
            }
            in_flight_.release();
        }
        switch (a.kind) {
            case Attempt::Kind::ok:
                if (a.text.empty())
                    throw CompletionError(CompletionError::Kind::empty_completion, attempts, "empty completion");
                return {std::move(a.text), attempts};
            case Attempt::Kind::auth:
                throw CompletionError(CompletionError::Kind::auth, attempts,
                                      "authentication failed (HTTP " + std::to_string(a.status) + ")");
            case Attempt::Kind::client_error:
                throw CompletionError(CompletionError::Kind::client_error, attempts,
                                      "request rejected (HTTP " + std::to_string(a.status) + "): " + a.detail);
            case Attempt::Kind::transient:
                last_detail = a.detail;
                break;
        }
        if (attempts > config_.max_retries) {
            throw CompletionError(CompletionError::Kind::exhausted, attempts,
                                  "gave up after " + std::to_string(attempts) + " attempts: " + last_detail);
        }
        sleeper_(backoff_delay(attempts));
    }
}

Attempt EchoBackend::send(const MessageList& messages, const BackendConfig&) {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == Role::user) return {Attempt::Kind::ok, it->content, 200, {}};
    }
    return {Attempt::Kind::ok, {}, 200, {}};
}

ScriptBackend::ScriptBackend(std::vector<Attempt> script)
    : rules_{[s = std::move(script)](const MessageList&) { return std::optional(s); }} {}

ScriptBackend::ScriptBackend(std::vector<Rule> rules) : rules_(std::move(rules)) {}

Attempt ScriptBackend::send(const MessageList& messages, const BackendConfig& config) {
    std::optional<std::vector<Attempt>> script;
    for (const auto& rule : rules_) {
        script = rule(messages);
        if (script) break;
    }
    std::size_t n = 0;
    {
        std::lock_guard lock(mutex_);
        ++calls_;
        auto it = std::find_if(seen_.begin(), seen_.end(), [&](const auto& e) { return e.first == messages; });
        if (it == seen_.end()) {
            seen_.emplace_back(messages, 1);
        } else {
            n = it->second++;
        }
    }
    if (!script || script->empty()) return EchoBackend{}.send(messages, config);
    return (*script)[std::min(n, script->size() - 1)];
}

std::size_t ScriptBackend::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

nlohmann::json request_body(const MessageList& messages, const BackendConfig& config) {
    nlohmann::json body{{"model", config.model_name}, {"messages", to_json(messages)}};
    if (config.temperature) body["temperature"] = *config.temperature;
    return body;
}

std::optional<std::string> parse_completion(const std::string& body) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    const auto choices = j.find("choices");
    if (choices == j.end() || !choices->is_array() || choices->empty()) return std::nullopt;
    const auto& first = (*choices)[0];
    if (!first.contains("message") || !first["message"].contains("content")) return std::nullopt;
    const auto& content = first["message"]["content"];
    if (content.is_null()) return std::string{};
    if (!content.is_string()) return std::nullopt;
    return content.get<std::string>();
}

Attempt HttpBackend::send(const MessageList& messages, const BackendConfig& config) {
    // split "scheme://host[:port]/prefix" into the client origin and the path prefix
    const auto scheme_end = config.base_url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("base_url lacks a scheme: " + config.base_url);
    const auto path_start = config.base_url.find('/', scheme_end + 3);
    const std::string origin = config.base_url.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? "" : config.base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

    httplib::Client client(origin);
    const auto timeout = std::chrono::milliseconds(static_cast<long>(config.timeout_seconds * 1000));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (!config.api_key_env.empty()) {
        if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    const auto res = client.Post(prefix + "/chat/completions", headers, request_body(messages, config).dump(),
                                 "application/json");
    if (!res) return {Attempt::Kind::transient, {}, 0, httplib::to_string(res.error())};
    const int status = res->status;
    if (status == 401 || status == 403) return {Attempt::Kind::auth, {}, status, res->body};
    if (status >= 500) return {Attempt::Kind::transient, {}, status, res->body};
    if (status >= 400) return {Attempt::Kind::client_error, {}, status, res->body};
    auto text = parse_completion(res->body);
    if (!text) return {Attempt::Kind::client_error, {}, status, "unrecognised response body"};
    return {Attempt::Kind::ok, std::move(*text), status, {}};
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
    if (config.base_url == "mock:echo") return std::make_shared<EchoBackend>();
    if (config.base_url == "mock:fail") {
        return std::make_shared<ScriptBackend>(
            std::vector<Attempt>{{Attempt::Kind::transient, {}, 500, "scripted failure"}});
    }
    if (config.base_url.starts_with("mock:")) throw ConfigError("unknown mock backend '" + config.base_url + "'");
    return std::make_shared<HttpBackend>();
}

}  // namespace guidelm::llm
