#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "guidelm/chat.hpp"
#include "guidelm/errors.hpp"

namespace guidelm::llm {

struct BackendConfig {
    std::string base_url;      // "https://host/v1", or "mock:echo" / "mock:fail"
    std::string model_name;
    std::string api_key_env;   // name of the environment variable holding the key
    double timeout_seconds = 60.0;
    int max_retries = 3;
    int max_in_flight = 4;
    std::optional<double> temperature = 0.0;

    /// Throws ConfigError on max_retries < 0, max_in_flight < 1 or timeout <= 0.
    void validate() const;
};

/// Outcome of a single request, before any retry policy is applied.
struct Attempt {
    enum class Kind {
        ok,
        transient,     // 5xx, timeout, connection failure
        auth,          // 401/403
        client_error,  // other 4xx
    };
    Kind kind = Kind::ok;
    std::string text;
    int status = 0;
    std::string detail;
};

/// One request to a chat-completion provider. Implementations must be safe to call concurrently.
class Backend {
public:
    virtual ~Backend() = default;
    virtual Attempt send(const MessageList& messages, const BackendConfig& config) = 0;
};

class CompletionError : public Error {
public:
    enum class Kind { auth, client_error, exhausted, empty_completion };

    CompletionError(Kind kind, int attempts, const std::string& what)
        : Error(what), kind_(kind), attempts_(attempts) {}

    Kind kind() const { return kind_; }
    int attempts() const { return attempts_; }

private:
    Kind kind_;
    int attempts_;
};

struct Completion {
    std::string text;
    int attempts = 1;
};

/// Delay before retry number `retry` (1-based): 0.5 s doubling, capped at 8 s.
std::chrono::milliseconds backoff_delay(int retry);

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Shared, thread-safe client: retry policy plus an in-flight cap.
class ChatClient {
public:
    ChatClient(std::shared_ptr<Backend> backend, BackendConfig config, Sleeper sleeper = {});

    /// First completion text. Retries transient failures up to max_retries times with
    /// exponential backoff; auth and other 4xx failures are never retried. An empty completion
    /// is an error. Throws CompletionError.
    Completion complete(const MessageList& messages);

    const BackendConfig& config() const { return config_; }

private:
    std::shared_ptr<Backend> backend_;
    BackendConfig config_;
    Sleeper sleeper_;
    std::counting_semaphore<> in_flight_;
};

/// Returns the last user message verbatim.
class EchoBackend : public Backend {
public:
    Attempt send(const MessageList& messages, const BackendConfig& config) override;
};

/// Replays a fixed script of outcomes per distinct request, then repeats the last entry.
/// Also records how many calls it has seen.
class ScriptBackend : public Backend {
public:
    using Rule = std::function<std::optional<std::vector<Attempt>>(const MessageList&)>;

    /// Script used for every request.
    explicit ScriptBackend(std::vector<Attempt> script);
    /// Per-request scripts: the first rule returning a script wins; echo otherwise.
    explicit ScriptBackend(std::vector<Rule> rules);

    Attempt send(const MessageList& messages, const BackendConfig& config) override;
    std::size_t calls() const;

private:
    std::vector<Rule> rules_;
    mutable std::mutex mutex_;
    std::vector<std::pair<MessageList, std::size_t>> seen_;
    std::size_t calls_ = 0;
};

/// POST {base_url}/chat/completions with a chat-completions JSON body.
class HttpBackend : public Backend {
public:
    Attempt send(const MessageList& messages, const BackendConfig& config) override;
};

/// Request body sent to providers.
nlohmann::json request_body(const MessageList& messages, const BackendConfig& config);

/// Extracts choices[0].message.content, or nullopt if the shape is wrong.
std::optional<std::string> parse_completion(const std::string& body);

/// "mock:echo" -> EchoBackend, "mock:fail" -> always-500 script, anything else -> HttpBackend.
std::shared_ptr<Backend> make_backend(const BackendConfig& config);

}  // namespace guidelm::llm
