#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace forge::backend {

using Duration = std::chrono::milliseconds;

struct GenerationRequest {
    std::optional<std::string> system_prompt;
    std::string user_prompt;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::vector<std::string> stop;

    bool operator==(const GenerationRequest&) const = default;
};

/// Throws std::invalid_argument when the request breaks its invariants.
void validate(const GenerationRequest& request);

struct GenerationResponse {
    std::string text;
    int request_count = 1;
    Duration latency{0};
};

enum class ErrorKind { transport, terminal_status, retries_exhausted, script_exhausted };

class BackendError : public std::runtime_error {
public:
    BackendError(ErrorKind kind, const std::string& what, std::optional<int> status = std::nullopt,
                 std::vector<std::string> attempt_log = {});

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<int> status() const noexcept { return status_; }
    const std::vector<std::string>& attempt_log() const noexcept { return attempt_log_; }

private:
    ErrorKind kind_;
    std::optional<int> status_;
    std::vector<std::string> attempt_log_;
};

/// A failed round trip. No status means the request never got an HTTP answer.
struct Failure {
    std::optional<int> status;
    std::string detail;
};

struct RetryPolicy {
    int max_attempts = 3;
    Duration base_backoff{1000};
    double backoff_factor = 2.0;
    // Overrides the default classifier when set.
    std::function<bool(const Failure&)> retryable;

    /// Transport errors, 429 and 5xx retry; every other status is terminal.
    bool is_retryable(const Failure& f) const;
    /// Delay before retry number `retry` (0-based): base * factor^retry.
    Duration backoff(int retry) const;
};

/// Injectable sleep so retry timing can be asserted without waiting.
class Clock {
public:
    virtual ~Clock() = default;
    virtual void sleep_for(Duration d) = 0;
    virtual std::chrono::steady_clock::time_point now() = 0;
};

class SystemClock final : public Clock {
public:
    void sleep_for(Duration d) override;
    std::chrono::steady_clock::time_point now() override;
};

/// Single-threaded clock that advances instantly and records every sleep.
class FakeClock final : public Clock {
public:
    void sleep_for(Duration d) override;
    std::chrono::steady_clock::time_point now() override;
    const std::vector<Duration>& sleeps() const { return sleeps_; }

private:
    std::chrono::steady_clock::time_point now_{};
    std::vector<Duration> sleeps_;
};

class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual GenerationResponse complete(const GenerationRequest& request) = 0;
    virtual std::string id() const = 0;
};

/// Validates the request and forwards it to the backend.
GenerationResponse complete(ModelBackend& backend, const GenerationRequest& request);

/// Bounds the number of in-flight calls on one backend.
class ConcurrencyLimiter {
public:
    explicit ConcurrencyLimiter(int permits);
    int permits() const noexcept { return permits_; }

    class Permit {
    public:
        explicit Permit(ConcurrencyLimiter& owner);
        ~Permit();
        Permit(const Permit&) = delete;
        Permit& operator=(const Permit&) = delete;

    private:
        ConcurrencyLimiter& owner_;
    };

private:
    static constexpr std::ptrdiff_t kMaxPermits = 4096;
    int permits_;
    std::counting_semaphore<kMaxPermits> sem_;
};

/// One scripted reply: text, or a failure surfaced as BackendError.
struct ScriptedFailure {
    ErrorKind kind = ErrorKind::transport;
    std::string detail = "scripted failure";
    std::optional<int> status;
};
using ScriptEntry = std::variant<std::string, ScriptedFailure>;

/// Replays a fixed script in call order and records every request.
class ScriptedBackend final : public ModelBackend {
public:
    explicit ScriptedBackend(std::vector<ScriptEntry> script, std::string name = "scripted");

    GenerationResponse complete(const GenerationRequest& request) override;
    std::string id() const override { return name_; }

    std::vector<GenerationRequest> requests() const;
    std::size_t call_count() const;
    std::size_t remaining() const;

private:
    std::string name_;
    std::vector<ScriptEntry> script_;
    mutable std::mutex mu_;
    std::size_t next_ = 0;
    std::vector<GenerationRequest> recorded_;
};

std::unique_ptr<ScriptedBackend> make_scripted_backend(std::vector<std::string> script);

/// Answers each request with a pure function of the request, so replies do not
/// depend on call order. Used wherever calls fan out across workers.
class ResponderBackend final : public ModelBackend {
public:
    using Responder = std::function<ScriptEntry(const GenerationRequest&)>;

    explicit ResponderBackend(Responder responder, std::string name = "responder");

    GenerationResponse complete(const GenerationRequest& request) override;
    std::string id() const override { return name_; }

    std::vector<GenerationRequest> requests() const;
    std::size_t call_count() const;

private:
    std::string name_;
    Responder responder_;
    mutable std::mutex mu_;
    std::vector<GenerationRequest> recorded_;
};

struct HttpReply {
    int status = 0;
    std::string body;
};

/// Performs one POST. Throws BackendError(transport) when no reply arrives.
using HttpTransport = std::function<HttpReply(const std::string& path, const std::string& body,
                                              const std::vector<std::pair<std::string, std::string>>& headers)>;

struct HttpBackendConfig {
    std::string base_url;
    std::string model;
    std::string api_key;
    Duration timeout{120000};
    RetryPolicy retry;
    int concurrency = 8;
};

/// OpenAI-compatible chat-completions client.
class HttpBackend final : public ModelBackend {
public:
    explicit HttpBackend(HttpBackendConfig config, std::shared_ptr<Clock> clock = nullptr,
                         HttpTransport transport = nullptr);

    GenerationResponse complete(const GenerationRequest& request) override;
    std::string id() const override { return config_.model; }

    const HttpBackendConfig& config() const { return config_; }

    static std::string request_body(const std::string& model, const GenerationRequest& request);
    /// Reads choices[0].message.content; throws BackendError(transport) on a bad body.
    static std::string response_text(const std::string& body);

private:
    HttpBackendConfig config_;
    std::shared_ptr<Clock> clock_;
    HttpTransport transport_;
    ConcurrencyLimiter limiter_;
};

/// Builds the default transport on top of cpp-httplib. `base_url` may carry a
/// path prefix, which is prepended to every request path.
HttpTransport make_httplib_transport(const std::string& base_url, Duration timeout);

/// FORGE_API_KEY / FORGE_BASE_URL.
std::string api_key_from_env();
std::optional<std::string> base_url_from_env();

}  // namespace forge::backend
