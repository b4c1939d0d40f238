#include "forge/backend.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace forge::backend {

using json = nlohmann::json;

void validate(const GenerationRequest& request) {
    if (request.user_prompt.empty()) throw std::invalid_argument("user_prompt must be nonempty");
    if (!(request.temperature >= 0.0 && request.temperature <= 2.0))
        throw std::invalid_argument("temperature must lie in [0, 2]");
    if (request.max_tokens <= 0) throw std::invalid_argument("max_tokens must be positive");
}

BackendError::BackendError(ErrorKind kind, const std::string& what, std::optional<int> status,
                           std::vector<std::string> attempt_log)
    : std::runtime_error(what), kind_(kind), status_(status), attempt_log_(std::move(attempt_log)) {}

bool RetryPolicy::is_retryable(const Failure& f) const {
    if (retryable) return retryable(f);
    if (!f.status) return true;
    return *f.status == 429 || (*f.status >= 500 && *f.status <= 599);
}

Duration RetryPolicy::backoff(int retry) const {
    const double ms = static_cast<double>(base_backoff.count()) * std::pow(backoff_factor, retry);
    return Duration(static_cast<Duration::rep>(std::llround(ms)));
}

void SystemClock::sleep_for(Duration d) { std::this_thread::sleep_for(d); }
std::chrono::steady_clock::time_point SystemClock::now() { return std::chrono::steady_clock::now(); }

void FakeClock::sleep_for(Duration d) {
    sleeps_.push_back(d);
    now_ += d;
}
std::chrono::steady_clock::time_point FakeClock::now() { return now_; }

GenerationResponse complete(ModelBackend& backend, const GenerationRequest& request) {
    validate(request);
    return backend.complete(request);
}

ConcurrencyLimiter::ConcurrencyLimiter(int permits)
    : permits_(permits), sem_(permits < 1 || permits > kMaxPermits ? 1 : permits) {
    if (permits < 1 || permits > kMaxPermits)
        throw std::invalid_argument("concurrency permits must lie in [1, " + std::to_string(kMaxPermits) + "]");
}

ConcurrencyLimiter::Permit::Permit(ConcurrencyLimiter& owner) : owner_(owner) { owner_.sem_.acquire(); }
ConcurrencyLimiter::Permit::~Permit() { owner_.sem_.release(); }

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> script, std::string name)
    : name_(std::move(name)), script_(std::move(script)) {}

namespace {

GenerationResponse realize(const ScriptEntry& entry) {
    if (const auto* f = std::get_if<ScriptedFailure>(&entry)) throw BackendError(f->kind, f->detail, f->status);
    return GenerationResponse{std::get<std::string>(entry), 1, Duration{0}};
}

}  // namespace

GenerationResponse ScriptedBackend::complete(const GenerationRequest& request) {
    std::unique_lock lock(mu_);
    recorded_.push_back(request);
    if (next_ >= script_.size())
        throw BackendError(ErrorKind::script_exhausted,
                           "script exhausted after " + std::to_string(script_.size()) + " responses");
    const ScriptEntry entry = script_[next_++];
    lock.unlock();
    return realize(entry);
}

std::vector<GenerationRequest> ScriptedBackend::requests() const {
    std::lock_guard lock(mu_);
    return recorded_;
}

std::size_t ScriptedBackend::call_count() const {
    std::lock_guard lock(mu_);
    return recorded_.size();
}

std::size_t ScriptedBackend::remaining() const {
    std::lock_guard lock(mu_);
    return script_.size() - next_;
}

std::unique_ptr<ScriptedBackend> make_scripted_backend(std::vector<std::string> script) {
    std::vector<ScriptEntry> entries(script.begin(), script.end());
    return std::make_unique<ScriptedBackend>(std::move(entries));
}

ResponderBackend::ResponderBackend(Responder responder, std::string name)
    : name_(std::move(name)), responder_(std::move(responder)) {}

GenerationResponse ResponderBackend::complete(const GenerationRequest& request) {
    {
        std::lock_guard lock(mu_);
        recorded_.push_back(request);
    }
    return realize(responder_(request));
}

std::vector<GenerationRequest> ResponderBackend::requests() const {
    std::lock_guard lock(mu_);
    return recorded_;
}

std::size_t ResponderBackend::call_count() const {
    std::lock_guard lock(mu_);
    return recorded_.size();
}

HttpBackend::HttpBackend(HttpBackendConfig config, std::shared_ptr<Clock> clock, HttpTransport transport)
    : config_(std::move(config)),
      clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()),
      transport_(transport ? std::move(transport) : make_httplib_transport(config_.base_url, config_.timeout)),
      limiter_(config_.concurrency) {
    if (config_.retry.max_attempts < 1) throw std::invalid_argument("retry.max_attempts must be >= 1");
    if (config_.retry.backoff_factor < 1.0) throw std::invalid_argument("retry.backoff_factor must be >= 1");
}

std::string HttpBackend::request_body(const std::string& model, const GenerationRequest& request) {
    json body;
    body["model"] = model;
    json messages = json::array();
    if (request.system_prompt) messages.push_back({{"role", "system"}, {"content", *request.system_prompt}});
    messages.push_back({{"role", "user"}, {"content", request.user_prompt}});
    body["messages"] = std::move(messages);
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    if (!request.stop.empty()) body["stop"] = request.stop;
    return body.dump();
}

std::string HttpBackend::response_text(const std::string& body) {
    try {
        auto j = json::parse(body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        if (content.is_null()) return {};
        return content.get<std::string>();
    } catch (const json::exception& e) {
        throw BackendError(ErrorKind::transport, std::string("malformed completion body: ") + e.what());
    }
}

GenerationResponse HttpBackend::complete(const GenerationRequest& request) {
    validate(request);
    const std::string body = request_body(config_.model, request);
    std::vector<std::pair<std::string, std::string>> headers;
    if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);

    ConcurrencyLimiter::Permit permit(limiter_);
    const auto start = clock_->now();
    std::vector<std::string> log;
    for (int attempt = 0; attempt < config_.retry.max_attempts; ++attempt) {
        if (attempt > 0) clock_->sleep_for(config_.retry.backoff(attempt - 1));
        Failure failure;
        try {
            HttpReply reply = transport_("/v1/chat/completions", body, headers);
            if (reply.status >= 200 && reply.status < 300) {
                auto text = response_text(reply.body);
                auto latency = std::chrono::duration_cast<Duration>(clock_->now() - start);
                return GenerationResponse{std::move(text), attempt + 1, latency};
            }
            failure = Failure{reply.status, reply.body.substr(0, 200)};
        } catch (const BackendError& e) {
            failure = Failure{e.status(), e.what()};
        }
        log.push_back("attempt " + std::to_string(attempt + 1) + ": " +
                      (failure.status ? "HTTP " + std::to_string(*failure.status) + " " : std::string{}) +
                      failure.detail);
        if (!config_.retry.is_retryable(failure))
            throw BackendError(ErrorKind::terminal_status,
                               "terminal error from " + config_.model + ": " + log.back(), failure.status, log);
    }
    throw BackendError(ErrorKind::retries_exhausted,
                       "gave up after " + std::to_string(config_.retry.max_attempts) + " attempts: " + log.back(),
                       std::nullopt, log);
}

HttpTransport make_httplib_transport(const std::string& base_url, Duration timeout) {
    // Split "scheme://host[:port]/prefix" so the prefix can be prepended to paths.
    std::string origin = base_url;
    std::string prefix;
    if (auto scheme = base_url.find("://"); scheme != std::string::npos) {
        if (auto slash = base_url.find('/', scheme + 3); slash != std::string::npos) {
            origin = base_url.substr(0, slash);
            prefix = base_url.substr(slash);
        }
    }
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    if (prefix.size() >= 3 && prefix.compare(prefix.size() - 3, 3, "/v1") == 0) prefix.resize(prefix.size() - 3);

    return [origin, prefix, timeout](const std::string& path, const std::string& body,
                                  const std::vector<std::pair<std::string, std::string>>& headers) {
        // One client per call: httplib::Client is not safe for concurrent use.
        httplib::Client client(origin);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        auto res = client.Post(prefix + path, h, body, "application/json");
        if (!res) throw BackendError(ErrorKind::transport, "transport error: " + httplib::to_string(res.error()));
        return HttpReply{res->status, res->body};
    };
}

std::string api_key_from_env() {
    const char* v = std::getenv("FORGE_API_KEY");
    return v ? std::string(v) : std::string{};
}

std::optional<std::string> base_url_from_env() {
    const char* v = std::getenv("FORGE_BASE_URL");
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

}  // namespace forge::backend
