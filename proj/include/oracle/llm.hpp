#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

enum class Role { System, User, Assistant };

std::string_view to_string(Role r);

struct Message {
    Role role = Role::User;
    std::string content;

    bool operator==(const Message&) const = default;
};

struct CompletionRequest {
    std::string model;
    std::vector<Message> messages;  // non-empty, last role must be user
    double temperature = 0.0;
    int max_tokens = 512;
    std::string request_tag;  // stage name, for tracing only
};

struct CompletionResponse {
    std::string text;
    long prompt_tokens = 0;      // zero when the backend does not report them
    long completion_tokens = 0;
    long latency_ms = 0;
    std::string backend_id;
};

// Stable content hash over (model, messages, temperature). request_tag and
// max_tokens are excluded so a re-tagged identical prompt hits the same
// fixture.
std::string digest(const CompletionRequest& req);

class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual CompletionResponse complete(const CompletionRequest& req) = 0;
    virtual std::string id() const = 0;
};

// Scripted backend for tests and offline runs. Resolution order: exact
// digest match, then per-tag response queue, then substring rules, then the
// default response.
class MockBackend : public LlmBackend {
public:
    void script_digest(const std::string& request_digest, std::string response);
    void script_tag(const std::string& tag, std::vector<std::string> responses);
    void script_contains(std::string needle, std::string response);
    void set_default_response(std::string response);

    CompletionResponse complete(const CompletionRequest& req) override;
    std::string id() const override { return "mock"; }

    std::size_t calls() const;
    int max_concurrent() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, std::string> by_digest_;
    std::map<std::string, std::vector<std::string>> by_tag_;  // consumed front-first
    std::vector<std::pair<std::string, std::string>> rules_;
    std::string default_response_;
    bool has_default_ = false;
    std::size_t calls_ = 0;
    int in_flight_ = 0;
    int max_in_flight_ = 0;
};

// Serves recorded fixtures from a directory keyed by request digest. Throws
// FixtureMissError (with the digest) on unknown requests.
class ReplayBackend : public LlmBackend {
public:
    explicit ReplayBackend(std::filesystem::path fixture_dir);

    CompletionResponse complete(const CompletionRequest& req) override;
    std::string id() const override { return "replay"; }

private:
    std::filesystem::path dir_;
};

// Wraps another backend and records each (request, response) pair to the
// fixture directory so a later ReplayBackend run is deterministic. Writes are
// write-temp-then-rename.
class RecordingBackend : public LlmBackend {
public:
    RecordingBackend(std::shared_ptr<LlmBackend> inner, std::filesystem::path fixture_dir);

    CompletionResponse complete(const CompletionRequest& req) override;
    std::string id() const override;

private:
    std::shared_ptr<LlmBackend> inner_;
    std::filesystem::path dir_;
    std::mutex write_mu_;
};

// Chat-completions HTTP backend: POST {base_url}/chat/completions with a
// bearer token, response text read from choices[0].message.content.
class HttpBackend : public LlmBackend {
public:
    HttpBackend(std::string base_url, std::string api_key, int timeout_seconds = 60);

    CompletionResponse complete(const CompletionRequest& req) override;
    std::string id() const override { return "http:" + base_url_; }

private:
    std::string base_url_;
    std::string api_key_;
    int timeout_seconds_;
};

struct RetryPolicy {
    int max_attempts = 5;
    long base_delay_ms = 200;
    long max_delay_ms = 4000;
    double jitter = 0.25;  // +/- fraction of the base delay
};

// Pre-jitter delay before retry attempt `attempt` (1-based count of failures
// so far). Bounded and monotonically non-decreasing.
long retry_base_delay_ms(const RetryPolicy& policy, int attempt);

// Shareable front door to a backend: enforces the request invariants, retries
// transient failures with jittered exponential backoff, never retries
// AuthError or FixtureMissError, and bounds in-flight requests with one
// limiter shared by all callers.
class Gateway {
public:
    explicit Gateway(std::shared_ptr<LlmBackend> backend, RetryPolicy policy = {},
                     int max_in_flight = 4, std::uint64_t seed = 0,
                     std::function<void(long)> sleep_ms = {});

    CompletionResponse complete(const CompletionRequest& req);

    LlmBackend& backend() { return *backend_; }

private:
    std::shared_ptr<LlmBackend> backend_;
    RetryPolicy policy_;
    std::function<void(long)> sleep_ms_;

    std::mutex slot_mu_;
    std::condition_variable_any slot_cv_;
    int slots_;

    std::mutex rng_mu_;
    std::mt19937_64 rng_;
};

}  // namespace oracle
