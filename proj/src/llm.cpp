#include "oracle/llm.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "oracle/errors.hpp"
#include "oracle/hash.hpp"

namespace oracle {

using nlohmann::json;

std::string_view to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

namespace {

void check_request(const CompletionRequest& req) {
    if (req.messages.empty()) throw OracleError("completion request has no messages");
    if (req.messages.back().role != Role::User) {
        throw OracleError("last message of a completion request must be from the user");
    }
    if (req.temperature < 0) throw OracleError("temperature must be >= 0");
    if (req.max_tokens <= 0) throw OracleError("max_tokens must be positive");
}

long now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

json request_to_json(const CompletionRequest& req) {
    json messages = json::array();
    for (const Message& m : req.messages) {
        messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
    }
    return {{"model", req.model},
            {"messages", std::move(messages)},
            {"temperature", req.temperature},
            {"max_tokens", req.max_tokens},
            {"request_tag", req.request_tag}};
}

}  // namespace

std::string digest(const CompletionRequest& req) {
    Fnv1a h;
    h.update("model:");
    h.update(req.model);
    h.update_byte(0);
    for (const Message& m : req.messages) {
        h.update(to_string(m.role));
        h.update_byte(0);
        h.update(m.content);
        h.update_byte(0);
    }
    char temp[32];
    std::snprintf(temp, sizeof(temp), "t:%.9g", req.temperature);
    h.update(temp);
    return h.hex();
}

// ---------------------------------------------------------------- mock

void MockBackend::script_digest(const std::string& request_digest, std::string response) {
    std::lock_guard lock(mu_);
    by_digest_[request_digest] = std::move(response);
}

void MockBackend::script_tag(const std::string& tag, std::vector<std::string> responses) {
    std::lock_guard lock(mu_);
    auto& queue = by_tag_[tag];
    for (std::string& r : responses) queue.push_back(std::move(r));
}

void MockBackend::script_contains(std::string needle, std::string response) {
    std::lock_guard lock(mu_);
    rules_.emplace_back(std::move(needle), std::move(response));
}

void MockBackend::set_default_response(std::string response) {
    std::lock_guard lock(mu_);
    default_response_ = std::move(response);
    has_default_ = true;
}

CompletionResponse MockBackend::complete(const CompletionRequest& req) {
    std::string d = digest(req);
    std::string text;
    {
        std::lock_guard lock(mu_);
        ++calls_;
        ++in_flight_;
        max_in_flight_ = std::max(max_in_flight_, in_flight_);

        if (auto it = by_digest_.find(d); it != by_digest_.end()) {
            text = it->second;
        } else if (auto tag_it = by_tag_.find(req.request_tag);
                   tag_it != by_tag_.end() && !tag_it->second.empty()) {
            text = tag_it->second.front();
            tag_it->second.erase(tag_it->second.begin());
        } else {
            const std::string& prompt = req.messages.back().content;
            for (const auto& [needle, response] : rules_) {
                if (prompt.find(needle) != std::string::npos) {
                    text = response;
                    break;
                }
            }
            if (text.empty()) {
                if (!has_default_) {
                    --in_flight_;
                    throw TransientError("mock backend has no script for tag '" +
                                         req.request_tag + "' digest " + d);
                }
                text = default_response_;
            }
        }
    }
    CompletionResponse resp;
    resp.text = std::move(text);
    resp.backend_id = id();
    {
        std::lock_guard lock(mu_);
        --in_flight_;
    }
    return resp;
}

std::size_t MockBackend::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

int MockBackend::max_concurrent() const {
    std::lock_guard lock(mu_);
    return max_in_flight_;
}

// ---------------------------------------------------------------- replay

namespace {

std::filesystem::path fixture_path(const std::filesystem::path& dir, const std::string& d) {
    return dir / (d + ".json");
}

}  // namespace

ReplayBackend::ReplayBackend(std::filesystem::path fixture_dir) : dir_(std::move(fixture_dir)) {}

CompletionResponse ReplayBackend::complete(const CompletionRequest& req) {
    std::string d = digest(req);
    std::ifstream in(fixture_path(dir_, d), std::ios::binary);
    if (!in) throw FixtureMissError(d);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw FormatError("corrupt fixture " + d + ": " + e.what());
    }
    CompletionResponse resp;
    resp.text = doc.at("response").at("text").get<std::string>();
    resp.prompt_tokens = doc["response"].value("prompt_tokens", 0L);
    resp.completion_tokens = doc["response"].value("completion_tokens", 0L);
    resp.latency_ms = 0;
    resp.backend_id = "replay";
    return resp;
}

RecordingBackend::RecordingBackend(std::shared_ptr<LlmBackend> inner,
                                   std::filesystem::path fixture_dir)
    : inner_(std::move(inner)), dir_(std::move(fixture_dir)) {
    std::filesystem::create_directories(dir_);
}

std::string RecordingBackend::id() const { return "record:" + inner_->id(); }

CompletionResponse RecordingBackend::complete(const CompletionRequest& req) {
    CompletionResponse resp = inner_->complete(req);
    std::string d = digest(req);

    json doc = {{"digest", d},
                {"request", request_to_json(req)},
                {"response",
                 {{"text", resp.text},
                  {"prompt_tokens", resp.prompt_tokens},
                  {"completion_tokens", resp.completion_tokens},
                  {"backend_id", resp.backend_id}}}};

    std::lock_guard lock(write_mu_);
    std::filesystem::path final_path = fixture_path(dir_, d);
    std::filesystem::path tmp_path = final_path;
    tmp_path += ".tmp";
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp_path, final_path);
    return resp;
}

// ---------------------------------------------------------------- http

HttpBackend::HttpBackend(std::string base_url, std::string api_key, int timeout_seconds)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)),
      timeout_seconds_(timeout_seconds) {}

CompletionResponse HttpBackend::complete(const CompletionRequest& req) {
    // Split base_url into origin and path prefix ("http://host:1234/v1").
    std::string origin = base_url_;
    std::string prefix;
    std::size_t scheme = base_url_.find("://");
    if (scheme != std::string::npos) {
        std::size_t slash = base_url_.find('/', scheme + 3);
        if (slash != std::string::npos) {
            origin = base_url_.substr(0, slash);
            prefix = base_url_.substr(slash);
            while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
        }
    }

    httplib::Client client(origin);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);

    json body = {{"model", req.model}, {"temperature", req.temperature},
                 {"max_tokens", req.max_tokens}};
    json messages = json::array();
    for (const Message& m : req.messages) {
        messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
    }
    body["messages"] = std::move(messages);

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    long start = now_ms();
    httplib::Result result =
        client.Post(prefix + "/chat/completions", headers, body.dump(), "application/json");
    long elapsed = now_ms() - start;

    if (!result) {
        throw TransientError("http request failed: " + httplib::to_string(result.error()));
    }
    if (result->status == 401 || result->status == 403) {
        throw AuthError("authentication rejected (status " + std::to_string(result->status) +
                        ")");
    }
    if (result->status == 429) {
        throw RateLimitError("rate limited (status 429)");
    }
    if (result->status != 200) {
        throw TransientError("unexpected status " + std::to_string(result->status) + ": " +
                             result->body.substr(0, 200));
    }

    json doc;
    try {
        doc = json::parse(result->body);
    } catch (const json::exception& e) {
        throw TransientError(std::string("unparseable completion response: ") + e.what());
    }

    CompletionResponse resp;
    try {
        resp.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw TransientError("completion response has no choices[0].message.content");
    }
    if (doc.contains("usage")) {
        resp.prompt_tokens = doc["usage"].value("prompt_tokens", 0L);
        resp.completion_tokens = doc["usage"].value("completion_tokens", 0L);
    }
    resp.latency_ms = elapsed;
    resp.backend_id = id();
    return resp;
}

// ---------------------------------------------------------------- gateway

long retry_base_delay_ms(const RetryPolicy& policy, int attempt) {
    long delay = policy.base_delay_ms;
    for (int i = 1; i < attempt; ++i) {
        delay = std::min(delay * 2, policy.max_delay_ms);
    }
    return std::min(delay, policy.max_delay_ms);
}

Gateway::Gateway(std::shared_ptr<LlmBackend> backend, RetryPolicy policy, int max_in_flight,
                 std::uint64_t seed, std::function<void(long)> sleep_ms)
    : backend_(std::move(backend)), policy_(policy),
      sleep_ms_(sleep_ms ? std::move(sleep_ms)
                         : [](long ms) {
                               std::this_thread::sleep_for(std::chrono::milliseconds(ms));
                           }),
      slots_(std::max(1, max_in_flight)), rng_(seed) {}

CompletionResponse Gateway::complete(const CompletionRequest& req) {
    check_request(req);

    std::unique_lock slot_lock(slot_mu_);
    slot_cv_.wait(slot_lock, [this] { return slots_ > 0; });
    --slots_;
    slot_lock.unlock();

    struct SlotRelease {
        Gateway* g;
        ~SlotRelease() {
            std::lock_guard lock(g->slot_mu_);
            ++g->slots_;
            g->slot_cv_.notify_one();
        }
    } release{this};

    long start = now_ms();
    for (int attempt = 1;; ++attempt) {
        try {
            CompletionResponse resp = backend_->complete(req);
            if (resp.text.empty()) {
                throw TransientError("backend returned empty completion text");
            }
            if (resp.latency_ms == 0 && resp.backend_id != "replay") {
                resp.latency_ms = now_ms() - start;
            }
            return resp;
        } catch (const AuthError&) {
            throw;
        } catch (const FixtureMissError&) {
            throw;
        } catch (const RateLimitError&) {
            if (attempt >= policy_.max_attempts) throw;
        } catch (const TransientError&) {
            if (attempt >= policy_.max_attempts) throw;
        }
        long base = retry_base_delay_ms(policy_, attempt);
        long spread = static_cast<long>(static_cast<double>(base) * policy_.jitter);
        long delay = base;
        if (spread > 0) {
            std::lock_guard lock(rng_mu_);
            delay += static_cast<long>(rng_() % (2 * static_cast<std::uint64_t>(spread) + 1)) -
                     spread;
        }
        sleep_ms_(std::max<long>(0, delay));
    }
}

}  // namespace oracle
