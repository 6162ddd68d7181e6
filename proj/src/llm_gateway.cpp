#include "mimic/llm_gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mimic/digest.hpp"
#include "mimic/errors.hpp"
#include "mimic/io.hpp"

namespace mimic::gateway {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::atomic<std::uint64_t> g_network_attempts{0};

json messages_json(const std::vector<ChatMessage>& messages) {
    json arr = json::array();
    for (const ChatMessage& m : messages) {
        arr.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    return arr;
}

// ---- prompt-structure helpers for the deterministic mock -----------------

std::string block(const std::string& text, const std::string& name) {
    const std::string open = "[" + name + "]\n";
    const std::string close = "\n[/" + name + "]";
    std::size_t b = text.find(open);
    if (b == std::string::npos) return "";
    b += open.size();
    std::size_t e = text.find(close, b);
    if (e == std::string::npos) return "";
    return text.substr(b, e - b);
}

// verbatim slices ending at sentence punctuation
std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        bool at_end = (i + 1 == text.size());
        bool boundary = (c == '.' || c == '!' || c == '?') &&
                        (at_end || text[i + 1] == ' ' || text[i + 1] == '\n');
        if (boundary) {
            while (start < i && (text[start] == ' ' || text[start] == '\n')) ++start;
            if (i + 1 > start) out.push_back(text.substr(start, i + 1 - start));
            start = i + 1;
        }
    }
    while (start < text.size() && (text[start] == ' ' || text[start] == '\n')) ++start;
    if (start < text.size()) out.push_back(text.substr(start));
    return out;
}

std::string last_user_content(const CompletionRequest& request) {
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role == Role::user) return it->content;
    }
    return request.messages.empty() ? std::string() : request.messages.back().content;
}

// json_mode is a contract: a reply that does not parse is malformed
void enforce_json_mode(const CompletionRequest& request, const std::string& text,
                       const std::string& digest) {
    if (!request.json_mode) return;
    if (!json::accept(text)) {
        throw MalformedResponse("json_mode response is not valid JSON", digest);
    }
}

std::string style_verdict_for(const std::string& prompt) {
    std::string a = block(prompt, "message A");
    std::string b = block(prompt, "message B");
    if (a.size() > b.size()) return "A";
    if (b.size() > a.size()) return "B";
    return "=";
}

std::string fact_extraction_for(const std::string& prompt) {
    std::string original = block(prompt, "original answer");
    std::string frag_a = block(prompt, "fragment A");
    std::string frag_b = block(prompt, "fragment B");
    std::vector<std::string> facts = split_sentences(original);

    auto matched = [&facts](const std::string& fragment) {
        json arr = json::array();
        for (std::size_t i = 0; i < facts.size(); ++i) {
            if (fragment.find(facts[i]) != std::string::npos) arr.push_back(i);
        }
        return arr;
    };
    auto extras = [&original](const std::string& fragment) {
        json arr = json::array();
        for (const std::string& s : split_sentences(fragment)) {
            if (original.find(s) == std::string::npos) arr.push_back(s);
        }
        return arr;
    };

    ordered_json out;
    out["original_facts"] = facts;
    out["matched_a"] = matched(frag_a);
    out["extra_a"] = extras(frag_a);
    out["matched_b"] = matched(frag_b);
    out["extra_b"] = extras(frag_b);
    return out.dump();
}

std::string fact_records_for(const std::string& prompt) {
    std::string interview = block(prompt, "interview");
    std::vector<std::string> sentences = split_sentences(interview);
    ordered_json arr = ordered_json::array();
    std::size_t n = std::min<std::size_t>(3, sentences.size());
    for (std::size_t i = 0; i < n; ++i) {
        ordered_json rec;
        rec["fact"] = "Stated in the interview: " + sentences[i];
        rec["src"] = sentences[i];
        rec["question"] = "What did the speaker say here: " + sentences[i];
        rec["answer"] = sentences[i];
        arr.push_back(rec);
    }
    return arr.dump();
}

}  // namespace

std::string canonical_json(const CompletionRequest& request) {
    // nlohmann::json orders keys lexicographically, which is the canon
    json doc;
    doc["model"] = request.model;
    doc["messages"] = messages_json(request.messages);
    doc["temperature"] = request.temperature;
    doc["json_mode"] = request.json_mode;
    doc["max_tokens"] = request.max_tokens;
    return doc.dump();
}

std::string request_digest(const CompletionRequest& request) {
    return sha256_hex(canonical_json(request));
}

// ---- MockGateway ----------------------------------------------------------

MockGateway::MockGateway(Responder responder, std::string name)
    : responder_(std::move(responder)), name_(std::move(name)) {}

CompletionResponse MockGateway::complete(const CompletionRequest& request) {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        requests_.push_back(request);
    }
    std::string digest = request_digest(request);
    std::string text = responder_(request);
    enforce_json_mode(request, text, digest);
    return {std::move(text), false, std::move(digest)};
}

std::vector<CompletionRequest> MockGateway::requests() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return requests_;
}

std::size_t MockGateway::call_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return requests_.size();
}

MockGateway::Responder echo_responder(int repeat) {
    return [repeat](const CompletionRequest& request) {
        std::string base = last_user_content(request);
        std::string out = base;
        for (int i = 1; i < repeat; ++i) {
            out += ' ';
            out += base;
        }
        return out;
    };
}

MockGateway::Responder auto_responder(int echo_repeat) {
    auto echo = echo_responder(echo_repeat);
    return [echo](const CompletionRequest& request) -> std::string {
        std::string prompt = last_user_content(request);
        if (prompt.find("[message A]\n") != std::string::npos &&
            prompt.find("[real message]\n") != std::string::npos) {
            return style_verdict_for(prompt);
        }
        if (prompt.find("[fragment A]\n") != std::string::npos &&
            prompt.find("[original answer]\n") != std::string::npos) {
            return fact_extraction_for(prompt);
        }
        if (prompt.find("[interview]\n") != std::string::npos) {
            return fact_records_for(prompt);
        }
        return echo(request);
    };
}

// ---- HttpGateway ----------------------------------------------------------

bool retryable_status(int http_status) {
    return http_status == 408 || http_status == 429 || http_status >= 500;
}

int retry_delay_ms(const RetryPolicy& policy, int attempt) {
    if (attempt <= 1) return 0;
    long long delay = static_cast<long long>(policy.base_delay_ms) << (attempt - 2);
    return static_cast<int>(std::min<long long>(delay, policy.max_delay_ms));
}

HttpGateway::HttpGateway(EndpointConfig endpoint, RetryPolicy retry)
    : endpoint_(std::move(endpoint)), retry_(retry) {
    std::string url = endpoint_.base_url;
    if (url.rfind("https://", 0) == 0) {
        tls_ = true;
        url = url.substr(8);
    } else if (url.rfind("http://", 0) == 0) {
        url = url.substr(7);
    } else {
        throw Error("endpoint base_url must start with http:// or https:// (got \"" +
                    endpoint_.base_url + "\")");
    }
    std::size_t slash = url.find('/');
    std::string hostport = slash == std::string::npos ? url : url.substr(0, slash);
    path_prefix_ = slash == std::string::npos ? "" : url.substr(slash);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    std::size_t colon = hostport.find(':');
    host_ = colon == std::string::npos ? hostport : hostport.substr(0, colon);
    port_ = colon == std::string::npos ? (tls_ ? 443 : 80) : std::stoi(hostport.substr(colon + 1));
}

std::uint64_t HttpGateway::network_attempts() { return g_network_attempts.load(); }

CompletionResponse HttpGateway::complete(const CompletionRequest& request) {
    const std::string digest = request_digest(request);

    json body;
    body["model"] = endpoint_.model.empty() ? request.model : endpoint_.model;
    body["messages"] = messages_json(request.messages);
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    if (request.json_mode) body["response_format"] = {{"type", "json_object"}};
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!endpoint_.auth_env.empty()) {
        const char* token = std::getenv(endpoint_.auth_env.c_str());
        if (token == nullptr || *token == '\0') {
            throw AuthError("auth env var " + endpoint_.auth_env + " is not set", digest);
        }
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    const std::string path = path_prefix_ + "/chat/completions";
    std::string last_failure = "no attempt made";

    for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
        if (int delay = retry_delay_ms(retry_, attempt); delay > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        g_network_attempts.fetch_add(1);

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (tls_) throw TransportError("built without TLS support, cannot reach https endpoint", digest);
#endif
        httplib::Client client(tls_ ? ("https://" + host_ + ":" + std::to_string(port_))
                                    : ("http://" + host_ + ":" + std::to_string(port_)));
        client.set_connection_timeout(30);
        client.set_read_timeout(120);

        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_failure = "transport failure: " + httplib::to_string(res.error());
            continue;  // retry
        }
        if (res->status == 401 || res->status == 403) {
            throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")",
                            digest);
        }
        if (retryable_status(res->status)) {
            last_failure = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body, digest);
        }

        try {
            json doc = json::parse(res->body);
            const auto& choices = doc.at("choices");
            if (!choices.is_array() || choices.empty()) {
                throw MalformedResponse("response has no choices", digest);
            }
            std::string text = choices[0].at("message").at("content").get<std::string>();
            enforce_json_mode(request, text, digest);
            return {std::move(text), false, digest};
        } catch (const json::exception& e) {
            throw MalformedResponse(std::string("cannot parse completion body: ") + e.what(), digest);
        }
    }

    if (last_failure.rfind("HTTP 429", 0) == 0) {
        throw RateLimitExhausted("still rate-limited after " + std::to_string(retry_.max_attempts) +
                                     " attempts",
                                 digest);
    }
    throw TransportError("gave up after " + std::to_string(retry_.max_attempts) +
                             " attempts, last: " + last_failure,
                         digest);
}

// ---- CachingGateway --------------------------------------------------------

CachingGateway::CachingGateway(std::shared_ptr<ChatGateway> inner,
                               std::filesystem::path cache_file, std::string run_namespace)
    : inner_(std::move(inner)),
      cache_file_(std::move(cache_file)),
      run_namespace_(std::move(run_namespace)) {
    if (std::filesystem::exists(cache_file_)) {
        for (const auto& rec : io::read_jsonl(cache_file_)) {
            std::string ns = rec.value("namespace", "");
            entries_[ns + ":" + rec.at("digest").get<std::string>()] =
                rec.at("response").get<std::string>();
        }
    }
}

CompletionResponse CachingGateway::complete(const CompletionRequest& request) {
    const std::string digest = request_digest(request);
    const std::string key = run_namespace_ + ":" + digest;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            hits_.fetch_add(1);
            return {it->second, true, digest};
        }
    }
    misses_.fetch_add(1);
    CompletionResponse fresh = inner_->complete(request);

    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = entries_.emplace(key, fresh.text);
    if (inserted) {
        json rec;
        rec["digest"] = digest;
        rec["namespace"] = run_namespace_;
        rec["request"] = json::parse(canonical_json(request));
        rec["response"] = fresh.text;
        rec["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                               std::chrono::system_clock::now().time_since_epoch())
                               .count();
        io::append_line(cache_file_, rec.dump());
    }
    return fresh;
}

// ---- factory & parallel helper ---------------------------------------------

std::shared_ptr<ChatGateway> make_gateway(const EndpointConfig& endpoint, RetryPolicy retry) {
    const std::string& url = endpoint.base_url;
    if (url.rfind("mock://", 0) == 0) {
        std::string rest = url.substr(7);
        std::string kind = rest;
        int repeat = 1;
        std::size_t q = rest.find('?');
        if (q != std::string::npos) {
            kind = rest.substr(0, q);
            std::string query = rest.substr(q + 1);
            if (query.rfind("repeat=", 0) == 0) repeat = std::stoi(query.substr(7));
        }
        if (kind == "echo") {
            return std::make_shared<MockGateway>(echo_responder(repeat), endpoint.name);
        }
        if (kind == "auto") {
            return std::make_shared<MockGateway>(auto_responder(repeat), endpoint.name);
        }
        throw Error("unknown mock gateway kind \"" + kind + "\" (use mock://echo or mock://auto)");
    }
    return std::make_shared<HttpGateway>(endpoint, retry);
}

void parallel_for(std::size_t n, int concurrency, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t workers = std::min<std::size_t>(std::max(concurrency, 1), n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (!failed.load()) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                break;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace mimic::gateway
