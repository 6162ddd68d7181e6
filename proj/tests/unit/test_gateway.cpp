#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <filesystem>

#include "mimic/digest.hpp"
#include "mimic/errors.hpp"
#include "mimic/llm_gateway.hpp"

using namespace mimic;
using gateway::CachingGateway;
using gateway::CompletionRequest;
using gateway::MockGateway;
using gateway::request_digest;

namespace {

CompletionRequest simple_request(const std::string& content) {
    CompletionRequest req;
    req.model = "m";
    req.messages = {user_msg(content)};
    return req;
}

std::filesystem::path temp_cache() {
    static std::atomic<int> counter{0};
    auto p = std::filesystem::temp_directory_path() /
             ("mimic_cache_test_" + std::to_string(counter.fetch_add(1)) + ".jsonl");
    std::filesystem::remove(p);
    return p;
}

}  // namespace

TEST_CASE("sha256 matches the standard test vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    // multi-block input
    CHECK(sha256_hex(std::string(1000000, 'a')) ==
          "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("request digests are canonical and sensitive to every field") {
    CompletionRequest a = simple_request("hello");
    CompletionRequest b = simple_request("hello");
    CHECK(request_digest(a) == request_digest(b));

    b.temperature = 0.1;
    CHECK(request_digest(a) != request_digest(b));

    CompletionRequest c = simple_request("other");
    CHECK(request_digest(a) != request_digest(c));

    CompletionRequest d = simple_request("hello");
    d.json_mode = true;
    CHECK(request_digest(a) != request_digest(d));

    CompletionRequest e = simple_request("hello");
    e.max_tokens = a.max_tokens + 1;
    CHECK(request_digest(a) != request_digest(e));

    // construction order of fields cannot matter: build the same value
    // by mutation in a different order
    CompletionRequest f;
    f.max_tokens = a.max_tokens;
    f.temperature = a.temperature;
    f.messages = a.messages;
    f.model = a.model;
    CHECK(request_digest(a) == request_digest(f));
}

TEST_CASE("mock gateway is deterministic and records traffic") {
    MockGateway mock([](const CompletionRequest& req) {
        std::string last = req.messages.back().content;
        std::reverse(last.begin(), last.end());
        return last;
    });
    auto r1 = mock.complete(simple_request("abc"));
    auto r2 = mock.complete(simple_request("abc"));
    CHECK(r1.text == "cba");
    CHECK(r1.text == r2.text);
    CHECK(mock.call_count() == 2);
    CHECK(mock.requests()[0].messages[0].content == "abc");
}

TEST_CASE("json_mode responses must be JSON") {
    MockGateway mock([](const CompletionRequest&) { return "not json at all"; });
    CompletionRequest req = simple_request("x");
    req.json_mode = true;
    CHECK_THROWS_AS(mock.complete(req), MalformedResponse);
    // and the error carries the request digest
    try {
        mock.complete(req);
    } catch (const MalformedResponse& e) {
        CHECK(e.request_digest == request_digest(req));
    }
}

TEST_CASE("caching gateway returns cached responses without inner calls") {
    auto inner = std::make_shared<MockGateway>(gateway::echo_responder());
    auto cache_file = temp_cache();
    CachingGateway cached(inner, cache_file);

    auto first = cached.complete(simple_request("ping"));
    CHECK(first.cached == false);
    auto second = cached.complete(simple_request("ping"));
    CHECK(second.cached == true);
    CHECK(second.text == first.text);
    CHECK(inner->call_count() == 1);

    // a fresh gateway over the same ledger stays warm
    CachingGateway reloaded(inner, cache_file);
    auto third = reloaded.complete(simple_request("ping"));
    CHECK(third.cached == true);
    CHECK(inner->call_count() == 1);
    std::filesystem::remove(cache_file);
}

TEST_CASE("cache namespaces isolate noise runs") {
    auto inner = std::make_shared<MockGateway>(gateway::echo_responder());
    auto cache_file = temp_cache();
    CachingGateway normal(inner, cache_file);
    normal.complete(simple_request("ping"));
    CHECK(inner->call_count() == 1);

    CachingGateway noise_run(inner, cache_file, "noise-run1");
    auto r = noise_run.complete(simple_request("ping"));
    CHECK(r.cached == false);  // namespace forces a re-sample
    CHECK(inner->call_count() == 2);

    // but the namespace itself caches
    auto again = noise_run.complete(simple_request("ping"));
    CHECK(again.cached == true);
    CHECK(inner->call_count() == 2);
    std::filesystem::remove(cache_file);
}

TEST_CASE("echo responder repeats the last user message") {
    auto echo2 = gateway::echo_responder(2);
    CompletionRequest req;
    req.messages = {user_msg("a"), assistant_msg("b"), user_msg("c")};
    CHECK(echo2(req) == "c c");
}

TEST_CASE("auto responder answers style prompts by length and swaps with order") {
    auto judge = gateway::auto_responder();
    auto ask = [&](const std::string& a, const std::string& b) {
        CompletionRequest req = simple_request(
            "which is closer?\n\n[real message]\nref\n[/real message]\n\n[message A]\n" + a +
            "\n[/message A]\n\n[message B]\n" + b + "\n[/message B]\n");
        return judge(req);
    };
    CHECK(ask("long answer", "hi") == "A");
    CHECK(ask("hi", "long answer") == "B");
    CHECK(ask("same", "samx") == "=");  // equal byte length
}

TEST_CASE("retry policy: transient statuses and exponential backoff") {
    CHECK(gateway::retryable_status(429));
    CHECK(gateway::retryable_status(408));
    CHECK(gateway::retryable_status(500));
    CHECK(gateway::retryable_status(503));
    CHECK(!gateway::retryable_status(200));
    CHECK(!gateway::retryable_status(400));
    CHECK(!gateway::retryable_status(401));
    CHECK(!gateway::retryable_status(404));

    gateway::RetryPolicy policy{5, 100, 350};
    CHECK(gateway::retry_delay_ms(policy, 1) == 0);
    CHECK(gateway::retry_delay_ms(policy, 2) == 100);
    CHECK(gateway::retry_delay_ms(policy, 3) == 200);
    CHECK(gateway::retry_delay_ms(policy, 4) == 350);  // capped
    CHECK(gateway::retry_delay_ms(policy, 5) == 350);
}

TEST_CASE("a missing auth token fails before any network attempt") {
    gateway::EndpointConfig cfg;
    cfg.name = "remote";
    cfg.base_url = "http://127.0.0.1:9";
    cfg.model = "m";
    cfg.auth_env = "MIMIC_TEST_TOKEN_THAT_IS_NOT_SET";
    gateway::HttpGateway gw(cfg);
    auto before = gateway::HttpGateway::network_attempts();
    CHECK_THROWS_AS(gw.complete(simple_request("x")), AuthError);
    CHECK(gateway::HttpGateway::network_attempts() == before);
}

TEST_CASE("make_gateway builds mocks from mock:// urls") {
    gateway::EndpointConfig cfg;
    cfg.name = "m";
    cfg.base_url = "mock://echo?repeat=2";
    auto gw = gateway::make_gateway(cfg);
    CHECK(gw->complete(simple_request("x")).text == "x x");

    cfg.base_url = "mock://nope";
    CHECK_THROWS_AS(gateway::make_gateway(cfg), Error);

    cfg.base_url = "ftp://bad";
    CHECK_THROWS_AS(gateway::make_gateway(cfg), Error);
}

TEST_CASE("parallel_for covers every index and rethrows the first error") {
    std::vector<std::atomic<int>> hits(100);
    gateway::parallel_for(100, 8, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) CHECK(h.load() == 1);

    CHECK_THROWS_AS(gateway::parallel_for(50, 4,
                                          [](std::size_t i) {
                                              if (i == 13) throw Error("boom");
                                          }),
                    Error);
}
