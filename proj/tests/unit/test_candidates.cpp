#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mimic/candidates.hpp"
#include "mimic/errors.hpp"

using namespace mimic;
using candidates::AnswerSet;
using candidates::make_style_samples;
using candidates::StyleSample;

namespace {

fragmenter::Fragment fragment(const std::string& id, std::size_t window,
                              std::vector<ChatMessage> messages) {
    fragmenter::Fragment f;
    f.source_id = id;
    f.window_index = window;
    f.messages = std::move(messages);
    return f;
}

}  // namespace

TEST_CASE("make_style_samples hides exactly the final assistant answer") {
    auto samples = make_style_samples(std::vector<fragmenter::Fragment>{
        fragment("d", 0, {user_msg("u1"), assistant_msg("a1"), user_msg("u2"), assistant_msg("a2")}),
        fragment("d", 1, {user_msg("u1"), assistant_msg("a1")}),
    });
    REQUIRE(samples.size() == 2);
    CHECK(samples[0].sample_id == "d#0");
    CHECK(samples[0].context ==
          std::vector<ChatMessage>{user_msg("u1"), assistant_msg("a1"), user_msg("u2")});
    CHECK(samples[0].reference == "a2");
    CHECK(samples[0].context.back().role == Role::user);
    CHECK(samples[1].context == std::vector<ChatMessage>{user_msg("u1")});
    CHECK(samples[1].reference == "a1");
}

TEST_CASE("a 169-fragment split yields exactly 169 samples") {
    std::vector<fragmenter::Fragment> frags;
    for (int i = 0; i < 169; ++i) {
        frags.push_back(fragment("holdout", std::size_t(i),
                                 {user_msg("q" + std::to_string(i)), assistant_msg("a")}));
    }
    CHECK(make_style_samples(frags).size() == 169);
}

TEST_CASE("generate_style_answers echoes through the mock and never leaks the reference") {
    std::vector<StyleSample> samples;
    for (int i = 0; i < 3; ++i) {
        StyleSample s;
        s.sample_id = "s#" + std::to_string(i);
        s.context = {user_msg("question " + std::to_string(i))};
        s.reference = "SECRET_REFERENCE_" + std::to_string(i);
        samples.push_back(std::move(s));
    }
    gateway::MockGateway mock(gateway::echo_responder());
    AnswerSet answers = candidates::generate_style_answers(samples, "cand", mock);

    REQUIRE(answers.answers.size() == 3);
    CHECK(answers.answers.at("s#0") == "question 0");
    CHECK(answers.answers.at("s#2") == "question 2");

    // leak check over every outgoing request
    for (const auto& req : mock.requests()) {
        for (const auto& msg : req.messages) {
            CHECK(msg.content.find("SECRET_REFERENCE") == std::string::npos);
        }
    }
}

TEST_CASE("warm cache rerun issues zero new gateway calls and identical answers") {
    std::vector<StyleSample> samples;
    StyleSample s;
    s.sample_id = "x#0";
    s.context = {user_msg("hello")};
    s.reference = "ref";
    samples.push_back(s);

    auto inner = std::make_shared<gateway::MockGateway>(gateway::echo_responder());
    auto cache_file =
        std::filesystem::temp_directory_path() / "mimic_candidates_cache.jsonl";
    std::filesystem::remove(cache_file);

    gateway::CachingGateway gw1(inner, cache_file);
    AnswerSet first = candidates::generate_style_answers(samples, "cand", gw1);
    std::size_t calls_after_first = inner->call_count();

    gateway::CachingGateway gw2(inner, cache_file);
    AnswerSet second = candidates::generate_style_answers(samples, "cand", gw2);
    CHECK(inner->call_count() == calls_after_first);
    CHECK(second.answers == first.answers);
    CHECK(second.request_digests == first.request_digests);
    std::filesystem::remove(cache_file);
}

TEST_CASE("generate_fact_answers sends each question as a single user message") {
    factqa::FactDataset facts;
    facts.records.push_back({1, "f", "s", "What did X announce?", "a"});
    gateway::MockGateway mock(gateway::echo_responder());
    AnswerSet answers = candidates::generate_fact_answers(facts, "cand", mock);

    REQUIRE(answers.answers.size() == 1);
    CHECK(answers.answers.at("fact-0001") == "What did X announce?");
    auto requests = mock.requests();
    REQUIRE(requests.size() == 1);
    const auto& req = requests[0];
    REQUIRE(req.messages.size() == 1);
    CHECK(req.messages[0].role == Role::user);
    CHECK(req.messages[0].content == "What did X announce?");
}

TEST_CASE("answers jsonl round-trips sorted by sample id") {
    AnswerSet set;
    set.model_name = "m";
    set.answers = {{"b#1", "two"}, {"a#0", "one"}};
    set.request_digests = {{"b#1", "d2"}, {"a#0", "d1"}};
    auto path = std::filesystem::temp_directory_path() / "mimic_answers.jsonl";
    candidates::save_answers(path, set);

    AnswerSet loaded = candidates::load_answers(path, "m");
    CHECK(loaded.answers == set.answers);
    CHECK(loaded.request_digests == set.request_digests);

    std::string text;
    {
        std::ifstream in(path);
        std::getline(in, text);
    }
    CHECK(text.find("a#0") != std::string::npos);  // sorted: a#0 first
    std::filesystem::remove(path);
}

TEST_CASE("generation failures surface as a gateway error naming the count") {
    std::vector<StyleSample> samples;
    StyleSample s;
    s.sample_id = "x#0";
    s.context = {user_msg("hello")};
    s.reference = "ref";
    samples.push_back(s);

    gateway::MockGateway flaky([](const gateway::CompletionRequest& req) -> std::string {
        throw TransportError("synthetic outage", gateway::request_digest(req));
    });
    CHECK_THROWS_WITH_AS(candidates::generate_style_answers(samples, "cand", flaky),
                         doctest::Contains("1 of 1"), TransportError);
}
