#include <doctest.h>

#include <random>

#include "mimic/corpus.hpp"
#include "mimic/errors.hpp"
#include "mimic/fragmenter.hpp"
#include "mimic/io.hpp"

using namespace mimic;
using fragmenter::build_fragments;
using fragmenter::enumerate_subdialogs;
using fragmenter::Fragment;
using fragmenter::parse_chat;
using fragmenter::serialize_chat;

namespace {

Dialog alternating_dialog(const std::string& id, std::size_t pairs) {
    Dialog d;
    d.id = id;
    for (std::size_t i = 0; i < pairs; ++i) {
        d.messages.push_back(user_msg("q" + std::to_string(i)));
        d.messages.push_back(assistant_msg("a" + std::to_string(i)));
    }
    return d;
}

}  // namespace

TEST_CASE("enumerate_subdialogs pairs up messages in order") {
    CHECK(enumerate_subdialogs(alternating_dialog("d", 3)).size() == 3);
    CHECK(enumerate_subdialogs(alternating_dialog("d", 1)).size() == 1);

    Dialog ten = alternating_dialog("d", 5);
    auto subs = enumerate_subdialogs(ten);
    REQUIRE(subs.size() == 5);
    CHECK(subs[0].user_msg == ten.messages[0]);
    CHECK(subs[0].assistant_msg == ten.messages[1]);
}

TEST_CASE("build_fragments M=5 N=2 emits 4 window suffixes") {
    Dialog d = alternating_dialog("five", 5);
    auto subs = enumerate_subdialogs(d);
    auto frags = build_fragments(d, 2, 123);
    REQUIRE(frags.size() == 4);  // M - N + 1
    for (std::size_t w = 0; w < frags.size(); ++w) {
        const Fragment& f = frags[w];
        CHECK(f.window_index == w);
        std::size_t k = f.n_subdialogs();
        CHECK(k >= 1);
        CHECK(k <= 2);
        // fragment must be the last k sub-dialogs of window [w, w+2)
        for (std::size_t i = 0; i < k; ++i) {
            const auto& sub = subs[w + 2 - k + i];
            CHECK(f.messages[2 * i] == sub.user_msg);
            CHECK(f.messages[2 * i + 1] == sub.assistant_msg);
        }
        CHECK(f.messages.back().role == Role::assistant);
    }
}

TEST_CASE("build_fragments clamps the window for short dialogs") {
    Dialog d = alternating_dialog("short", 3);
    auto frags = build_fragments(d, 8, 7);
    REQUIRE(frags.size() == 1);
    CHECK(frags[0].n_subdialogs() >= 1);
    CHECK(frags[0].n_subdialogs() <= 3);
}

TEST_CASE("build_fragments N=1 degenerates to one fragment per sub-dialog") {
    Dialog d = alternating_dialog("ones", 6);
    auto frags = build_fragments(d, 1, 1);
    REQUIRE(frags.size() == 6);
    for (const auto& f : frags) CHECK(f.n_subdialogs() == 1);
}

TEST_CASE("build_fragments rejects empty dialogs") {
    Dialog d;
    d.id = "empty";
    CHECK_THROWS_AS(build_fragments(d, 4, 42), EmptyDialog);
}

TEST_CASE("fragment laws over random sizes (property)") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 400; ++trial) {
        std::size_t m = 1 + rng() % 50;
        std::size_t n = 1 + rng() % 8;
        Dialog d = alternating_dialog("p" + std::to_string(trial), m);
        auto frags = build_fragments(d, n, 4242);
        std::size_t expected = m >= n ? m - n + 1 : 1;
        CHECK(frags.size() == expected);
        for (const auto& f : frags) {
            CHECK(f.n_subdialogs() >= 1);
            CHECK(f.n_subdialogs() <= std::min(n, m));
            CHECK(f.messages.front().role == Role::user);
            CHECK(f.messages.back().role == Role::assistant);
        }
    }
}

TEST_CASE("build_fragments is deterministic for fixed (dialog, window, seed)") {
    Dialog d = alternating_dialog("det", 17);
    auto a = build_fragments(d, 4, 42);
    auto b = build_fragments(d, 4, 42);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(serialize_chat(a[i]) == serialize_chat(b[i]));
    }
    // a different seed changes at least one trim on a dialog this long
    auto c = build_fragments(d, 4, 43);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        any_diff |= serialize_chat(a[i]) != serialize_chat(c[i]);
    }
    CHECK(any_diff);
}

TEST_CASE("serialize_chat emits role,content key order") {
    Fragment f;
    f.source_id = "s";
    f.messages = {user_msg("Q"), assistant_msg("A")};
    CHECK(serialize_chat(f) ==
          R"([{"role":"user","content":"Q"},{"role":"assistant","content":"A"}])");
}

TEST_CASE("serialize_chat escapes quotes and newlines") {
    Fragment f;
    f.messages = {user_msg("say \"hi\"\nplease"), assistant_msg("ok")};
    std::string s = serialize_chat(f);
    CHECK(s.find("say \\\"hi\\\"\\nplease") != std::string::npos);
    CHECK(parse_chat(s) == f.messages);
}

TEST_CASE("parse_chat round-trips random fragments (property)") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        Fragment f;
        std::size_t pairs = 1 + rng() % 5;
        for (std::size_t i = 0; i < pairs; ++i) {
            std::string punct(1, char(' ' + rng() % 94));
            f.messages.push_back(user_msg("q" + std::to_string(rng()) + punct));
            f.messages.push_back(assistant_msg("a\n" + std::to_string(rng())));
        }
        CHECK(parse_chat(serialize_chat(f)) == f.messages);
    }
}

TEST_CASE("split_corpus routes dialogs by tag") {
    Dialog train = alternating_dialog("a", 6);
    train.tags = {Tag::train};
    Dialog style = alternating_dialog("_b", 5);
    style.tags = {Tag::style_test};
    Dialog facts = alternating_dialog("c_2023", 3);
    facts.tags = {Tag::fact_source};

    fragmenter::SplitOptions options;
    options.window = 2;
    options.seed = 9;
    auto split = fragmenter::split_corpus({train, style, facts}, options);
    CHECK(split.train.size() == 5);       // 6 - 2 + 1
    CHECK(split.style_test.size() == 4);  // 5 - 2 + 1
    REQUIRE(split.fact_source.size() == 1);
    CHECK(split.fact_source[0].id == "c_2023");
    CHECK(split.warnings.empty());

    for (const auto& f : split.train) CHECK(f.source_id == "a");
    for (const auto& f : split.style_test) CHECK(f.source_id == "_b");
}

TEST_CASE("split_corpus warns on empty buckets instead of failing") {
    Dialog train = alternating_dialog("only", 4);
    train.tags = {Tag::train};
    auto split = fragmenter::split_corpus({train}, {});
    CHECK(!split.train.empty());
    CHECK(split.style_test.empty());
    REQUIRE(split.warnings.size() == 2);
    CHECK(split.warnings[0] == "style_test split is empty");
    CHECK(split.warnings[1] == "fact_source split is empty");
}

TEST_CASE("split_corpus rejects a dialog tagged both train and style_test") {
    Dialog both = alternating_dialog("both", 4);
    both.tags = {Tag::train, Tag::style_test};
    CHECK_THROWS_WITH_AS(fragmenter::split_corpus({both}, {}), doctest::Contains("both"), Error);
}

TEST_CASE("split_corpus honors the style test limit") {
    Dialog style = alternating_dialog("_s", 10);
    style.tags = {Tag::style_test};
    fragmenter::SplitOptions options;
    options.window = 2;
    options.style_test_limit = 3;
    auto split = fragmenter::split_corpus({style}, options);
    CHECK(split.style_test.size() == 3);
}

TEST_CASE("fixture corpus yields the hand-counted fragment totals") {
    corpus::TranscriptManifest manifest =
        corpus::TranscriptManifest::load(std::filesystem::path(FIXTURES_DIR) / "manifest.json");
    auto dialogs = corpus::load_corpus(manifest, FIXTURES_DIR);
    REQUIRE(dialogs.size() == 4);
    // sub-dialog counts straight off the fixture files
    CHECK(enumerate_subdialogs(dialogs[0]).size() == 6);  // voyager_day
    CHECK(enumerate_subdialogs(dialogs[1]).size() == 4);  // panel_roundtable
    CHECK(enumerate_subdialogs(dialogs[2]).size() == 8);  // _style_holdout
    CHECK(enumerate_subdialogs(dialogs[3]).size() == 4);  // mission_2023

    fragmenter::SplitOptions options;
    options.window = 4;
    options.seed = 42;
    auto split = fragmenter::split_corpus(dialogs, options);
    CHECK(split.train.size() == 4);       // (6-4+1) + (4-4+1)
    CHECK(split.style_test.size() == 5);  // 8-4+1
    CHECK(split.fact_source.size() == 1);

    // byte-identical re-run
    auto again = fragmenter::split_corpus(dialogs, options);
    REQUIRE(again.style_test.size() == split.style_test.size());
    for (std::size_t i = 0; i < split.style_test.size(); ++i) {
        CHECK(serialize_chat(split.style_test[i]) == serialize_chat(again.style_test[i]));
    }
}

TEST_CASE("fragment jsonl round-trips") {
    Dialog d = alternating_dialog("io", 5);
    auto frags = build_fragments(d, 3, 7);
    auto path = std::filesystem::temp_directory_path() / "mimic_test_fragments.jsonl";
    fragmenter::write_fragments_jsonl(path, frags);
    auto loaded = fragmenter::read_fragments_jsonl(path);
    REQUIRE(loaded.size() == frags.size());
    for (std::size_t i = 0; i < frags.size(); ++i) {
        CHECK(loaded[i] == frags[i]);
    }
    std::filesystem::remove(path);
}
