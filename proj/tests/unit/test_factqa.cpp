#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <random>

#include "mimic/errors.hpp"
#include "mimic/factqa.hpp"
#include "mimic/io.hpp"

using namespace mimic;
using factqa::FactDataset;
using factqa::FactRecord;

namespace {

Dialog fact_dialog() {
    Dialog d;
    d.id = "mission_2023";
    d.tags = {Tag::fact_source};
    d.messages = {user_msg("What happened this year?"),
                  assistant_msg("We mapped the shelf at four hundred meters. The survey took "
                                "nine days.")};
    return d;
}

FactDataset small_dataset() {
    FactDataset ds;
    ds.source_dialog_ids = {"mission_2023"};
    ds.records.push_back({1, "The shelf was mapped at 400 m.",
                          "We mapped the shelf at four hundred meters.",
                          "At what depth was the shelf mapped?", "At four hundred meters."});
    ds.records.push_back({2, "The survey took nine days.", "The survey took nine days.",
                          "How long did the survey take?", "Nine days."});
    return ds;
}

std::filesystem::path temp_file(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove(p);
    return p;
}

}  // namespace

TEST_CASE("csv save/load round-trips byte-identically") {
    FactDataset ds = small_dataset();
    // exercise RFC 4180 quoting: commas, quotes, newlines
    ds.records.push_back({3, "Says \"hello\", twice.", "line one\nline two", "why, though?",
                          "because, \"reasons\""});
    auto p1 = temp_file("mimic_facts_1.csv");
    auto p2 = temp_file("mimic_facts_2.csv");
    factqa::save_csv(p1, ds);
    FactDataset loaded = factqa::load_csv(p1);
    REQUIRE(loaded.records.size() == ds.records.size());
    CHECK(loaded.records == ds.records);
    factqa::save_csv(p2, loaded);
    CHECK(io::read_file(p1) == io::read_file(p2));
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("csv round-trips arbitrary field content (property)") {
    std::mt19937 rng(31);
    const std::string charset = "ab,\"\n'; :.x";
    auto random_field = [&]() {
        std::string s;
        std::size_t n = 1 + rng() % 12;
        for (std::size_t i = 0; i < n; ++i) s.push_back(charset[rng() % charset.size()]);
        return s;
    };
    for (int trial = 0; trial < 100; ++trial) {
        FactDataset ds;
        int n = 1 + int(rng() % 5);
        for (int i = 1; i <= n; ++i) {
            ds.records.push_back({i, random_field(), random_field(), random_field(),
                                  random_field()});
        }
        auto p = temp_file("mimic_facts_prop.csv");
        factqa::save_csv(p, ds);
        FactDataset loaded = factqa::load_csv(p);
        CHECK(loaded.records == ds.records);
        std::filesystem::remove(p);
    }
}

TEST_CASE("csv load rejects a wrong header") {
    auto p = temp_file("mimic_facts_bad.csv");
    io::write_file(p, "id,fact,question,answer\n");
    CHECK_THROWS_WITH_AS(factqa::load_csv(p), doctest::Contains("header"), Error);
    std::filesystem::remove(p);
}

TEST_CASE("json save/load round-trips") {
    FactDataset ds = small_dataset();
    auto p = temp_file("mimic_facts.json");
    factqa::save_json(p, ds);
    FactDataset loaded = factqa::load_json(p);
    CHECK(loaded.records == ds.records);
    CHECK(loaded.source_dialog_ids == ds.source_dialog_ids);
    std::filesystem::remove(p);
}

TEST_CASE("validate_dataset passes a well-formed fixture") {
    auto report = factqa::validate_dataset(small_dataset(), {fact_dialog()});
    CHECK(report.pass());
    CHECK(report.records_checked == 2);
}

TEST_CASE("validate_dataset flags duplicate ids") {
    FactDataset ds = small_dataset();
    ds.records[1].id = 1;
    auto report = factqa::validate_dataset(ds, {fact_dialog()});
    CHECK(!report.pass());
    bool found = false;
    for (const auto& issue : report.issues) {
        found |= issue.code == "DuplicateId" && issue.record_id == 1;
    }
    CHECK(found);
}

TEST_CASE("validate_dataset flags empty fields") {
    FactDataset ds = small_dataset();
    ds.records[0].answer.clear();
    auto report = factqa::validate_dataset(ds, {fact_dialog()});
    CHECK(!report.pass());
    bool found = false;
    for (const auto& issue : report.issues) {
        found |= issue.code == "EmptyField" && issue.detail == "answer";
    }
    CHECK(found);
}

TEST_CASE("validate_dataset flags src not present in the source dialogs") {
    FactDataset ds = small_dataset();
    ds.records[0].src = "never said this";
    auto report = factqa::validate_dataset(ds, {fact_dialog()});
    CHECK(!report.pass());
    bool found = false;
    for (const auto& issue : report.issues) found |= issue.code == "SrcNotFound";
    CHECK(found);
}

TEST_CASE("extract_facts accepts a scripted three-record reply") {
    gateway::MockGateway mock([](const gateway::CompletionRequest&) {
        return R"([
          {"fact":"f1","src":"We mapped the shelf at four hundred meters.","question":"q1","answer":"a1"},
          {"fact":"f2","src":"The survey took nine days.","question":"q2","answer":"a2"},
          {"fact":"f3","src":"What happened this year?","question":"q3","answer":"a3"}
        ])";
    });
    auto result = factqa::extract_facts(fact_dialog(), mock);
    CHECK(result.accepted.size() == 3);
    CHECK(result.flagged.empty());
    CHECK(result.accepted[0].id == 1);
    CHECK(result.accepted[2].id == 3);
}

TEST_CASE("extract_facts flags records whose src is not a substring") {
    gateway::MockGateway mock([](const gateway::CompletionRequest&) {
        return R"([
          {"fact":"f1","src":"We mapped the shelf at four hundred meters.","question":"q1","answer":"a1"},
          {"fact":"f2","src":"this text never appears","question":"q2","answer":"a2"},
          {"fact":"f3","src":"The survey took nine days.","question":"q3","answer":"a3"}
        ])";
    });
    auto result = factqa::extract_facts(fact_dialog(), mock);
    CHECK(result.accepted.size() == 2);
    REQUIRE(result.flagged.size() == 1);
    CHECK(result.flagged[0].fact == "f2");
}

TEST_CASE("extract_facts retries then fails on persistent garbage") {
    std::atomic<int> calls{0};
    gateway::MockGateway mock([&calls](const gateway::CompletionRequest&) {
        calls.fetch_add(1);
        return R"({"not":"an array"})";
    });
    CHECK_THROWS_AS(factqa::extract_facts(fact_dialog(), mock, 3), ExtractionFormatError);
    CHECK(calls.load() == 3);
}

TEST_CASE("extraction prompt embeds the dialog and requests the four fields") {
    std::string prompt = factqa::build_extraction_prompt(fact_dialog());
    CHECK(prompt.find("[interview]\n") != std::string::npos);
    CHECK(prompt.find("We mapped the shelf") != std::string::npos);
    for (const char* field : {"\"fact\"", "\"src\"", "\"question\"", "\"answer\""}) {
        CHECK(prompt.find(field) != std::string::npos);
    }
}
