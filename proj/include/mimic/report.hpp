#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mimic/scoreboard.hpp"

namespace mimic::report {

/// Everything a style report needs; rendering is pure so reruns from
/// the same inputs are byte-identical.
struct StylePairData {
    scoreboard::PairScore combined;                 // all runs summed
    std::vector<scoreboard::PairScore> runs;        // per-run counts
    scoreboard::SignificanceVerdict verdict;
};

struct PairNoise {
    std::string model_a;
    std::string model_b;
    scoreboard::NoiseEstimate noise;
};

struct StyleReport {
    std::vector<std::string> models;
    std::vector<StylePairData> pairs;
    scoreboard::Ranking ranking;
    scoreboard::NoiseEstimate noise;
    std::vector<PairNoise> noise_pairs;  // per-pair churn when measured
    double noise_rate = 0.0;  // the rate actually used for thresholds
    double confidence = 0.95;
    std::string judge_model;
    std::string prompt_version;
};

struct FactPairData {
    std::string model_x;
    std::string model_y;
    scoreboard::FactCounts counts_x;
    scoreboard::FactCounts counts_y;
    scoreboard::Metrics metrics_x;
    scoreboard::Metrics metrics_y;
    scoreboard::F1Diff diff;
    bool significant = false;  // diff_pp > threshold
};

struct FactReport {
    std::vector<std::string> models;
    std::vector<FactPairData> pairs;
    scoreboard::Ranking ranking;
    double f1_threshold_pp = 2.0;
    std::string judge_model;
    std::string prompt_version;
};

std::string render_style_markdown(const StyleReport& report);
std::string render_style_csv(const StyleReport& report);
std::string render_style_json(const StyleReport& report);

std::string render_facts_markdown(const FactReport& report);
std::string render_facts_csv(const FactReport& report);
std::string render_facts_json(const FactReport& report);

/// Writes <stem>.md, <stem>.csv and <stem>.json under dir.
void write_style_report(const std::filesystem::path& dir, const StyleReport& report,
                        const std::string& stem = "style_tournament");
void write_fact_report(const std::filesystem::path& dir, const FactReport& report,
                       const std::string& stem = "facts");

// shared numeric formatting ("14.20", "25.7")
std::string pct2(double fraction);
std::string pct1(double fraction);
std::string fixed2(double value);

}  // namespace mimic::report
