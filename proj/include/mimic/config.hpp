#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mimic/llm_gateway.hpp"

namespace mimic::config {

struct PathsConfig {
    std::string data = "data";
    std::string answers = "answers";
    std::string judgements = "judgements";
    std::string reports = "reports";
    std::string cache = "cache";
};

struct JudgeConfig {
    std::string endpoint = "judge";  // key into the endpoints map
    double temperature = 0.0;
    int retries = 3;
    int concurrency = 4;
    int max_tokens = 2048;
    double noise_rate = 0.0139;      // fallback when no noise run exists
    double fact_f1_threshold_pp = 2.0;
};

struct DatasetConfig {
    std::size_t window = 4;
    std::uint64_t seed = 42;
    std::string style_prefix = "_";
    std::string fact_substring = "2023";
    std::size_t style_test_limit = 0;            // 0 = unlimited
    std::vector<std::string> artifact_patterns;  // extra strip regexes
};

/// Whole-project configuration. Loading is strict: an unknown key at
/// any level fails with an error naming it, and load(save(x)) == x.
struct ProjectConfig {
    PathsConfig paths;
    std::map<std::string, gateway::EndpointConfig> endpoints;
    JudgeConfig judge;
    DatasetConfig dataset;
    double confidence = 0.95;

    static ProjectConfig load(const std::filesystem::path& file);
    static ProjectConfig from_json_text(const std::string& text);
    void save(const std::filesystem::path& file) const;
    std::string to_json_text() const;

    /// SHA-256 of the canonical serialized form, stamped into run manifests.
    std::string digest() const;

    const gateway::EndpointConfig& endpoint(const std::string& name) const;

    bool operator==(const ProjectConfig&) const;
};

}  // namespace mimic::config
