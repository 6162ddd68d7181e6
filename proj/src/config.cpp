#include "mimic/config.hpp"

#include <set>

#include <json.hpp>

#include "mimic/digest.hpp"
#include "mimic/errors.hpp"
#include "mimic/io.hpp"

namespace mimic::config {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (known.count(it.key()) == 0) {
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
        }
    }
}

}  // namespace

ProjectConfig ProjectConfig::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown(doc, {"paths", "endpoints", "judge", "dataset", "confidence"}, "config root");

    ProjectConfig cfg;
    if (doc.contains("paths")) {
        const json& p = doc["paths"];
        reject_unknown(p, {"data", "answers", "judgements", "reports", "cache"}, "paths");
        cfg.paths.data = p.value("data", cfg.paths.data);
        cfg.paths.answers = p.value("answers", cfg.paths.answers);
        cfg.paths.judgements = p.value("judgements", cfg.paths.judgements);
        cfg.paths.reports = p.value("reports", cfg.paths.reports);
        cfg.paths.cache = p.value("cache", cfg.paths.cache);
    }
    if (doc.contains("endpoints")) {
        if (!doc["endpoints"].is_object()) throw ConfigError("endpoints must be an object");
        for (auto it = doc["endpoints"].begin(); it != doc["endpoints"].end(); ++it) {
            const json& e = it.value();
            reject_unknown(e, {"base_url", "model", "auth_env", "system_prompt"},
                           "endpoint \"" + it.key() + "\"");
            gateway::EndpointConfig endpoint;
            endpoint.name = it.key();
            if (!e.contains("base_url")) {
                throw ConfigError("endpoint \"" + it.key() + "\" needs base_url");
            }
            endpoint.base_url = e["base_url"].get<std::string>();
            endpoint.model = e.value("model", "");
            endpoint.auth_env = e.value("auth_env", "");
            endpoint.system_prompt = e.value("system_prompt", "");
            cfg.endpoints[it.key()] = std::move(endpoint);
        }
    }
    if (doc.contains("judge")) {
        const json& e = doc["judge"];
        reject_unknown(e,
                       {"endpoint", "temperature", "retries", "concurrency", "max_tokens",
                        "noise_rate", "fact_f1_threshold_pp"},
                       "judge");
        cfg.judge.endpoint = e.value("endpoint", cfg.judge.endpoint);
        cfg.judge.temperature = e.value("temperature", cfg.judge.temperature);
        cfg.judge.retries = e.value("retries", cfg.judge.retries);
        cfg.judge.concurrency = e.value("concurrency", cfg.judge.concurrency);
        cfg.judge.max_tokens = e.value("max_tokens", cfg.judge.max_tokens);
        cfg.judge.noise_rate = e.value("noise_rate", cfg.judge.noise_rate);
        cfg.judge.fact_f1_threshold_pp =
            e.value("fact_f1_threshold_pp", cfg.judge.fact_f1_threshold_pp);
    }
    if (doc.contains("dataset")) {
        const json& e = doc["dataset"];
        reject_unknown(e,
                       {"window", "seed", "style_prefix", "fact_substring", "style_test_limit",
                        "artifact_patterns"},
                       "dataset");
        cfg.dataset.window = e.value("window", cfg.dataset.window);
        cfg.dataset.seed = e.value("seed", cfg.dataset.seed);
        cfg.dataset.style_prefix = e.value("style_prefix", cfg.dataset.style_prefix);
        cfg.dataset.fact_substring = e.value("fact_substring", cfg.dataset.fact_substring);
        cfg.dataset.style_test_limit = e.value("style_test_limit", cfg.dataset.style_test_limit);
        for (const auto& p : e.value("artifact_patterns", json::array())) {
            cfg.dataset.artifact_patterns.push_back(p.get<std::string>());
        }
    }
    cfg.confidence = doc.value("confidence", cfg.confidence);
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) {
        throw ConfigError("confidence must be in (0,1)");
    }
    if (cfg.dataset.window < 1 || cfg.dataset.window > 8) {
        throw ConfigError("dataset.window must be in [1,8]");
    }
    return cfg;
}

ProjectConfig ProjectConfig::load(const std::filesystem::path& file) {
    try {
        return from_json_text(io::read_file(file));
    } catch (const ConfigError& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }
}

std::string ProjectConfig::to_json_text() const {
    ordered_json doc;
    doc["paths"] = {{"data", paths.data},
                    {"answers", paths.answers},
                    {"judgements", paths.judgements},
                    {"reports", paths.reports},
                    {"cache", paths.cache}};
    ordered_json eps = ordered_json::object();
    for (const auto& [name, e] : endpoints) {
        eps[name] = {{"base_url", e.base_url},
                     {"model", e.model},
                     {"auth_env", e.auth_env},
                     {"system_prompt", e.system_prompt}};
    }
    doc["endpoints"] = eps;
    doc["judge"] = {{"endpoint", judge.endpoint},
                    {"temperature", judge.temperature},
                    {"retries", judge.retries},
                    {"concurrency", judge.concurrency},
                    {"max_tokens", judge.max_tokens},
                    {"noise_rate", judge.noise_rate},
                    {"fact_f1_threshold_pp", judge.fact_f1_threshold_pp}};
    doc["dataset"] = {{"window", dataset.window},
                      {"seed", dataset.seed},
                      {"style_prefix", dataset.style_prefix},
                      {"fact_substring", dataset.fact_substring},
                      {"style_test_limit", dataset.style_test_limit},
                      {"artifact_patterns", dataset.artifact_patterns}};
    doc["confidence"] = confidence;
    return doc.dump(2) + "\n";
}

void ProjectConfig::save(const std::filesystem::path& file) const {
    io::write_file(file, to_json_text());
}

std::string ProjectConfig::digest() const { return sha256_hex(to_json_text()); }

const gateway::EndpointConfig& ProjectConfig::endpoint(const std::string& name) const {
    auto it = endpoints.find(name);
    if (it == endpoints.end()) {
        throw ConfigError("no endpoint named \"" + name + "\" in config");
    }
    return it->second;
}

bool ProjectConfig::operator==(const ProjectConfig& other) const {
    return to_json_text() == other.to_json_text();
}

}  // namespace mimic::config
