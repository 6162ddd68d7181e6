#include "mimic/cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mimic/candidates.hpp"
#include "mimic/config.hpp"
#include "mimic/corpus.hpp"
#include "mimic/digest.hpp"
#include "mimic/errors.hpp"
#include "mimic/factqa.hpp"
#include "mimic/fragmenter.hpp"
#include "mimic/io.hpp"
#include "mimic/judge.hpp"
#include "mimic/llm_gateway.hpp"
#include "mimic/report.hpp"
#include "mimic/scoreboard.hpp"

namespace mimic::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitGateway = 2;

struct GlobalOptions {
    std::string config_path = "mimic-eval.json";
    bool config_explicit = false;
    int concurrency = 0;  // 0 = use config
};

config::ProjectConfig load_config(const GlobalOptions& global) {
    if (fs::exists(global.config_path)) {
        return config::ProjectConfig::load(global.config_path);
    }
    if (global.config_explicit) {
        throw ConfigError("config file not found: " + global.config_path);
    }
    return {};  // defaults
}

std::string sanitize_for_path(std::string name) {
    for (char& c : name) {
        if (c == '/' || c == '\\' || c == ':') c = '-';
    }
    return name;
}

std::string pair_stem(const std::string& a, const std::string& b) {
    return sanitize_for_path(a) + "_vs_" + sanitize_for_path(b);
}

// run manifests make every artifact auditable: config hash, prompt
// versions, and a digest of every input that fed the run
void write_run_manifest(const fs::path& dir, const std::string& command,
                        const config::ProjectConfig& cfg,
                        const std::map<std::string, std::string>& input_digests) {
    ordered_json doc;
    doc["command"] = command;
    doc["config_digest"] = cfg.digest();
    doc["prompt_versions"] = {{"style", judge::style_prompt_version()},
                              {"facts", judge::fact_prompt_version()},
                              {"extraction", factqa::extraction_prompt_version()}};
    ordered_json inputs = ordered_json::object();
    for (const auto& [path, digest] : input_digests) inputs[path] = digest;
    doc["inputs"] = inputs;
    io::write_file(dir / ("run_manifest_" + sanitize_for_path(command) + ".json"),
                   doc.dump(2) + "\n");
}

std::string file_digest(const fs::path& path) { return sha256_hex(io::read_file(path)); }

std::shared_ptr<gateway::ChatGateway> cached_gateway(const config::ProjectConfig& cfg,
                                                     const std::string& endpoint_name,
                                                     const std::string& run_namespace = "") {
    auto inner = gateway::make_gateway(cfg.endpoint(endpoint_name));
    fs::path cache_file = fs::path(cfg.paths.cache) / "llm_cache.jsonl";
    return std::make_shared<gateway::CachingGateway>(inner, cache_file, run_namespace);
}

std::vector<candidates::StyleSample> load_style_samples(const config::ProjectConfig& cfg) {
    fs::path samples_path = fs::path(cfg.paths.data) / "style_test.jsonl";
    if (!fs::exists(samples_path)) {
        throw Error("no style test set at " + samples_path.string() + "; run prepare-chat first");
    }
    return candidates::make_style_samples(fragmenter::read_fragments_jsonl(samples_path));
}

factqa::FactDataset load_fact_dataset(const config::ProjectConfig& cfg, const std::string& facts_arg) {
    fs::path facts_path = facts_arg.empty() ? fs::path(cfg.paths.data) / "facts.csv"
                                            : fs::path(facts_arg);
    if (!fs::exists(facts_path)) {
        throw Error("no fact dataset at " + facts_path.string() + "; run prepare-facts first");
    }
    return factqa::load_csv(facts_path);
}

// --a/--b accept an endpoint/model name or a path like answers/base
std::pair<std::string, fs::path> resolve_answers(const config::ProjectConfig& cfg,
                                                 const std::string& arg,
                                                 const std::string& task) {
    fs::path as_path(arg);
    if (arg.find('/') != std::string::npos || fs::is_directory(as_path)) {
        return {as_path.filename().string(), as_path / (task + ".jsonl")};
    }
    return {arg, fs::path(cfg.paths.answers) / sanitize_for_path(arg) / (task + ".jsonl")};
}

int effective_concurrency(const GlobalOptions& global, const config::ProjectConfig& cfg) {
    return global.concurrency > 0 ? global.concurrency : cfg.judge.concurrency;
}

// ---- subcommand bodies -----------------------------------------------------

int cmd_prepare_chat(const GlobalOptions& global, const std::string& manifest_path,
                     std::size_t window, std::uint64_t seed, const std::string& out_dir,
                     std::size_t style_limit) {
    config::ProjectConfig cfg = load_config(global);
    if (window == 0) window = cfg.dataset.window;
    corpus::TagRules tag_rules{cfg.dataset.style_prefix, cfg.dataset.fact_substring};
    corpus::ArtifactRules artifact_rules = corpus::ArtifactRules::defaults();
    artifact_rules.extra_patterns = cfg.dataset.artifact_patterns;

    corpus::TranscriptManifest manifest = corpus::TranscriptManifest::load(manifest_path);
    fs::path base_dir = fs::path(manifest_path).parent_path();
    std::vector<Dialog> dialogs = corpus::load_corpus(manifest, base_dir, tag_rules, artifact_rules);

    fragmenter::SplitOptions options;
    options.window = window;
    options.seed = seed;
    options.style_test_limit = style_limit > 0 ? style_limit : cfg.dataset.style_test_limit;
    fragmenter::CorpusSplit split = fragmenter::split_corpus(dialogs, options);

    for (const std::string& warning : split.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }

    fs::path out(out_dir);
    fragmenter::write_fragments_jsonl(out / "train.jsonl", split.train);
    fragmenter::write_fragments_jsonl(out / "style_test.jsonl", split.style_test);
    fs::create_directories(out / "fact_source");
    for (const Dialog& dialog : split.fact_source) {
        fragmenter::write_dialog_json(out / "fact_source" / (dialog.id + ".json"), dialog);
    }

    std::map<std::string, std::string> inputs;
    inputs[manifest_path] = file_digest(manifest_path);
    for (const auto& entry : manifest.entries) {
        fs::path p = base_dir / entry.path;
        inputs[p.string()] = file_digest(p);
    }
    write_run_manifest(out, "prepare-chat", cfg, inputs);

    std::cout << "train: " << split.train.size() << " fragments\n"
              << "style_test: " << split.style_test.size() << " fragments\n"
              << "fact_source: " << split.fact_source.size() << " dialogs\n";
    return kExitOk;
}

int cmd_prepare_facts(const GlobalOptions& global, const std::string& source_dir,
                      const std::string& out_path, const std::string& endpoint_name) {
    config::ProjectConfig cfg = load_config(global);
    std::string endpoint = endpoint_name.empty() ? cfg.judge.endpoint : endpoint_name;

    std::vector<fs::path> dialog_files;
    for (const auto& entry : fs::directory_iterator(source_dir)) {
        if (entry.path().extension() == ".json") dialog_files.push_back(entry.path());
    }
    std::sort(dialog_files.begin(), dialog_files.end());
    if (dialog_files.empty()) {
        throw Error("no fact-source dialogs (*.json) in " + source_dir);
    }

    auto gw = cached_gateway(cfg, endpoint);
    factqa::FactDataset dataset;
    std::vector<factqa::FactRecord> flagged;
    std::vector<Dialog> dialogs;
    int next_id = 1;
    for (const fs::path& file : dialog_files) {
        Dialog dialog = fragmenter::read_dialog_json(file);
        factqa::ExtractedFacts extracted = factqa::extract_facts(dialog, *gw, cfg.judge.retries);
        for (factqa::FactRecord& rec : extracted.accepted) {
            rec.id = next_id++;
            dataset.records.push_back(std::move(rec));
        }
        for (factqa::FactRecord& rec : extracted.flagged) flagged.push_back(std::move(rec));
        dataset.source_dialog_ids.push_back(dialog.id);
        dialogs.push_back(std::move(dialog));
    }

    factqa::ValidationReport validation = factqa::validate_dataset(dataset, dialogs);
    for (const auto& issue : validation.issues) {
        std::cerr << "validation: record " << issue.record_id << " " << issue.code << " ("
                  << issue.detail << ")\n";
    }

    fs::path out(out_path);
    factqa::save_csv(out, dataset);
    fs::path json_out = out;
    json_out.replace_extension(".json");
    factqa::save_json(json_out, dataset);
    if (!flagged.empty()) {
        fs::path flagged_out = out;
        flagged_out.replace_extension();
        flagged_out += "_flagged.csv";
        factqa::FactDataset flagged_ds;
        flagged_ds.records = flagged;
        factqa::save_csv(flagged_out, flagged_ds);
        std::cerr << "warning: " << flagged.size()
                  << " record(s) failed the src check, see " << flagged_out.string() << "\n";
    }

    std::map<std::string, std::string> inputs;
    for (const fs::path& file : dialog_files) inputs[file.string()] = file_digest(file);
    fs::path manifest_dir = out.parent_path();
    if (manifest_dir.empty()) manifest_dir = ".";
    write_run_manifest(manifest_dir, "prepare-facts", cfg, inputs);

    std::cout << "extracted " << dataset.records.size() << " facts into " << out.string()
              << " (validation " << (validation.pass() ? "pass" : "FAIL")
              << "; review before judging)\n";
    return validation.pass() ? kExitOk : kExitValidation;
}

int cmd_generate(const GlobalOptions& global, const std::string& model, const std::string& task,
                 const std::string& out_dir, const std::string& facts_arg, bool dry_run) {
    config::ProjectConfig cfg = load_config(global);

    std::vector<candidates::StyleSample> samples;
    factqa::FactDataset facts;
    std::size_t n_items = 0;
    std::map<std::string, std::string> inputs;
    if (task == "style") {
        samples = load_style_samples(cfg);
        n_items = samples.size();
        fs::path p = fs::path(cfg.paths.data) / "style_test.jsonl";
        inputs[p.string()] = file_digest(p);
    } else {
        facts = load_fact_dataset(cfg, facts_arg);
        n_items = facts.records.size();
    }

    if (dry_run) {
        std::cout << "planned requests: " << n_items << "\n";
        return kExitOk;
    }

    auto gw = cached_gateway(cfg, model);
    candidates::GenParams params;
    params.concurrency = effective_concurrency(global, cfg);
    params.system_prompt = cfg.endpoint(model).system_prompt;
    candidates::AnswerSet answers =
        task == "style" ? candidates::generate_style_answers(samples, model, *gw, params)
                        : candidates::generate_fact_answers(facts, model, *gw, params);

    fs::path out = out_dir.empty() ? fs::path(cfg.paths.answers) : fs::path(out_dir);
    fs::path answers_path = out / sanitize_for_path(model) / (task + ".jsonl");
    candidates::save_answers(answers_path, answers);
    write_run_manifest(answers_path.parent_path(), "generate-" + task + "-" + model, cfg, inputs);

    std::cout << "wrote " << answers.answers.size() << " answers to " << answers_path.string()
              << "\n";
    return kExitOk;
}

judge::JudgeOptions judge_options(const GlobalOptions& global, const config::ProjectConfig& cfg) {
    judge::JudgeOptions options;
    options.max_retries = cfg.judge.retries;
    options.concurrency = effective_concurrency(global, cfg);
    options.temperature = cfg.judge.temperature;
    options.max_tokens = cfg.judge.max_tokens;
    return options;
}

int cmd_judge(const GlobalOptions& global, const std::string& task, const std::string& a_arg,
              const std::string& b_arg, const std::string& out_dir, bool dry_run,
              const std::string& run_namespace = "", const std::string& out_suffix = "") {
    config::ProjectConfig cfg = load_config(global);
    auto [model_a, answers_a_path] = resolve_answers(cfg, a_arg, task);
    auto [model_b, answers_b_path] = resolve_answers(cfg, b_arg, task);

    std::size_t n_items = 0;
    std::vector<candidates::StyleSample> samples;
    factqa::FactDataset facts;
    if (task == "style") {
        samples = load_style_samples(cfg);
        n_items = samples.size();
    } else {
        facts = load_fact_dataset(cfg, "");
        n_items = facts.records.size();
    }

    if (dry_run) {
        std::cout << "planned requests: " << 2 * n_items << " (" << n_items
                  << " items x 2 orderings)\n";
        return kExitOk;
    }

    candidates::AnswerSet answers_a = candidates::load_answers(answers_a_path, model_a);
    candidates::AnswerSet answers_b = candidates::load_answers(answers_b_path, model_b);

    auto gw = cached_gateway(cfg, cfg.judge.endpoint, run_namespace);
    judge::JudgeOptions options = judge_options(global, cfg);

    judge::PairMeta meta;
    meta.task = task;
    meta.model_a = model_a;
    meta.model_b = model_b;
    meta.judge_model = cfg.endpoint(cfg.judge.endpoint).model;
    meta.temperature = options.temperature;

    fs::path out = out_dir.empty() ? fs::path(cfg.paths.judgements) / task : fs::path(out_dir);
    fs::path jsonl = out / (pair_stem(model_a, model_b) + out_suffix + ".jsonl");

    std::size_t judged = 0;
    std::size_t invalid = 0;
    if (task == "style") {
        meta.prompt_version = judge::style_prompt_version();
        auto judgements = judge::judge_style_pair(samples, answers_a, answers_b, *gw, options);
        judged = judgements.size();
        invalid = static_cast<std::size_t>(
            std::count_if(judgements.begin(), judgements.end(),
                          [](const judge::StyleJudgement& j) { return !j.verdict; }));
        judge::save_style_judgements(jsonl, meta, judgements);
    } else {
        meta.prompt_version = judge::fact_prompt_version();
        auto judgements = judge::judge_fact_pair(facts, answers_a, answers_b, *gw, options);
        judged = judgements.size();
        invalid = static_cast<std::size_t>(
            std::count_if(judgements.begin(), judgements.end(),
                          [](const judge::FactJudgement& j) { return !j.extraction; }));
        judge::save_fact_judgements(jsonl, meta, judgements);
    }

    std::map<std::string, std::string> inputs;
    inputs[answers_a_path.string()] = file_digest(answers_a_path);
    inputs[answers_b_path.string()] = file_digest(answers_b_path);
    write_run_manifest(out, "judge-" + task + "-" + pair_stem(model_a, model_b) + out_suffix, cfg,
                       inputs);

    std::cout << "wrote " << judged << " judgements (" << invalid << " invalid) to "
              << jsonl.string() << "\n";
    return kExitOk;
}

std::vector<std::pair<std::string, std::string>> parse_pairs(const std::string& pairs_arg) {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string token;
    std::istringstream stream(pairs_arg);
    while (std::getline(stream, token, ',')) {
        std::size_t colon = token.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == token.size()) {
            throw Error("bad --pairs entry \"" + token + "\", want modelA:modelB");
        }
        pairs.emplace_back(token.substr(0, colon), token.substr(colon + 1));
    }
    if (pairs.empty()) throw Error("--pairs is empty");
    return pairs;
}

int cmd_noise(const GlobalOptions& global, const std::string& pairs_arg) {
    config::ProjectConfig cfg = load_config(global);
    auto pairs = parse_pairs(pairs_arg);

    std::vector<candidates::StyleSample> samples = load_style_samples(cfg);
    judge::JudgeOptions options = judge_options(global, cfg);

    scoreboard::NoiseEstimate total;
    std::vector<report::PairNoise> per_pair;
    fs::path noise_dir = fs::path(cfg.paths.judgements) / "style-noise";
    for (const auto& [a, b] : pairs) {
        auto [model_a, answers_a_path] = resolve_answers(cfg, a, "style");
        auto [model_b, answers_b_path] = resolve_answers(cfg, b, "style");
        candidates::AnswerSet answers_a = candidates::load_answers(answers_a_path, model_a);
        candidates::AnswerSet answers_b = candidates::load_answers(answers_b_path, model_b);

        judge::PairMeta meta;
        meta.task = "style";
        meta.model_a = model_a;
        meta.model_b = model_b;
        meta.judge_model = cfg.endpoint(cfg.judge.endpoint).model;
        meta.prompt_version = judge::style_prompt_version();
        meta.temperature = options.temperature;

        std::vector<std::vector<judge::StyleJudgement>> runs;
        for (int run = 1; run <= 2; ++run) {
            auto gw = cached_gateway(cfg, cfg.judge.endpoint, "noise-run" + std::to_string(run));
            auto judgements =
                judge::judge_style_pair(samples, answers_a, answers_b, *gw, options);
            judge::save_style_judgements(
                noise_dir / (pair_stem(model_a, model_b) + ".run" + std::to_string(run) + ".jsonl"),
                meta, judgements);
            runs.push_back(std::move(judgements));
        }
        scoreboard::NoiseEstimate pair_noise = scoreboard::estimate_noise(runs[0], runs[1]);
        std::cout << pair_stem(model_a, model_b) << ": " << pair_noise.differing << "/"
                  << pair_noise.total << " differing (" << report::pct2(pair_noise.rate())
                  << "%)\n";
        per_pair.push_back({model_a, model_b, pair_noise});
        total += pair_noise;
    }

    ordered_json doc;
    doc["task"] = "style";
    doc["differing"] = total.differing;
    doc["total"] = total.total;
    doc["rate"] = total.rate();
    ordered_json pairs_json = ordered_json::array();
    for (const auto& pn : per_pair) {
        pairs_json.push_back({{"model_a", pn.model_a},
                              {"model_b", pn.model_b},
                              {"differing", pn.noise.differing},
                              {"total", pn.noise.total}});
    }
    doc["pairs"] = pairs_json;
    io::write_file(fs::path(cfg.paths.reports) / "noise.json", doc.dump(2) + "\n");

    std::map<std::string, std::string> inputs;
    for (const auto& [a, b] : pairs) {
        for (const std::string& side : {a, b}) {
            fs::path path = resolve_answers(cfg, side, "style").second;
            inputs[path.string()] = file_digest(path);
        }
    }
    write_run_manifest(cfg.paths.reports, "noise", cfg, inputs);

    std::cout << "overall noise: " << total.differing << "/" << total.total << " ("
              << report::pct2(total.rate()) << "%)\n";
    return kExitOk;
}

double resolve_noise_rate(const config::ProjectConfig& cfg, double flag_rate,
                          scoreboard::NoiseEstimate* measured_out,
                          std::vector<report::PairNoise>* pairs_out) {
    if (flag_rate >= 0.0) return flag_rate;
    fs::path noise_file = fs::path(cfg.paths.reports) / "noise.json";
    if (fs::exists(noise_file)) {
        json doc = json::parse(io::read_file(noise_file));
        if (measured_out) {
            measured_out->differing = doc.value("differing", std::size_t(0));
            measured_out->total = doc.value("total", std::size_t(0));
        }
        if (pairs_out) {
            for (const auto& p : doc.value("pairs", json::array())) {
                report::PairNoise pn;
                pn.model_a = p.value("model_a", "");
                pn.model_b = p.value("model_b", "");
                pn.noise.differing = p.value("differing", std::size_t(0));
                pn.noise.total = p.value("total", std::size_t(0));
                pairs_out->push_back(std::move(pn));
            }
        }
        return doc.at("rate").get<double>();
    }
    return cfg.judge.noise_rate;
}

std::vector<fs::path> judgement_files(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) return files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

int run_style_tournament(const GlobalOptions& global, double confidence_flag,
                         double noise_rate_flag, bool quiet = false) {
    config::ProjectConfig cfg = load_config(global);
    double confidence = confidence_flag > 0.0 ? confidence_flag : cfg.confidence;

    fs::path dir = fs::path(cfg.paths.judgements) / "style";
    std::vector<fs::path> files = judgement_files(dir);
    if (files.empty()) throw Error("no style judgement files under " + dir.string());

    // files for the same pair are repeated runs; sum them
    std::map<std::pair<std::string, std::string>, report::StylePairData> by_pair;
    std::set<std::string> model_set;
    std::map<std::string, std::string> inputs;
    std::string judge_model;
    std::string prompt_version;
    for (const fs::path& file : files) {
        auto [meta, judgements] = judge::load_style_judgements(file);
        scoreboard::PairScore run_score =
            scoreboard::aggregate_style(meta.model_a, meta.model_b, judgements);
        auto key = std::make_pair(meta.model_a, meta.model_b);
        auto it = by_pair.find(key);
        if (it == by_pair.end()) {
            report::StylePairData data;
            data.combined = run_score;
            data.runs = {run_score};
            by_pair.emplace(key, std::move(data));
        } else {
            it->second.combined += run_score;
            it->second.runs.push_back(run_score);
        }
        model_set.insert(meta.model_a);
        model_set.insert(meta.model_b);
        judge_model = meta.judge_model;
        prompt_version = meta.prompt_version;
        inputs[file.string()] = file_digest(file);
    }

    report::StyleReport rep;
    rep.models.assign(model_set.begin(), model_set.end());
    rep.confidence = confidence;
    rep.judge_model = judge_model;
    rep.prompt_version = prompt_version;
    rep.noise_rate = resolve_noise_rate(cfg, noise_rate_flag, &rep.noise, &rep.noise_pairs);

    std::vector<scoreboard::TournamentEntry> entries;
    for (auto& [key, data] : by_pair) {
        data.verdict = scoreboard::significance(data.combined, rep.noise_rate, confidence);
        entries.push_back({data.combined, data.verdict});
        rep.pairs.push_back(data);
    }
    rep.ranking = scoreboard::tournament(rep.models, entries);

    report::write_style_report(cfg.paths.reports, rep);
    write_run_manifest(cfg.paths.reports, "tournament-style", cfg, inputs);

    if (!quiet) {
        for (const auto& pair : rep.pairs) {
            const auto& s = pair.combined;
            std::cout << s.model_a << " vs " << s.model_b << ": " << s.a_wins << "/" << s.b_wins
                      << "/" << s.equals << " margin " << report::pct2(std::abs(s.win_b_fraction()))
                      << "% threshold " << report::pct2(pair.verdict.threshold_fraction)
                      << "% -> "
                      << (pair.verdict.winner ? *pair.verdict.winner : std::string("no winner"))
                      << "\n";
        }
        std::cout << "reports written to " << cfg.paths.reports << "\n";
    }
    return kExitOk;
}

int run_fact_tournament(const GlobalOptions& global, double threshold_flag, bool quiet = false) {
    config::ProjectConfig cfg = load_config(global);
    double threshold_pp =
        threshold_flag >= 0.0 ? threshold_flag : cfg.judge.fact_f1_threshold_pp;

    fs::path dir = fs::path(cfg.paths.judgements) / "facts";
    std::vector<fs::path> files = judgement_files(dir);
    if (files.empty()) throw Error("no fact judgement files under " + dir.string());

    report::FactReport rep;
    rep.f1_threshold_pp = threshold_pp;
    std::set<std::string> model_set;
    std::map<std::string, std::string> inputs;
    std::vector<scoreboard::TournamentEntry> entries;

    for (const fs::path& file : files) {
        auto [meta, judgements] = judge::load_fact_judgements(file);
        auto [counts_x, counts_y] = scoreboard::counts_from_extractions(judgements);

        report::FactPairData data;
        data.model_x = meta.model_a;
        data.model_y = meta.model_b;
        data.counts_x = counts_x;
        data.counts_y = counts_y;
        data.metrics_x = scoreboard::prf1(counts_x);
        data.metrics_y = scoreboard::prf1(counts_y);
        data.diff = scoreboard::f1_diff(meta.model_a, data.metrics_x, meta.model_b, data.metrics_y);
        data.significant = data.diff.winner && data.diff.diff_pp > threshold_pp;

        scoreboard::TournamentEntry entry;
        entry.score.model_a = meta.model_a;
        entry.score.model_b = meta.model_b;
        entry.verdict.confidence = 0.0;
        entry.verdict.margin_fraction = data.diff.diff_pp / 100.0;
        entry.verdict.threshold_fraction = threshold_pp / 100.0;
        if (data.significant) entry.verdict.winner = data.diff.winner;
        entries.push_back(entry);

        model_set.insert(meta.model_a);
        model_set.insert(meta.model_b);
        rep.judge_model = meta.judge_model;
        rep.prompt_version = meta.prompt_version;
        rep.pairs.push_back(std::move(data));
        inputs[file.string()] = file_digest(file);
    }

    rep.models.assign(model_set.begin(), model_set.end());
    rep.ranking = scoreboard::tournament(rep.models, entries);

    report::write_fact_report(cfg.paths.reports, rep);
    write_run_manifest(cfg.paths.reports, "tournament-facts", cfg, inputs);

    if (!quiet) {
        for (const auto& pair : rep.pairs) {
            std::cout << pair.model_x << " vs " << pair.model_y << ": F1 "
                      << report::pct1(pair.metrics_x.f1) << "% / "
                      << report::pct1(pair.metrics_y.f1) << "%, diff "
                      << report::fixed2(pair.diff.diff_pp) << " pp -> "
                      << (pair.significant ? *pair.diff.winner : std::string("within margin"))
                      << "\n";
        }
        std::cout << "reports written to " << cfg.paths.reports << "\n";
    }
    return kExitOk;
}

int cmd_report(const GlobalOptions& global) {
    config::ProjectConfig cfg = load_config(global);
    bool any = false;
    if (!judgement_files(fs::path(cfg.paths.judgements) / "style").empty()) {
        run_style_tournament(global, -1.0, -1.0, /*quiet=*/true);
        any = true;
    }
    if (!judgement_files(fs::path(cfg.paths.judgements) / "facts").empty()) {
        run_fact_tournament(global, -1.0, /*quiet=*/true);
        any = true;
    }
    if (!any) throw Error("nothing to report: no judgement files found");
    std::cout << "reports written to " << cfg.paths.reports << "\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"persona-imitation evaluation harness"};
    app.require_subcommand(1);

    GlobalOptions global;
    auto* config_opt = app.add_option("--config", global.config_path, "project config file");
    app.add_option("--concurrency", global.concurrency, "cap in-flight gateway requests");

    // prepare-chat
    auto* prep = app.add_subcommand("prepare-chat", "parse transcripts into chat splits");
    std::string manifest_path;
    std::size_t window = 0;
    std::uint64_t seed = 42;
    std::string out_dir = "data";
    std::size_t style_limit = 0;
    prep->add_option("--manifest", manifest_path, "transcript manifest JSON")->required();
    prep->add_option("--window", window, "sliding window size in sub-dialogs (1-8)");
    prep->add_option("--seed", seed, "rng seed for head trimming");
    prep->add_option("--out", out_dir, "output directory");
    prep->add_option("--style-test-limit", style_limit, "cap style_test fragments");

    // prepare-facts
    auto* prepf = app.add_subcommand("prepare-facts", "extract the fact questionnaire");
    std::string source_dir = "data/fact_source";
    std::string facts_out = "data/facts.csv";
    std::string extraction_endpoint;
    prepf->add_option("--source", source_dir, "directory of fact-source dialogs");
    prepf->add_option("--out", facts_out, "output CSV path");
    prepf->add_option("--endpoint", extraction_endpoint, "extraction endpoint name");

    // generate
    auto* gen = app.add_subcommand("generate", "collect candidate answers");
    std::string gen_model;
    std::string gen_task;
    std::string gen_out;
    std::string gen_facts;
    bool gen_dry = false;
    gen->add_option("--model", gen_model, "endpoint name of the candidate model")->required();
    gen->add_option("--task", gen_task, "style or facts")
        ->required()
        ->check(CLI::IsMember({"style", "facts"}));
    gen->add_option("--out", gen_out, "answers directory (default from config)");
    gen->add_option("--facts", gen_facts, "fact dataset CSV (default <data>/facts.csv)");
    gen->add_flag("--dry-run", gen_dry, "print planned request count, no gateway calls");

    // judge-style / judge-facts
    std::string judge_a, judge_b, judge_out;
    bool judge_dry = false;
    auto* js = app.add_subcommand("judge-style", "pairwise style verdicts");
    js->add_option("--a", judge_a, "first model (name or answers path)")->required();
    js->add_option("--b", judge_b, "second model")->required();
    js->add_option("--out", judge_out, "judgements directory");
    js->add_flag("--dry-run", judge_dry, "print planned request count");
    auto* jf = app.add_subcommand("judge-facts", "pairwise fact extractions");
    jf->add_option("--a", judge_a, "first model (name or answers path)")->required();
    jf->add_option("--b", judge_b, "second model")->required();
    jf->add_option("--out", judge_out, "judgements directory");
    jf->add_flag("--dry-run", judge_dry, "print planned request count");

    // noise
    auto* noise = app.add_subcommand("noise", "re-judge pairs twice and measure verdict churn");
    std::string pairs_arg;
    noise->add_option("--pairs", pairs_arg, "comma list of modelA:modelB pairs")->required();

    // tournament
    auto* tour = app.add_subcommand("tournament", "aggregate, test significance, rank");
    std::string tour_task = "style";
    double tour_confidence = -1.0;
    double tour_noise_rate = -1.0;
    double tour_threshold = -1.0;
    tour->add_option("--task", tour_task, "style or facts")
        ->check(CLI::IsMember({"style", "facts"}));
    tour->add_option("--confidence", tour_confidence, "confidence level (e.g. 0.95)");
    tour->add_option("--noise-rate", tour_noise_rate, "override noise rate fraction");
    tour->add_option("--f1-threshold", tour_threshold, "fact significance threshold in pp");

    // report
    auto* rep = app.add_subcommand("report", "re-render reports from persisted judgements");

    std::vector<std::string> argv_like(args.rbegin(), args.rend());
    try {
        app.parse(argv_like);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    global.config_explicit = config_opt->count() > 0;

    try {
        if (prep->parsed()) {
            return cmd_prepare_chat(global, manifest_path, window, seed, out_dir, style_limit);
        }
        if (prepf->parsed()) {
            return cmd_prepare_facts(global, source_dir, facts_out, extraction_endpoint);
        }
        if (gen->parsed()) {
            return cmd_generate(global, gen_model, gen_task, gen_out, gen_facts, gen_dry);
        }
        if (js->parsed()) {
            return cmd_judge(global, "style", judge_a, judge_b, judge_out, judge_dry);
        }
        if (jf->parsed()) {
            return cmd_judge(global, "facts", judge_a, judge_b, judge_out, judge_dry);
        }
        if (noise->parsed()) {
            return cmd_noise(global, pairs_arg);
        }
        if (tour->parsed()) {
            return tour_task == "style"
                       ? run_style_tournament(global, tour_confidence, tour_noise_rate)
                       : run_fact_tournament(global, tour_threshold);
        }
        if (rep->parsed()) {
            return cmd_report(global);
        }
        std::cerr << "no subcommand given\n";
        return kExitValidation;
    } catch (const GatewayError& e) {
        std::cerr << "gateway error: " << e.what() << "\n";
        return kExitGateway;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace mimic::cli
