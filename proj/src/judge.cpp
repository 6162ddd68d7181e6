#include "mimic/judge.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "mimic/errors.hpp"
#include "mimic/io.hpp"

namespace mimic::judge {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kStylePromptVersion = "style-v1";
constexpr const char* kFactPromptVersion = "facts-v1";

constexpr const char* kStylePromptTemplate =
    "I'll give you the real message of some person in the interview and two fragments "
    "(A and B). Your task is to tell me, which fragment is closer to the original by style?\n"
    "\n"
    "[real message]\n"
    "{original}\n"
    "[/real message]\n"
    "\n"
    "[message A]\n"
    "{message_a}\n"
    "[/message A]\n"
    "\n"
    "[message B]\n"
    "{message_b}\n"
    "[/message B]\n"
    "\n"
    "Your answer should contain only one letter of the winner or sign '=' if both "
    "variants are nearly equal. And nothing else\n"
    "\n"
    "Examples of the answer:\n"
    "\n"
    "A\n"
    "\n"
    "or\n"
    "\n"
    "B\n"
    "\n"
    "or\n"
    "\n"
    "=";

constexpr const char* kFactPromptTemplate =
    "You will compare two candidate answers (fragment A and fragment B) against the real "
    "answer someone gave to the same question. Work through the steps below in order and "
    "reply with one JSON object whose fields appear in exactly this order:\n"
    "1. \"original_facts\": every distinct fact stated in the original answer, as a list "
    "of short statements.\n"
    "2. \"matched_a\": the 0-based indices into \"original_facts\" of the facts that "
    "fragment A also states.\n"
    "3. \"extra_a\": facts asserted in fragment A that are absent from the original "
    "answer, as free text.\n"
    "4. \"matched_b\": the 0-based indices into \"original_facts\" of the facts that "
    "fragment B also states.\n"
    "5. \"extra_b\": facts asserted in fragment B that are absent from the original "
    "answer, as free text.\n"
    "Report matches only as indices, never restated text. Do not score or rank the "
    "fragments.\n"
    "\n"
    "[original answer]\n"
    "{original}\n"
    "[/original answer]\n"
    "\n"
    "[fragment A]\n"
    "{fragment_a}\n"
    "[/fragment A]\n"
    "\n"
    "[fragment B]\n"
    "{fragment_b}\n"
    "[/fragment B]\n"
    "\n"
    "Reply with the JSON object only.";

// Single pass over the template only: substituted values are never
// rescanned, so braces (even literal placeholder text) inside answers
// survive untouched.
std::string fill_template(const std::string& tmpl,
                          std::initializer_list<std::pair<const char*, const std::string*>> subs) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        bool matched = false;
        if (tmpl[i] == '{') {
            for (const auto& [key, value] : subs) {
                std::size_t len = std::char_traits<char>::length(key);
                if (tmpl.compare(i, len, key) == 0) {
                    out += *value;
                    i += len;
                    matched = true;
                    break;
                }
            }
        }
        if (!matched) {
            out.push_back(tmpl[i]);
            ++i;
        }
    }
    return out;
}

std::string trim_copy(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string strip_fences(std::string s) {
    s = trim_copy(s);
    if (s.rfind("```", 0) == 0) {
        std::size_t first_nl = s.find('\n');
        std::size_t last_fence = s.rfind("```");
        if (first_nl != std::string::npos && last_fence > first_nl) {
            s = trim_copy(s.substr(first_nl + 1, last_fence - first_nl - 1));
        }
    }
    return s;
}

const std::string& answer_for(const candidates::AnswerSet& answers, const std::string& sample_id) {
    auto it = answers.answers.find(sample_id);
    if (it == answers.answers.end()) {
        throw Error("answer set for model \"" + answers.model_name + "\" is missing sample " +
                    sample_id);
    }
    return it->second;
}

json judgement_verdict_json(const std::optional<StyleVerdict>& verdict) {
    if (!verdict) return nullptr;
    switch (*verdict) {
        case StyleVerdict::A: return "A";
        case StyleVerdict::B: return "B";
        case StyleVerdict::Equal: return "=";
    }
    return nullptr;
}

ordered_json extraction_to_json(const FactExtraction& e) {
    ordered_json out;
    out["original_facts"] = e.original_facts;
    out["matched_a"] = e.matched_a;
    out["extra_a"] = e.extra_a;
    out["matched_b"] = e.matched_b;
    out["extra_b"] = e.extra_b;
    return out;
}

FactExtraction extraction_from_json(const json& doc) {
    FactExtraction e;
    for (const auto& f : doc.at("original_facts")) e.original_facts.push_back(f.get<std::string>());
    for (const auto& i : doc.at("matched_a")) e.matched_a.push_back(i.get<std::size_t>());
    for (const auto& s : doc.at("extra_a")) e.extra_a.push_back(s.get<std::string>());
    for (const auto& i : doc.at("matched_b")) e.matched_b.push_back(i.get<std::size_t>());
    for (const auto& s : doc.at("extra_b")) e.extra_b.push_back(s.get<std::string>());
    return e;
}

void write_meta(const std::filesystem::path& jsonl_path, const PairMeta& meta) {
    std::filesystem::path meta_path = jsonl_path;
    meta_path.replace_extension();  // drop .jsonl
    meta_path += ".meta.json";
    ordered_json doc;
    doc["task"] = meta.task;
    doc["model_a"] = meta.model_a;
    doc["model_b"] = meta.model_b;
    doc["judge_model"] = meta.judge_model;
    doc["prompt_version"] = meta.prompt_version;
    doc["temperature"] = meta.temperature;
    io::write_file(meta_path, doc.dump(2) + "\n");
}

PairMeta read_meta(const std::filesystem::path& jsonl_path) {
    std::filesystem::path meta_path = jsonl_path;
    meta_path.replace_extension();
    meta_path += ".meta.json";
    json doc = json::parse(io::read_file(meta_path));
    PairMeta meta;
    meta.task = doc.at("task").get<std::string>();
    meta.model_a = doc.at("model_a").get<std::string>();
    meta.model_b = doc.at("model_b").get<std::string>();
    meta.judge_model = doc.value("judge_model", "");
    meta.prompt_version = doc.value("prompt_version", "");
    meta.temperature = doc.value("temperature", 0.0);
    return meta;
}

}  // namespace

const char* to_string(Ordering ordering) { return ordering == Ordering::AB ? "AB" : "BA"; }

Ordering ordering_from_string(const std::string& s) {
    if (s == "AB") return Ordering::AB;
    if (s == "BA") return Ordering::BA;
    throw Error("unknown ordering: \"" + s + "\"");
}

const char* style_prompt_version() { return kStylePromptVersion; }

std::string build_style_prompt(const std::string& original, const std::string& message_a,
                               const std::string& message_b) {
    return fill_template(kStylePromptTemplate, {{"{original}", &original},
                                                {"{message_a}", &message_a},
                                                {"{message_b}", &message_b}});
}

StyleVerdict parse_style_verdict(const std::string& raw) {
    std::string t = trim_copy(raw);
    if (t == "A" || t == "a") return StyleVerdict::A;
    if (t == "B" || t == "b") return StyleVerdict::B;
    if (t == "=") return StyleVerdict::Equal;
    throw InvalidVerdict(raw);
}

const char* fact_prompt_version() { return kFactPromptVersion; }

std::string build_fact_prompt(const std::string& original, const std::string& fragment_a,
                              const std::string& fragment_b) {
    return fill_template(kFactPromptTemplate, {{"{original}", &original},
                                               {"{fragment_a}", &fragment_a},
                                               {"{fragment_b}", &fragment_b}});
}

FactExtraction parse_fact_extraction(const std::string& raw) {
    json doc;
    try {
        doc = json::parse(strip_fences(raw));
    } catch (const json::exception& e) {
        throw InvalidExtraction(std::string("not JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidExtraction("top level is not an object");
    for (const char* key : {"original_facts", "matched_a", "extra_a", "matched_b", "extra_b"}) {
        if (!doc.contains(key) || !doc[key].is_array()) {
            throw InvalidExtraction(std::string("missing or non-array field \"") + key + "\"");
        }
    }

    FactExtraction e;
    for (const auto& f : doc["original_facts"]) {
        if (!f.is_string()) throw InvalidExtraction("original_facts entries must be strings");
        e.original_facts.push_back(f.get<std::string>());
    }

    auto sanitize_indices = [&e](const json& arr) {
        std::vector<std::size_t> out;
        std::set<std::size_t> seen;
        for (const auto& item : arr) {
            if (!item.is_number_integer() || item.get<long long>() < 0) {
                ++e.sanitize_warnings;
                continue;
            }
            auto idx = item.get<std::size_t>();
            if (idx >= e.original_facts.size() || !seen.insert(idx).second) {
                ++e.sanitize_warnings;
                continue;
            }
            out.push_back(idx);
        }
        return out;
    };
    auto sanitize_extras = [&e](const json& arr) {
        std::vector<std::string> out;
        for (const auto& item : arr) {
            if (!item.is_string()) {
                ++e.sanitize_warnings;
                continue;
            }
            std::string s = item.get<std::string>();
            bool is_original = std::find(e.original_facts.begin(), e.original_facts.end(), s) !=
                               e.original_facts.end();
            if (is_original) {
                ++e.sanitize_warnings;
                continue;
            }
            out.push_back(std::move(s));
        }
        return out;
    };

    e.matched_a = sanitize_indices(doc["matched_a"]);
    e.extra_a = sanitize_extras(doc["extra_a"]);
    e.matched_b = sanitize_indices(doc["matched_b"]);
    e.extra_b = sanitize_extras(doc["extra_b"]);
    return e;
}

std::vector<StyleJudgement> judge_style_pair(const std::vector<candidates::StyleSample>& samples,
                                             const candidates::AnswerSet& answers_x,
                                             const candidates::AnswerSet& answers_y,
                                             gateway::ChatGateway& gateway,
                                             const JudgeOptions& options) {
    for (const auto& sample : samples) {
        answer_for(answers_x, sample.sample_id);
        answer_for(answers_y, sample.sample_id);
    }

    std::vector<StyleJudgement> out(samples.size() * 2);
    gateway::parallel_for(samples.size() * 2, options.concurrency, [&](std::size_t slot) {
        const candidates::StyleSample& sample = samples[slot / 2];
        Ordering ordering = (slot % 2 == 0) ? Ordering::AB : Ordering::BA;
        const std::string& x = answer_for(answers_x, sample.sample_id);
        const std::string& y = answer_for(answers_y, sample.sample_id);
        const std::string& slot_a = (ordering == Ordering::AB) ? x : y;
        const std::string& slot_b = (ordering == Ordering::AB) ? y : x;

        gateway::CompletionRequest request;
        request.model = gateway.name();
        request.messages = {user_msg(build_style_prompt(sample.reference, slot_a, slot_b))};
        request.temperature = options.temperature;
        request.max_tokens = options.max_tokens;

        StyleJudgement judgement;
        judgement.sample_id = sample.sample_id;
        judgement.ordering = ordering;
        for (int attempt = 1; attempt <= std::max(options.max_retries, 1); ++attempt) {
            gateway::CompletionResponse response = gateway.complete(request);
            judgement.raw = response.text;
            try {
                judgement.verdict = parse_style_verdict(response.text);
                break;
            } catch (const InvalidVerdict&) {
                judgement.verdict.reset();
            }
        }
        out[slot] = std::move(judgement);
    });

    std::sort(out.begin(), out.end(), [](const StyleJudgement& l, const StyleJudgement& r) {
        if (l.sample_id != r.sample_id) return l.sample_id < r.sample_id;
        return l.ordering < r.ordering;
    });
    return out;
}

std::vector<FactJudgement> judge_fact_pair(const factqa::FactDataset& facts,
                                           const candidates::AnswerSet& answers_x,
                                           const candidates::AnswerSet& answers_y,
                                           gateway::ChatGateway& gateway,
                                           const JudgeOptions& options) {
    for (const auto& rec : facts.records) {
        answer_for(answers_x, candidates::fact_sample_id(rec.id));
        answer_for(answers_y, candidates::fact_sample_id(rec.id));
    }

    std::vector<FactJudgement> out(facts.records.size() * 2);
    gateway::parallel_for(facts.records.size() * 2, options.concurrency, [&](std::size_t slot) {
        const factqa::FactRecord& rec = facts.records[slot / 2];
        const std::string fact_id = candidates::fact_sample_id(rec.id);
        Ordering ordering = (slot % 2 == 0) ? Ordering::AB : Ordering::BA;
        const std::string& x = answer_for(answers_x, fact_id);
        const std::string& y = answer_for(answers_y, fact_id);
        const std::string& slot_a = (ordering == Ordering::AB) ? x : y;
        const std::string& slot_b = (ordering == Ordering::AB) ? y : x;

        gateway::CompletionRequest request;
        request.model = gateway.name();
        request.messages = {user_msg(build_fact_prompt(rec.answer, slot_a, slot_b))};
        request.temperature = options.temperature;
        request.json_mode = true;
        request.max_tokens = options.max_tokens;

        FactJudgement judgement;
        judgement.fact_id = fact_id;
        judgement.ordering = ordering;
        for (int attempt = 1; attempt <= std::max(options.max_retries, 1); ++attempt) {
            try {
                gateway::CompletionResponse response = gateway.complete(request);
                judgement.raw = response.text;
                judgement.extraction = parse_fact_extraction(response.text);
                break;
            } catch (const MalformedResponse& e) {
                judgement.raw = e.what();  // json_mode contract violation, retryable
                judgement.extraction.reset();
            } catch (const InvalidExtraction&) {
                judgement.extraction.reset();
            }
        }
        out[slot] = std::move(judgement);
    });

    std::sort(out.begin(), out.end(), [](const FactJudgement& l, const FactJudgement& r) {
        if (l.fact_id != r.fact_id) return l.fact_id < r.fact_id;
        return l.ordering < r.ordering;
    });
    return out;
}

void save_style_judgements(const std::filesystem::path& jsonl_path, const PairMeta& meta,
                           const std::vector<StyleJudgement>& judgements) {
    std::string buf;
    for (const StyleJudgement& j : judgements) {
        ordered_json rec;
        rec["sample_id"] = j.sample_id;
        rec["ordering"] = to_string(j.ordering);
        rec["verdict"] = judgement_verdict_json(j.verdict);
        rec["raw"] = j.raw;
        buf += rec.dump();
        buf += '\n';
    }
    io::write_file(jsonl_path, buf);
    write_meta(jsonl_path, meta);
}

std::pair<PairMeta, std::vector<StyleJudgement>> load_style_judgements(
    const std::filesystem::path& jsonl_path) {
    PairMeta meta = read_meta(jsonl_path);
    std::vector<StyleJudgement> judgements;
    for (const auto& rec : io::read_jsonl(jsonl_path)) {
        StyleJudgement j;
        j.sample_id = rec.at("sample_id").get<std::string>();
        j.ordering = ordering_from_string(rec.at("ordering").get<std::string>());
        if (!rec.at("verdict").is_null()) {
            j.verdict = parse_style_verdict(rec.at("verdict").get<std::string>());
        }
        j.raw = rec.value("raw", "");
        judgements.push_back(std::move(j));
    }
    return {meta, judgements};
}

void save_fact_judgements(const std::filesystem::path& jsonl_path, const PairMeta& meta,
                          const std::vector<FactJudgement>& judgements) {
    std::string buf;
    for (const FactJudgement& j : judgements) {
        ordered_json rec;
        rec["fact_id"] = j.fact_id;
        rec["ordering"] = to_string(j.ordering);
        rec["extraction"] = j.extraction ? extraction_to_json(*j.extraction) : ordered_json(nullptr);
        rec["warnings"] = j.extraction ? j.extraction->sanitize_warnings : 0;
        rec["raw"] = j.raw;
        buf += rec.dump();
        buf += '\n';
    }
    io::write_file(jsonl_path, buf);
    write_meta(jsonl_path, meta);
}

std::pair<PairMeta, std::vector<FactJudgement>> load_fact_judgements(
    const std::filesystem::path& jsonl_path) {
    PairMeta meta = read_meta(jsonl_path);
    std::vector<FactJudgement> judgements;
    for (const auto& rec : io::read_jsonl(jsonl_path)) {
        FactJudgement j;
        j.fact_id = rec.at("fact_id").get<std::string>();
        j.ordering = ordering_from_string(rec.at("ordering").get<std::string>());
        if (!rec.at("extraction").is_null()) {
            j.extraction = extraction_from_json(rec.at("extraction"));
            j.extraction->sanitize_warnings = rec.value("warnings", 0);
        }
        j.raw = rec.value("raw", "");
        judgements.push_back(std::move(j));
    }
    return {meta, judgements};
}

}  // namespace mimic::judge
