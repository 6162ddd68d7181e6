#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mimic/candidates.hpp"
#include "mimic/factqa.hpp"
#include "mimic/llm_gateway.hpp"

namespace mimic::judge {

enum class StyleVerdict { A, B, Equal };
enum class Ordering { AB, BA };  // AB: x in slot A; BA: x in slot B

const char* to_string(Ordering ordering);
Ordering ordering_from_string(const std::string& s);

/// One judge call's outcome. A missing verdict means the judge never
/// produced a parseable reply within the retry budget; such judgements
/// are excluded from counts and tallied separately.
struct StyleJudgement {
    std::string sample_id;
    Ordering ordering = Ordering::AB;
    std::optional<StyleVerdict> verdict;
    std::string raw;
};

const char* style_prompt_version();
std::string build_style_prompt(const std::string& original, const std::string& message_a,
                               const std::string& message_b);

/// Accepts exactly "A", "B" or "=" modulo case and surrounding
/// whitespace. Everything else throws InvalidVerdict.
StyleVerdict parse_style_verdict(const std::string& raw);

struct JudgeOptions {
    int max_retries = 3;
    int concurrency = 4;
    double temperature = 0.0;
    int max_tokens = 2048;
};

/// Judges every sample twice, once per ordering, so positional bias
/// cancels. Output is sorted by (sample_id, ordering AB<BA).
std::vector<StyleJudgement> judge_style_pair(const std::vector<candidates::StyleSample>& samples,
                                             const candidates::AnswerSet& answers_x,
                                             const candidates::AnswerSet& answers_y,
                                             gateway::ChatGateway& gateway,
                                             const JudgeOptions& options = {});

/// The judge's structured fact comparison: the facts it found in the
/// original answer, which of them each fragment repeats (as indices),
/// and what each fragment asserts beyond the original.
struct FactExtraction {
    std::vector<std::string> original_facts;
    std::vector<std::size_t> matched_a;
    std::vector<std::string> extra_a;
    std::vector<std::size_t> matched_b;
    std::vector<std::string> extra_b;
    int sanitize_warnings = 0;
};

const char* fact_prompt_version();
std::string build_fact_prompt(const std::string& original, const std::string& fragment_a,
                              const std::string& fragment_b);

/// Schema-validates the judge's JSON. Out-of-range and duplicate match
/// indices are dropped (counted in sanitize_warnings), as are extras
/// that literally restate an original fact. Structural problems throw
/// InvalidExtraction.
FactExtraction parse_fact_extraction(const std::string& raw);

struct FactJudgement {
    std::string fact_id;
    Ordering ordering = Ordering::AB;
    std::optional<FactExtraction> extraction;
    std::string raw;
};

std::vector<FactJudgement> judge_fact_pair(const factqa::FactDataset& facts,
                                           const candidates::AnswerSet& answers_x,
                                           const candidates::AnswerSet& answers_y,
                                           gateway::ChatGateway& gateway,
                                           const JudgeOptions& options = {});

/// Sidecar metadata stamped next to every judgement file.
struct PairMeta {
    std::string task;  // "style" | "facts"
    std::string model_a;
    std::string model_b;
    std::string judge_model;
    std::string prompt_version;
    double temperature = 0.0;
};

void save_style_judgements(const std::filesystem::path& jsonl_path, const PairMeta& meta,
                           const std::vector<StyleJudgement>& judgements);
std::pair<PairMeta, std::vector<StyleJudgement>> load_style_judgements(
    const std::filesystem::path& jsonl_path);

void save_fact_judgements(const std::filesystem::path& jsonl_path, const PairMeta& meta,
                          const std::vector<FactJudgement>& judgements);
std::pair<PairMeta, std::vector<FactJudgement>> load_fact_judgements(
    const std::filesystem::path& jsonl_path);

}  // namespace mimic::judge
