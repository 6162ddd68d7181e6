#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mimic/chat.hpp"
#include "mimic/factqa.hpp"
#include "mimic/fragmenter.hpp"
#include "mimic/llm_gateway.hpp"

namespace mimic::candidates {

/// A style-test fragment with the real closing answer held back. The
/// context is what a candidate sees; the reference only ever reaches
/// judge prompts.
struct StyleSample {
    std::string sample_id;  // "<source_id>#<window_index>"
    std::vector<ChatMessage> context;  // ends with a user message
    std::string reference;
};

std::vector<StyleSample> make_style_samples(const fragmenter::CorpusSplit& split);
std::vector<StyleSample> make_style_samples(const std::vector<fragmenter::Fragment>& fragments);

std::string fact_sample_id(int fact_id);  // "fact-0001"

struct GenParams {
    double temperature = 0.0;
    int max_tokens = 512;
    int concurrency = 4;
    std::string system_prompt;  // off by default: the persona lives in the weights
};

struct AnswerSet {
    std::string model_name;
    std::map<std::string, std::string> answers;          // sample_id -> text
    std::map<std::string, std::string> request_digests;  // sample_id -> digest
    GenParams params;
};

/// Sends each sample's context verbatim as the chat history. The
/// reference answer is never part of any request.
AnswerSet generate_style_answers(const std::vector<StyleSample>& samples,
                                 const std::string& model_name, gateway::ChatGateway& gateway,
                                 const GenParams& params = {});

/// Sends each fact question as a single user message.
AnswerSet generate_fact_answers(const factqa::FactDataset& facts, const std::string& model_name,
                                gateway::ChatGateway& gateway, const GenParams& params = {});

// answers/<model>/<run>.jsonl: {"sample_id", "answer", "request_digest"},
// sorted by sample_id
void save_answers(const std::filesystem::path& path, const AnswerSet& answers);
AnswerSet load_answers(const std::filesystem::path& path, const std::string& model_name);

}  // namespace mimic::candidates
