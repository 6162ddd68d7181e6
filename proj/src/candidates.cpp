#include "mimic/candidates.hpp"

#include <cstdio>
#include <mutex>

#include <json.hpp>

#include "mimic/errors.hpp"
#include "mimic/io.hpp"

namespace mimic::candidates {

using ordered_json = nlohmann::ordered_json;

std::vector<StyleSample> make_style_samples(const std::vector<fragmenter::Fragment>& fragments) {
    std::vector<StyleSample> samples;
    samples.reserve(fragments.size());
    for (const fragmenter::Fragment& frag : fragments) {
        if (frag.messages.size() < 2) continue;
        StyleSample sample;
        sample.sample_id = frag.source_id + "#" + std::to_string(frag.window_index);
        sample.context.assign(frag.messages.begin(), frag.messages.end() - 1);
        sample.reference = frag.messages.back().content;
        samples.push_back(std::move(sample));
    }
    return samples;
}

std::vector<StyleSample> make_style_samples(const fragmenter::CorpusSplit& split) {
    return make_style_samples(split.style_test);
}

std::string fact_sample_id(int fact_id) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "fact-%04d", fact_id);
    return buf;
}

namespace {

struct WorkItem {
    std::string sample_id;
    std::vector<ChatMessage> messages;
};

AnswerSet run_generation(const std::vector<WorkItem>& items, const std::string& model_name,
                         gateway::ChatGateway& gw, const GenParams& params) {
    AnswerSet out;
    out.model_name = model_name;
    out.params = params;

    std::mutex mutex;
    std::vector<std::string> failures;

    gateway::parallel_for(items.size(), params.concurrency, [&](std::size_t i) {
        const WorkItem& item = items[i];
        gateway::CompletionRequest request;
        request.model = model_name;
        if (!params.system_prompt.empty()) {
            request.messages.push_back(system_msg(params.system_prompt));
        }
        request.messages.insert(request.messages.end(), item.messages.begin(),
                                item.messages.end());
        request.temperature = params.temperature;
        request.max_tokens = params.max_tokens;
        try {
            gateway::CompletionResponse response = gw.complete(request);
            std::lock_guard<std::mutex> lock(mutex);
            out.answers[item.sample_id] = response.text;
            out.request_digests[item.sample_id] = response.request_digest;
        } catch (const GatewayError& e) {
            std::lock_guard<std::mutex> lock(mutex);
            failures.push_back(item.sample_id + ": " + e.what());
        }
    });

    if (!failures.empty()) {
        throw TransportError(std::to_string(failures.size()) + " of " +
                                 std::to_string(items.size()) +
                                 " items unanswered, first: " + failures.front(),
                             "");
    }
    return out;
}

}  // namespace

AnswerSet generate_style_answers(const std::vector<StyleSample>& samples,
                                 const std::string& model_name, gateway::ChatGateway& gateway,
                                 const GenParams& params) {
    std::vector<WorkItem> items;
    items.reserve(samples.size());
    for (const StyleSample& s : samples) items.push_back({s.sample_id, s.context});
    return run_generation(items, model_name, gateway, params);
}

AnswerSet generate_fact_answers(const factqa::FactDataset& facts, const std::string& model_name,
                                gateway::ChatGateway& gateway, const GenParams& params) {
    std::vector<WorkItem> items;
    items.reserve(facts.records.size());
    for (const factqa::FactRecord& rec : facts.records) {
        items.push_back({fact_sample_id(rec.id), {user_msg(rec.question)}});
    }
    return run_generation(items, model_name, gateway, params);
}

void save_answers(const std::filesystem::path& path, const AnswerSet& answers) {
    std::string buf;
    for (const auto& [sample_id, text] : answers.answers) {  // map: already sorted
        ordered_json rec;
        rec["sample_id"] = sample_id;
        rec["answer"] = text;
        auto digest = answers.request_digests.find(sample_id);
        rec["request_digest"] = digest == answers.request_digests.end() ? "" : digest->second;
        buf += rec.dump();
        buf += '\n';
    }
    io::write_file(path, buf);
}

AnswerSet load_answers(const std::filesystem::path& path, const std::string& model_name) {
    AnswerSet out;
    out.model_name = model_name;
    for (const auto& rec : io::read_jsonl(path)) {
        std::string sample_id = rec.at("sample_id").get<std::string>();
        out.answers[sample_id] = rec.at("answer").get<std::string>();
        out.request_digests[sample_id] = rec.value("request_digest", "");
    }
    return out;
}

}  // namespace mimic::candidates
