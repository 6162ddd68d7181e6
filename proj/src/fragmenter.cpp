#include "mimic/fragmenter.hpp"

#include <random>

#include <json.hpp>

#include "mimic/digest.hpp"
#include "mimic/errors.hpp"
#include "mimic/io.hpp"

namespace mimic::fragmenter {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json messages_to_json(const std::vector<ChatMessage>& messages) {
    ordered_json arr = ordered_json::array();
    for (const ChatMessage& m : messages) {
        arr.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    return arr;
}

std::vector<ChatMessage> messages_from_json(const nlohmann::json& arr) {
    if (!arr.is_array()) throw Error("chat JSON must be an array of {role, content} objects");
    std::vector<ChatMessage> out;
    for (const auto& item : arr) {
        if (!item.is_object() || !item.contains("role") || !item.contains("content")) {
            throw Error("chat JSON entries need \"role\" and \"content\"");
        }
        out.push_back({role_from_string(item["role"].get<std::string>()),
                       item["content"].get<std::string>()});
    }
    return out;
}

}  // namespace

std::vector<SubDialog> enumerate_subdialogs(const Dialog& dialog) {
    std::vector<SubDialog> out;
    const auto& msgs = dialog.messages;
    for (std::size_t i = 0; i + 1 < msgs.size(); i += 2) {
        out.push_back({msgs[i], msgs[i + 1]});
    }
    return out;
}

std::vector<Fragment> build_fragments(const Dialog& dialog, std::size_t window,
                                      std::uint64_t seed) {
    if (window == 0) throw Error("window must be at least 1");
    std::vector<SubDialog> subs = enumerate_subdialogs(dialog);
    const std::size_t m = subs.size();
    if (m == 0) throw EmptyDialog(dialog.id);

    std::mt19937_64 engine(seed ^ fnv1a64(dialog.id));
    const std::size_t window_len = std::min(window, m);
    const std::size_t n_windows = m - window_len + 1;

    std::vector<Fragment> fragments;
    fragments.reserve(n_windows);
    for (std::size_t w = 0; w < n_windows; ++w) {
        // keep the LAST k sub-dialogs so the closing answer survives
        std::size_t k = 1 + static_cast<std::size_t>(engine() % window_len);
        Fragment frag;
        frag.source_id = dialog.id;
        frag.window_index = w;
        for (std::size_t i = w + window_len - k; i < w + window_len; ++i) {
            frag.messages.push_back(subs[i].user_msg);
            frag.messages.push_back(subs[i].assistant_msg);
        }
        fragments.push_back(std::move(frag));
    }
    return fragments;
}

std::string serialize_chat(const std::vector<ChatMessage>& messages) {
    return messages_to_json(messages).dump();
}

std::string serialize_chat(const Fragment& fragment) {
    return serialize_chat(fragment.messages);
}

std::vector<ChatMessage> parse_chat(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("chat JSON parse failed: ") + e.what());
    }
    return messages_from_json(doc);
}

CorpusSplit split_corpus(const std::vector<Dialog>& dialogs, const SplitOptions& options) {
    CorpusSplit split;
    for (const Dialog& dialog : dialogs) {
        if (dialog.has_tag(Tag::train) && dialog.has_tag(Tag::style_test)) {
            // train and style_test must stay disjoint at the fragment level
            throw Error("dialog \"" + dialog.id + "\" is tagged both train and style_test");
        }
        if (dialog.has_tag(Tag::fact_source)) {
            split.fact_source.push_back(dialog);
        }
        if (dialog.has_tag(Tag::train)) {
            auto frags = build_fragments(dialog, options.window, options.seed);
            split.train.insert(split.train.end(), frags.begin(), frags.end());
        }
        if (dialog.has_tag(Tag::style_test)) {
            auto frags = build_fragments(dialog, options.window, options.seed);
            split.style_test.insert(split.style_test.end(), frags.begin(), frags.end());
        }
    }
    if (options.style_test_limit > 0 && split.style_test.size() > options.style_test_limit) {
        split.style_test.resize(options.style_test_limit);
    }
    if (split.train.empty()) split.warnings.push_back("train split is empty");
    if (split.style_test.empty()) split.warnings.push_back("style_test split is empty");
    if (split.fact_source.empty()) split.warnings.push_back("fact_source split is empty");
    return split;
}

void write_fragments_jsonl(const std::filesystem::path& path,
                           const std::vector<Fragment>& fragments) {
    std::string buf;
    for (const Fragment& f : fragments) {
        ordered_json rec;
        rec["source_id"] = f.source_id;
        rec["window_index"] = f.window_index;
        rec["n_subdialogs"] = f.n_subdialogs();
        rec["messages"] = messages_to_json(f.messages);
        buf += rec.dump();
        buf += '\n';
    }
    io::write_file(path, buf);
}

std::vector<Fragment> read_fragments_jsonl(const std::filesystem::path& path) {
    std::vector<Fragment> out;
    for (const auto& rec : io::read_jsonl(path)) {
        Fragment f;
        f.source_id = rec.at("source_id").get<std::string>();
        f.window_index = rec.at("window_index").get<std::size_t>();
        f.messages = messages_from_json(rec.at("messages"));
        out.push_back(std::move(f));
    }
    return out;
}

void write_dialog_json(const std::filesystem::path& path, const Dialog& dialog) {
    ordered_json doc;
    doc["id"] = dialog.id;
    ordered_json tags = ordered_json::array();
    for (Tag t : dialog.tags) tags.push_back(to_string(t));
    doc["tags"] = tags;
    doc["messages"] = messages_to_json(dialog.messages);
    io::write_file(path, doc.dump(2) + "\n");
}

Dialog read_dialog_json(const std::filesystem::path& path) {
    nlohmann::json doc = nlohmann::json::parse(io::read_file(path));
    Dialog dialog;
    dialog.id = doc.at("id").get<std::string>();
    for (const auto& t : doc.at("tags")) dialog.tags.insert(tag_from_string(t.get<std::string>()));
    dialog.messages = messages_from_json(doc.at("messages"));
    return dialog;
}

}  // namespace mimic::fragmenter
