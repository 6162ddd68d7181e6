#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mimic/chat.hpp"

namespace mimic::fragmenter {

/// One (user, assistant) message pair.
struct SubDialog {
    ChatMessage user_msg;
    ChatMessage assistant_msg;

    bool operator==(const SubDialog&) const = default;
};

/// A contiguous, head-trimmed run of sub-dialogs cut from one dialog.
/// Messages alternate user/assistant, start user, end assistant.
struct Fragment {
    std::string source_id;
    std::size_t window_index = 0;
    std::vector<ChatMessage> messages;

    std::size_t n_subdialogs() const { return messages.size() / 2; }
    bool operator==(const Fragment&) const = default;
};

std::vector<SubDialog> enumerate_subdialogs(const Dialog& dialog);

/// Slides a window of `window` sub-dialogs over the dialog (one whole-
/// dialog window when it has fewer), then trims each window to its last
/// k sub-dialogs, k drawn uniformly from [1, window length]. The draw
/// stream is mt19937_64 seeded with seed ^ fnv1a64(dialog.id), so
/// output is byte-stable for a fixed (dialog, window, seed) and dialogs
/// can be processed in parallel. Throws EmptyDialog when M == 0.
std::vector<Fragment> build_fragments(const Dialog& dialog, std::size_t window,
                                      std::uint64_t seed);

/// Compact JSON array of {"role": ..., "content": ...} objects, keys in
/// that order, matching the usual chat-template input shape.
std::string serialize_chat(const Fragment& fragment);
std::string serialize_chat(const std::vector<ChatMessage>& messages);
std::vector<ChatMessage> parse_chat(const std::string& json_text);

struct SplitOptions {
    std::size_t window = 4;
    std::uint64_t seed = 42;
    std::size_t style_test_limit = 0;  // 0 = keep all style fragments
};

struct CorpusSplit {
    std::vector<Fragment> train;
    std::vector<Fragment> style_test;
    std::vector<Dialog> fact_source;
    std::vector<std::string> warnings;  // empty buckets are warned, not fatal
};

/// Routes dialogs by tag: train/style_test dialogs are fragmented,
/// fact_source dialogs pass through whole. Dialog order is preserved.
CorpusSplit split_corpus(const std::vector<Dialog>& dialogs, const SplitOptions& options);

// file formats: one fragment record per line, {"source_id", "window_index",
// "n_subdialogs", "messages"}; fact-source dialogs as whole-dialog JSON files
void write_fragments_jsonl(const std::filesystem::path& path,
                           const std::vector<Fragment>& fragments);
std::vector<Fragment> read_fragments_jsonl(const std::filesystem::path& path);

void write_dialog_json(const std::filesystem::path& path, const Dialog& dialog);
Dialog read_dialog_json(const std::filesystem::path& path);

}  // namespace mimic::fragmenter
