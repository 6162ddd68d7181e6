#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mimic/chat.hpp"

namespace mimic::corpus {

/// What counts as a transcript artifact. The bracket rule removes any
/// [...] annotation; parenthesized groups are removed only when their
/// content is in the stage-direction lexicon, so real parenthetical
/// speech survives. Line-leading MM:SS / HH:MM:SS timestamps go too.
/// extra_patterns holds ECMAScript regexes removed wherever they match,
/// for corpora with artifact conventions the defaults do not cover.
struct ArtifactRules {
    bool strip_bracketed = true;
    bool strip_timestamps = true;
    std::vector<std::string> stage_directions;  // lowercase words/phrases
    std::vector<std::string> extra_patterns;    // user-supplied regexes

    static ArtifactRules defaults();
};

/// Removes artifacts and collapses whitespace runs (a run containing a
/// newline becomes one newline, otherwise one space). Total function.
std::string strip_artifacts(const std::string& utterance);
std::string strip_artifacts(const std::string& utterance, const ArtifactRules& rules);

/// Collapses adjacent same-role messages, joining content with "\n".
std::vector<ChatMessage> merge_consecutive(std::vector<ChatMessage> messages);

/// Parses a "Speaker: utterance" transcript into a normalized Dialog.
/// The persona's lines become assistant messages, everyone else's user
/// messages. Lines without a speaker label continue the previous
/// utterance. Throws EmptyTranscript, UnknownPersona, InvalidDialog.
Dialog parse_transcript(const std::string& text, const std::string& persona);
Dialog parse_transcript(const std::string& text, const std::string& persona,
                        const ArtifactRules& rules);

/// Filename conventions for untagged manifest entries: stem starting
/// with '_' is style_test, name containing "2023" is fact_source,
/// anything else trains. The substrings are configurable.
struct TagRules {
    std::string style_prefix = "_";
    std::string fact_substring = "2023";
};

TagSet tags_from_filename(const std::string& filename, const TagRules& rules = {});

struct ManifestEntry {
    std::string path;
    std::string persona;           // empty -> manifest default
    std::optional<TagSet> tags;    // unset -> filename convention
};

struct TranscriptManifest {
    std::string default_persona;
    std::vector<ManifestEntry> entries;

    /// Parses the manifest JSON and verifies every referenced path is
    /// readable (relative paths resolve against the manifest's dir).
    static TranscriptManifest load(const std::filesystem::path& file);
    static TranscriptManifest from_json_text(const std::string& text,
                                             const std::filesystem::path& base_dir);
};

/// Parses every manifest entry into a tagged Dialog, in manifest order.
std::vector<Dialog> load_corpus(const TranscriptManifest& manifest,
                                const std::filesystem::path& base_dir,
                                const TagRules& tag_rules = {},
                                const ArtifactRules& rules = ArtifactRules::defaults());

}  // namespace mimic::corpus
