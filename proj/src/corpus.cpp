#include "mimic/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>

#include <json.hpp>

#include "mimic/errors.hpp"
#include "mimic/io.hpp"

namespace mimic::corpus {

namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty() && cur.back() == '\r') cur.pop_back();
    if (!cur.empty()) lines.push_back(std::move(cur));
    return lines;
}

const std::regex& timestamp_re() {
    // MM:SS or HH:MM:SS at the start of a line, optionally bracketed by spaces
    static const std::regex re(R"(^\s*(?:\d{1,2}:)?\d{1,2}:\d{2}(?:\s+|$))");
    return re;
}

const std::regex& bracket_re() {
    static const std::regex re(R"(\[[^\][]*\])");
    return re;
}

const std::regex& paren_re() {
    static const std::regex re(R"(\(([^()]*)\))");
    return re;
}

// Speaker label: 1-3 capitalized tokens followed by a colon.
const std::regex& speaker_re() {
    static const std::regex re(
        R"(^\s*([A-Z][A-Za-z0-9.'\-]*(?: [A-Z][A-Za-z0-9.'\-]*){0,2})\s*:\s*(.*)$)");
    return re;
}

std::string collapse_whitespace(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            bool has_newline = false;
            while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
                if (text[i] == '\n') has_newline = true;
                ++i;
            }
            if (!out.empty()) out.push_back(has_newline ? '\n' : ' ');
        } else {
            out.push_back(text[i]);
            ++i;
        }
    }
    while (!out.empty() && (out.back() == ' ' || out.back() == '\n')) out.pop_back();
    return out;
}

}  // namespace

ArtifactRules ArtifactRules::defaults() {
    ArtifactRules rules;
    rules.stage_directions = {
        "applause",  "laughs",   "laughter", "laughing", "chuckles", "chuckling",
        "crosstalk", "cross-talk", "inaudible", "unintelligible", "music",
        "cheering",  "cheers",   "claps",    "clapping", "sighs",    "coughs",
        "coughing",  "pause",    "silence",  "booing",   "audio gap", "video gap",
    };
    return rules;
}

std::string strip_artifacts(const std::string& utterance) {
    return strip_artifacts(utterance, ArtifactRules::defaults());
}

std::string strip_artifacts(const std::string& utterance, const ArtifactRules& rules) {
    std::vector<std::string> lines = split_lines(utterance);
    if (lines.empty() && !utterance.empty()) lines.push_back(utterance);

    std::set<std::string> lexicon(rules.stage_directions.begin(), rules.stage_directions.end());
    std::vector<std::regex> extra;
    extra.reserve(rules.extra_patterns.size());
    for (const std::string& pattern : rules.extra_patterns) {
        try {
            extra.emplace_back(pattern);
        } catch (const std::regex_error& e) {
            throw Error("bad artifact pattern \"" + pattern + "\": " + e.what());
        }
    }

    std::string joined;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string line = lines[li];
        if (rules.strip_timestamps) {
            line = std::regex_replace(line, timestamp_re(), "");
        }
        if (rules.strip_bracketed) {
            line = std::regex_replace(line, bracket_re(), " ");
        }
        // parenthesized groups: drop only known stage directions
        std::string rebuilt;
        auto begin = std::sregex_iterator(line.begin(), line.end(), paren_re());
        auto end = std::sregex_iterator();
        std::size_t last = 0;
        for (auto it = begin; it != end; ++it) {
            const std::smatch& m = *it;
            std::string inner = to_lower(trim(m[1].str()));
            rebuilt += line.substr(last, static_cast<std::size_t>(m.position(0)) - last);
            if (lexicon.count(inner) == 0) {
                rebuilt += m[0].str();
            } else {
                rebuilt += ' ';
            }
            last = static_cast<std::size_t>(m.position(0) + m.length(0));
        }
        rebuilt += line.substr(last);
        for (const std::regex& re : extra) {
            rebuilt = std::regex_replace(rebuilt, re, " ");
        }
        if (li > 0) joined += '\n';
        joined += rebuilt;
    }
    return collapse_whitespace(joined);
}

std::vector<ChatMessage> merge_consecutive(std::vector<ChatMessage> messages) {
    std::vector<ChatMessage> out;
    for (auto& msg : messages) {
        if (!out.empty() && out.back().role == msg.role) {
            out.back().content += '\n';
            out.back().content += msg.content;
        } else {
            out.push_back(std::move(msg));
        }
    }
    return out;
}

Dialog parse_transcript(const std::string& text, const std::string& persona) {
    return parse_transcript(text, persona, ArtifactRules::defaults());
}

Dialog parse_transcript(const std::string& text, const std::string& persona,
                        const ArtifactRules& rules) {
    struct Utterance {
        std::string speaker;
        std::string text;
    };
    std::vector<Utterance> utterances;

    for (const std::string& raw_line : split_lines(text)) {
        std::string line = raw_line;
        if (rules.strip_timestamps) {
            line = std::regex_replace(line, timestamp_re(), "");
        }
        std::smatch m;
        if (std::regex_match(line, m, speaker_re())) {
            utterances.push_back({m[1].str(), m[2].str()});
        } else if (!utterances.empty()) {
            utterances.back().text += '\n';
            utterances.back().text += line;
        }
        // lines before the first speaker label are preamble, dropped
    }

    if (utterances.empty()) throw EmptyTranscript();

    const std::string persona_key = to_lower(trim(persona));
    bool persona_speaks = std::any_of(utterances.begin(), utterances.end(), [&](const Utterance& u) {
        return to_lower(u.speaker) == persona_key;
    });
    if (!persona_speaks) throw UnknownPersona(persona);

    std::vector<ChatMessage> messages;
    for (const Utterance& u : utterances) {
        std::string content = strip_artifacts(u.text, rules);
        if (content.empty()) continue;
        Role role = (to_lower(u.speaker) == persona_key) ? Role::assistant : Role::user;
        messages.push_back({role, std::move(content)});
    }

    messages = merge_consecutive(std::move(messages));

    // trim boundaries: user first, assistant last
    std::size_t first = 0;
    while (first < messages.size() && messages[first].role != Role::user) ++first;
    std::size_t last = messages.size();
    while (last > first && messages[last - 1].role != Role::assistant) --last;
    messages.assign(messages.begin() + static_cast<std::ptrdiff_t>(first),
                    messages.begin() + static_cast<std::ptrdiff_t>(last));

    bool has_user = std::any_of(messages.begin(), messages.end(),
                                [](const ChatMessage& m) { return m.role == Role::user; });
    bool has_assistant = std::any_of(messages.begin(), messages.end(),
                                     [](const ChatMessage& m) { return m.role == Role::assistant; });
    if (!has_user || !has_assistant) {
        throw InvalidDialog("needs at least one user and one assistant message after normalization");
    }

    Dialog dialog;
    dialog.messages = std::move(messages);
    return dialog;
}

TagSet tags_from_filename(const std::string& filename, const TagRules& rules) {
    std::filesystem::path p(filename);
    std::string stem = p.stem().string();
    TagSet tags;
    if (!rules.style_prefix.empty() && stem.rfind(rules.style_prefix, 0) == 0) {
        tags.insert(Tag::style_test);
    }
    if (!rules.fact_substring.empty() && stem.find(rules.fact_substring) != std::string::npos) {
        tags.insert(Tag::fact_source);
    }
    if (tags.empty()) tags.insert(Tag::train);
    return tags;
}

TranscriptManifest TranscriptManifest::from_json_text(const std::string& text,
                                                      const std::filesystem::path& base_dir) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error("manifest root must be a JSON object");

    TranscriptManifest manifest;
    manifest.default_persona = doc.value("default_persona", "");
    if (!doc.contains("entries") || !doc["entries"].is_array()) {
        throw Error("manifest needs an \"entries\" array");
    }
    for (const auto& e : doc["entries"]) {
        ManifestEntry entry;
        if (!e.contains("path") || !e["path"].is_string()) {
            throw Error("manifest entry missing \"path\"");
        }
        entry.path = e["path"].get<std::string>();
        entry.persona = e.value("persona", "");
        if (e.contains("tags")) {
            TagSet tags;
            for (const auto& t : e["tags"]) tags.insert(tag_from_string(t.get<std::string>()));
            entry.tags = tags;
        }
        std::string persona = entry.persona.empty() ? manifest.default_persona : entry.persona;
        if (persona.empty()) {
            throw Error("manifest entry \"" + entry.path +
                        "\" has no persona and no default_persona is set");
        }
        std::filesystem::path full = base_dir / entry.path;
        std::error_code ec;
        if (!std::filesystem::is_regular_file(full, ec)) {
            throw Error("manifest references missing file: " + full.string());
        }
        std::ifstream probe(full);
        if (!probe) {
            throw Error("manifest references unreadable file: " + full.string());
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

TranscriptManifest TranscriptManifest::load(const std::filesystem::path& file) {
    return from_json_text(io::read_file(file), file.parent_path());
}

std::vector<Dialog> load_corpus(const TranscriptManifest& manifest,
                                const std::filesystem::path& base_dir,
                                const TagRules& tag_rules,
                                const ArtifactRules& rules) {
    std::vector<Dialog> dialogs;
    dialogs.reserve(manifest.entries.size());
    for (const ManifestEntry& entry : manifest.entries) {
        std::filesystem::path full = base_dir / entry.path;
        std::string persona = entry.persona.empty() ? manifest.default_persona : entry.persona;
        Dialog dialog = parse_transcript(io::read_file(full), persona, rules);
        dialog.id = full.stem().string();
        dialog.tags = entry.tags ? *entry.tags : tags_from_filename(entry.path, tag_rules);
        dialogs.push_back(std::move(dialog));
    }
    return dialogs;
}

}  // namespace mimic::corpus
