#pragma once

#include <set>
#include <string>
#include <vector>

namespace mimic {

enum class Role { user, assistant, system };

const char* to_string(Role role);
Role role_from_string(const std::string& s);  // throws Error on anything else

/// One utterance in a chat. Content is whitespace-normalized, never empty.
struct ChatMessage {
    Role role = Role::user;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

inline ChatMessage user_msg(std::string content) { return {Role::user, std::move(content)}; }
inline ChatMessage assistant_msg(std::string content) { return {Role::assistant, std::move(content)}; }
inline ChatMessage system_msg(std::string content) { return {Role::system, std::move(content)}; }

enum class Tag { train, style_test, fact_source };

const char* to_string(Tag tag);
Tag tag_from_string(const std::string& s);

using TagSet = std::set<Tag>;

/// A normalized interview: roles alternate, first message is user, last is
/// assistant, persona utterances are the assistant ones.
struct Dialog {
    std::string id;  // source file stem
    std::vector<ChatMessage> messages;
    TagSet tags;

    bool has_tag(Tag t) const { return tags.count(t) != 0; }
    bool operator==(const Dialog&) const = default;
};

}  // namespace mimic
