#include "mimic/chat.hpp"

#include "mimic/errors.hpp"

namespace mimic {

const char* to_string(Role role) {
    switch (role) {
        case Role::user: return "user";
        case Role::assistant: return "assistant";
        case Role::system: return "system";
    }
    return "user";
}

Role role_from_string(const std::string& s) {
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    if (s == "system") return Role::system;
    throw Error("unknown chat role: \"" + s + "\"");
}

const char* to_string(Tag tag) {
    switch (tag) {
        case Tag::train: return "train";
        case Tag::style_test: return "style_test";
        case Tag::fact_source: return "fact_source";
    }
    return "train";
}

Tag tag_from_string(const std::string& s) {
    if (s == "train") return Tag::train;
    if (s == "style_test") return Tag::style_test;
    if (s == "fact_source") return Tag::fact_source;
    throw Error("unknown dialog tag: \"" + s + "\"");
}

}  // namespace mimic
