#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace mimic::io {

std::string read_file(const std::filesystem::path& path);

/// Parent dirs created, binary mode so LF stays LF everywhere.
void write_file(const std::filesystem::path& path, std::string_view content);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

/// One compact JSON document per line, LF-terminated.
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& records);

void append_line(const std::filesystem::path& path, const std::string& line);

}  // namespace mimic::io
