#include "mimic/io.hpp"

#include <fstream>
#include <sstream>

#include "mimic/errors.hpp"

namespace mimic::io {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed: " + path.string());
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path.string());
    std::vector<nlohmann::json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw Error(path.string() + ":" + std::to_string(lineno) + ": bad JSON line: " + e.what());
        }
    }
    return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& records) {
    std::string buf;
    for (const auto& rec : records) {
        buf += rec.dump();
        buf += '\n';
    }
    write_file(path, buf);
}

void append_line(const std::filesystem::path& path, const std::string& line) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot append to file: " + path.string());
    out << line << '\n';
    out.flush();
}

}  // namespace mimic::io
