#include "mimic/factqa.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mimic/errors.hpp"
#include "mimic/io.hpp"

namespace mimic::factqa {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// Reconstruction of the extraction instruction; the version id is
// stamped into run manifests so result files say what produced them.
constexpr const char* kExtractionPromptVersion = "factx-v1";

constexpr const char* kExtractionPromptHeader =
    "You will read an interview transcript. Identify concrete facts stated by the "
    "interviewee. Prefer facts that are specific to this person and unlikely to be "
    "public knowledge. For each fact, reply with a JSON array of objects with exactly "
    "these fields, in this order:\n"
    "- \"fact\": the fact as a short declarative statement\n"
    "- \"src\": the verbatim fragment of the transcript the fact was taken from, "
    "copied character for character\n"
    "- \"question\": a question whose answer reveals whether someone knows the fact\n"
    "- \"answer\": the fact phrased as a direct answer to that question\n"
    "Reply with the JSON array only.\n";

std::string trim_copy(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// tolerate a fenced ```json ... ``` reply
std::string strip_fences(std::string s) {
    s = trim_copy(s);
    if (s.rfind("```", 0) == 0) {
        std::size_t first_nl = s.find('\n');
        std::size_t last_fence = s.rfind("```");
        if (first_nl != std::string::npos && last_fence > first_nl) {
            s = trim_copy(s.substr(first_nl + 1, last_fence - first_nl - 1));
        }
    }
    return s;
}

std::string csv_field(const std::string& value) {
    bool needs_quote = value.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quote) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_quoted = false;
    std::size_t i = 0;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_quoted = false;
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };
    while (i < text.size()) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty() && !field_quoted) {
            in_quotes = true;
            field_quoted = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            if (!field_quoted && !field.empty() && field.back() == '\r') field.pop_back();
            end_row();
        } else {
            field.push_back(c);
        }
        ++i;
    }
    if (!field.empty() || !row.empty() || in_quotes) end_row();
    return rows;
}

}  // namespace

std::string source_text(const Dialog& dialog) {
    std::string out;
    for (std::size_t i = 0; i < dialog.messages.size(); ++i) {
        if (i > 0) out += '\n';
        out += dialog.messages[i].content;
    }
    return out;
}

const char* extraction_prompt_version() { return kExtractionPromptVersion; }

std::string build_extraction_prompt(const Dialog& dialog) {
    std::string prompt = kExtractionPromptHeader;
    prompt += "\n[interview]\n";
    prompt += source_text(dialog);
    prompt += "\n[/interview]\n";
    return prompt;
}

ExtractedFacts extract_facts(const Dialog& dialog, gateway::ChatGateway& gateway,
                             int max_retries) {
    gateway::CompletionRequest request;
    request.model = gateway.name();
    request.messages = {user_msg(build_extraction_prompt(dialog))};
    request.json_mode = true;
    request.max_tokens = 4096;

    const std::string haystack = source_text(dialog);
    std::string last_error = "no attempt made";

    for (int attempt = 1; attempt <= std::max(max_retries, 1); ++attempt) {
        gateway::CompletionResponse response = gateway.complete(request);
        json doc;
        try {
            doc = json::parse(strip_fences(response.text));
        } catch (const json::exception& e) {
            last_error = e.what();
            continue;
        }
        if (!doc.is_array()) {
            last_error = "top-level JSON is not an array";
            continue;
        }
        ExtractedFacts result;
        bool shape_ok = true;
        int next_id = 1;
        for (const auto& item : doc) {
            if (!item.is_object() || !item.contains("fact") || !item.contains("src") ||
                !item.contains("question") || !item.contains("answer")) {
                shape_ok = false;
                last_error = "record missing one of fact/src/question/answer";
                break;
            }
            FactRecord rec;
            rec.fact = item["fact"].get<std::string>();
            rec.src = item["src"].get<std::string>();
            rec.question = item["question"].get<std::string>();
            rec.answer = item["answer"].get<std::string>();
            if (rec.fact.empty() || rec.src.empty() || rec.question.empty() || rec.answer.empty()) {
                shape_ok = false;
                last_error = "record has an empty field";
                break;
            }
            if (haystack.find(rec.src) == std::string::npos) {
                rec.id = 0;
                result.flagged.push_back(std::move(rec));
            } else {
                rec.id = next_id++;
                result.accepted.push_back(std::move(rec));
            }
        }
        if (shape_ok) return result;
    }
    throw ExtractionFormatError(last_error);
}

ValidationReport validate_dataset(const FactDataset& dataset, const std::vector<Dialog>& dialogs) {
    ValidationReport report;
    report.records_checked = dataset.records.size();

    std::map<std::string, const Dialog*> by_id;
    for (const Dialog& d : dialogs) by_id[d.id] = &d;

    for (const std::string& sid : dataset.source_dialog_ids) {
        auto it = by_id.find(sid);
        if (it == by_id.end()) {
            report.issues.push_back({0, "UnknownSourceDialog", sid});
        } else if (!it->second->has_tag(Tag::fact_source)) {
            report.issues.push_back({0, "SourceNotFactTagged", sid});
        }
    }

    std::string haystack;
    for (const std::string& sid : dataset.source_dialog_ids) {
        auto it = by_id.find(sid);
        if (it != by_id.end()) {
            if (!haystack.empty()) haystack += '\n';
            haystack += source_text(*it->second);
        }
    }

    std::set<int> seen_ids;
    for (const FactRecord& rec : dataset.records) {
        auto check_empty = [&](const std::string& value, const char* field) {
            if (value.empty()) report.issues.push_back({rec.id, "EmptyField", field});
        };
        check_empty(rec.fact, "fact");
        check_empty(rec.src, "src");
        check_empty(rec.question, "question");
        check_empty(rec.answer, "answer");
        if (!seen_ids.insert(rec.id).second) {
            report.issues.push_back({rec.id, "DuplicateId", std::to_string(rec.id)});
        }
        if (!rec.src.empty() && !dialogs.empty() && haystack.find(rec.src) == std::string::npos) {
            report.issues.push_back({rec.id, "SrcNotFound", rec.src});
        }
    }

    // ids must be dense from 1
    for (int want = 1; want <= static_cast<int>(dataset.records.size()); ++want) {
        if (seen_ids.count(want) == 0) {
            report.issues.push_back({0, "NonDenseIds", "missing id " + std::to_string(want)});
            break;
        }
    }
    return report;
}

void save_csv(const std::filesystem::path& path, const FactDataset& dataset) {
    std::string out = "id,fact,src,question,answer\n";
    for (const FactRecord& rec : dataset.records) {
        out += std::to_string(rec.id);
        out += ',';
        out += csv_field(rec.fact);
        out += ',';
        out += csv_field(rec.src);
        out += ',';
        out += csv_field(rec.question);
        out += ',';
        out += csv_field(rec.answer);
        out += '\n';
    }
    io::write_file(path, out);
}

FactDataset load_csv(const std::filesystem::path& path) {
    auto rows = parse_csv(io::read_file(path));
    if (rows.empty()) throw Error("fact CSV is empty: " + path.string());
    const std::vector<std::string> header = {"id", "fact", "src", "question", "answer"};
    if (rows[0] != header) {
        throw Error("fact CSV header must be exactly id,fact,src,question,answer");
    }
    FactDataset dataset;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() == 1 && row[0].empty()) continue;  // stray blank line
        if (row.size() != 5) {
            throw Error("fact CSV row " + std::to_string(i + 1) + " has " +
                        std::to_string(row.size()) + " fields, want 5");
        }
        FactRecord rec;
        try {
            rec.id = std::stoi(row[0]);
        } catch (const std::exception&) {
            throw Error("fact CSV row " + std::to_string(i + 1) + ": bad id \"" + row[0] + "\"");
        }
        rec.fact = row[1];
        rec.src = row[2];
        rec.question = row[3];
        rec.answer = row[4];
        dataset.records.push_back(std::move(rec));
    }
    return dataset;
}

void save_json(const std::filesystem::path& path, const FactDataset& dataset) {
    ordered_json doc;
    doc["source_dialog_ids"] = dataset.source_dialog_ids;
    ordered_json records = ordered_json::array();
    for (const FactRecord& rec : dataset.records) {
        ordered_json r;
        r["id"] = rec.id;
        r["fact"] = rec.fact;
        r["src"] = rec.src;
        r["question"] = rec.question;
        r["answer"] = rec.answer;
        records.push_back(std::move(r));
    }
    doc["records"] = records;
    io::write_file(path, doc.dump(2) + "\n");
}

FactDataset load_json(const std::filesystem::path& path) {
    json doc = json::parse(io::read_file(path));
    FactDataset dataset;
    for (const auto& sid : doc.value("source_dialog_ids", json::array())) {
        dataset.source_dialog_ids.push_back(sid.get<std::string>());
    }
    for (const auto& r : doc.at("records")) {
        FactRecord rec;
        rec.id = r.at("id").get<int>();
        rec.fact = r.at("fact").get<std::string>();
        rec.src = r.at("src").get<std::string>();
        rec.question = r.at("question").get<std::string>();
        rec.answer = r.at("answer").get<std::string>();
        dataset.records.push_back(std::move(rec));
    }
    return dataset;
}

}  // namespace mimic::factqa
