#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mimic/chat.hpp"
#include "mimic/llm_gateway.hpp"

namespace mimic::factqa {

/// One questionnaire row: a fact, the verbatim interview snippet it came
/// from, a question probing it, and the fact phrased as a direct answer.
struct FactRecord {
    int id = 0;
    std::string fact;
    std::string src;
    std::string question;
    std::string answer;

    bool operator==(const FactRecord&) const = default;
};

struct FactDataset {
    std::vector<FactRecord> records;
    std::vector<std::string> source_dialog_ids;
};

/// The text the src column is checked against: message contents joined
/// with single newlines, in dialog order.
std::string source_text(const Dialog& dialog);

const char* extraction_prompt_version();  // stamped into run manifests
std::string build_extraction_prompt(const Dialog& dialog);

struct ExtractedFacts {
    std::vector<FactRecord> accepted;        // ids dense from 1
    std::vector<FactRecord> flagged;         // src not found in the dialog
};

/// Asks the gateway (JSON mode) for fact records and validates them.
/// Records whose src fails the substring check are flagged, never
/// silently dropped. Throws ExtractionFormatError once retries run out.
ExtractedFacts extract_facts(const Dialog& dialog, gateway::ChatGateway& gateway,
                             int max_retries = 3);

struct ValidationIssue {
    int record_id = 0;       // 0 = dataset-level issue
    std::string code;        // "EmptyField", "SrcNotFound", "DuplicateId", ...
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    std::size_t records_checked = 0;
    bool pass() const { return issues.empty(); }
};

/// Per-record non-emptiness + src-substring checks, id density, and
/// source-dialog tag checks. Failures are reported, not thrown.
ValidationReport validate_dataset(const FactDataset& dataset, const std::vector<Dialog>& dialogs);

// CSV with header id,fact,src,question,answer; RFC 4180 quoting, LF
// line endings. save(load(f)) is byte-identical for canonical files.
void save_csv(const std::filesystem::path& path, const FactDataset& dataset);
FactDataset load_csv(const std::filesystem::path& path);

void save_json(const std::filesystem::path& path, const FactDataset& dataset);
FactDataset load_json(const std::filesystem::path& path);

}  // namespace mimic::factqa
