#include "mimic/report.hpp"

#include <cstdio>

#include <json.hpp>

#include "mimic/io.hpp"

namespace mimic::report {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(const char* spec, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, value);
    return buf;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

std::string ranking_lines(const scoreboard::Ranking& ranking) {
    std::string out;
    for (std::size_t i = 0; i < ranking.tiers.size(); ++i) {
        out += std::to_string(i + 1) + ". " + join(ranking.tiers[i], " = ");
        if (ranking.tiers[i].size() > 1) out += "  (mutually insignificant)";
        out += '\n';
    }
    if (ranking.has_cycle()) {
        for (const auto& cycle : ranking.cycles) {
            out += "cycle detected: " + join(cycle, " > ") + " > " + cycle.front() +
                   " (ranked by Copeland score instead)\n";
        }
    }
    return out;
}

ordered_json ranking_json(const scoreboard::Ranking& ranking) {
    ordered_json doc;
    doc["tiers"] = ranking.tiers;
    ordered_json copeland = ordered_json::object();
    for (const auto& [model, score] : ranking.copeland) copeland[model] = score;
    doc["copeland"] = copeland;
    doc["cycles"] = ranking.cycles;
    return doc;
}

}  // namespace

std::string pct2(double fraction) { return fmt("%.2f", fraction * 100.0); }
std::string pct1(double fraction) { return fmt("%.1f", fraction * 100.0); }
std::string fixed2(double value) { return fmt("%.2f", value); }

std::string render_style_markdown(const StyleReport& report) {
    std::string md;
    md += "# Style tournament\n\n";
    md += "- judge model: " + report.judge_model + "\n";
    md += "- prompt version: " + report.prompt_version + "\n";
    md += "- noise estimate: " + std::to_string(report.noise.differing) + "/" +
          std::to_string(report.noise.total) + " differing";
    if (report.noise.total > 0) md += " (" + pct2(report.noise.rate()) + "%)";
    md += "\n";
    md += "- noise rate used for thresholds: " + pct2(report.noise_rate) + "%\n";
    md += "- confidence: " + fixed2(report.confidence) + " (z = " +
          fixed2(scoreboard::z_value(report.confidence)) + ")\n\n";

    md += "## Raw verdict counts per run\n\n";
    md += "| pair | run | A | B | = | invalid |\n";
    md += "|---|---|---|---|---|---|\n";
    for (const auto& pair : report.pairs) {
        for (std::size_t r = 0; r < pair.runs.size(); ++r) {
            const auto& run = pair.runs[r];
            md += "| " + run.model_a + " vs " + run.model_b + " | " + std::to_string(r + 1) +
                  " | " + std::to_string(run.a_wins) + " | " + std::to_string(run.b_wins) +
                  " | " + std::to_string(run.equals) + " | " + std::to_string(run.invalids) +
                  " |\n";
        }
    }
    if (!report.noise_pairs.empty()) {
        md += "\n## Verdict churn between repeated runs\n\n";
        md += "| pair | differing | total | rate |\n";
        md += "|---|---|---|---|\n";
        for (const auto& pn : report.noise_pairs) {
            md += "| " + pn.model_a + " vs " + pn.model_b + " | " +
                  std::to_string(pn.noise.differing) + " | " + std::to_string(pn.noise.total) +
                  " | " + pct2(pn.noise.rate()) + "% |\n";
        }
    }

    md += "\n## Pairwise totals\n\n";
    md += "| pair | A | B | = | invalid | WinB | margin | threshold | winner |\n";
    md += "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& pair : report.pairs) {
        const auto& s = pair.combined;
        md += "| " + s.model_a + " vs " + s.model_b + " | " + std::to_string(s.a_wins) + " | " +
              std::to_string(s.b_wins) + " | " + std::to_string(s.equals) + " | " +
              std::to_string(s.invalids) + " | " + std::to_string(s.win_b()) + " | " +
              pct2(s.win_b_fraction()) + "% | " + pct2(pair.verdict.threshold_fraction) + "% | " +
              (pair.verdict.winner ? *pair.verdict.winner : std::string("-")) + " |\n";
    }
    md += "\n## Ranking\n\n";
    md += ranking_lines(report.ranking);
    return md;
}

std::string render_style_csv(const StyleReport& report) {
    std::string csv =
        "model_a,model_b,a_wins,b_wins,equals,invalids,win_b,margin_pct,threshold_pct,winner\n";
    for (const auto& pair : report.pairs) {
        const auto& s = pair.combined;
        csv += s.model_a + "," + s.model_b + "," + std::to_string(s.a_wins) + "," +
               std::to_string(s.b_wins) + "," + std::to_string(s.equals) + "," +
               std::to_string(s.invalids) + "," + std::to_string(s.win_b()) + "," +
               pct2(s.win_b_fraction()) + "," + pct2(pair.verdict.threshold_fraction) + "," +
               (pair.verdict.winner ? *pair.verdict.winner : std::string()) + "\n";
    }
    return csv;
}

std::string render_style_json(const StyleReport& report) {
    ordered_json doc;
    doc["task"] = "style";
    doc["judge_model"] = report.judge_model;
    doc["prompt_version"] = report.prompt_version;
    doc["noise"] = {{"differing", report.noise.differing},
                    {"total", report.noise.total},
                    {"rate", report.noise.rate()}};
    ordered_json churn = ordered_json::array();
    for (const auto& pn : report.noise_pairs) {
        churn.push_back({{"model_a", pn.model_a},
                         {"model_b", pn.model_b},
                         {"differing", pn.noise.differing},
                         {"total", pn.noise.total},
                         {"rate", pn.noise.rate()}});
    }
    doc["noise_pairs"] = churn;
    doc["noise_rate_used"] = report.noise_rate;
    doc["confidence"] = report.confidence;
    doc["models"] = report.models;
    ordered_json pairs = ordered_json::array();
    for (const auto& pair : report.pairs) {
        const auto& s = pair.combined;
        ordered_json p;
        p["model_a"] = s.model_a;
        p["model_b"] = s.model_b;
        p["a_wins"] = s.a_wins;
        p["b_wins"] = s.b_wins;
        p["equals"] = s.equals;
        p["invalids"] = s.invalids;
        p["n_samples"] = s.n_samples;
        p["win_b"] = s.win_b();
        p["margin_fraction"] = std::abs(s.win_b_fraction());
        p["threshold_fraction"] = pair.verdict.threshold_fraction;
        p["winner"] = pair.verdict.winner ? ordered_json(*pair.verdict.winner) : ordered_json(nullptr);
        ordered_json runs = ordered_json::array();
        for (const auto& run : pair.runs) {
            runs.push_back({{"a_wins", run.a_wins},
                            {"b_wins", run.b_wins},
                            {"equals", run.equals},
                            {"invalids", run.invalids}});
        }
        p["runs"] = runs;
        pairs.push_back(std::move(p));
    }
    doc["pairs"] = pairs;
    doc["ranking"] = ranking_json(report.ranking);
    return doc.dump(2) + "\n";
}

std::string render_facts_markdown(const FactReport& report) {
    std::string md;
    md += "# Fact memorization\n\n";
    md += "- judge model: " + report.judge_model + "\n";
    md += "- prompt version: " + report.prompt_version + "\n";
    md += "- F1 significance threshold: " + fixed2(report.f1_threshold_pp) + " pp\n";
    md += "- F1 here is pseudo-F1, pair-local; never compare it across tournaments\n\n";

    md += "## Pairwise counts and metrics\n\n";
    md += "| pair | model | TP | FP | FN | Pr | Rec | F1 |\n";
    md += "|---|---|---|---|---|---|---|---|\n";
    for (const auto& pair : report.pairs) {
        auto row = [&md, &pair](const std::string& model, const scoreboard::FactCounts& c,
                                const scoreboard::Metrics& m) {
            md += "| " + pair.model_x + " vs " + pair.model_y + " | " + model + " | " +
                  std::to_string(c.tp) + " | " + std::to_string(c.fp) + " | " +
                  std::to_string(c.fn) + " | " + pct1(m.precision) + "% | " + pct1(m.recall) +
                  "% | " + pct1(m.f1) + "% |\n";
        };
        row(pair.model_x, pair.counts_x, pair.metrics_x);
        row(pair.model_y, pair.counts_y, pair.metrics_y);
    }

    md += "\n## F1 differences\n\n";
    md += "| pair | F1 diff (pp) | winner | significant |\n";
    md += "|---|---|---|---|\n";
    for (const auto& pair : report.pairs) {
        md += "| " + pair.model_x + " vs " + pair.model_y + " | " + fixed2(pair.diff.diff_pp) +
              " | " + (pair.diff.winner ? *pair.diff.winner : std::string("-")) + " | " +
              (pair.significant ? "yes" : "within margin of error") + " |\n";
    }
    md += "\n## Ranking\n\n";
    md += ranking_lines(report.ranking);
    return md;
}

std::string render_facts_csv(const FactReport& report) {
    std::string csv =
        "model_x,model_y,tp_x,fp_x,fn_x,pr_x,rec_x,f1_x,tp_y,fp_y,fn_y,pr_y,rec_y,f1_y,"
        "f1_diff_pp,winner,significant\n";
    for (const auto& pair : report.pairs) {
        csv += pair.model_x + "," + pair.model_y + "," + std::to_string(pair.counts_x.tp) + "," +
               std::to_string(pair.counts_x.fp) + "," + std::to_string(pair.counts_x.fn) + "," +
               pct1(pair.metrics_x.precision) + "," + pct1(pair.metrics_x.recall) + "," +
               pct1(pair.metrics_x.f1) + "," + std::to_string(pair.counts_y.tp) + "," +
               std::to_string(pair.counts_y.fp) + "," + std::to_string(pair.counts_y.fn) + "," +
               pct1(pair.metrics_y.precision) + "," + pct1(pair.metrics_y.recall) + "," +
               pct1(pair.metrics_y.f1) + "," + fixed2(pair.diff.diff_pp) + "," +
               (pair.diff.winner ? *pair.diff.winner : std::string()) + "," +
               (pair.significant ? "yes" : "no") + "\n";
    }
    return csv;
}

std::string render_facts_json(const FactReport& report) {
    ordered_json doc;
    doc["task"] = "facts";
    doc["judge_model"] = report.judge_model;
    doc["prompt_version"] = report.prompt_version;
    doc["f1_threshold_pp"] = report.f1_threshold_pp;
    doc["f1_note"] = "pseudo-F1, pair-local; not comparable across tournaments";
    doc["models"] = report.models;
    ordered_json pairs = ordered_json::array();
    for (const auto& pair : report.pairs) {
        ordered_json p;
        p["model_x"] = pair.model_x;
        p["model_y"] = pair.model_y;
        auto side = [](const scoreboard::FactCounts& c, const scoreboard::Metrics& m) {
            return ordered_json{{"tp", c.tp},          {"fp", c.fp},
                                {"fn", c.fn},          {"precision", m.precision},
                                {"recall", m.recall},  {"f1", m.f1}};
        };
        p["x"] = side(pair.counts_x, pair.metrics_x);
        p["y"] = side(pair.counts_y, pair.metrics_y);
        p["f1_diff_pp"] = pair.diff.diff_pp;
        p["winner"] = pair.diff.winner ? ordered_json(*pair.diff.winner) : ordered_json(nullptr);
        p["significant"] = pair.significant;
        pairs.push_back(std::move(p));
    }
    doc["pairs"] = pairs;
    doc["ranking"] = ranking_json(report.ranking);
    return doc.dump(2) + "\n";
}

void write_style_report(const std::filesystem::path& dir, const StyleReport& report,
                        const std::string& stem) {
    io::write_file(dir / (stem + ".md"), render_style_markdown(report));
    io::write_file(dir / (stem + ".csv"), render_style_csv(report));
    io::write_file(dir / (stem + ".json"), render_style_json(report));
}

void write_fact_report(const std::filesystem::path& dir, const FactReport& report,
                       const std::string& stem) {
    io::write_file(dir / (stem + ".md"), render_facts_markdown(report));
    io::write_file(dir / (stem + ".csv"), render_facts_csv(report));
    io::write_file(dir / (stem + ".json"), render_facts_json(report));
}

}  // namespace mimic::report
