#include "mimic/scoreboard.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "mimic/errors.hpp"

namespace mimic::scoreboard {

long long PairScore::win_b() const {
    return static_cast<long long>(b_wins) - static_cast<long long>(a_wins);
}

double PairScore::win_b_fraction() const {
    std::size_t t = total();
    return t == 0 ? 0.0 : static_cast<double>(win_b()) / static_cast<double>(t);
}

PairScore& PairScore::operator+=(const PairScore& other) {
    if (model_a != other.model_a || model_b != other.model_b) {
        throw Error("cannot combine scores of different pairs (" + model_a + " vs " + model_b +
                    " and " + other.model_a + " vs " + other.model_b + ")");
    }
    a_wins += other.a_wins;
    b_wins += other.b_wins;
    equals += other.equals;
    invalids += other.invalids;
    n_samples += other.n_samples;
    return *this;
}

PairScore aggregate_style(const std::string& model_a, const std::string& model_b,
                          const std::vector<judge::StyleJudgement>& judgements) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> coverage;  // id -> (#AB, #BA)
    for (const auto& j : judgements) {
        auto& c = coverage[j.sample_id];
        (j.ordering == judge::Ordering::AB ? c.first : c.second) += 1;
    }
    for (const auto& [id, c] : coverage) {
        if (c.first != c.second) {
            throw IncompleteJudgements("sample " + id + " has " + std::to_string(c.first) +
                                       " AB but " + std::to_string(c.second) + " BA judgements");
        }
    }

    PairScore score;
    score.model_a = model_a;
    score.model_b = model_b;
    score.n_samples = judgements.size() / 2;
    for (const auto& j : judgements) {
        if (!j.verdict) {
            ++score.invalids;
            continue;
        }
        switch (*j.verdict) {
            case judge::StyleVerdict::Equal:
                ++score.equals;
                break;
            case judge::StyleVerdict::A:
                // under AB the A slot holds model_a, under BA model_b
                (j.ordering == judge::Ordering::AB ? score.a_wins : score.b_wins) += 1;
                break;
            case judge::StyleVerdict::B:
                (j.ordering == judge::Ordering::AB ? score.b_wins : score.a_wins) += 1;
                break;
        }
    }
    return score;
}

FactCounts& FactCounts::operator+=(const FactCounts& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    return *this;
}

Metrics prf1(const FactCounts& counts) {
    Metrics m;
    const double tp = static_cast<double>(counts.tp);
    m.precision = (counts.tp + counts.fp == 0) ? 0.0 : tp / double(counts.tp + counts.fp);
    m.recall = (counts.tp + counts.fn == 0) ? 0.0 : tp / double(counts.tp + counts.fn);
    m.f1 = (m.precision + m.recall == 0.0)
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

std::pair<FactCounts, FactCounts> counts_from_extractions(
    const std::vector<judge::FactJudgement>& extractions) {
    FactCounts x, y;
    for (const auto& j : extractions) {
        if (!j.extraction) continue;
        const judge::FactExtraction& e = *j.extraction;
        FactCounts slot_a{e.matched_a.size(), e.extra_a.size(),
                          e.original_facts.size() - e.matched_a.size()};
        FactCounts slot_b{e.matched_b.size(), e.extra_b.size(),
                          e.original_facts.size() - e.matched_b.size()};
        if (j.ordering == judge::Ordering::AB) {
            x += slot_a;
            y += slot_b;
        } else {
            x += slot_b;
            y += slot_a;
        }
    }
    return {x, y};
}

NoiseEstimate& NoiseEstimate::operator+=(const NoiseEstimate& other) {
    differing += other.differing;
    total += other.total;
    return *this;
}

NoiseEstimate estimate_noise(std::size_t differing, std::size_t total) {
    return {differing, total};
}

namespace {

std::string verdict_key(const std::optional<judge::StyleVerdict>& v) {
    if (!v) return "invalid";
    switch (*v) {
        case judge::StyleVerdict::A: return "A";
        case judge::StyleVerdict::B: return "B";
        case judge::StyleVerdict::Equal: return "=";
    }
    return "invalid";
}

}  // namespace

NoiseEstimate estimate_noise(const std::vector<judge::StyleJudgement>& run1,
                             const std::vector<judge::StyleJudgement>& run2) {
    using Key = std::pair<std::string, judge::Ordering>;
    auto index = [](const std::vector<judge::StyleJudgement>& run) {
        std::map<Key, std::string> out;
        for (const auto& j : run) out[{j.sample_id, j.ordering}] = verdict_key(j.verdict);
        return out;
    };
    std::map<Key, std::string> first = index(run1);
    std::map<Key, std::string> second = index(run2);
    if (first.size() != second.size()) {
        throw KeyMismatch("run1 has " + std::to_string(first.size()) + " keys, run2 " +
                          std::to_string(second.size()));
    }
    NoiseEstimate noise;
    for (const auto& [key, verdict] : first) {
        auto it = second.find(key);
        if (it == second.end()) {
            throw KeyMismatch("run2 is missing " + key.first + "/" +
                              judge::to_string(key.second));
        }
        ++noise.total;
        if (it->second != verdict) ++noise.differing;
    }
    return noise;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error("normal_quantile needs p in (0,1)");
    // Acklam's rational approximation
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double q, r;
    if (p < p_low) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        q = p - 0.5;
        r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

double z_value(double confidence) {
    const double eps = 1e-9;
    if (std::abs(confidence - 0.90) < eps) return 1.645;
    if (std::abs(confidence - 0.95) < eps) return 1.96;
    if (std::abs(confidence - 0.99) < eps) return 2.576;
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw Error("confidence must be in (0,1)");
    }
    return normal_quantile(0.5 + confidence / 2.0);  // two-sided
}

SignificanceVerdict significance(const PairScore& score, double noise_rate, double confidence) {
    SignificanceVerdict verdict;
    verdict.confidence = confidence;
    verdict.threshold_fraction = noise_rate * z_value(confidence);
    verdict.margin_fraction = std::abs(score.win_b_fraction());
    if (score.total() > 0 && verdict.margin_fraction > verdict.threshold_fraction) {
        verdict.winner = score.b_wins > score.a_wins ? score.model_b : score.model_a;
    }
    return verdict;
}

SignificanceVerdict significance(const PairScore& score, const NoiseEstimate& noise,
                                 double confidence) {
    return significance(score, noise.rate(), confidence);
}

F1Diff f1_diff(const std::string& model_x, const Metrics& metrics_x, const std::string& model_y,
               const Metrics& metrics_y) {
    F1Diff diff;
    diff.diff_pp = std::abs(metrics_x.f1 - metrics_y.f1) * 100.0;
    if (metrics_x.f1 > metrics_y.f1) diff.winner = model_x;
    else if (metrics_y.f1 > metrics_x.f1) diff.winner = model_y;
    return diff;
}

namespace {

// directed edges winner -> loser over significant pairs
struct Digraph {
    std::map<std::string, std::set<std::string>> beats;
    std::map<std::string, std::set<std::string>> beaten_by;
};

void find_cycles(const Digraph& graph, const std::vector<std::string>& models,
                 std::vector<std::vector<std::string>>& cycles) {
    // DFS back edges; each yields one reported cycle
    std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
    std::vector<std::string> stack;

    std::function<void(const std::string&)> visit = [&](const std::string& node) {
        state[node] = 1;
        stack.push_back(node);
        auto it = graph.beats.find(node);
        if (it != graph.beats.end()) {
            for (const std::string& next : it->second) {
                if (state[next] == 0) {
                    visit(next);
                } else if (state[next] == 1) {
                    auto from = std::find(stack.begin(), stack.end(), next);
                    cycles.emplace_back(from, stack.end());
                }
            }
        }
        stack.pop_back();
        state[node] = 2;
    };
    for (const std::string& m : models) {
        if (state[m] == 0) visit(m);
    }
}

}  // namespace

Ranking tournament(const std::vector<std::string>& models,
                   const std::vector<TournamentEntry>& entries) {
    std::map<std::pair<std::string, std::string>, const TournamentEntry*> by_pair;
    for (const auto& entry : entries) {
        by_pair[{entry.score.model_a, entry.score.model_b}] = &entry;
        by_pair[{entry.score.model_b, entry.score.model_a}] = &entry;
    }
    for (std::size_t i = 0; i < models.size(); ++i) {
        for (std::size_t k = i + 1; k < models.size(); ++k) {
            if (by_pair.find({models[i], models[k]}) == by_pair.end()) {
                throw MissingPair(models[i], models[k]);
            }
        }
    }

    Digraph graph;
    Ranking ranking;
    for (const std::string& m : models) ranking.copeland[m] = 0;
    for (const auto& entry : entries) {
        if (!entry.verdict.winner) continue;
        const std::string& winner = *entry.verdict.winner;
        const std::string& loser =
            (winner == entry.score.model_a) ? entry.score.model_b : entry.score.model_a;
        graph.beats[winner].insert(loser);
        graph.beaten_by[loser].insert(winner);
        ranking.copeland[winner] += 1;
        ranking.copeland[loser] -= 1;
    }

    find_cycles(graph, models, ranking.cycles);

    if (ranking.cycles.empty()) {
        // peel undominated layers (Kahn); each layer is a tie tier
        std::set<std::string> remaining(models.begin(), models.end());
        while (!remaining.empty()) {
            std::vector<std::string> tier;
            for (const std::string& m : remaining) {
                auto it = graph.beaten_by.find(m);
                bool dominated = false;
                if (it != graph.beaten_by.end()) {
                    for (const std::string& winner : it->second) {
                        if (remaining.count(winner)) {
                            dominated = true;
                            break;
                        }
                    }
                }
                if (!dominated) tier.push_back(m);
            }
            for (const std::string& m : tier) remaining.erase(m);
            ranking.tiers.push_back(std::move(tier));
        }
    } else {
        // Copeland fallback, equal scores share a tier
        std::vector<std::string> order(models.begin(), models.end());
        std::stable_sort(order.begin(), order.end(), [&](const std::string& l, const std::string& r) {
            return ranking.copeland[l] > ranking.copeland[r];
        });
        for (const std::string& m : order) {
            if (!ranking.tiers.empty() &&
                ranking.copeland[ranking.tiers.back().front()] == ranking.copeland[m]) {
                ranking.tiers.back().push_back(m);
            } else {
                ranking.tiers.push_back({m});
            }
        }
    }
    return ranking;
}

}  // namespace mimic::scoreboard
