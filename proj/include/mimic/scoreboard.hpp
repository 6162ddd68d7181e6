#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mimic/judge.hpp"

namespace mimic::scoreboard {

/// Aggregated verdict counts for one model pair, positions normalized
/// away: a_wins always credits model_a regardless of slot order.
struct PairScore {
    std::string model_a;
    std::string model_b;
    std::size_t a_wins = 0;
    std::size_t b_wins = 0;
    std::size_t equals = 0;
    std::size_t invalids = 0;
    std::size_t n_samples = 0;  // judgements / 2

    std::size_t total() const { return a_wins + b_wins + equals + invalids; }
    long long win_b() const;           // b_wins - a_wins, the WinB column
    double win_b_fraction() const;     // win_b / total, signed
    PairScore& operator+=(const PairScore& other);  // same pair, e.g. repeated runs
};

/// Sums per-model credits across both orderings. Throws
/// IncompleteJudgements when any sample lacks its AB/BA counterpart.
PairScore aggregate_style(const std::string& model_a, const std::string& model_b,
                          const std::vector<judge::StyleJudgement>& judgements);

struct FactCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    FactCounts& operator+=(const FactCounts& other);
};

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// precision = tp/(tp+fp), recall = tp/(tp+fn), f1 = harmonic mean;
/// every 0/0 collapses to 0.
Metrics prf1(const FactCounts& counts);

/// Maps each extraction's slot counts back to the models through its
/// ordering and sums. Invalid extractions are skipped. Returns
/// (counts for x, counts for y) where x is the model in slot A under AB.
std::pair<FactCounts, FactCounts> counts_from_extractions(
    const std::vector<judge::FactJudgement>& extractions);

struct NoiseEstimate {
    std::size_t differing = 0;
    std::size_t total = 0;

    double rate() const { return total == 0 ? 0.0 : double(differing) / double(total); }
    NoiseEstimate& operator+=(const NoiseEstimate& other);
};

NoiseEstimate estimate_noise(std::size_t differing, std::size_t total);

/// Compares two runs of the same pair keyed by (sample_id, ordering);
/// differing = keys whose verdicts disagree. Throws KeyMismatch when the
/// runs cover different keys.
NoiseEstimate estimate_noise(const std::vector<judge::StyleJudgement>& run1,
                             const std::vector<judge::StyleJudgement>& run2);

/// Two-sided z for a confidence level. 0.90/0.95/0.99 use the fixed
/// values 1.645/1.96/2.576; anything else goes through the standard
/// normal quantile.
double z_value(double confidence);

/// Standard normal quantile (Acklam's rational approximation, |e|<1e-8).
double normal_quantile(double p);

struct SignificanceVerdict {
    std::optional<std::string> winner;  // empty = within noise
    double margin_fraction = 0.0;       // |a_wins - b_wins| / total
    double threshold_fraction = 0.0;    // noise rate x z(confidence)
    double confidence = 0.0;
};

SignificanceVerdict significance(const PairScore& score, double noise_rate, double confidence);
SignificanceVerdict significance(const PairScore& score, const NoiseEstimate& noise,
                                 double confidence);

struct F1Diff {
    double diff_pp = 0.0;  // |f1_x - f1_y| in percentage points
    std::optional<std::string> winner;
};

/// Pair-local pseudo-F1 difference; not comparable across tournaments.
F1Diff f1_diff(const std::string& model_x, const Metrics& metrics_x, const std::string& model_y,
               const Metrics& metrics_y);

struct TournamentEntry {
    PairScore score;
    SignificanceVerdict verdict;
};

struct Ranking {
    /// Best first; each tier holds mutually-insignificant models.
    std::vector<std::vector<std::string>> tiers;
    std::map<std::string, long long> copeland;  // significant wins - losses
    std::vector<std::vector<std::string>> cycles;
    bool has_cycle() const { return !cycles.empty(); }
};

/// Builds the significant-win digraph over a full round-robin and ranks
/// it: peeling layers of undominated models when acyclic, Copeland
/// order with the cycles reported when not. Throws MissingPair when a
/// pair has no entry.
Ranking tournament(const std::vector<std::string>& models,
                   const std::vector<TournamentEntry>& entries);

}  // namespace mimic::scoreboard
