#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eqderiv/records.hpp"

namespace eqderiv {

/// Whitespace tokens; metrics never look inside a token.
std::vector<std::string> tokenize(std::string_view text);

enum class RougeVariant { One, Two, L };

std::string_view rouge_name(RougeVariant v);
std::optional<RougeVariant> rouge_from_name(std::string_view name);

/// ROUGE F1. N-gram variants count clipped overlaps; L uses the longest common
/// subsequence. Empty inputs score 0.
double rouge(std::string_view candidate, std::string_view reference, RougeVariant v = RougeVariant::Two);
double rouge_n(const std::vector<std::string>& c, const std::vector<std::string>& r, int n);
double rouge_l(const std::vector<std::string>& c, const std::vector<std::string>& r);

/// BLEU: geometric mean of clipped n-gram precisions times the brevity penalty
/// exp(1 - r/c) for c < r. Orders 2..max_n with no match use (m+1)/(t+1);
/// no unigram match at all scores 0.
double bleu(std::string_view candidate, std::string_view reference, int max_n = 4);
double bleu(const std::vector<std::string>& c, const std::vector<std::string>& r, int max_n = 4);

/// GLEU: min(precision, recall) over the pooled 1..max_n-grams.
double gleu(std::string_view candidate, std::string_view reference, int max_n = 4);
double gleu(const std::vector<std::string>& c, const std::vector<std::string>& r, int max_n = 4);

/// Performance decrease M(s, s^) - M(p, p^).
inline double perf_difference(double m_static, double m_perturbed) { return m_static - m_perturbed; }

class ZeroDenominator : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// M(s^, p^) / M(s, p). Throws ZeroDenominator when M(s, p) is not positive.
double perturbation_ratio(double m_pred_pair, double m_truth_pair);

/// Category flags in the order overall, skip, repeat, incorrect, irrelevant,
/// redundant. 1 means the derivation is free of that error.
using ErrorFlags = std::array<int, 6>;

struct ScoreWeights {
  std::array<double, 6> w{0.2, 0.05, 0.15, 0.25, 0.25, 0.1};
  double alpha = 0.001;

  /// Throws std::invalid_argument unless w >= 0, sum(w) = 1 and alpha > 0.
  void validate() const;
};

/// alpha * (exp(ln((alpha + 1) / alpha) * w.x) - 1).
double manual_score(const ErrorFlags& x, const ScoreWeights& weights = {});

/// Metric scores of one prediction against its reference. BLEURT is supplied
/// from outside and may be absent.
struct MetricScores {
  double rouge = 0;
  double bleu = 0;
  double gleu = 0;
  std::optional<double> bleurt;
};

struct ScoreOptions {
  RougeVariant rouge = RougeVariant::Two;
  int bleu_max_n = 4;
  int gleu_max_n = 4;
};

MetricScores score_pair(std::string_view candidate, std::string_view reference, const ScoreOptions& opt = {});

/// Eight features: rouge, bleu, bleurt, gleu, then the four ratios in the
/// same order. A missing BLEURT value is NaN. Static rows pass no ratios and
/// get 1.0 for all four.
std::array<double, 8> feature_vector(const MetricScores& scores,
                                     const std::optional<std::array<std::optional<double>, 4>>& ratios = {});

inline constexpr std::array<std::string_view, 8> kFeatureNames = {
    "rouge", "bleu", "bleurt", "gleu", "ratio_rouge", "ratio_bleu", "ratio_bleurt", "ratio_gleu"};

struct ScoreRow {
  std::string id;
  std::string static_id;
  std::optional<Perturbation> perturbation;
  MetricScores scores;
  // Pairwise values against the static row, for perturbed rows only.
  std::optional<std::array<double, 4>> difference;             // rouge bleu bleurt gleu
  std::optional<std::array<std::optional<double>, 4>> ratio;   // nullopt entry: excluded
};

struct ScoreReport {
  ScoreOptions options;
  std::vector<ScoreRow> rows;
  std::vector<std::string> missing_predictions;  // reference ids without a prediction
  std::vector<std::string> unmatched_static;     // perturbed rows whose static row is absent
  std::array<std::size_t, 4> zero_denominators{};
};

/// Model output for one prompt record.
struct Prediction {
  std::string id;
  std::string text;
};

/// Reads {"id", "prediction"} JSONL lines.
std::vector<Prediction> read_predictions(std::istream& is, std::vector<LineError>* errors = nullptr);

/// Scores predictions against reference targets. With `pairs`, every
/// perturbed reference whose static record and both predictions are present
/// also gets the pairwise difference and ratio.
ScoreReport score_records(const std::vector<Prediction>& predictions, const std::vector<PromptRecord>& references,
                          const ScoreOptions& opt = {}, bool pairs = false,
                          const std::map<std::string, double>& bleurt = {});

/// Report as JSON: options, rows, and means (pairwise means per perturbation).
Json report_json(const ScoreReport& report);

/// Feature rows as CSV with header "id,<feature names>"; NaN is written "NA".
void write_feature_csv(std::ostream& os, const ScoreReport& report);

}  // namespace eqderiv
