#include "eqderiv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace eqderiv {

namespace {

using Counts = std::map<std::vector<std::string>, std::size_t>;

Counts ngrams(const std::vector<std::string>& t, int n) {
  Counts out;
  const auto k = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + k <= t.size(); ++i) ++out[std::vector<std::string>(t.begin() + i, t.begin() + i + k)];
  return out;
}

std::size_t total(const Counts& c) {
  std::size_t s = 0;
  for (const auto& [g, n] : c) s += n;
  return s;
}

std::size_t overlap(const Counts& c, const Counts& r) {
  std::size_t s = 0;
  for (const auto& [g, n] : c) {
    const auto it = r.find(g);
    if (it != r.end()) s += std::min(n, it->second);
  }
  return s;
}

double f1(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream is{std::string(text)};
  std::string tok;
  while (is >> tok) out.push_back(std::move(tok));
  return out;
}

std::string_view rouge_name(RougeVariant v) {
  switch (v) {
    case RougeVariant::One: return "rouge1";
    case RougeVariant::Two: return "rouge2";
    case RougeVariant::L: return "rougeL";
  }
  return "rouge2";
}

std::optional<RougeVariant> rouge_from_name(std::string_view name) {
  if (name == "1" || name == "rouge1") return RougeVariant::One;
  if (name == "2" || name == "rouge2") return RougeVariant::Two;
  if (name == "L" || name == "l" || name == "rougeL") return RougeVariant::L;
  return std::nullopt;
}

double rouge_n(const std::vector<std::string>& c, const std::vector<std::string>& r, int n) {
  const Counts cc = ngrams(c, n);
  const Counts rc = ngrams(r, n);
  const std::size_t tc = total(cc);
  const std::size_t tr = total(rc);
  if (tc == 0 || tr == 0) return 0.0;
  const auto m = static_cast<double>(overlap(cc, rc));
  return f1(m / static_cast<double>(tc), m / static_cast<double>(tr));
}

double rouge_l(const std::vector<std::string>& c, const std::vector<std::string>& r) {
  if (c.empty() || r.empty()) return 0.0;
  std::vector<std::size_t> prev(r.size() + 1, 0), cur(r.size() + 1, 0);
  for (std::size_t i = 1; i <= c.size(); ++i) {
    for (std::size_t j = 1; j <= r.size(); ++j) {
      cur[j] = c[i - 1] == r[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const auto lcs = static_cast<double>(prev[r.size()]);
  return f1(lcs / static_cast<double>(c.size()), lcs / static_cast<double>(r.size()));
}

double rouge(std::string_view candidate, std::string_view reference, RougeVariant v) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  switch (v) {
    case RougeVariant::One: return rouge_n(c, r, 1);
    case RougeVariant::Two: return rouge_n(c, r, 2);
    case RougeVariant::L: return rouge_l(c, r);
  }
  return 0.0;
}

double bleu(const std::vector<std::string>& c, const std::vector<std::string>& r, int max_n) {
  if (max_n < 1) throw std::invalid_argument("bleu order must be at least 1");
  if (c.empty() || r.empty()) return 0.0;
  double log_sum = 0;
  for (int n = 1; n <= max_n; ++n) {
    const Counts cc = ngrams(c, n);
    const auto m = static_cast<double>(overlap(cc, ngrams(r, n)));
    const auto t = static_cast<double>(total(cc));
    if (m == 0 && n == 1) return 0.0;
    const double p = m == 0 ? 1.0 / (t + 1) : m / t;
    log_sum += std::log(p);
  }
  const auto cl = static_cast<double>(c.size());
  const auto rl = static_cast<double>(r.size());
  const double bp = cl < rl ? std::exp(1 - rl / cl) : 1.0;
  return bp * std::exp(log_sum / max_n);
}

double bleu(std::string_view candidate, std::string_view reference, int max_n) {
  return bleu(tokenize(candidate), tokenize(reference), max_n);
}

double gleu(const std::vector<std::string>& c, const std::vector<std::string>& r, int max_n) {
  if (max_n < 1) throw std::invalid_argument("gleu order must be at least 1");
  std::size_t m = 0, tc = 0, tr = 0;
  for (int n = 1; n <= max_n; ++n) {
    const Counts cc = ngrams(c, n);
    const Counts rc = ngrams(r, n);
    m += overlap(cc, rc);
    tc += total(cc);
    tr += total(rc);
  }
  if (tc == 0 || tr == 0) return 0.0;
  const auto md = static_cast<double>(m);
  return std::min(md / static_cast<double>(tc), md / static_cast<double>(tr));
}

double gleu(std::string_view candidate, std::string_view reference, int max_n) {
  return gleu(tokenize(candidate), tokenize(reference), max_n);
}

double perturbation_ratio(double m_pred_pair, double m_truth_pair) {
  if (!(m_truth_pair > 0)) throw ZeroDenominator("ground-truth pair scores 0");
  return m_pred_pair / m_truth_pair;
}

void ScoreWeights::validate() const {
  double s = 0;
  for (double x : w) {
    if (!(x >= 0)) throw std::invalid_argument("score weights must be non-negative");
    s += x;
  }
  if (std::abs(s - 1) > 1e-12) throw std::invalid_argument("score weights must sum to 1");
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
}

double manual_score(const ErrorFlags& x, const ScoreWeights& weights) {
  weights.validate();
  double wx = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    if (x[i] != 0 && x[i] != 1) throw std::invalid_argument("error flags must be 0 or 1");
    wx += weights.w[i] * x[i];
  }
  const double a = weights.alpha;
  return a * std::expm1(std::log((a + 1) / a) * wx);
}

MetricScores score_pair(std::string_view candidate, std::string_view reference, const ScoreOptions& opt) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  MetricScores s;
  switch (opt.rouge) {
    case RougeVariant::One: s.rouge = rouge_n(c, r, 1); break;
    case RougeVariant::Two: s.rouge = rouge_n(c, r, 2); break;
    case RougeVariant::L: s.rouge = rouge_l(c, r); break;
  }
  s.bleu = bleu(c, r, opt.bleu_max_n);
  s.gleu = gleu(c, r, opt.gleu_max_n);
  return s;
}

std::array<double, 8> feature_vector(const MetricScores& scores,
                                     const std::optional<std::array<std::optional<double>, 4>>& ratios) {
  std::array<double, 8> out{scores.rouge, scores.bleu, scores.bleurt.value_or(nan()), scores.gleu,
                            1.0, 1.0, 1.0, 1.0};
  if (ratios) {
    for (std::size_t i = 0; i < 4; ++i) out[4 + i] = (*ratios)[i].value_or(nan());
  }
  return out;
}

std::vector<Prediction> read_predictions(std::istream& is, std::vector<LineError>* errors) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("prediction").get<std::string>()});
    } catch (const std::exception& e) {
      if (!errors) throw RecordError("line " + std::to_string(n) + ": " + e.what());
      errors->push_back({n, e.what()});
    }
  }
  return out;
}

ScoreReport score_records(const std::vector<Prediction>& predictions, const std::vector<PromptRecord>& references,
                          const ScoreOptions& opt, bool pairs, const std::map<std::string, double>& bleurt) {
  ScoreReport report;
  report.options = opt;
  std::map<std::string, const std::string*> pred;
  for (const auto& p : predictions) pred.emplace(p.id, &p.text);
  std::map<std::string, const PromptRecord*> by_id;
  for (const auto& r : references) by_id.emplace(r.id, &r);

  for (const auto& ref : references) {
    const auto it = pred.find(ref.id);
    if (it == pred.end()) {
      report.missing_predictions.push_back(ref.id);
      continue;
    }
    ScoreRow row;
    row.id = ref.id;
    row.static_id = ref.static_id;
    row.perturbation = ref.perturbation;
    row.scores = score_pair(*it->second, ref.target, opt);
    if (const auto b = bleurt.find(ref.id); b != bleurt.end()) row.scores.bleurt = b->second;

    if (pairs && ref.perturbation) {
      const auto s_ref = by_id.find(ref.static_id);
      const auto s_pred = pred.find(ref.static_id);
      if (s_ref == by_id.end() || s_pred == pred.end() || ref.static_id == ref.id) {
        report.unmatched_static.push_back(ref.id);
      } else {
        const MetricScores st = score_pair(*s_pred->second, s_ref->second->target, opt);
        const MetricScores preds = score_pair(*it->second, *s_pred->second, opt);
        const MetricScores truths = score_pair(ref.target, s_ref->second->target, opt);
        std::optional<double> st_bleurt;
        if (const auto b = bleurt.find(ref.static_id); b != bleurt.end()) st_bleurt = b->second;
        row.difference = std::array<double, 4>{
            perf_difference(st.rouge, row.scores.rouge), perf_difference(st.bleu, row.scores.bleu),
            st_bleurt && row.scores.bleurt ? perf_difference(*st_bleurt, *row.scores.bleurt) : nan(),
            perf_difference(st.gleu, row.scores.gleu)};
        std::array<std::optional<double>, 4> ratio;
        const double num[4] = {preds.rouge, preds.bleu, nan(), preds.gleu};
        const double den[4] = {truths.rouge, truths.bleu, nan(), truths.gleu};
        for (std::size_t k = 0; k < 4; ++k) {
          if (k == 2) continue;  // BLEURT of the pairs is not available
          try {
            ratio[k] = perturbation_ratio(num[k], den[k]);
          } catch (const ZeroDenominator&) {
            ++report.zero_denominators[k];
          }
        }
        row.ratio = ratio;
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

Json number_or_null(double x) { return std::isnan(x) ? Json(nullptr) : Json(x); }

Json opt_or_null(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

struct Mean {
  double sum = 0;
  std::size_t n = 0;
  void add(double x) {
    if (std::isnan(x)) return;
    sum += x;
    ++n;
  }
  Json json() const { return n ? Json(sum / static_cast<double>(n)) : Json(nullptr); }
};

constexpr std::array<std::string_view, 4> kMetricNames = {"rouge", "bleu", "bleurt", "gleu"};

}  // namespace

Json report_json(const ScoreReport& report) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["options"] = {{"rouge", std::string(rouge_name(report.options.rouge))},
                  {"bleu_max_n", report.options.bleu_max_n},
                  {"bleu_smoothing", "add-one on orders 2..n without matches"},
                  {"gleu_max_n", report.options.gleu_max_n},
                  {"tokenizer", "whitespace"}};
  Json rows = Json::array();
  Mean means[4];
  std::map<std::string, std::array<Mean, 4>> diff_means, ratio_means;
  for (const auto& r : report.rows) {
    Json row;
    row["id"] = r.id;
    row["static_id"] = r.static_id;
    row["perturbation"] = r.perturbation ? Json(std::string(perturbation_name(*r.perturbation))) : Json(nullptr);
    row["rouge"] = r.scores.rouge;
    row["bleu"] = r.scores.bleu;
    row["gleu"] = r.scores.gleu;
    row["external_bleurt"] = opt_or_null(r.scores.bleurt);
    means[0].add(r.scores.rouge);
    means[1].add(r.scores.bleu);
    means[2].add(r.scores.bleurt.value_or(nan()));
    means[3].add(r.scores.gleu);
    if (r.difference) {
      const std::string kind(perturbation_name(*r.perturbation));
      Json d, q;
      for (std::size_t k = 0; k < 4; ++k) {
        d[std::string(kMetricNames[k])] = number_or_null((*r.difference)[k]);
        q[std::string(kMetricNames[k])] = opt_or_null((*r.ratio)[k]);
        diff_means[kind][k].add((*r.difference)[k]);
        ratio_means[kind][k].add((*r.ratio)[k].value_or(nan()));
      }
      row["difference"] = std::move(d);
      row["ratio"] = std::move(q);
    }
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  Json agg;
  agg["n"] = report.rows.size();
  for (std::size_t k = 0; k < 4; ++k) agg[std::string(kMetricNames[k])] = means[k].json();
  j["aggregates"] = std::move(agg);
  Json pw = Json::object();
  for (const auto& [kind, dm] : diff_means) {
    Json e;
    for (std::size_t k = 0; k < 4; ++k) {
      e["difference"][std::string(kMetricNames[k])] = dm[k].json();
      e["ratio"][std::string(kMetricNames[k])] = ratio_means[kind][k].json();
    }
    e["pairs"] = dm[0].n;
    pw[kind] = std::move(e);
  }
  j["pairwise"] = std::move(pw);
  Json zd;
  for (std::size_t k = 0; k < 4; ++k) zd[std::string(kMetricNames[k])] = report.zero_denominators[k];
  j["zero_denominators"] = std::move(zd);
  j["missing_predictions"] = report.missing_predictions;
  j["unmatched_static"] = report.unmatched_static;
  return j;
}

void write_feature_csv(std::ostream& os, const ScoreReport& report) {
  os << "id";
  for (auto n : kFeatureNames) os << ',' << n;
  os << '\n';
  std::ostringstream num;
  num.imbue(std::locale::classic());
  num.precision(17);
  for (const auto& r : report.rows) {
    // Static rows carry ratio 1; perturbed rows without a static partner have
    // no ratios and are written as NA.
    std::optional<std::array<std::optional<double>, 4>> ratios = r.ratio;
    if (!ratios && r.perturbation) ratios = std::array<std::optional<double>, 4>{};
    const auto f = feature_vector(r.scores, ratios);
    os << r.id;
    for (double x : f) {
      num.str({});
      if (std::isnan(x)) {
        num << "NA";
      } else {
        num << x;
      }
      os << ',' << num.str();
    }
    os << '\n';
  }
}

}  // namespace eqderiv
