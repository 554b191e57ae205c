#pragma once

#include <cstdint>
#include <vector>

namespace gxai {

/// Scores paired with binary labels; input to every ranking metric.
struct ScoredSet {
  std::vector<double> scores;
  std::vector<int> labels;  // 0/1

  std::size_t size() const { return scores.size(); }
  void validate() const;  // lengths match, labels binary, scores finite
};

/// Confusion-matrix counts and derived classification metrics at one threshold.
struct MetricsReport {
  double accuracy = 0.0;
  double auroc = 0.0;
  double auprc = 0.0;
  double f1 = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double threshold = 0.5;
  long tp = 0, fp = 0, tn = 0, fn = 0;
  bool degenerate = false;  // some denominator was zero; affected metrics reported as 0
};

/// Mann-Whitney AUROC with 0.5 credit for tied pairs. O(n log n) via rank sums.
/// Throws if only one class is present.
double auroc(const ScoredSet& s);

/// Average precision (step integral of the precision-recall curve), ties grouped.
/// Throws if there are no positives.
double auprc(const ScoredSet& s);

/// Predict positive iff score >= threshold; fills counts and count-derived
/// metrics (accuracy, f1, sensitivity, specificity). auroc/auprc are not
/// threshold metrics and are left at 0 here; use evaluate() for the full report.
MetricsReport confusion_metrics(const ScoredSet& s, double threshold);

/// Full report: confusion metrics at the threshold plus auroc and auprc.
MetricsReport evaluate(const ScoredSet& s, double threshold);

/// Threshold maximizing F1, scanning midpoints between consecutive distinct
/// sorted scores plus below-min/above-max sentinels. Ties broken toward higher
/// sensitivity, then lower threshold. Throws on single-class input.
double optimal_threshold(const ScoredSet& val);

/// Tie-aware Spearman rank correlation (Pearson on average ranks).
/// Throws when either vector has zero rank variance or lengths differ / < 3.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

/// Average ranks (1-based, ties share the mean rank). Exposed for reuse.
std::vector<double> average_ranks(const std::vector<double>& v);

}  // namespace gxai
