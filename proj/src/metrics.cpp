#include "gxai/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gxai {

void ScoredSet::validate() const {
  if (scores.size() != labels.size())
    throw std::invalid_argument("ScoredSet: scores/labels length mismatch");
  for (double s : scores)
    if (!std::isfinite(s)) throw std::invalid_argument("ScoredSet: non-finite score");
  for (int y : labels)
    if (y != 0 && y != 1) throw std::invalid_argument("ScoredSet: label not in {0,1}");
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;  // mean of 1-based ranks i+1..j+1
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double auroc(const ScoredSet& s) {
  s.validate();
  const long npos = std::count(s.labels.begin(), s.labels.end(), 1);
  const long nneg = static_cast<long>(s.labels.size()) - npos;
  if (npos == 0 || nneg == 0)
    throw std::invalid_argument("auroc: both classes must be present");
  const std::vector<double> ranks = average_ranks(s.scores);
  double rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < s.labels.size(); ++i)
    if (s.labels[i] == 1) rank_sum_pos += ranks[i];
  const double wins = rank_sum_pos - 0.5 * static_cast<double>(npos) * (npos + 1);
  return wins / (static_cast<double>(npos) * static_cast<double>(nneg));
}

double auprc(const ScoredSet& s) {
  s.validate();
  const long npos = std::count(s.labels.begin(), s.labels.end(), 1);
  if (npos == 0) throw std::invalid_argument("auprc: no positives");
  const std::size_t n = s.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s.scores[a] > s.scores[b];
  });
  double ap = 0.0;
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;  // group of tied scores
    while (j + 1 < n && s.scores[order[j + 1]] == s.scores[order[i]]) ++j;
    long dtp = 0, dfp = 0;
    for (std::size_t k = i; k <= j; ++k)
      (s.labels[order[k]] == 1 ? dtp : dfp)++;
    tp += dtp;
    fp += dfp;
    if (dtp > 0) {
      const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
      ap += precision * static_cast<double>(dtp) / static_cast<double>(npos);
    }
    i = j + 1;
  }
  return ap;
}

MetricsReport confusion_metrics(const ScoredSet& s, double threshold) {
  s.validate();
  if (s.size() == 0) throw std::invalid_argument("confusion_metrics: empty set");
  MetricsReport r;
  r.threshold = threshold;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool pred = s.scores[i] >= threshold;
    if (pred && s.labels[i] == 1) ++r.tp;
    else if (pred && s.labels[i] == 0) ++r.fp;
    else if (!pred && s.labels[i] == 1) ++r.fn;
    else ++r.tn;
  }
  const long n = r.tp + r.fp + r.tn + r.fn;
  r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(n);
  auto ratio = [&r](long num, long den) {
    if (den == 0) { r.degenerate = true; return 0.0; }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  r.sensitivity = ratio(r.tp, r.tp + r.fn);
  r.specificity = ratio(r.tn, r.tn + r.fp);
  r.f1 = ratio(2 * r.tp, 2 * r.tp + r.fp + r.fn);
  return r;
}

MetricsReport evaluate(const ScoredSet& s, double threshold) {
  MetricsReport r = confusion_metrics(s, threshold);
  r.auroc = auroc(s);
  r.auprc = auprc(s);
  return r;
}

double optimal_threshold(const ScoredSet& val) {
  val.validate();
  const long npos = std::count(val.labels.begin(), val.labels.end(), 1);
  if (npos == 0 || npos == static_cast<long>(val.size()))
    throw std::invalid_argument("optimal_threshold: both classes must be present");

  std::vector<double> distinct = val.scores;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> candidates;
  candidates.push_back(distinct.front() - 1.0);  // predict-all-positive sentinel
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
    candidates.push_back(0.5 * (distinct[i] + distinct[i + 1]));
  candidates.push_back(distinct.back() + 1.0);  // predict-all-negative sentinel

  double best_t = candidates.front();
  double best_f1 = -1.0, best_sens = -1.0;
  for (double t : candidates) {
    const MetricsReport r = confusion_metrics(val, t);
    const bool better =
        r.f1 > best_f1 ||
        (r.f1 == best_f1 && (r.sensitivity > best_sens ||
                             (r.sensitivity == best_sens && t < best_t)));
    if (better) {
      best_f1 = r.f1;
      best_sens = r.sensitivity;
      best_t = t;
    }
  }
  return best_t;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("spearman: length mismatch");
  if (a.size() < 3) throw std::invalid_argument("spearman: need length >= 3");
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) { ma += ra[i]; mb += rb[i]; }
  ma /= n;
  mb /= n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0)
    throw std::invalid_argument("spearman: zero rank variance");
  return cov / std::sqrt(va * vb);
}

}  // namespace gxai
