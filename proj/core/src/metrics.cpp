#include "catwalk/metrics.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace catwalk {
namespace {

void require_both(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) {
    throw std::invalid_argument("metric needs at least one positive and one negative score");
  }
}

// (score, is_positive) sorted by score descending; ties keep positives first
// only for determinism, tie groups are always processed as a block.
std::vector<std::pair<double, bool>> ranked(std::span<const double> pos,
                                            std::span<const double> neg) {
  std::vector<std::pair<double, bool>> all;
  all.reserve(pos.size() + neg.size());
  for (double s : pos) all.emplace_back(s, true);
  for (double s : neg) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second > b.second;
  });
  return all;
}

}  // namespace

double roc_auc(std::span<const double> positives, std::span<const double> negatives) {
  require_both(positives, negatives);
  // Mann-Whitney: walk tie groups from the top; each positive beats every
  // negative below its group and half of those inside it.
  const auto all = ranked(positives, negatives);
  double wins = 0.0;
  std::size_t neg_remaining = negatives.size();
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    std::size_t p = 0, n = 0;
    while (j < all.size() && all[j].first == all[i].first) {
      (all[j].second ? p : n) += 1;
      ++j;
    }
    neg_remaining -= n;
    wins += static_cast<double>(p) * (static_cast<double>(neg_remaining) + 0.5 * static_cast<double>(n));
    i = j;
  }
  return wins / (static_cast<double>(positives.size()) * static_cast<double>(negatives.size()));
}

double average_precision(std::span<const double> positives, std::span<const double> negatives) {
  require_both(positives, negatives);
  const auto all = ranked(positives, negatives);
  const double total_pos = static_cast<double>(positives.size());
  double tp = 0.0, fp = 0.0, prev_recall = 0.0, ap = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) {
      (all[j].second ? tp : fp) += 1.0;
      ++j;
    }
    const double recall = tp / total_pos;
    ap += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
    i = j;
  }
  return ap;
}

double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw std::invalid_argument("accuracy needs equally sized, non-empty inputs");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace catwalk
