#pragma once

#include <cstddef>
#include <span>

namespace catwalk {

// Area under the ROC curve from scores of positives and negatives. Ties
// between a positive and a negative count one half. Throws when either class
// is empty.
double roc_auc(std::span<const double> positives, std::span<const double> negatives);

// Average precision: sum over distinct score thresholds (descending) of
// precision times the recall increment. Throws when either class is empty.
double average_precision(std::span<const double> positives, std::span<const double> negatives);

double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> truth);

}  // namespace catwalk
