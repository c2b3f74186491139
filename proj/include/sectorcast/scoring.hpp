#pragma once

// Validation score and k-fold cross-validation for count predictors. The
// score averages exp(-|error| / denom) over samples, denom being the mean
// actual count floored at 1, so empty sectors cannot divide by zero.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "boosting.hpp"
#include "rng.hpp"

namespace sectorcast {

struct EmptyArrays : std::runtime_error {
  EmptyArrays() : std::runtime_error("score needs at least one sample") {}
};

struct LengthMismatch : std::runtime_error {
  LengthMismatch(std::size_t a, std::size_t p)
      : std::runtime_error("actual has " + std::to_string(a) + " entries, predicted has " +
                           std::to_string(p)) {}
};

struct DatasetTooSmall : std::runtime_error {
  DatasetTooSmall(std::size_t n, int k)
      : std::runtime_error("cannot split " + std::to_string(n) + " samples into " +
                           std::to_string(k) + " folds") {}
};

inline double score_scc(const std::vector<double>& actual, const std::vector<double>& predicted) {
  if (actual.empty() || predicted.empty()) throw EmptyArrays();
  if (actual.size() != predicted.size()) throw LengthMismatch(actual.size(), predicted.size());

  const double n = static_cast<double>(actual.size());
  double mean = std::accumulate(actual.begin(), actual.end(), 0.0) / n;
  double denom = mean > 1.0 ? mean : 1.0;
  double sum = 0;
  for (std::size_t i = 0; i < actual.size(); ++i)
    sum += std::exp(-std::abs(actual[i] - predicted[i]) / denom);
  return sum / n;
}

struct CVReport {
  int k = 0;
  std::vector<std::vector<std::size_t>> folds;  // sample indices per fold
  std::vector<double> per_fold_score;
  double mean_score = 0;
};

// Seeded shuffle, then round-robin assignment: fold sizes differ by at most
// one and the same seed always reproduces the same membership. Each fold is
// scored with its own samples as the validation set, so the score
// denominator is fold-local.
inline CVReport cross_validate(const std::vector<std::vector<double>>& features,
                               const std::vector<double>& targets, int k,
                               const BoostConfig& config, std::uint64_t seed,
                               FeatureSchema schema = {}) {
  if (k < 2) throw std::invalid_argument("cross-validation needs k >= 2");
  if (targets.size() < static_cast<std::size_t>(k)) throw DatasetTooSmall(targets.size(), k);
  if (features.size() != targets.size())
    throw std::invalid_argument("feature and target counts differ");

  std::vector<std::size_t> perm(targets.size());
  std::iota(perm.begin(), perm.end(), 0u);
  SplitMix64 rng(seed);
  rng.shuffle(perm);

  CVReport report;
  report.k = k;
  report.folds.assign(static_cast<std::size_t>(k), {});
  for (std::size_t j = 0; j < perm.size(); ++j)
    report.folds[j % static_cast<std::size_t>(k)].push_back(perm[j]);

  for (const auto& fold : report.folds) {
    std::vector<bool> held(targets.size(), false);
    for (std::size_t i : fold) held[i] = true;

    std::vector<std::vector<double>> train_x;
    std::vector<double> train_y;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (held[i]) continue;
      train_x.push_back(features[i]);
      train_y.push_back(targets[i]);
    }
    BoostedModel model = train_boosted(train_x, train_y, config, schema);

    std::vector<double> actual, predicted;
    for (std::size_t i : fold) {
      actual.push_back(targets[i]);
      predicted.push_back(model.predict(features[i]).count);
    }
    report.per_fold_score.push_back(score_scc(actual, predicted));
  }
  report.mean_score =
      std::accumulate(report.per_fold_score.begin(), report.per_fold_score.end(), 0.0) /
      static_cast<double>(k);
  return report;
}

}  // namespace sectorcast
