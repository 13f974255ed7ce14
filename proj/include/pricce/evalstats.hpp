#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace pricce {

enum class Polarity { MOS, DMOS };

struct ScorePairs {
  std::vector<double> objective;
  std::vector<double> subjective;
  Polarity subjective_polarity = Polarity::MOS;

  std::size_t n() const noexcept { return objective.size(); }
  /// Throws ParameterError on unequal lengths, n < 4 or non-finite values.
  void validate() const;
};

/// Average (fractional) ranks, 1-based.
std::vector<double> fractional_ranks(std::span<const double> v);
double pearson(std::span<const double> a, std::span<const double> b);

double srocc(const ScorePairs& p);
/// Kendall tau-b.
double krocc(const ScorePairs& p);

struct LogisticFit {
  std::array<double, 5> beta{};
  bool converged = false;
  int iterations = 0;
};

/// Q(s) = b1 * (1/2 - 1/(1 + exp(b2 (s - b3)))) + b4 s + b5
double logistic5(const std::array<double, 5>& beta, double s) noexcept;

/// Least-squares fit of logistic5 mapping objective to subjective. Needs n >= 5.
LogisticFit fit_logistic(const ScorePairs& p);

/// PLCC and RMSE between Q(objective) and subjective.
std::pair<double, double> plcc_rmse(const ScorePairs& p, const LogisticFit& fit);

}  // namespace pricce
