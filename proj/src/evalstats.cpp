#include "pricce/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "pricce/error.hpp"

namespace pricce {

namespace {

constexpr int kMaxEvaluations = 5000;
constexpr double kTolerance = 1e-8;

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

bool constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

void require_rank_input(const ScorePairs& p) {
  if (p.objective.size() != p.subjective.size()) throw ParameterError("score vectors differ in length");
  if (p.n() < 2) throw ParameterError("at least 2 score pairs are required");
  for (std::size_t i = 0; i < p.n(); ++i) {
    if (!std::isfinite(p.objective[i]) || !std::isfinite(p.subjective[i])) {
      throw ParameterError("score pair " + std::to_string(i) + " is not finite");
    }
  }
  if (constant(p.objective) || constant(p.subjective)) {
    throw DegenerateInputError("correlation is undefined for a constant score vector");
  }
}

struct LogisticResidual : Eigen::DenseFunctor<double> {
  const ScorePairs& p;
  LogisticResidual(const ScorePairs& pairs) : DenseFunctor<double>(5, static_cast<int>(pairs.n())), p(pairs) {}

  int operator()(const InputType& b, ValueType& f) const {
    const std::array<double, 5> beta{b[0], b[1], b[2], b[3], b[4]};
    for (std::size_t i = 0; i < p.n(); ++i) f[static_cast<Eigen::Index>(i)] = logistic5(beta, p.objective[i]) - p.subjective[i];
    return 0;
  }

  int df(const InputType& b, JacobianType& j) const {
    for (std::size_t i = 0; i < p.n(); ++i) {
      const double s = p.objective[i];
      const double e = std::exp(std::clamp(b[1] * (s - b[2]), -700.0, 700.0));
      const double q = 1.0 / (1.0 + e);
      const double dq = e * q * q;  // d/dz of -1/(1+e^z)
      const auto r = static_cast<Eigen::Index>(i);
      j(r, 0) = 0.5 - q;
      j(r, 1) = b[0] * dq * (s - b[2]);
      j(r, 2) = -b[0] * dq * b[1];
      j(r, 3) = s;
      j(r, 4) = 1.0;
    }
    return 0;
  }
};

double sse(const ScorePairs& p, const std::array<double, 5>& beta) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.n(); ++i) {
    const double r = logistic5(beta, p.objective[i]) - p.subjective[i];
    s += r * r;
  }
  return s;
}

LogisticFit run_lm(const ScorePairs& p, const std::array<double, 5>& start) {
  LogisticResidual functor(p);
  Eigen::LevenbergMarquardt<LogisticResidual> lm(functor);
  lm.setMaxfev(kMaxEvaluations);
  lm.setFtol(kTolerance);
  Eigen::VectorXd x(5);
  for (int i = 0; i < 5; ++i) x[i] = start[static_cast<std::size_t>(i)];
  const auto status = lm.minimize(x);
  LogisticFit fit;
  for (int i = 0; i < 5; ++i) fit.beta[static_cast<std::size_t>(i)] = x[i];
  fit.iterations = static_cast<int>(lm.iterations());
  using S = Eigen::LevenbergMarquardtSpace::Status;
  fit.converged = status != S::ImproperInputParameters && status != S::TooManyFunctionEvaluation &&
                  std::all_of(fit.beta.begin(), fit.beta.end(), [](double v) { return std::isfinite(v); }) &&
                  std::isfinite(sse(p, fit.beta));
  return fit;
}

}  // namespace

void ScorePairs::validate() const {
  if (objective.size() != subjective.size()) throw ParameterError("score vectors differ in length");
  if (n() < 4) throw ParameterError("at least 4 score pairs are required, got " + std::to_string(n()));
  for (std::size_t i = 0; i < n(); ++i) {
    if (!std::isfinite(objective[i]) || !std::isfinite(subjective[i])) {
      throw ParameterError("score pair " + std::to_string(i) + " is not finite");
    }
  }
}

std::vector<double> fractional_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw ParameterError("pearson needs two vectors of equal length >= 2");
  const double ma = mean_of(a), mb = mean_of(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw DegenerateInputError("correlation is undefined for a constant vector");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double srocc(const ScorePairs& p) {
  require_rank_input(p);
  return pearson(fractional_ranks(p.objective), fractional_ranks(p.subjective));
}

double krocc(const ScorePairs& p) {
  require_rank_input(p);
  const std::size_t n = p.n();
  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = p.objective[i] - p.objective[j];
      const double dy = p.subjective[i] - p.subjective[j];
      if (dx == 0.0) ++ties_x;
      if (dy == 0.0) ++ties_y;
      if (dx == 0.0 || dy == 0.0) continue;
      ((dx > 0.0) == (dy > 0.0) ? concordant : discordant)++;
    }
  }
  const auto n0 = static_cast<long long>(n * (n - 1) / 2);
  const double denom = std::sqrt(static_cast<double>(n0 - ties_x) * static_cast<double>(n0 - ties_y));
  return static_cast<double>(concordant - discordant) / denom;
}

double logistic5(const std::array<double, 5>& b, double s) noexcept {
  const double z = std::clamp(b[1] * (s - b[2]), -700.0, 700.0);
  return b[0] * (0.5 - 1.0 / (1.0 + std::exp(z))) + b[3] * s + b[4];
}

LogisticFit fit_logistic(const ScorePairs& p) {
  p.validate();
  if (p.n() < 5) throw ParameterError("logistic fit needs at least 5 score pairs, got " + std::to_string(p.n()));
  if (constant(p.objective)) throw DegenerateInputError("logistic fit: objective scores are constant");
  const double mo = mean_of(p.objective), ms = mean_of(p.subjective);
  double var = 0.0;
  for (double v : p.objective) var += (v - mo) * (v - mo);
  const double sd = std::sqrt(var / static_cast<double>(p.n() - 1));
  const auto [lo, hi] = std::minmax_element(p.subjective.begin(), p.subjective.end());
  const std::array<double, 5> start{*hi - *lo, 1.0 / sd, mo, 0.0, ms};
  LogisticFit best = run_lm(p, start);

  // The model nests a straight line; a second start from the least-squares
  // line keeps the fit from ending worse than that line.
  double cov = 0.0;
  for (std::size_t i = 0; i < p.n(); ++i) cov += (p.objective[i] - mo) * (p.subjective[i] - ms);
  const double slope = cov / var;
  const std::array<double, 5> line{0.0, 1.0 / sd, mo, slope, ms - slope * mo};
  LogisticFit alt = run_lm(p, line);
  const double sse_best = best.converged ? sse(p, best.beta) : INFINITY;
  const double sse_alt = alt.converged ? sse(p, alt.beta) : INFINITY;
  if (sse_alt < sse_best) {
    alt.iterations += best.iterations;
    best = alt;
  }
  return best;
}

std::pair<double, double> plcc_rmse(const ScorePairs& p, const LogisticFit& fit) {
  p.validate();
  std::vector<double> mapped(p.n());
  double sq = 0.0;
  for (std::size_t i = 0; i < p.n(); ++i) {
    mapped[i] = logistic5(fit.beta, p.objective[i]);
    sq += (mapped[i] - p.subjective[i]) * (mapped[i] - p.subjective[i]);
  }
  if (constant(mapped)) throw DegenerateInputError("PLCC is undefined: mapped scores are constant");
  return {pearson(mapped, p.subjective), std::sqrt(sq / static_cast<double>(p.n()))};
}

}  // namespace pricce
