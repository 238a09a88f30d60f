#include "giff/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "giff/errors.hpp"

namespace giff {
namespace {

constexpr double kWeightSumTolerance = 1e-9;

void require_finite(std::span<const double> z, const char* what) {
  for (double v : z) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite payoff");
  }
}

double ggf_value(std::span<const double> weights, std::span<const double> z) {
  if (weights.size() != z.size()) {
    std::ostringstream msg;
    msg << "GGF has " << weights.size() << " weights but the payoff vector has "
        << z.size() << " entries";
    throw SpecError(msg.str());
  }
  std::vector<double> sorted(z.begin(), z.end());
  std::stable_sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) total += weights[i] * sorted[i];
  return total;
}

}  // namespace

PayoffVector::PayoffVector(std::size_t n, PayoffMode mode) : values_(n, 0.0), mode_(mode) {}

PayoffVector::PayoffVector(std::vector<double> values, PayoffMode mode, std::int64_t step_count)
    : values_(std::move(values)), mode_(mode), step_count_(step_count) {
  if (step_count_ < 0) throw SpecError("PayoffVector step_count must be nonnegative");
  for (double v : values_) {
    if (!std::isfinite(v)) throw SpecError("PayoffVector values must be finite");
  }
}

double PayoffVector::total() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

PayoffVector update_payoffs(const PayoffVector& z, std::span<const double> rewards) {
  if (rewards.size() != z.size()) {
    throw LengthMismatch("update_payoffs: expected " + std::to_string(z.size()) +
                         " rewards, got " + std::to_string(rewards.size()));
  }
  std::vector<double> next(z.values().begin(), z.values().end());
  const std::int64_t steps = z.step_count() + 1;
  for (std::size_t i = 0; i < next.size(); ++i) {
    if (!std::isfinite(rewards[i])) throw DomainError("update_payoffs: non-finite reward");
    if (z.mode() == PayoffMode::kCumulative) {
      next[i] += rewards[i];
    } else {
      next[i] = (next[i] * static_cast<double>(z.step_count()) + rewards[i]) /
                static_cast<double>(steps);
    }
  }
  return PayoffVector(std::move(next), z.mode(), steps);
}

std::string_view to_string(FairnessKind kind) {
  switch (kind) {
    case FairnessKind::kAlphaFair: return "alpha_fair";
    case FairnessKind::kGgf: return "ggf";
    case FairnessKind::kNegVariance: return "neg_variance";
    case FairnessKind::kNegGini: return "neg_gini";
    case FairnessKind::kMaximin: return "maximin";
  }
  return "unknown";
}

FairnessKind parse_fairness_kind(std::string_view name) {
  if (name == "alpha" || name == "alpha_fair" || name == "alphafair") return FairnessKind::kAlphaFair;
  if (name == "ggf") return FairnessKind::kGgf;
  if (name == "variance" || name == "neg_variance" || name == "negvariance") {
    return FairnessKind::kNegVariance;
  }
  if (name == "gini" || name == "neg_gini" || name == "neggini") return FairnessKind::kNegGini;
  if (name == "maximin" || name == "min") return FairnessKind::kMaximin;
  throw SpecError("unknown fairness kind '" + std::string(name) + "'");
}

FairnessSpec FairnessSpec::alpha_fair(double alpha, double epsilon_floor) {
  FairnessSpec spec;
  spec.kind = FairnessKind::kAlphaFair;
  spec.alpha = alpha;
  spec.epsilon_floor = epsilon_floor;
  spec.validate();
  return spec;
}

FairnessSpec FairnessSpec::ggf(std::vector<double> weights) {
  FairnessSpec spec;
  spec.kind = FairnessKind::kGgf;
  spec.weights = std::move(weights);
  spec.validate();
  return spec;
}

FairnessSpec FairnessSpec::neg_variance() { return FairnessSpec{}; }

FairnessSpec FairnessSpec::neg_gini() {
  FairnessSpec spec;
  spec.kind = FairnessKind::kNegGini;
  return spec;
}

FairnessSpec FairnessSpec::maximin() {
  FairnessSpec spec;
  spec.kind = FairnessKind::kMaximin;
  return spec;
}

void FairnessSpec::validate() const {
  switch (kind) {
    case FairnessKind::kAlphaFair:
      if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw SpecError("alpha must be >= 0");
      if (!(epsilon_floor >= 0.0) || !std::isfinite(epsilon_floor)) {
        throw SpecError("epsilon_floor must be >= 0");
      }
      break;
    case FairnessKind::kGgf: {
      if (weights.empty()) throw SpecError("GGF needs at least one weight");
      double sum = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
          throw SpecError("GGF weights must be finite and >= 0");
        }
        if (i > 0 && weights[i] > weights[i - 1]) throw SpecError("GGF weights must be nonincreasing");
        sum += weights[i];
      }
      if (std::abs(sum - 1.0) > kWeightSumTolerance) throw SpecError("GGF weights must sum to 1");
      break;
    }
    case FairnessKind::kNegVariance:
    case FairnessKind::kNegGini:
    case FairnessKind::kMaximin:
      break;
  }
}

std::vector<double> linear_ggf_weights(std::size_t n) {
  std::vector<double> w(n);
  const double denom = static_cast<double>(n * (n + 1)) / 2.0;
  for (std::size_t k = 0; k < n; ++k) w[k] = static_cast<double>(n - k) / denom;
  return w;
}

std::vector<double> uniform_ggf_weights(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

double alpha_utility(double alpha, double z) {
  if (!std::isfinite(z)) throw DomainError("alpha_utility: non-finite argument");
  if (alpha == 1.0) {
    if (!(z > 0.0)) throw DomainError("alpha_utility: log requires z > 0");
    return std::log(z);
  }
  if (alpha > 1.0 ? !(z > 0.0) : !(z >= 0.0)) {
    std::ostringstream msg;
    msg << "alpha_utility: z = " << z << " outside the domain for alpha = " << alpha;
    throw DomainError(msg.str());
  }
  const double e = 1.0 - alpha;
  return std::pow(z, e) / e;
}

double population_variance(std::span<const double> z) {
  if (z.empty()) throw DomainError("variance of an empty vector");
  // Shifted by z[0] so constant vectors give exactly zero.
  const double n = static_cast<double>(z.size());
  double shifted = 0.0;
  for (double v : z) shifted += v - z[0];
  const double mean = shifted / n;
  double ss = 0.0;
  for (double v : z) ss += (v - z[0] - mean) * (v - z[0] - mean);
  return ss / n;
}

double gini_index(std::span<const double> z) {
  if (z.empty()) throw DomainError("Gini of an empty vector");
  std::vector<double> sorted(z.begin(), z.end());
  std::sort(sorted.begin(), sorted.end());
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("Gini requires a positive total payoff");
  // sum_{i,j} |z_i - z_j| = 2 * sum_k (2k - n - 1) z_(k), k = 1..n. The
  // coefficients sum to zero, so shifting by the minimum is free and keeps
  // equal vectors at exactly zero.
  const auto n = static_cast<double>(sorted.size());
  double pairwise = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    pairwise += (2.0 * static_cast<double>(k + 1) - n - 1.0) * (sorted[k] - sorted[0]);
  }
  pairwise *= 2.0;
  return pairwise / (2.0 * n * total);
}

double evaluate(const FairnessSpec& spec, std::span<const double> z) {
  if (z.empty()) throw DomainError("evaluate: empty payoff vector");
  require_finite(z, "evaluate");
  switch (spec.kind) {
    case FairnessKind::kAlphaFair: {
      double total = 0.0;
      for (double v : z) total += alpha_utility(spec.alpha, v + spec.epsilon_floor);
      return total;
    }
    case FairnessKind::kGgf:
      return ggf_value(spec.weights, z);
    case FairnessKind::kNegVariance:
      return -population_variance(z);
    case FairnessKind::kNegGini:
      return -gini_index(z);
    case FairnessKind::kMaximin:
      return *std::min_element(z.begin(), z.end());
  }
  throw SpecError("evaluate: unknown fairness kind");
}

double evaluate(const FairnessSpec& spec, const PayoffVector& z) { return evaluate(spec, z.values()); }

FairnessFunction make_fairness_function(FairnessSpec spec) {
  spec.validate();
  return [spec = std::move(spec)](std::span<const double> z) { return evaluate(spec, z); };
}

}  // namespace giff
