#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace giff {

enum class PayoffMode { kCumulative, kAverage };

// Per-agent (or per-group) payoffs accumulated across allocation rounds.
//
// In kCumulative mode values are running sums of rewards. In kAverage mode
// values are running means over `step_count` rounds. The length is fixed at
// construction. Instances are immutable; `update_payoffs` returns a new one.
class PayoffVector {
 public:
  PayoffVector() = default;
  explicit PayoffVector(std::size_t n, PayoffMode mode = PayoffMode::kCumulative);
  PayoffVector(std::vector<double> values, PayoffMode mode, std::int64_t step_count = 0);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  PayoffMode mode() const { return mode_; }
  std::int64_t step_count() const { return step_count_; }
  double total() const;

  friend bool operator==(const PayoffVector&, const PayoffVector&) = default;

 private:
  std::vector<double> values_;
  PayoffMode mode_ = PayoffMode::kCumulative;
  std::int64_t step_count_ = 0;
};

// Throws LengthMismatch if `rewards.size() != z.size()`.
PayoffVector update_payoffs(const PayoffVector& z, std::span<const double> rewards);

enum class FairnessKind { kAlphaFair, kGgf, kNegVariance, kNegGini, kMaximin };

std::string_view to_string(FairnessKind kind);
// Accepts "alpha", "alpha_fair", "ggf", "variance", "neg_variance", "gini",
// "neg_gini", "maximin", "min". Throws SpecError otherwise.
FairnessKind parse_fairness_kind(std::string_view name);

// Which fairness function F is in force. Larger F means fairer.
struct FairnessSpec {
  FairnessKind kind = FairnessKind::kNegVariance;
  double alpha = 1.0;           // kAlphaFair only
  std::vector<double> weights;  // kGgf only, applied to ascending order
  double epsilon_floor = 0.0;   // kAlphaFair: evaluates U_alpha(z + epsilon_floor)

  static FairnessSpec alpha_fair(double alpha, double epsilon_floor = 0.0);
  static FairnessSpec ggf(std::vector<double> weights);
  static FairnessSpec neg_variance();
  static FairnessSpec neg_gini();
  static FairnessSpec maximin();

  // Throws SpecError when the parameters of `kind` are invalid.
  void validate() const;
};

// w_k proportional to n - k + 1, normalised to sum to one.
std::vector<double> linear_ggf_weights(std::size_t n);
std::vector<double> uniform_ggf_weights(std::size_t n);

// z^(1-alpha)/(1-alpha), or log z when alpha == 1. Throws DomainError outside
// the domain (z > 0 when alpha >= 1, z >= 0 otherwise).
double alpha_utility(double alpha, double z);

double evaluate(const FairnessSpec& spec, std::span<const double> z);
double evaluate(const FairnessSpec& spec, const PayoffVector& z);

// Gini index in [0, 1); the negative of the kNegGini fairness value.
double gini_index(std::span<const double> z);
double population_variance(std::span<const double> z);

// Type-erased F used by the GIFF machinery, so callers can substitute an
// instrumented or domain-specific function.
using FairnessFunction = std::function<double(std::span<const double>)>;

// Validates `spec` once and binds it.
FairnessFunction make_fairness_function(FairnessSpec spec);

}  // namespace giff
