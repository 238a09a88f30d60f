#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "giff/fairness.hpp"
#include "giff/giff.hpp"

namespace giff {

inline constexpr std::size_t kInterventionCount = 4;
// Column order of the probabilities: Prevention, Emergency Shelter,
// Transitional Housing, Rapid Re-Housing.
inline constexpr std::array<const char*, kInterventionCount> kInterventionNames = {"Prev", "ES", "TH", "RRH"};
inline constexpr std::array<std::int64_t, kInterventionCount> kDefaultSlotTotals = {6202, 4441, 2451, 846};

using SlotCounts = std::array<std::int64_t, kInterventionCount>;

struct Household {
  std::string id;
  std::chrono::sys_days entry_date;
  std::array<double, kInterventionCount> reentry_prob{};
  std::map<std::string, std::string> features;
};

struct InterventionDataset {
  std::vector<Household> households;
  std::vector<std::string> feature_names;    // file order
  std::vector<std::string> usable_features;  // pass the grouping filter
  SlotCounts slot_totals{};
};

struct FeatureFilter {
  std::size_t min_unique = 2;
  std::size_t max_unique = 20;
  std::size_t min_households_per_value = 50;
};

// Parses `household_id,entry_date,prob_prev,prob_es,prob_th,prob_rrh,<features>`.
// Slot totals default to kDefaultSlotTotals apportioned to the household
// count. Throws SchemaError for a bad header and ParseError for a bad cell.
InterventionDataset parse_household_csv(std::istream& in, const FeatureFilter& filter = {});
InterventionDataset load_household_csv(const std::string& path, const FeatureFilter& filter = {});

std::vector<std::string> usable_features(const InterventionDataset& dataset, const FeatureFilter& filter = {});

// Largest-remainder split of `total` proportional to `weights`; remainders
// are compared exactly and ties go to the lower index.
std::vector<std::int64_t> apportion(std::int64_t total, const std::vector<std::int64_t>& weights);
// kDefaultSlotTotals rescaled to `households` (per intervention).
SlotCounts scaled_slot_totals(const SlotCounts& totals, std::size_t households);

struct Window {
  std::chrono::sys_days start;
  std::vector<std::size_t> households;  // indices into the dataset, file order
  SlotCounts slots{};
};

// Consecutive buckets of `window_days` from the earliest entry date; empty
// buckets are dropped.
std::vector<Window> windowize(const InterventionDataset& dataset, int window_days = 30);

struct SiXParams {
  double beta = 0.0;
};

// q + beta (group_mean_bar - group_value) (action_prob - group_value).
double si_x_score(double q, double group_mean_bar, double group_value, double action_prob, const SiXParams& params);

enum class InterventionMethod { kBaseline, kGiff, kSiX };
InterventionMethod parse_intervention_method(const std::string& name);

struct InterventionOptions {
  int window_days = 30;
  bool allow_overflow = true;
  double overflow_penalty = 1.0;
  // Pseudo-households at the dataset mean that seed each group's running
  // mean for scoring. Negative selects households / groups.
  double prior_weight = -1.0;
  CounterfactualMode counterfactual = CounterfactualMode::kExact;
  BaselineMode baseline = BaselineMode::kMean;
};

struct InterventionResult {
  std::map<std::string, double> group_means;
  double total_prob = 0.0;
  double gini = 0.0;
  std::vector<int> assignment;  // per household; kInterventionCount marks overflow
};

// Windows are solved in order. Baseline scores are -Pr, GIFF scores are the
// GIFF-modified -Pr against running group means, SI-X scores add the
// group/action advantage product with `beta` as its additive weight.
InterventionResult run_intervention_allocation(const InterventionDataset& dataset, const std::string& feature,
                                               InterventionMethod method, const FairnessSpec& spec, double beta,
                                               double delta, const InterventionOptions& options = {});

struct SyntheticHouseholdConfig {
  std::size_t households = 2000;
  std::size_t features = 3;  // "group" plus f1..f{features-1}
  std::uint64_t seed = 1;
  double group_gap = 0.15;   // extra base re-entry probability of group B
};

void write_synthetic_households(std::ostream& out, const SyntheticHouseholdConfig& config);
InterventionDataset make_synthetic_dataset(const SyntheticHouseholdConfig& config);

}  // namespace giff
