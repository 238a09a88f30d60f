#include "giff/intervention.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/tokenizer.hpp>

#include "giff/allocation.hpp"
#include "giff/errors.hpp"
#include "giff/random.hpp"

namespace giff {
namespace {

using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;

constexpr std::array<const char*, 6> kRequiredColumns = {"household_id", "entry_date", "prob_prev",
                                                          "prob_es",      "prob_th",    "prob_rrh"};

std::vector<std::string> split_csv_line(const std::string& line) {
  Tokenizer tok(line);
  return {tok.begin(), tok.end()};
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  while (!s.empty() && s.front() == ' ') s.erase(s.begin());
  return s;
}

std::chrono::sys_days parse_date(const std::string& text, std::size_t row) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (text.size() != 10 || std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    throw ParseError("entry_date '" + text + "' is not YYYY-MM-DD", row, "entry_date");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw ParseError("entry_date '" + text + "' is not a calendar date", row, "entry_date");
  return std::chrono::sys_days{ymd};
}

double parse_probability(const std::string& text, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError("'" + text + "' is not a number", row, column);
  if (!(v >= 0.0 && v <= 1.0)) throw ParseError("probability " + text + " is outside [0, 1]", row, column);
  return v;
}

// Running group means used for scoring (seeded with prior pseudo-households)
// and the real means that are reported.
struct GroupTracker {
  std::vector<double> sum, count, real_sum, real_count;

  GroupTracker(std::size_t groups, double prior_mean, double prior_weight)
      : sum(groups, prior_mean * prior_weight),
        count(groups, prior_weight),
        real_sum(groups, 0.0),
        real_count(groups, 0.0) {}

  std::vector<double> scoring_means() const {
    std::vector<double> z(sum.size());
    for (std::size_t g = 0; g < z.size(); ++g) z[g] = count[g] > 0.0 ? sum[g] / count[g] : 0.0;
    return z;
  }

  void add(std::size_t g, double p) {
    sum[g] += p;
    count[g] += 1.0;
    real_sum[g] += p;
    real_count[g] += 1.0;
  }
};

}  // namespace

std::vector<std::int64_t> apportion(std::int64_t total, const std::vector<std::int64_t>& weights) {
  if (total < 0) throw SpecError("cannot apportion a negative total");
  std::int64_t denom = 0;
  for (auto w : weights) {
    if (w < 0) throw SpecError("apportionment weights must be >= 0");
    denom += w;
  }
  std::vector<std::int64_t> out(weights.size(), 0);
  if (denom == 0) {
    if (total != 0) throw SpecError("cannot apportion a positive total over zero weight");
    return out;
  }
  std::vector<std::int64_t> remainder(weights.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out[i] = total * weights[i] / denom;
    remainder[i] = total * weights[i] % denom;
    assigned += out[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::int64_t k = 0; k < total - assigned; ++k) ++out[order[static_cast<std::size_t>(k)]];
  return out;
}

SlotCounts scaled_slot_totals(const SlotCounts& totals, std::size_t households) {
  const auto split = apportion(static_cast<std::int64_t>(households), {totals.begin(), totals.end()});
  SlotCounts out{};
  std::copy(split.begin(), split.end(), out.begin());
  return out;
}

std::vector<std::string> usable_features(const InterventionDataset& dataset, const FeatureFilter& filter) {
  std::vector<std::string> out;
  for (const std::string& name : dataset.feature_names) {
    std::map<std::string, std::size_t> counts;
    for (const Household& h : dataset.households) ++counts[h.features.at(name)];
    if (counts.size() < filter.min_unique || counts.size() > filter.max_unique) continue;
    const bool backed = std::all_of(counts.begin(), counts.end(),
                                    [&](const auto& kv) { return kv.second >= filter.min_households_per_value; });
    if (backed) out.push_back(name);
  }
  return out;
}

InterventionDataset parse_household_csv(std::istream& in, const FeatureFilter& filter) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("household file is empty");
  std::vector<std::string> header = split_csv_line(strip(line));
  for (auto& h : header) h = strip(h);
  for (std::size_t c = 0; c < kRequiredColumns.size(); ++c) {
    if (c >= header.size() || header[c] != kRequiredColumns[c]) {
      throw SchemaError(std::string("household file header must start with household_id,entry_date,"
                                    "prob_prev,prob_es,prob_th,prob_rrh; column ") +
                        std::to_string(c + 1) + " should be '" + kRequiredColumns[c] + "'");
    }
  }
  InterventionDataset ds;
  ds.feature_names.assign(header.begin() + kRequiredColumns.size(), header.end());
  std::set<std::string> unique_names(ds.feature_names.begin(), ds.feature_names.end());
  if (unique_names.size() != ds.feature_names.size()) throw SchemaError("duplicate feature column");

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    try {
      cells = split_csv_line(line);
    } catch (const boost::escaped_list_error& e) {
      throw ParseError(std::string("malformed CSV: ") + e.what(), row, "");
    }
    if (cells.size() != header.size()) {
      const std::string column = cells.size() < header.size() ? header[cells.size()] : "<extra>";
      throw ParseError("expected " + std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()),
                       row, column);
    }
    Household h;
    h.id = strip(cells[0]);
    if (h.id.empty()) throw ParseError("empty household id", row, "household_id");
    h.entry_date = parse_date(strip(cells[1]), row);
    for (std::size_t k = 0; k < kInterventionCount; ++k) {
      h.reentry_prob[k] = parse_probability(strip(cells[2 + k]), row, header[2 + k]);
    }
    for (std::size_t f = 0; f < ds.feature_names.size(); ++f) {
      h.features[ds.feature_names[f]] = strip(cells[kRequiredColumns.size() + f]);
    }
    ds.households.push_back(std::move(h));
  }
  ds.slot_totals = scaled_slot_totals(kDefaultSlotTotals, ds.households.size());
  ds.usable_features = usable_features(ds, filter);
  return ds;
}

InterventionDataset load_household_csv(const std::string& path, const FeatureFilter& filter) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open household file '" + path + "'");
  return parse_household_csv(in, filter);
}

std::vector<Window> windowize(const InterventionDataset& dataset, int window_days) {
  if (window_days < 1) throw SpecError("window_days must be >= 1");
  if (dataset.households.empty()) throw SpecError("cannot windowize an empty dataset");
  auto earliest = dataset.households.front().entry_date;
  for (const Household& h : dataset.households) earliest = std::min(earliest, h.entry_date);

  std::map<std::int64_t, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < dataset.households.size(); ++i) {
    const auto offset = (dataset.households[i].entry_date - earliest).count();
    buckets[offset / window_days].push_back(i);
  }
  std::vector<Window> windows;
  std::vector<std::int64_t> sizes;
  for (auto& [bucket, members] : buckets) {
    Window w;
    w.start = earliest + std::chrono::days{bucket * window_days};
    w.households = std::move(members);
    sizes.push_back(static_cast<std::int64_t>(w.households.size()));
    windows.push_back(std::move(w));
  }
  for (std::size_t k = 0; k < kInterventionCount; ++k) {
    const auto split = apportion(dataset.slot_totals[k], sizes);
    for (std::size_t w = 0; w < windows.size(); ++w) windows[w].slots[k] = split[w];
  }
  return windows;
}

double si_x_score(double q, double group_mean_bar, double group_value, double action_prob, const SiXParams& params) {
  return q + params.beta * (group_mean_bar - group_value) * (action_prob - group_value);
}

InterventionMethod parse_intervention_method(const std::string& name) {
  if (name == "baseline") return InterventionMethod::kBaseline;
  if (name == "giff") return InterventionMethod::kGiff;
  if (name == "six" || name == "si_x" || name == "si-x") return InterventionMethod::kSiX;
  throw SpecError("unknown intervention method '" + name + "'");
}

InterventionResult run_intervention_allocation(const InterventionDataset& dataset, const std::string& feature,
                                               InterventionMethod method, const FairnessSpec& spec, double beta,
                                               double delta, const InterventionOptions& options) {
  if (std::find(dataset.feature_names.begin(), dataset.feature_names.end(), feature) ==
      dataset.feature_names.end()) {
    throw SpecError("dataset has no feature '" + feature + "'");
  }
  if (method == InterventionMethod::kSiX && !(beta >= 0.0)) throw SpecError("SI-X beta must be >= 0");
  const GiffParams params{beta, delta, options.counterfactual, options.baseline};
  if (method == InterventionMethod::kGiff) params.validate();
  const FairnessFunction fairness = make_fairness_function(spec);

  std::vector<std::string> group_names;
  for (const Household& h : dataset.households) group_names.push_back(h.features.at(feature));
  std::sort(group_names.begin(), group_names.end());
  group_names.erase(std::unique(group_names.begin(), group_names.end()), group_names.end());
  std::vector<std::size_t> group_of(dataset.households.size());
  double prior = 0.0;
  for (std::size_t i = 0; i < dataset.households.size(); ++i) {
    const Household& h = dataset.households[i];
    group_of[i] = static_cast<std::size_t>(
        std::lower_bound(group_names.begin(), group_names.end(), h.features.at(feature)) - group_names.begin());
    prior += std::accumulate(h.reentry_prob.begin(), h.reentry_prob.end(), 0.0) / kInterventionCount;
  }
  prior /= static_cast<double>(dataset.households.size());
  const double prior_weight = options.prior_weight >= 0.0
                                  ? options.prior_weight
                                  : static_cast<double>(dataset.households.size()) /
                                        static_cast<double>(group_names.size());
  GroupTracker tracker(group_names.size(), prior, prior_weight);

  InterventionResult result;
  result.assignment.assign(dataset.households.size(), -1);
  const ActionId overflow(static_cast<int>(kInterventionCount));

  for (const Window& w : windowize(dataset, options.window_days)) {
    const std::size_t n = w.households.size();
    const std::int64_t slots = std::accumulate(w.slots.begin(), w.slots.end(), std::int64_t{0});
    const bool needs_overflow = static_cast<std::int64_t>(n) > slots;
    if (needs_overflow && !options.allow_overflow) {
      throw InfeasibleWindow("window starting " + std::to_string(w.start.time_since_epoch().count()) + " has " +
                             std::to_string(n) + " households but only " + std::to_string(slots) + " slots");
    }
    auto outcome = [&](std::size_t local, ActionId a) {
      return a == overflow ? options.overflow_penalty
                           : dataset.households[w.households[local]].reentry_prob[a.index()];
    };

    QTable raw(n);
    for (std::size_t j = 0; j < n; ++j) {
      const AgentId agent(static_cast<int>(j));
      for (std::size_t k = 0; k < kInterventionCount; ++k) {
        raw.set(agent, ActionId(static_cast<int>(k)), -outcome(j, ActionId(static_cast<int>(k))));
      }
      if (needs_overflow) raw.set(agent, overflow, -options.overflow_penalty);
    }

    const std::vector<double> z = tracker.scoring_means();
    QTable scored = raw;
    if (method == InterventionMethod::kGiff) {
      GainEvaluator eval(fairness, z, [&](std::vector<double>& v, AgentId agent, double q) {
        const std::size_t g = group_of[w.households[agent.index()]];
        v[g] = (v[g] * tracker.count[g] - q) / (tracker.count[g] + 1.0);
      });
      scored = giff_q(eval, raw, params);
    } else if (method == InterventionMethod::kSiX) {
      const double zbar = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
      for (std::size_t j = 0; j < n; ++j) {
        const AgentId agent(static_cast<int>(j));
        const double zg = z[group_of[w.households[j]]];
        for (const ActionValue& av : raw.actions(agent)) {
          scored.set(agent, av.action, si_x_score(av.q, zbar, zg, outcome(j, av.action), SiXParams{beta}));
        }
      }
    }

    AllocationProblem problem;
    problem.n_agents = n;
    for (std::size_t k = 0; k < kInterventionCount; ++k) {
      problem.capacities.push_back(static_cast<double>(w.slots[k]));
      std::vector<double> use(kInterventionCount, 0.0);
      use[k] = 1.0;
      problem.consumption[ActionId(static_cast<int>(k))] = std::move(use);
    }
    problem.consumption[overflow] = std::vector<double>(kInterventionCount, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<ActionId> ids;
      std::vector<double> scores;
      for (const ActionValue& av : scored.actions(AgentId(static_cast<int>(j)))) {
        ids.push_back(av.action);
        scores.push_back(av.q);
      }
      problem.action_sets.push_back(std::move(ids));
      problem.scores.push_back(std::move(scores));
    }
    const Allocation chosen = solve_bipartite(problem);

    for (std::size_t j = 0; j < n; ++j) {
      const double p = outcome(j, chosen.assignment[j]);
      tracker.add(group_of[w.households[j]], p);
      result.total_prob += p;
      result.assignment[w.households[j]] = chosen.assignment[j].value();
    }
  }

  std::vector<double> means;
  for (std::size_t g = 0; g < group_names.size(); ++g) {
    const double mean = tracker.real_sum[g] / tracker.real_count[g];
    result.group_means[group_names[g]] = mean;
    means.push_back(mean);
  }
  result.gini = gini_index(means);
  return result;
}

void write_synthetic_households(std::ostream& out, const SyntheticHouseholdConfig& config) {
  if (config.features < 1) throw SpecError("synthetic data needs at least the group feature");
  // Unique-value counts of the extra features; 25 exceeds the usable limit.
  constexpr std::array<int, 5> kCardinalities = {2, 3, 5, 8, 25};
  constexpr std::array<double, kInterventionCount> kEffects = {-0.08, 0.06, 0.0, -0.04};
  const std::chrono::sys_days origin{std::chrono::year{2019} / 1 / 1};

  Rng rng(config.seed);
  out << "household_id,entry_date,prob_prev,prob_es,prob_th,prob_rrh,group";
  for (std::size_t f = 1; f < config.features; ++f) out << ",f" << f;
  out << '\n';
  out << std::fixed;
  for (std::size_t i = 0; i < config.households; ++i) {
    const bool disadvantaged = rng.bernoulli(0.5);
    const auto day = rng.uniform_int(0, 364);
    const double base = 0.20 + (disadvantaged ? config.group_gap : 0.0) + rng.normal(0.0, 0.05);
    const std::chrono::year_month_day date{origin + std::chrono::days{day}};
    out << 'H' << std::setw(6) << std::setfill('0') << i + 1 << std::setfill(' ') << ',';
    out << static_cast<int>(date.year()) << '-' << std::setw(2) << std::setfill('0')
        << static_cast<unsigned>(date.month()) << '-' << std::setw(2) << static_cast<unsigned>(date.day())
        << std::setfill(' ');
    out << std::setprecision(6);
    for (std::size_t k = 0; k < kInterventionCount; ++k) {
      const double p = std::clamp(base + kEffects[k] + rng.normal(0.0, 0.04), 0.01, 0.99);
      out << ',' << p;
    }
    out << ',' << (disadvantaged ? 'B' : 'A');
    for (std::size_t f = 1; f < config.features; ++f) {
      const int card = kCardinalities[(f - 1) % kCardinalities.size()];
      out << ",v" << rng.uniform_int(0, card - 1);
    }
    out << '\n';
  }
}

InterventionDataset make_synthetic_dataset(const SyntheticHouseholdConfig& config) {
  std::stringstream buffer;
  write_synthetic_households(buffer, config);
  return parse_household_csv(buffer);
}

}  // namespace giff
