#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "giff/errors.hpp"
#include "giff/intervention.hpp"
#include "oracles.hpp"

using namespace giff;
using doctest::Approx;

namespace {

const char* kHeader = "household_id,entry_date,prob_prev,prob_es,prob_th,prob_rrh";

struct Row {
  std::string date;
  std::array<double, 4> p;
  std::string group;
};

InterventionDataset dataset(const std::vector<Row>& rows, SlotCounts slots) {
  std::ostringstream csv;
  csv << kHeader << ",group\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv << "h" << i << ',' << rows[i].date;
    for (double p : rows[i].p) csv << ',' << p;
    csv << ',' << rows[i].group << '\n';
  }
  std::istringstream in(csv.str());
  InterventionDataset ds = parse_household_csv(in);
  ds.slot_totals = slots;
  return ds;
}

// Group A gains most from Prev, so the cost-minimising allocation gives it
// both Prev slots and leaves group B on TH.
InterventionDataset disparity_instance() {
  return dataset({{"2020-01-01", {0.10, 0.9, 0.40, 0.9}, "A"},
                  {"2020-01-01", {0.10, 0.9, 0.40, 0.9}, "A"},
                  {"2020-01-01", {0.40, 0.9, 0.60, 0.9}, "B"},
                  {"2020-01-01", {0.40, 0.9, 0.60, 0.9}, "B"}},
                 {2, 0, 2, 0});
}

double oracle_min_total(const InterventionDataset& ds) {
  oracle::Problem p;
  for (const Household& h : ds.households) {
    p.actions.push_back({0, 1, 2, 3});
    p.scores.push_back({-h.reentry_prob[0], -h.reentry_prob[1], -h.reentry_prob[2], -h.reentry_prob[3]});
  }
  p.use = [](int a) {
    std::vector<double> u(4, 0.0);
    u[static_cast<std::size_t>(a)] = 1.0;
    return u;
  };
  for (auto s : ds.slot_totals) p.capacity.push_back(static_cast<double>(s));
  return -oracle::brute_force(p)->objective;
}

}  // namespace

TEST_CASE("household CSV parsing") {
  std::istringstream in(std::string(kHeader) +
                        ",region\nh1,2021-03-04,0.1,0.2,0.3,0.4,north\n"
                        "h2,2021-03-05,0.5,0.5,0.5,0.5,south\n\"h,3\",2021-02-28,0,1,0.25,0.75,\"north\"\n");
  const InterventionDataset ds = parse_household_csv(in);
  REQUIRE(ds.households.size() == 3);
  CHECK(ds.households[2].id == "h,3");
  CHECK(ds.households[0].reentry_prob[3] == 0.4);
  CHECK(ds.households[1].features.at("region") == "south");
  CHECK(ds.feature_names == std::vector<std::string>{"region"});
  CHECK(ds.usable_features.empty());
  CHECK(std::accumulate(ds.slot_totals.begin(), ds.slot_totals.end(), std::int64_t{0}) == 3);
}

TEST_CASE("household CSV errors carry context") {
  std::istringstream bad_header("household_id,date,prob_prev,prob_es,prob_th,prob_rrh\n");
  CHECK_THROWS_AS(parse_household_csv(bad_header), SchemaError);
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_household_csv(empty), SchemaError);

  std::istringstream bad_prob(std::string(kHeader) + "\nh1,2021-01-01,0.1,1.5,0.1,0.1\n");
  try {
    parse_household_csv(bad_prob);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
    CHECK(e.column() == "prob_es");
  }
  std::istringstream bad_date(std::string(kHeader) + "\nh1,2021-02-30,0.1,0.1,0.1,0.1\n");
  CHECK_THROWS_AS(parse_household_csv(bad_date), ParseError);
  std::istringstream short_row(std::string(kHeader) + "\nh1,2021-01-01,0.1,0.1\n");
  CHECK_THROWS_AS(parse_household_csv(short_row), ParseError);
  CHECK_THROWS_AS(load_household_csv("/nonexistent/households.csv"), SchemaError);
}

TEST_CASE("usable feature filter") {
  std::ostringstream csv;
  csv << kHeader << ",ok,wide,thin\n";
  for (int i = 0; i < 130; ++i) {
    // ok: 2 values x 65; wide: 25 values; thin: 100 vs 30.
    csv << "h" << i << ",2020-01-01,0.1,0.1,0.1,0.1," << (i % 2) << ',' << (i % 25) << ','
        << (i < 100 ? "x" : "y") << '\n';
  }
  std::istringstream in(csv.str());
  const InterventionDataset ds = parse_household_csv(in);
  CHECK(ds.usable_features == std::vector<std::string>{"ok"});
}

TEST_CASE("apportionment") {
  CHECK(apportion(10, {1, 1}) == std::vector<std::int64_t>{5, 5});
  CHECK(apportion(5, {1, 1}) == std::vector<std::int64_t>{3, 2});
  CHECK(apportion(0, {0, 0}) == std::vector<std::int64_t>{0, 0});
  CHECK(apportion(7, {0, 3, 1}) == std::vector<std::int64_t>{0, 5, 2});
  CHECK_THROWS_AS(apportion(3, {0, 0}), SpecError);

  std::mt19937_64 gen(47);
  for (int t = 0; t < 500; ++t) {
    std::vector<std::int64_t> w(1 + gen() % 12);
    for (auto& x : w) x = static_cast<std::int64_t>(gen() % 50);
    w[0] += 1;
    const auto total = static_cast<std::int64_t>(gen() % 10000);
    const auto split = apportion(total, w);
    CHECK(std::accumulate(split.begin(), split.end(), std::int64_t{0}) == total);
    const double denom = static_cast<double>(std::accumulate(w.begin(), w.end(), std::int64_t{0}));
    for (std::size_t i = 0; i < w.size(); ++i) {
      // Largest remainder stays within one unit of the exact quota.
      CHECK(std::abs(static_cast<double>(split[i]) - static_cast<double>(total) * w[i] / denom) < 1.0);
    }
  }
  const auto scaled = scaled_slot_totals(kDefaultSlotTotals, 2000);
  CHECK(std::accumulate(scaled.begin(), scaled.end(), std::int64_t{0}) == 2000);
}

TEST_CASE("windowize") {
  const std::array<double, 4> p{0.1, 0.1, 0.1, 0.1};
  const auto same_day = windowize(dataset({{"2020-05-01", p, "A"}, {"2020-05-01", p, "B"}}, {3, 2, 1, 0}));
  REQUIRE(same_day.size() == 1);
  CHECK(same_day[0].slots == SlotCounts{3, 2, 1, 0});

  // 60 days: two equal halves.
  std::vector<Row> spread;
  for (int d = 0; d < 60; ++d) {
    const int day = 1 + d % 30;
    spread.push_back({std::string(d < 30 ? "2020-04-" : "2020-05-") + (day < 10 ? "0" : "") + std::to_string(day),
                      p, "A"});
  }
  const auto halves = windowize(dataset(spread, {10, 5, 0, 0}));
  REQUIRE(halves.size() == 2);
  CHECK(halves[0].households.size() == 30);
  CHECK(halves[0].slots[0] == 5);
  CHECK(halves[1].slots[0] == 5);
  CHECK(halves[0].slots[1] == 3);
  CHECK(halves[1].slots[1] == 2);

  // Empty buckets are dropped; windows start at the earliest date.
  const auto gaps = windowize(dataset({{"2020-01-10", p, "A"}, {"2020-06-01", p, "B"}}, {2, 0, 0, 0}));
  REQUIRE(gaps.size() == 2);
  CHECK(gaps[0].start == std::chrono::sys_days{std::chrono::year{2020} / 1 / 10});
}

TEST_CASE("windowize conserves slots and households") {
  const InterventionDataset ds = make_synthetic_dataset({700, 2, 5, 0.15});
  for (int days : {1, 7, 30, 90}) {
    const auto windows = windowize(ds, days);
    std::vector<int> seen(ds.households.size(), 0);
    SlotCounts sum{};
    for (const Window& w : windows) {
      CHECK_FALSE(w.households.empty());
      for (std::size_t h : w.households) ++seen[h];
      for (std::size_t k = 0; k < 4; ++k) sum[k] += w.slots[k];
    }
    CHECK(sum == ds.slot_totals);
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  }
}

TEST_CASE("SI-X score") {
  CHECK(si_x_score(-0.3, 0.5, 0.4, 0.3, {1.0}) == Approx(-0.3 + (0.5 - 0.4) * (0.3 - 0.4)));
  CHECK(si_x_score(-0.3, 0.5, 0.4, 0.3, {1.0}) == Approx(-0.31));
  CHECK(si_x_score(-0.7, 0.5, 0.4, 0.3, {0.0}) == -0.7);
  // Worse-off group (re-entry above the mean) and an action that raises it further.
  CHECK(si_x_score(0.0, 0.3, 0.5, 0.7, {1.0}) < 0.0);
}

TEST_CASE("SI-X sign structure over random inputs") {
  std::mt19937_64 gen(53);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    const double zbar = u(gen), zg = u(gen), pr = u(gen), beta = 0.1 + u(gen);
    const double f = si_x_score(0.0, zbar, zg, pr, {beta});
    const double group = zbar - zg, action = pr - zg;
    if (group == 0.0 || action == 0.0) continue;
    CHECK((f > 0.0) == ((group > 0.0) == (action > 0.0)));
    // Worse-off group: discourage actions that raise re-entry, encourage ones that lower it.
    if (group < 0.0 && action > 0.0) CHECK(f < 0.0);
    if (group < 0.0 && action < 0.0) CHECK(f > 0.0);
  }
}

TEST_CASE("baseline minimises re-entry within each window") {
  const InterventionDataset ds = disparity_instance();
  const auto spec = FairnessSpec::neg_gini();
  const InterventionResult r = run_intervention_allocation(ds, "group", InterventionMethod::kBaseline, spec, 0, 0);
  CHECK(r.total_prob == Approx(oracle_min_total(ds)));
  CHECK(r.assignment == std::vector<int>{0, 0, 2, 2});
  CHECK(r.group_means.at("A") == Approx(0.10));
  CHECK(r.group_means.at("B") == Approx(0.60));
  CHECK(r.gini == Approx(oracle::gini({0.10, 0.60})));

  const InterventionDataset synth = make_synthetic_dataset({400, 2, 3, 0.15});
  const auto base = run_intervention_allocation(synth, "group", InterventionMethod::kBaseline, spec, 0, 0);
  const auto zero = run_intervention_allocation(synth, "group", InterventionMethod::kGiff, spec, 0.0, 0.4);
  CHECK(zero.assignment == base.assignment);
  CHECK(zero.total_prob == base.total_prob);
}

TEST_CASE("GIFF near beta 1 narrows the engineered disparity") {
  const InterventionDataset ds = disparity_instance();
  const auto spec = FairnessSpec::neg_gini();
  const auto base = run_intervention_allocation(ds, "group", InterventionMethod::kBaseline, spec, 0, 0);
  const auto fair = run_intervention_allocation(ds, "group", InterventionMethod::kGiff, spec, 0.99, 0.0);
  CHECK(fair.gini < base.gini);
  CHECK(fair.total_prob >= base.total_prob);
}

TEST_CASE("overflow households carry the penalty") {
  const std::array<double, 4> p{0.2, 0.3, 0.4, 0.5};
  const InterventionDataset ds =
      dataset({{"2020-01-01", p, "A"}, {"2020-01-01", p, "A"}, {"2020-01-01", p, "B"}}, {1, 1, 0, 0});
  const auto spec = FairnessSpec::neg_gini();
  const auto r = run_intervention_allocation(ds, "group", InterventionMethod::kBaseline, spec, 0, 0);
  CHECK(std::count(r.assignment.begin(), r.assignment.end(), 4) == 1);
  CHECK(r.total_prob == Approx(0.2 + 0.3 + 1.0));
  InterventionOptions strict;
  strict.allow_overflow = false;
  CHECK_THROWS_AS(run_intervention_allocation(ds, "group", InterventionMethod::kBaseline, spec, 0, 0, strict),
                  InfeasibleWindow);
  CHECK_THROWS_AS(run_intervention_allocation(ds, "missing", InterventionMethod::kBaseline, spec, 0, 0), SpecError);
}

TEST_CASE("synthetic generator") {
  std::ostringstream a, b;
  write_synthetic_households(a, {50, 4, 9, 0.15});
  write_synthetic_households(b, {50, 4, 9, 0.15});
  CHECK(a.str() == b.str());
  const InterventionDataset ds = make_synthetic_dataset({2000, 6, 1, 0.15});
  CHECK(ds.households.size() == 2000);
  CHECK(ds.feature_names == std::vector<std::string>{"group", "f1", "f2", "f3", "f4", "f5"});
  // f5 has 25 values, so it fails the filter.
  CHECK(std::find(ds.usable_features.begin(), ds.usable_features.end(), "f5") == ds.usable_features.end());
  CHECK(std::find(ds.usable_features.begin(), ds.usable_features.end(), "group") != ds.usable_features.end());
  double a_sum = 0, b_sum = 0;
  int a_n = 0, b_n = 0;
  for (const Household& h : ds.households) {
    const double m = (h.reentry_prob[0] + h.reentry_prob[1] + h.reentry_prob[2] + h.reentry_prob[3]) / 4;
    (h.features.at("group") == "A" ? a_sum : b_sum) += m;
    ++(h.features.at("group") == "A" ? a_n : b_n);
  }
  CHECK(b_sum / b_n - a_sum / a_n == Approx(0.15).epsilon(0.1));
  CHECK(parse_intervention_method("si-x") == InterventionMethod::kSiX);
}
