#pragma once

#include <vector>

#include "giff/fairness.hpp"
#include "giff/ids.hpp"

namespace giff {

struct StepRecord {
  int step = 0;
  std::vector<ActionId> joint_action;
  std::vector<double> rewards;
  // Sum of local fairness gains of the chosen allocation against the
  // payoffs at the start of the step.
  double surrogate = 0.0;
};

struct EpisodeResult {
  PayoffVector final_payoffs;
  double utility = 0.0;   // sum of final payoffs
  double fairness = 0.0;  // F(final payoffs)
  std::vector<StepRecord> trajectory;
};

}  // namespace giff
