#pragma once

#include <cstdint>
#include <vector>

#include "giff/episode.hpp"
#include "giff/fairness.hpp"
#include "giff/giff.hpp"

namespace giff {

// Dispatch on a line: agents sit at fixed, evenly spaced positions and each
// step a random batch of requests appears, skewed towards the left end. An
// agent that serves a request earns its value minus the travel cost. Agents
// on the right are structurally disadvantaged.
struct MatchingEnvConfig {
  int n_agents = 6;
  int horizon = 50;
  double line_length = 10.0;
  int max_requests = 4;  // per step, uniform on 0..max_requests
  double value_min = 1.0;
  double value_max = 3.0;
  double travel_cost = 0.2;  // per unit distance
  PayoffMode payoff_mode = PayoffMode::kCumulative;

  void validate() const;
};

struct Request {
  double position = 0.0;
  double value = 0.0;
};

std::vector<double> matching_agent_positions(const MatchingEnvConfig& config);
std::vector<Request> matching_requests(const MatchingEnvConfig& config, std::uint64_t seed, int step);

// Myopic value of serving `request` from `position`: value - cost * distance.
double matching_q(const MatchingEnvConfig& config, double position, const Request& request);

// Action 0 is idle; action r + 1 serves request r. Only requests with a
// positive value are offered.
QTable matching_qtable(const MatchingEnvConfig& config, const std::vector<Request>& requests);

EpisodeResult run_matching_episode(const MatchingEnvConfig& config, const FairnessSpec& spec,
                                   const GiffParams& params, std::uint64_t seed);

}  // namespace giff
