#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "giff/allocation.hpp"
#include "giff/errors.hpp"
#include "json.hpp"

namespace giff {
namespace {

using nlohmann::json;

const json& require(const json& doc, const char* key) {
  if (!doc.contains(key)) throw SchemaError(std::string("allocation problem is missing '") + key + "'");
  return doc.at(key);
}

}  // namespace

AllocationProblem parse_allocation_problem(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("allocation problem is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("allocation problem must be a JSON object");

  AllocationProblem p;
  try {
    p.n_agents = require(doc, "n_agents").get<std::size_t>();
    const auto sets = require(doc, "action_sets").get<std::vector<std::vector<int>>>();
    const auto scores = require(doc, "scores").get<std::vector<std::vector<double>>>();
    if (sets.size() != p.n_agents || scores.size() != p.n_agents) {
      throw SchemaError("action_sets and scores need one row per agent");
    }
    // Rows are stored sorted by action id; keep each score with its action.
    for (std::size_t i = 0; i < p.n_agents; ++i) {
      if (sets[i].size() != scores[i].size()) {
        throw SchemaError("agent " + std::to_string(i) + " has mismatched action_sets and scores rows");
      }
      std::vector<std::size_t> order(sets[i].size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sets[i][a] < sets[i][b]; });
      std::vector<ActionId> ids;
      std::vector<double> row;
      for (std::size_t k : order) {
        ids.emplace_back(sets[i][k]);
        row.push_back(scores[i][k]);
      }
      p.action_sets.push_back(std::move(ids));
      p.scores.push_back(std::move(row));
    }
    const json& consumption = require(doc, "consumption");
    if (consumption.is_object()) {
      for (const auto& [key, value] : consumption.items()) {
        p.consumption[ActionId(std::stoi(key))] = value.get<std::vector<double>>();
      }
    } else if (consumption.is_array()) {
      // Array form: index = action id.
      for (std::size_t a = 0; a < consumption.size(); ++a) {
        p.consumption[ActionId(static_cast<int>(a))] = consumption[a].get<std::vector<double>>();
      }
    } else {
      throw SchemaError("consumption must be an object keyed by action id or an array");
    }
    p.capacities = require(doc, "capacities").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("allocation problem has a field of the wrong type: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw SchemaError("consumption keys must be integer action ids");
  }
  p.validate();
  return p;
}

AllocationProblem load_allocation_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open allocation problem file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_allocation_problem(text.str());
}

std::string to_json(const AllocationProblem& problem) {
  json doc;
  doc["n_agents"] = problem.n_agents;
  json sets = json::array();
  for (const auto& set : problem.action_sets) {
    json row = json::array();
    for (ActionId a : set) row.push_back(a.value());
    sets.push_back(row);
  }
  doc["action_sets"] = sets;
  doc["scores"] = problem.scores;
  json consumption = json::object();
  for (const auto& [action, use] : problem.consumption) consumption[std::to_string(action.value())] = use;
  doc["consumption"] = consumption;
  doc["capacities"] = problem.capacities;
  return doc.dump(2);
}

std::string to_json(const Allocation& allocation) {
  json doc;
  json assignment = json::array();
  for (ActionId a : allocation.assignment) assignment.push_back(a.value());
  doc["assignment"] = assignment;
  doc["objective"] = allocation.objective;
  return doc.dump(2);
}

}  // namespace giff
