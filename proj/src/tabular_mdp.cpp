#include "mnlrl/tabular_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

namespace mnlrl {

namespace {

constexpr double kRowTolerance = 1e-12;

std::string pair_name(StateId s, ActionId a) {
  return "(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
}

}  // namespace

TabularMDP::TabularMDP(std::size_t n_states, std::size_t n_actions, std::size_t horizon,
                       StateId initial_state)
    : n_states_(n_states),
      n_actions_(n_actions),
      horizon_(horizon),
      initial_state_(initial_state),
      rows_(n_states * n_actions),
      rewards_(Matrix::Zero(static_cast<Eigen::Index>(n_states),
                            static_cast<Eigen::Index>(n_actions))) {
  if (n_states == 0 || n_actions == 0) {
    throw ConfigError("MDP needs at least one state and one action");
  }
  if (initial_state >= n_states) {
    throw ConfigError("initial state " + std::to_string(initial_state) + " out of range");
  }
}

std::size_t TabularMDP::index(StateId s, ActionId a) const {
  if (s >= n_states_ || a >= n_actions_) {
    throw LookupError("no such state-action pair " + pair_name(s, a));
  }
  return s * n_actions_ + a;
}

void TabularMDP::set_transition(StateId s, ActionId a, std::vector<StateId> targets,
                                std::vector<double> probs) {
  const std::size_t idx = index(s, a);
  if (targets.size() != probs.size()) {
    throw ConfigError("targets/probs length mismatch at " + pair_name(s, a));
  }
  std::vector<std::pair<StateId, double>> entries;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] >= n_states_) {
      throw ConfigError("target state out of range at " + pair_name(s, a));
    }
    if (!(probs[i] >= 0.0) || !std::isfinite(probs[i])) {
      throw ConfigError("invalid probability at " + pair_name(s, a));
    }
    if (probs[i] > 0.0) entries.emplace_back(targets[i], probs[i]);
  }
  std::sort(entries.begin(), entries.end());
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].first == entries[i - 1].first) {
      throw ConfigError("duplicate target at " + pair_name(s, a));
    }
  }
  if (entries.empty()) {
    throw ConfigError("empty reachable set at " + pair_name(s, a));
  }
  TransitionRow row;
  double total = 0.0;
  for (const auto& [target, p] : entries) {
    row.targets.push_back(target);
    row.probs.push_back(p);
    total += p;
  }
  if (std::abs(total - 1.0) > kRowTolerance) {
    throw ConfigError("transition row " + pair_name(s, a) + " sums to " +
                      std::to_string(total));
  }
  rows_[idx] = std::move(row);
}

void TabularMDP::set_reward(StateId s, ActionId a, double r) {
  index(s, a);
  if (!(r >= 0.0 && r <= 1.0)) {
    throw ConfigError("reward at " + pair_name(s, a) + " outside [0, 1]");
  }
  rewards_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = r;
}

void TabularMDP::validate() const {
  for (StateId s = 0; s < n_states_; ++s) {
    for (ActionId a = 0; a < n_actions_; ++a) {
      if (rows_[s * n_actions_ + a].targets.empty()) {
        throw ConfigError("missing transition row " + pair_name(s, a));
      }
    }
  }
}

const TransitionRow& TabularMDP::transition(StateId s, ActionId a) const {
  return rows_[index(s, a)];
}

double TabularMDP::reward(StateId s, ActionId a) const {
  index(s, a);
  return rewards_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
}

double TabularMDP::probability(StateId s, ActionId a, StateId next) const {
  const auto& row = transition(s, a);
  auto it = std::lower_bound(row.targets.begin(), row.targets.end(), next);
  if (it == row.targets.end() || *it != next) return 0.0;
  return row.probs[static_cast<std::size_t>(it - row.targets.begin())];
}

std::size_t TabularMDP::max_reachable() const {
  std::size_t u = 0;
  for (const auto& row : rows_) u = std::max(u, row.targets.size());
  return u;
}

TabularMDP TabularMDP::with_horizon(std::size_t horizon) const {
  TabularMDP copy = *this;
  copy.horizon_ = horizon;
  return copy;
}

nlohmann::json TabularMDP::to_json() const {
  nlohmann::json doc;
  doc["n_states"] = n_states_;
  doc["n_actions"] = n_actions_;
  doc["horizon"] = horizon_;
  doc["initial_state"] = initial_state_;
  auto transitions = nlohmann::json::array();
  auto rewards = nlohmann::json::array();
  for (StateId s = 0; s < n_states_; ++s) {
    for (ActionId a = 0; a < n_actions_; ++a) {
      const auto& row = rows_[s * n_actions_ + a];
      transitions.push_back({{"s", s}, {"a", a}, {"targets", row.targets}, {"probs", row.probs}});
      rewards.push_back({{"s", s}, {"a", a}, {"r", reward(s, a)}});
    }
  }
  doc["transitions"] = std::move(transitions);
  doc["rewards"] = std::move(rewards);
  return doc;
}

TabularMDP TabularMDP::from_json(const nlohmann::json& doc) {
  try {
    TabularMDP mdp(doc.at("n_states").get<std::size_t>(), doc.at("n_actions").get<std::size_t>(),
                   doc.at("horizon").get<std::size_t>(),
                   doc.value("initial_state", std::size_t{0}));
    for (const auto& t : doc.at("transitions")) {
      mdp.set_transition(t.at("s").get<StateId>(), t.at("a").get<ActionId>(),
                         t.at("targets").get<std::vector<StateId>>(),
                         t.at("probs").get<std::vector<double>>());
    }
    if (doc.contains("rewards")) {
      for (const auto& r : doc.at("rewards")) {
        mdp.set_reward(r.at("s").get<StateId>(), r.at("a").get<ActionId>(),
                       r.at("r").get<double>());
      }
    }
    mdp.validate();
    return mdp;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed MDP document: ") + e.what());
  } catch (const LookupError& e) {
    throw ConfigError(std::string("malformed MDP document: ") + e.what());
  }
}

TabularMDP TabularMDP::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open MDP file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

}  // namespace mnlrl
