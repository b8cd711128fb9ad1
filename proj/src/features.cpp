#include "mnlrl/features.hpp"

#include <algorithm>
#include <set>

namespace mnlrl {

namespace {

// Slack for floating-point norms of stored features.
constexpr double kNormSlack = 1e-12;

std::string pair_name(StateId s, ActionId a) {
  return "(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
}

}  // namespace

std::size_t ReachableSet::position(StateId next) const {
  auto it = std::find(members.begin(), members.end(), next);
  return static_cast<std::size_t>(it - members.begin());
}

FeatureMap::FeatureMap(std::size_t dimension, double bound) : dimension_(dimension), bound_(bound) {
  if (!(bound >= 0.0)) throw ConfigError("feature bound must be non-negative");
}

void FeatureMap::add(StateId s, ActionId a, std::vector<StateId> members, Matrix block) {
  if (members.empty()) {
    throw ConfigError("reachable set of " + pair_name(s, a) + " is empty");
  }
  if (std::set<StateId>(members.begin(), members.end()).size() != members.size()) {
    throw ConfigError("duplicate reachable state at " + pair_name(s, a));
  }
  if (block.rows() != static_cast<Eigen::Index>(members.size()) ||
      block.cols() != static_cast<Eigen::Index>(dimension_)) {
    throw DimensionError("feature block of " + pair_name(s, a) + " has shape " +
                         std::to_string(block.rows()) + "x" + std::to_string(block.cols()));
  }
  Entry e{ReachableSet{s, a, std::move(members)}, std::move(block)};
  entries_.insert_or_assign({s, a}, std::move(e));
}

bool FeatureMap::contains(StateId s, ActionId a) const { return entries_.count({s, a}) > 0; }

const FeatureMap::Entry& FeatureMap::entry(StateId s, ActionId a) const {
  auto it = entries_.find({s, a});
  if (it == entries_.end()) throw LookupError("feature map has no entry for " + pair_name(s, a));
  return it->second;
}

const ReachableSet& FeatureMap::reachable(StateId s, ActionId a) const {
  return entry(s, a).reachable;
}

const Matrix& FeatureMap::block(StateId s, ActionId a) const { return entry(s, a).block; }

std::vector<std::pair<StateId, Vector>> FeatureMap::features_for(StateId s, ActionId a) const {
  const Entry& e = entry(s, a);
  std::vector<std::pair<StateId, Vector>> out;
  out.reserve(e.reachable.members.size());
  for (std::size_t i = 0; i < e.reachable.members.size(); ++i) {
    out.emplace_back(e.reachable.members[i], e.block.row(static_cast<Eigen::Index>(i)).transpose());
  }
  return out;
}

std::size_t FeatureMap::max_reachable() const {
  std::size_t u = 0;
  for (const auto& [key, e] : entries_) u = std::max(u, e.reachable.members.size());
  return u;
}

FeatureMap tabular_feature_map(const TabularMDP& mdp) {
  mdp.validate();
  std::size_t d = 0;
  for (StateId s = 0; s < mdp.n_states(); ++s) {
    for (ActionId a = 0; a < mdp.n_actions(); ++a) {
      d += mdp.transition(s, a).targets.size() - 1;
    }
  }

  FeatureMap map(d, 1.0);
  Eigen::Index next_coord = 0;
  for (StateId s = 0; s < mdp.n_states(); ++s) {
    for (ActionId a = 0; a < mdp.n_actions(); ++a) {
      // Targets are ascending, so the anchor (lowest index) is already first.
      const auto& targets = mdp.transition(s, a).targets;
      Matrix block = Matrix::Zero(static_cast<Eigen::Index>(targets.size()),
                                  static_cast<Eigen::Index>(d));
      for (std::size_t i = 1; i < targets.size(); ++i) {
        block(static_cast<Eigen::Index>(i), next_coord++) = 1.0;
      }
      map.add(s, a, targets, std::move(block));
    }
  }
  return map;
}

FeatureDiagnostics validate(const FeatureMap& map) {
  FeatureDiagnostics report;
  report.pairs = map.size();
  for (const auto& [key, e] : map.entries()) {
    const auto& [s, a] = key;
    bool has_zero_anchor = e.block.rows() > 0 && e.block.row(0).isZero(0.0);
    for (Eigen::Index i = 0; i < e.block.rows(); ++i) {
      const double norm = e.block.row(i).norm();
      report.max_norm = std::max(report.max_norm, norm);
      if (norm > map.bound() + kNormSlack) {
        report.within_bound = false;
        report.violations.push_back("feature of " + pair_name(s, a) + " -> s'=" +
                                    std::to_string(e.reachable.members[static_cast<std::size_t>(i)]) +
                                    " has norm " + std::to_string(norm) + " > bound " +
                                    std::to_string(map.bound()));
      }
    }
    if (!has_zero_anchor) {
      report.anchors_zero = false;
      report.violations.push_back("anchor of " + pair_name(s, a) + " is not the zero vector");
    }
  }
  return report;
}

}  // namespace mnlrl
