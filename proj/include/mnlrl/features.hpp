#pragma once

#include "mnlrl/common.hpp"
#include "mnlrl/tabular_mdp.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mnlrl {

/// Reachable next states of one (state, action) pair. members[0] is the
/// anchor, whose feature vector is pinned to zero.
struct ReachableSet {
  StateId state = 0;
  ActionId action = 0;
  std::vector<StateId> members;

  StateId anchor() const { return members.front(); }
  /// Position of `next` in members, or members.size() when absent.
  std::size_t position(StateId next) const;
};

/// Feature map phi(s, a, s') over reachable next states.
///
/// Each (s, a) owns a block: an |U_{s,a}| x d matrix whose i-th row is the
/// feature of members[i]. Immutable once built, so it can be shared across
/// concurrent replications.
class FeatureMap {
 public:
  FeatureMap(std::size_t dimension, double bound);

  /// Registers the block for (s, a). Rows must follow `members` order, the
  /// member list must be non-empty and duplicate-free.
  void add(StateId s, ActionId a, std::vector<StateId> members, Matrix block);

  std::size_t dimension() const { return dimension_; }
  double bound() const { return bound_; }
  bool contains(StateId s, ActionId a) const;
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  const ReachableSet& reachable(StateId s, ActionId a) const;
  const Matrix& block(StateId s, ActionId a) const;

  /// (next state, feature) pairs in reachable-set order, anchor first.
  std::vector<std::pair<StateId, Vector>> features_for(StateId s, ActionId a) const;

  /// U = max |U_{s,a}|.
  std::size_t max_reachable() const;

  struct Entry {
    ReachableSet reachable;
    Matrix block;
  };
  const std::map<std::pair<StateId, ActionId>, Entry>& entries() const { return entries_; }

 private:
  const Entry& entry(StateId s, ActionId a) const;

  std::size_t dimension_;
  double bound_;
  std::map<std::pair<StateId, ActionId>, Entry> entries_;
};

/// One-hot realizable features for a tabular MDP: every non-anchor
/// (s, a, s') gets its own standard basis vector, anchors get zero.
FeatureMap tabular_feature_map(const TabularMDP& mdp);

struct FeatureDiagnostics {
  std::size_t pairs = 0;
  double max_norm = 0.0;
  bool within_bound = true;
  bool anchors_zero = true;
  std::vector<std::string> violations;

  bool ok() const { return within_bound && anchors_zero; }
};

FeatureDiagnostics validate(const FeatureMap& map);

}  // namespace mnlrl
