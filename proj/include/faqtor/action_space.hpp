#pragma once

#include <span>
#include <vector>

namespace faqtor {

// Cartesian product of D discrete sub-action spaces.  Joint indices are
// mixed-radix with dimension 0 most significant, matching the enumeration
// (a_1=0,a_2=0), (a_1=0,a_2=1), ... used throughout the fixtures.
class FactoredActionSpace {
 public:
  explicit FactoredActionSpace(std::vector<int> cardinalities);

  int dims() const { return static_cast<int>(cards_.size()); }
  int total() const { return total_; }
  int cardinality(int d) const { return cards_[d]; }
  const std::vector<int>& cardinalities() const { return cards_; }

  // Mixed-radix encode; throws std::out_of_range naming the offending
  // dimension on a bad sub-action.
  int action_index(std::span<const int> subactions) const;

  std::vector<int> decompose_action(int index) const;

  // Sub-action of `index` along dimension d.
  int sub_action(int index, int d) const;

  bool operator==(const FactoredActionSpace& o) const {
    return cards_ == o.cards_;
  }

 private:
  std::vector<int> cards_;
  std::vector<int> place_;  // place_[d] = product of cards after d
  int total_;
};

}  // namespace faqtor
