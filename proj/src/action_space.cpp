#include "faqtor/action_space.hpp"

#include <stdexcept>
#include <string>

namespace faqtor {

FactoredActionSpace::FactoredActionSpace(std::vector<int> cardinalities)
    : cards_(std::move(cardinalities)) {
  if (cards_.empty())
    throw std::invalid_argument("action space needs at least one dimension");
  for (std::size_t d = 0; d < cards_.size(); ++d) {
    if (cards_[d] < 2)
      throw std::invalid_argument("sub-action space " + std::to_string(d) +
                                  " has cardinality " +
                                  std::to_string(cards_[d]) + " (< 2)");
  }
  place_.assign(cards_.size(), 1);
  for (int d = static_cast<int>(cards_.size()) - 2; d >= 0; --d)
    place_[d] = place_[d + 1] * cards_[d + 1];
  total_ = place_[0] * cards_[0];
}

int FactoredActionSpace::action_index(std::span<const int> subactions) const {
  if (static_cast<int>(subactions.size()) != dims())
    throw std::invalid_argument("expected " + std::to_string(dims()) +
                                " sub-actions, got " +
                                std::to_string(subactions.size()));
  int idx = 0;
  for (int d = 0; d < dims(); ++d) {
    if (subactions[d] < 0 || subactions[d] >= cards_[d])
      throw std::out_of_range("sub-action " + std::to_string(subactions[d]) +
                              " out of range for dimension " +
                              std::to_string(d) + " (cardinality " +
                              std::to_string(cards_[d]) + ")");
    idx += subactions[d] * place_[d];
  }
  return idx;
}

std::vector<int> FactoredActionSpace::decompose_action(int index) const {
  if (index < 0 || index >= total_)
    throw std::out_of_range("joint action index " + std::to_string(index) +
                            " out of range [0, " + std::to_string(total_) +
                            ")");
  std::vector<int> out(cards_.size());
  for (int d = 0; d < dims(); ++d) {
    out[d] = (index / place_[d]) % cards_[d];
  }
  return out;
}

int FactoredActionSpace::sub_action(int index, int d) const {
  return (index / place_[d]) % cards_[d];
}

}  // namespace faqtor
