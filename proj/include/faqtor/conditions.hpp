#pragma once

#include <string>
#include <vector>

#include "faqtor/factorization.hpp"
#include "faqtor/mdp.hpp"

namespace faqtor {

// Per-dimension state abstractions phi_d: S -> Z_d.  Each map must be total
// and surjective, and the D maps pairwise distinct as functions.
class AbstractionSet {
 public:
  AbstractionSet(std::vector<std::vector<int>> maps,
                 std::vector<int> abstract_cards);

  // Cardinalities inferred as max + 1 per dimension.
  static AbstractionSet infer(std::vector<std::vector<int>> maps);

  int dims() const { return static_cast<int>(maps_.size()); }
  int n_states() const { return static_cast<int>(maps_[0].size()); }
  int abstract_card(int d) const { return cards_[d]; }
  int map(int d, int s) const { return maps_[d][s]; }

  // Row-major index of the abstract vector z(s), dimension 0 most
  // significant; total_abstract() is prod_d |Z_d|.
  int abstract_index(int s) const;
  int total_abstract() const { return total_; }
  std::vector<int> abstract_vector_of_index(int z_index) const;

 private:
  std::vector<std::vector<int>> maps_;
  std::vector<int> cards_;
  std::vector<int> place_;
  int total_ = 1;
};

enum class ConditionId { transition, reward, policy };

struct ConditionViolation {
  int state = -1;        // witness primitive state (or representative)
  int action = -1;       // witness joint action (-1 if not action-specific)
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  std::string detail;
};

struct ConditionReport {
  ConditionId id = ConditionId::transition;
  bool satisfied = false;
  std::vector<ConditionViolation> violations;
};

// Decision procedure: aggregate T(z'|s,a), require it to depend on s only
// through z(s), build candidate per-dimension marginals, require each to
// depend only on (z_d, a_d), and require their product to reproduce T.
ConditionReport check_transition_condition(const TabularMdp& mdp,
                                           const AbstractionSet& phi,
                                           double tol);

// r must depend on s only through z and admit an additive per-(z_d, a_d)
// decomposition (checked by least squares over indicator features).
ConditionReport check_reward_condition(const TabularMdp& mdp,
                                       const AbstractionSet& phi, double tol);

// pi must depend on s only through z, factor into per-dimension marginals,
// and each marginal may depend only on z_d.  The action space supplies the
// sub-action structure of the policy's columns.
ConditionReport check_policy_condition(const Policy& pi,
                                       const FactoredActionSpace& space,
                                       const AbstractionSet& phi, double tol);

struct Theorem1Report {
  ConditionReport transition;
  ConditionReport reward;
  ConditionReport policy;
  bool guaranteed = false;       // all three conditions hold
  bool evaluated = false;        // decomposability was computed
  DecomposabilityReport decomposability;
  std::string verdict;           // "guaranteed" | "not guaranteed"
};

// When all conditions hold the decomposability of Q^pi is computed and
// asserted (soundness is checked, not assumed).  A failing condition yields
// "not guaranteed" -- never "not decomposable".
Theorem1Report check_theorem1(const TabularMdp& mdp, const Policy& pi,
                              const AbstractionSet& phi, double tol);

}  // namespace faqtor
