#pragma once

#include <iosfwd>
#include <string>

#include "faqtor/conditions_fwd.hpp"
#include "faqtor/mdp.hpp"

namespace faqtor {

// Document schema:
//   { "n_states": int, "cardinalities": [int...], "gamma": real,
//     "initial_dist": [real...], "transition": [[[real...]]],  // [s][a][s']
//     "reward": [[real...]] }                                  // [s][a]
// Probabilities are written with round-trip (%.17g) precision.  Writing is
// streamed so large enumerations do not build an in-memory document.
void write_mdp_json(const TabularMdp& mdp, std::ostream& os);
void write_mdp_json_file(const TabularMdp& mdp, const std::string& path);
TabularMdp read_mdp_json(std::istream& is);
TabularMdp read_mdp_json_file(const std::string& path);

// { "deterministic": bool, "probs": [[real...]] } or the shorthand
// { "actions": [int...] } for deterministic policies.
void write_policy_json_file(const Policy& pi, const std::string& path);
Policy read_policy_json_file(const std::string& path, int n_actions);

}  // namespace faqtor
