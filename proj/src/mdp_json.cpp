#include "faqtor/mdp_json.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <stdexcept>

namespace faqtor {

namespace {

using nlohmann::json;

void append_double(std::string& buf, double v) {
  char tmp[32];
  if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
    std::snprintf(tmp, sizeof tmp, "%lld", static_cast<long long>(v));
  } else {
    std::snprintf(tmp, sizeof tmp, "%.17g", v);
  }
  buf += tmp;
}

}  // namespace

void write_mdp_json(const TabularMdp& mdp, std::ostream& os) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  std::string buf;
  buf.reserve(1 << 20);
  buf += "{\n\"n_states\": " + std::to_string(S) + ",\n\"cardinalities\": [";
  const auto& cards = mdp.actions().cardinalities();
  for (std::size_t d = 0; d < cards.size(); ++d) {
    if (d) buf += ", ";
    buf += std::to_string(cards[d]);
  }
  buf += "],\n\"gamma\": ";
  append_double(buf, mdp.gamma());
  buf += ",\n\"initial_dist\": [";
  for (int s = 0; s < S; ++s) {
    if (s) buf += ", ";
    append_double(buf, mdp.initial_dist()[s]);
  }
  buf += "],\n\"reward\": [";
  for (int s = 0; s < S; ++s) {
    buf += s ? ",\n[" : "\n[";
    for (int a = 0; a < A; ++a) {
      if (a) buf += ", ";
      append_double(buf, mdp.reward()(s, a));
    }
    buf += "]";
  }
  buf += "],\n\"transition\": [";
  os << buf;
  buf.clear();
  for (int s = 0; s < S; ++s) {
    buf += s ? ",\n[" : "\n[";
    for (int a = 0; a < A; ++a) {
      buf += a ? ",[" : "[";
      Eigen::VectorXd row = mdp.dense_row(s, a);
      for (int s2 = 0; s2 < S; ++s2) {
        if (s2) buf += ",";
        append_double(buf, row[s2]);
      }
      buf += "]";
    }
    buf += "]";
    os << buf;
    buf.clear();
  }
  os << "]\n}\n";
}

void write_mdp_json_file(const TabularMdp& mdp, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_mdp_json(mdp, os);
}

TabularMdp read_mdp_json(std::istream& is) {
  json doc = json::parse(is);
  const int S = doc.at("n_states").get<int>();
  FactoredActionSpace space(doc.at("cardinalities").get<std::vector<int>>());
  const int A = space.total();
  const double gamma = doc.at("gamma").get<double>();
  const auto& mu_doc = doc.at("initial_dist");
  if (static_cast<int>(mu_doc.size()) != S)
    throw std::runtime_error("initial_dist length mismatch");
  Eigen::VectorXd mu0(S);
  for (int s = 0; s < S; ++s) mu0[s] = mu_doc[s].get<double>();
  const auto& r_doc = doc.at("reward");
  Eigen::MatrixXd reward(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) reward(s, a) = r_doc.at(s).at(a).get<double>();
  const auto& t_doc = doc.at("transition");
  std::vector<SparseRow> rows(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const auto& row_doc = t_doc.at(s).at(a);
      if (static_cast<int>(row_doc.size()) != S)
        throw std::runtime_error("transition row length mismatch");
      SparseRow& r = rows[static_cast<std::size_t>(s) * A + a];
      for (int s2 = 0; s2 < S; ++s2) {
        const double p = row_doc[s2].get<double>();
        if (p != 0.0) {
          r.idx.push_back(s2);
          r.p.push_back(p);
        }
      }
    }
  }
  return TabularMdp(S, std::move(space), std::move(rows), std::move(reward),
                    gamma, std::move(mu0));
}

TabularMdp read_mdp_json_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_mdp_json(is);
}

void write_policy_json_file(const Policy& pi, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  std::string buf = "{\n\"deterministic\": ";
  buf += pi.deterministic() ? "true" : "false";
  buf += ",\n\"probs\": [";
  for (int s = 0; s < pi.n_states(); ++s) {
    buf += s ? ",\n[" : "\n[";
    for (int a = 0; a < pi.n_actions(); ++a) {
      if (a) buf += ", ";
      append_double(buf, pi.probs()(s, a));
    }
    buf += "]";
  }
  buf += "]\n}\n";
  os << buf;
}

Policy read_policy_json_file(const std::string& path, int n_actions) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  json doc = json::parse(is);
  if (doc.contains("actions")) {
    return Policy::deterministic_from(doc.at("actions").get<std::vector<int>>(),
                                      n_actions);
  }
  const auto& p_doc = doc.at("probs");
  const int S = static_cast<int>(p_doc.size());
  Eigen::MatrixXd probs(S, n_actions);
  for (int s = 0; s < S; ++s) {
    if (static_cast<int>(p_doc[s].size()) != n_actions)
      throw std::runtime_error("policy row length mismatch");
    for (int a = 0; a < n_actions; ++a) probs(s, a) = p_doc[s][a].get<double>();
  }
  bool det = doc.value("deterministic", false);
  return Policy(std::move(probs), det);
}

}  // namespace faqtor
