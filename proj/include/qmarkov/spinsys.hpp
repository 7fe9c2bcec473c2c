#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qmarkov/types.hpp"

namespace qmarkov {

struct HamTerm {
  std::vector<int> support;  // sorted
  Mat matrix;                // on the support, site order as in `support`
  std::string label;
};

class Hamiltonian {
 public:
  Hamiltonian() = default;
  Hamiltonian(int n, std::vector<HamTerm> terms);

  int n() const { return n_; }
  long dim() const { return 1L << n_; }
  const std::vector<HamTerm>& terms() const { return terms_; }
  // term-overlap graph, self loops included
  const std::vector<std::vector<int>>& adjacency() const { return adj_; }
  int degree() const { return degree_; }

  Mat dense() const;
  // sites touched by at least one term
  std::vector<int> support() const;
  double norm_bound() const;

 private:
  int n_ = 0;
  std::vector<HamTerm> terms_;
  std::vector<std::vector<int>> adj_;
  int degree_ = 0;
};

// single-qubit Pauli jump on one site
struct Jump {
  std::string label;
  int site = 0;
  char pauli = 'X';
};
using JumpSet = std::vector<Jump>;

Mat pauli(char p);
Mat pauli_string(const std::string& paulis);

Hamiltonian build_tfim_chain(int n, double J, double g, bool periodic);
Hamiltonian build_classical_ising(int n, double J, bool periodic);
Hamiltonian build_random_local(int n, int k, int m, std::uint64_t seed);

// number of terms in the shortest chain A ~ g1 ~ ... ~ gl ~ B; nullopt if disconnected
std::optional<int> graph_distance(const Hamiltonian& H, const Region& A, const Region& B);

Hamiltonian truncate_patch(const Hamiltonian& H, const Region& A, int ell);

// relabel onto `sites` (sorted), dropping nothing; every term must live inside `sites`
Hamiltonian restrict_to(const Hamiltonian& H, const std::vector<int>& sites);

JumpSet single_site_jumps(const Region& A);
// jump operators embedded in a system of n sites
std::vector<Mat> jump_matrices(const JumpSet& jumps, int n);

nlohmann::json to_json(const Hamiltonian& H);
Hamiltonian hamiltonian_from_json(const nlohmann::json& j);
std::string serialize(const Hamiltonian& H);
Hamiltonian deserialize_hamiltonian(const std::string& text);

}  // namespace qmarkov
