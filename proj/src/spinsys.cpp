#include "qmarkov/spinsys.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <sstream>

#include "qmarkov/linalg.hpp"

namespace qmarkov {

namespace {

void validate_term(const HamTerm& t, int n) {
  if (t.support.empty()) throw InvalidRegion("term '" + t.label + "' has empty support");
  if (!std::is_sorted(t.support.begin(), t.support.end()) ||
      std::adjacent_find(t.support.begin(), t.support.end()) != t.support.end())
    throw InvalidRegion("term '" + t.label + "' support must be sorted and unique");
  for (int s : t.support)
    if (s < 0 || s >= n) throw InvalidRegion("term '" + t.label + "' support out of range");
  const long d = 1L << t.support.size();
  if (t.matrix.rows() != d || t.matrix.cols() != d)
    throw InvalidSize("term '" + t.label + "' matrix has wrong dimension");
  if (hermiticity_defect(t.matrix) > 1e-12)
    throw NumericDomain("term '" + t.label + "' is not Hermitian");
  if (op_norm(t.matrix) > 1.0 + 1e-12)
    throw NumericDomain("term '" + t.label + "' has operator norm above 1");
}

bool overlaps(const std::vector<int>& a, const std::vector<int>& b) {
  // both sorted
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j)
      ++i;
    else
      ++j;
  }
  return false;
}

}  // namespace

Hamiltonian::Hamiltonian(int n, std::vector<HamTerm> terms) : n_(n), terms_(std::move(terms)) {
  if (n < 1) throw InvalidSize("Hamiltonian needs n >= 1");
  for (const auto& t : terms_) validate_term(t, n);
  const int m = static_cast<int>(terms_.size());
  adj_.assign(m, {});
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      if (overlaps(terms_[a].support, terms_[b].support)) adj_[a].push_back(b);
  degree_ = 0;
  for (const auto& row : adj_) degree_ = std::max(degree_, static_cast<int>(row.size()));
}

Mat Hamiltonian::dense() const {
  Mat H = Mat::Zero(dim(), dim());
  for (const auto& t : terms_) H += embed(t.matrix, t.support, n_);
  return H;
}

std::vector<int> Hamiltonian::support() const {
  std::vector<int> s;
  for (const auto& t : terms_) s.insert(s.end(), t.support.begin(), t.support.end());
  return Region(std::move(s)).sites;
}

double Hamiltonian::norm_bound() const {
  double s = 0.0;
  for (const auto& t : terms_) s += op_norm(t.matrix);
  return s;
}

Mat pauli(char p) {
  Mat m(2, 2);
  switch (p) {
    case 'I':
      m << 1, 0, 0, 1;
      break;
    case 'X':
      m << 0, 1, 1, 0;
      break;
    case 'Y':
      m << 0, -I1, I1, 0;
      break;
    case 'Z':
      m << 1, 0, 0, -1;
      break;
    default:
      throw InvalidParameter(std::string("unknown Pauli '") + p + "'");
  }
  return m;
}

Mat pauli_string(const std::string& paulis) {
  Mat out = Mat::Identity(1, 1);
  for (char c : paulis) out = kron(out, pauli(c));
  return out;
}

Hamiltonian build_tfim_chain(int n, double J, double g, bool periodic) {
  if (n < 2) throw InvalidSize("TFIM chain needs n >= 2");
  if (!std::isfinite(J) || !std::isfinite(g)) throw InvalidParameter("TFIM couplings must be finite");
  // a coupling above 1 is split into equal copies on the same support so every term keeps norm <= 1
  auto pieces = [](double c) { return std::max(1, static_cast<int>(std::ceil(std::abs(c) - 1e-12))); };
  auto label = [](std::string base, int k, int m) { return m == 1 ? base : base + "#" + std::to_string(k); };
  std::vector<HamTerm> terms;
  const Mat zz = kron(pauli('Z'), pauli('Z'));
  const int bonds = periodic && n > 2 ? n : n - 1;
  if (J != 0.0) {
    const int m = pieces(J);
    for (int i = 0; i < bonds; ++i) {
      int a = i, b = (i + 1) % n;
      std::vector<int> sup{std::min(a, b), std::max(a, b)};
      for (int k = 0; k < m; ++k)
        terms.push_back({sup, (J / m) * zz, label("ZZ" + std::to_string(a) + "_" + std::to_string(b), k, m)});
    }
  }
  if (g != 0.0) {
    const int m = pieces(g);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < m; ++k) terms.push_back({{i}, (g / m) * pauli('X'), label("X" + std::to_string(i), k, m)});
  }
  return Hamiltonian(n, std::move(terms));
}

Hamiltonian build_classical_ising(int n, double J, bool periodic) {
  return build_tfim_chain(n, J, 0.0, periodic);
}

Hamiltonian build_random_local(int n, int k, int m, std::uint64_t seed) {
  if (k > n) throw InvalidSize("random local Hamiltonian needs k <= n");
  if (k < 1 || m < 1) throw InvalidParameter("random local Hamiltonian needs k >= 1 and m >= 1");
  std::mt19937_64 rng(seed);
  std::vector<HamTerm> terms;
  std::vector<int> sites(n);
  for (int t = 0; t < m; ++t) {
    for (int i = 0; i < n; ++i) sites[i] = i;
    // partial Fisher-Yates, explicit so the draw does not depend on std::shuffle
    for (int i = 0; i < k; ++i) {
      int j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(n - i));
      std::swap(sites[i], sites[j]);
    }
    std::vector<int> sup(sites.begin(), sites.begin() + k);
    std::sort(sup.begin(), sup.end());
    Mat h = random_hermitian(rng, 1 << k);
    h /= op_norm(h);
    h = 0.5 * (h + h.adjoint()).eval();
    // rounding after symmetrizing can leave the norm a hair above 1
    double nn = op_norm(h);
    if (nn > 1.0) h /= nn;
    terms.push_back({sup, h, "R" + std::to_string(t)});
  }
  return Hamiltonian(n, std::move(terms));
}

std::optional<int> graph_distance(const Hamiltonian& H, const Region& A, const Region& B) {
  if (A.empty() || B.empty()) throw InvalidRegion("graph_distance needs nonempty regions");
  const auto& terms = H.terms();
  const int m = static_cast<int>(terms.size());
  std::vector<int> level(m, -1);
  std::deque<int> q;
  for (int a = 0; a < m; ++a)
    if (A.intersects(terms[a].support)) {
      level[a] = 1;
      q.push_back(a);
    }
  // BFS levels are nondecreasing, so the first hit is minimal
  while (!q.empty()) {
    int a = q.front();
    q.pop_front();
    if (B.intersects(terms[a].support)) return level[a];
    for (int b : H.adjacency()[a])
      if (level[b] < 0) {
        level[b] = level[a] + 1;
        q.push_back(b);
      }
  }
  return std::nullopt;
}

Hamiltonian truncate_patch(const Hamiltonian& H, const Region& A, int ell) {
  if (ell < 1) throw InvalidParameter("truncate_patch needs ell >= 1");
  std::vector<HamTerm> kept;
  for (const auto& t : H.terms()) {
    bool keep = A.intersects(t.support);
    if (!keep && !A.empty()) {
      auto d = graph_distance(H, A, Region(t.support));
      keep = d && *d < ell - 1;
    }
    if (keep) kept.push_back(t);
  }
  return Hamiltonian(H.n(), std::move(kept));
}

Hamiltonian restrict_to(const Hamiltonian& H, const std::vector<int>& sites) {
  Region R(sites);
  std::vector<HamTerm> terms;
  for (const auto& t : H.terms()) {
    HamTerm u = t;
    for (int& s : u.support) {
      auto it = std::lower_bound(R.sites.begin(), R.sites.end(), s);
      if (it == R.sites.end() || *it != s)
        throw InvalidRegion("term '" + t.label + "' leaves the restriction region");
      s = static_cast<int>(it - R.sites.begin());
    }
    terms.push_back(std::move(u));
  }
  return Hamiltonian(R.size(), std::move(terms));
}

JumpSet single_site_jumps(const Region& A) {
  if (A.empty()) throw InvalidRegion("single_site_jumps needs a nonempty region");
  JumpSet out;
  for (int s : A.sites)
    for (char p : {'X', 'Y', 'Z'}) out.push_back({std::string(1, p) + std::to_string(s), s, p});
  return out;
}

std::vector<Mat> jump_matrices(const JumpSet& jumps, int n) {
  std::vector<Mat> out;
  out.reserve(jumps.size());
  for (const auto& j : jumps) {
    if (j.site < 0 || j.site >= n) throw InvalidRegion("jump '" + j.label + "' out of range");
    out.push_back(embed(pauli(j.pauli), {j.site}, n));
  }
  return out;
}

nlohmann::json to_json(const Hamiltonian& H) {
  nlohmann::json j;
  j["n"] = H.n();
  j["terms"] = nlohmann::json::array();
  for (const auto& t : H.terms()) {
    nlohmann::json jt;
    jt["support"] = t.support;
    jt["label"] = t.label;
    nlohmann::json e = nlohmann::json::array();
    for (long r = 0; r < t.matrix.rows(); ++r)
      for (long c = 0; c < t.matrix.cols(); ++c) e.push_back({t.matrix(r, c).real(), t.matrix(r, c).imag()});
    jt["entries"] = std::move(e);
    j["terms"].push_back(std::move(jt));
  }
  return j;
}

Hamiltonian hamiltonian_from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  std::vector<HamTerm> terms;
  for (const auto& jt : j.at("terms")) {
    HamTerm t;
    t.support = jt.at("support").get<std::vector<int>>();
    t.label = jt.value("label", std::string());
    const long d = 1L << t.support.size();
    const auto& e = jt.at("entries");
    if (static_cast<long>(e.size()) != d * d) throw InvalidSize("term '" + t.label + "' entry count");
    t.matrix.resize(d, d);
    for (long r = 0; r < d; ++r)
      for (long c = 0; c < d; ++c) {
        const auto& z = e[r * d + c];
        t.matrix(r, c) = cplx(z.at(0).get<double>(), z.at(1).get<double>());
      }
    terms.push_back(std::move(t));
  }
  return Hamiltonian(n, std::move(terms));
}

std::string serialize(const Hamiltonian& H) { return to_json(H).dump(1); }

Hamiltonian deserialize_hamiltonian(const std::string& text) {
  return hamiltonian_from_json(nlohmann::json::parse(text));
}

}  // namespace qmarkov
