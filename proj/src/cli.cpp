#include "qmarkov/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "qmarkov/bounds.hpp"
#include "qmarkov/dirichlet.hpp"
#include "qmarkov/markov.hpp"
#include "qmarkov/oft.hpp"
#include "qmarkov/recovery.hpp"

#ifndef QMARKOV_BUILD_ID
#define QMARKOV_BUILD_ID "unknown"
#endif

namespace qmarkov {

using nlohmann::json;

std::string build_id() { return QMARKOV_BUILD_ID; }

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::verify: return "verify";
    case Experiment::recovery: return "recovery";
    case Experiment::cmi: return "cmi";
    case Experiment::lr: return "lr";
    case Experiment::dirichlet: return "dirichlet";
    case Experiment::patching: return "patching";
    case Experiment::gap: return "gap";
  }
  return "?";
}

Weight ScenarioConfig::make_weight() const {
  return weight == WeightKind::metropolis ? Weight::metropolis(beta, sigma_value())
                                          : Weight::gaussian(beta, sigma_value(), omega_gamma);
}

Hamiltonian ScenarioConfig::build_model() const {
  if (model.kind == "tfim") return build_tfim_chain(model.n, model.J, model.g, model.periodic);
  if (model.kind == "ising") return build_classical_ising(model.n, model.J, model.periodic);
  return build_random_local(model.n, model.k, model.m, model.seed);
}

namespace {

bool needs_times(Experiment e) { return e == Experiment::recovery || e == Experiment::lr || e == Experiment::patching; }

// read key into out, recording the key on a type mismatch
template <class T>
void take(const json& j, const std::string& key, const std::string& path, T& out, std::vector<std::string>& bad) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    bad.push_back(path + key);
  }
}

std::vector<double> parse_times(const json& t, std::vector<std::string>& bad) {
  std::vector<double> out;
  try {
    if (t.is_array()) {
      out = t.get<std::vector<double>>();
    } else if (t.is_object() && t.contains("log_range")) {
      auto r = t.at("log_range").get<std::vector<double>>();
      if (r.size() != 3 || r[0] <= 0.0 || r[1] <= r[0] || r[2] < 2) throw std::runtime_error("log_range");
      const int m = static_cast<int>(r[2]);
      for (int i = 0; i < m; ++i) out.push_back(r[0] * std::pow(r[1] / r[0], static_cast<double>(i) / (m - 1)));
    } else {
      throw std::runtime_error("times");
    }
  } catch (const std::exception&) {
    bad.push_back("times");
    out.clear();
  }
  return out;
}

}  // namespace

ScenarioConfig parse_config(const json& j, const std::string& default_id) {
  std::vector<std::string> bad;
  ScenarioConfig c;
  c.id = default_id;
  if (!j.is_object()) throw ConfigError("config must be a JSON object", {"<root>"});
  static const std::vector<std::string> known = {"id",     "model",      "beta",   "sigma",   "weight",
                                                 "region", "times",      "ell",    "experiment", "backend",
                                                 "seed",   "output",     "patch_size", "rounds"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) bad.push_back(it.key());

  take(j, "id", "", c.id, bad);
  if (!j.contains("model") || !j.at("model").is_object()) {
    bad.push_back("model");
  } else {
    const json& m = j.at("model");
    take(m, "kind", "model.", c.model.kind, bad);
    take(m, "n", "model.", c.model.n, bad);
    take(m, "periodic", "model.", c.model.periodic, bad);
    take(m, "seed", "model.", c.model.seed, bad);
    if (m.contains("couplings")) {
      const json& cp = m.at("couplings");
      if (!cp.is_object()) {
        bad.push_back("model.couplings");
      } else {
        take(cp, "J", "model.couplings.", c.model.J, bad);
        take(cp, "g", "model.couplings.", c.model.g, bad);
        take(cp, "k", "model.couplings.", c.model.k, bad);
        take(cp, "m", "model.couplings.", c.model.m, bad);
      }
    }
    if (c.model.kind != "tfim" && c.model.kind != "ising" && c.model.kind != "random") bad.push_back("model.kind");
    if (c.model.n < 1 || c.model.n > 12) bad.push_back("model.n");
    if (c.model.kind == "random" && (c.model.k < 1 || c.model.k > c.model.n || c.model.m < 1))
      bad.push_back("model.couplings");
  }
  take(j, "beta", "", c.beta, bad);
  if (!(c.beta > 0.0) || !std::isfinite(c.beta)) bad.push_back("beta");
  if (j.contains("sigma")) {
    const json& s = j.at("sigma");
    if (s.is_string() && s.get<std::string>() == "1/beta") {
      c.sigma.reset();
    } else if (s.is_number() && s.get<double>() > 0.0) {
      c.sigma = s.get<double>();
    } else {
      bad.push_back("sigma");
    }
  }
  if (j.contains("weight")) {
    const json& w = j.at("weight");
    std::string kind = "metropolis";
    if (!w.is_object()) {
      bad.push_back("weight");
    } else {
      take(w, "kind", "weight.", kind, bad);
      take(w, "omega_gamma", "weight.", c.omega_gamma, bad);
      if (kind == "metropolis") {
        c.weight = WeightKind::metropolis;
      } else if (kind == "gaussian") {
        c.weight = WeightKind::gaussian;
        const double s = c.sigma_value();
        if (!(2.0 * c.omega_gamma / c.beta - s * s > 0.0)) bad.push_back("weight.omega_gamma");
      } else {
        bad.push_back("weight.kind");
      }
    }
  }
  if (j.contains("region")) {
    std::vector<int> sites;
    take(j, "region", "", sites, bad);
    bool ok = true;
    for (int s : sites) ok = ok && s >= 0 && s < c.model.n;
    if (!ok) bad.push_back("region");
    else c.region = Region(sites);
  }
  if (j.contains("times")) c.times = parse_times(j.at("times"), bad);
  for (size_t i = 0; i < c.times.size(); ++i)
    if (!(c.times[i] > 0.0) || (i > 0 && !(c.times[i] > c.times[i - 1]))) {
      bad.push_back("times");
      break;
    }
  if (j.contains("ell")) {
    int l = 0;
    take(j, "ell", "", l, bad);
    if (l < 1) bad.push_back("ell");
    else c.ell = l;
  }
  take(j, "patch_size", "", c.patch_size, bad);
  if (c.patch_size < 1) bad.push_back("patch_size");
  take(j, "rounds", "", c.rounds, bad);
  if (c.rounds < 1) bad.push_back("rounds");
  std::string exp = "verify";
  take(j, "experiment", "", exp, bad);
  static const std::vector<std::pair<std::string, Experiment>> exps = {
      {"verify", Experiment::verify}, {"recovery", Experiment::recovery}, {"cmi", Experiment::cmi},
      {"lr", Experiment::lr},         {"dirichlet", Experiment::dirichlet}, {"patching", Experiment::patching},
      {"gap", Experiment::gap}};
  auto e = std::find_if(exps.begin(), exps.end(), [&](const auto& p) { return p.first == exp; });
  if (e == exps.end()) bad.push_back("experiment");
  else c.experiment = e->second;
  std::string backend = "spectral";
  take(j, "backend", "", backend, bad);
  if (backend == "spectral") c.backend = Backend::spectral;
  else if (backend == "ode") c.backend = Backend::ode;
  else bad.push_back("backend");
  take(j, "seed", "", c.seed, bad);
  take(j, "output", "", c.output, bad);

  const bool region_needed = c.experiment == Experiment::recovery || c.experiment == Experiment::lr ||
                             c.experiment == Experiment::gap;
  if (region_needed && c.region.empty() && std::find(bad.begin(), bad.end(), "region") == bad.end())
    bad.push_back("region");
  if (needs_times(c.experiment) && c.times.empty() && std::find(bad.begin(), bad.end(), "times") == bad.end())
    bad.push_back("times");
  if (c.experiment == Experiment::patching && !c.ell) bad.push_back("ell");

  if (!bad.empty()) {
    std::string msg = "invalid config keys:";
    for (const auto& k : bad) msg += " " + k;
    throw ConfigError(msg, bad);
  }
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what(), {"<root>"});
  }
  return parse_config(j, path.stem().string());
}

namespace {

struct RecordBuilder {
  const ScenarioConfig& cfg;
  std::vector<ResultRecord> out;
  ResultRecord& add(std::optional<bool> pass = std::nullopt) {
    out.push_back({cfg.id, experiment_name(cfg.experiment), {}, pass});
    return out.back();
  }
};

void put(ResultRecord& r, const std::string& k, Cell v) { r.columns.emplace_back(k, std::move(v)); }

void check_row(RecordBuilder& rb, const std::string& name, double value, double tol) {
  ResultRecord& r = rb.add(value <= tol);
  put(r, "check", name);
  put(r, "value", value);
  put(r, "tolerance", tol);
}

double rel_dev(const Mat& a, const Mat& b) { return max_abs(a - b) / std::max(max_abs(b), 1e-300); }

void run_verify(const ScenarioConfig& c, RecordBuilder& rb) {
  const Hamiltonian H = c.build_model();
  if (H.n() > 5) throw CapacityError("verify limited to n <= 5");
  const Region A = c.region.empty() ? Region{0} : c.region;
  const Weight w = c.make_weight();
  const Spectrum spec = hermitian_eig(H.dense());
  const Generator g = assemble(spec, jump_matrices(single_site_jumps(A), H.n()), w);
  std::mt19937_64 rng(c.seed);
  const int dim = static_cast<int>(H.dim());

  check_row(rb, "detailed_balance_residual", detailed_balance_residual(g, g.gs), 1e-8);
  check_row(rb, "gibbs_fixed_point", fixed_point_residual(g), 1e-8);
  std::vector<Mat> probes;
  for (int i = 0; i < 5; ++i) probes.push_back(random_complex(rng, dim, dim));
  check_row(rb, "trace_preservation", trace_defect(g, probes), 1e-10);

  const TransitionCoeffs tc = transition_coefficients(spec, w);
  const auto jumps = jump_matrices(single_site_jumps(A), H.n());
  double dir = 0.0, kms = 0.0;
  for (const Mat& X : probes) {
    const double d = dirichlet_direct(g, g.gs, X);
    const double b = dirichlet_bilinear(spec, g.gs, jumps, tc, X, X).real();
    dir = std::max(dir, std::abs(d - b) / std::max(std::abs(b), 1e-300));
    const double k = kms_norm(g.gs, X), o = op_norm(X);
    kms = std::max(kms, (k * k - o * o) / (o * o));
  }
  check_row(rb, "dirichlet_direct_vs_bilinear", dir, 1e-7);
  check_row(rb, "kms_norm_vs_operator_norm", std::max(kms, 0.0), 1e-10);

  const OftParams p(w.sigma);
  double rec = 0.0, shift = 0.0;
  for (const Mat& J : jumps) {
    const BohrDecomp bd = bohr_decompose(spec, J);
    rec = std::max(rec, rel_dev(oft_reconstruct(bd, p), J));
    for (double om : {-1.0, 0.0, 1.5}) {
      const ConjugationPair cp = conjugate_imaginary(spec, bd, om, c.beta, p);
      shift = std::max(shift, rel_dev(cp.lhs, cp.rhs));
    }
  }
  check_row(rb, "oft_reconstruction", rec, 1e-9);
  check_row(rb, "oft_imaginary_shift", shift, 1e-9);
  check_row(rb, "double_commutator", A.size() <= 3 ? double_commutator_identity(g.gs.rho, A) : 0.0, 1e-10);
}

void run_recovery(const ScenarioConfig& c, RecordBuilder& rb) {
  RecoveryScenario s;
  s.H = c.build_model();
  s.beta = c.beta;
  s.sigma = c.sigma_value();
  s.weight = c.weight;
  s.omega_gamma = c.omega_gamma;
  s.A = c.region;
  s.times = c.times;
  s.backend = c.backend;
  s.seed = c.seed;
  const RecoveryCurve curve = recovery_error_curve(s);
  for (const auto& row : curve.rows) {
    ResultRecord& r = rb.add(row.dirichlet <= row.bound + 1e-9 && row.fixed_point <= 1e-8);
    put(r, "t", row.t);
    put(r, "ell", -1L);
    put(r, "err_trace", row.err);
    put(r, "dirichlet", row.dirichlet);
    put(r, "bound_2_over_t", row.bound);
  }
  if (c.ell) {
    s.ell = c.ell;
    for (const auto& row : truncated_recovery_error(s, {*c.ell})) {
      ResultRecord& r = rb.add();
      put(r, "t", row.t);
      put(r, "ell", static_cast<long>(row.ell));
      put(r, "err_trace", row.err_trunc);
      put(r, "dirichlet", std::nan(""));
      put(r, "bound_2_over_t", 2.0 / row.t);
    }
  }
}

void run_cmi(const ScenarioConfig& c, RecordBuilder& rb) {
  const Hamiltonian H = c.build_model();
  const CmiScan scan = cmi_decay_scan(H, c.beta);
  const bool commuting = c.model.kind == "ising";
  for (const auto& row : scan.rows) {
    std::optional<bool> pass;
    if (commuting && row.dist >= 1) pass = row.qcmi <= 1e-9;
    ResultRecord& r = rb.add(pass);
    put(r, "dist_AC", static_cast<long>(row.dist));
    put(r, "qcmi_nats", row.qcmi);
    put(r, "fit_slope", scan.slope ? *scan.slope : std::nan(""));
    put(r, "fit_r2", scan.r2 ? *scan.r2 : std::nan(""));
  }
}

void run_lr(const ScenarioConfig& c, RecordBuilder& rb) {
  const Hamiltonian H = c.build_model();
  std::mt19937_64 rng(c.seed);
  const Mat op = embed(random_contraction(rng, 1 << c.region.size()), c.region.sites, H.n());
  std::vector<int> ells;
  if (c.ell) ells = {*c.ell};
  else
    for (int l = 1; l <= saturating_ell(H, c.region); ++l) ells.push_back(l);
  for (int l : ells)
    for (double t : c.times) {
      const BoundReport br = lr_truncation_check(H, c.region, l, {t}, {op});
      ResultRecord& r = rb.add(br.pass());
      put(r, "t", t);
      put(r, "ell", static_cast<long>(l));
      put(r, "lhs", lr_bound(c.region.size(), H.degree(), l, t) - br.margin_min);
      put(r, "bound", lr_bound(c.region.size(), H.degree(), l, t));
    }
}

void run_dirichlet(const ScenarioConfig& c, RecordBuilder& rb) {
  const Hamiltonian H = c.build_model();
  if (H.n() > 3) throw CapacityError("dirichlet three-way check limited to n <= 3");
  const Region A = c.region.empty() ? Region{0} : c.region;
  const Weight w = c.make_weight();
  const Spectrum spec = hermitian_eig(H.dense());
  const auto jumps = jump_matrices(single_site_jumps(A), H.n());
  const Generator g = assemble(spec, jumps, w);
  const TransitionCoeffs tc = transition_coefficients(spec, w);
  const DirichletKernels k(w);
  std::mt19937_64 rng(c.seed);
  for (int i = 0; i < 3; ++i) {
    const Mat X = random_contraction(rng, static_cast<int>(H.dim()));
    const double d = dirichlet_direct(g, g.gs, X);
    const double b = dirichlet_bilinear(spec, g.gs, jumps, tc, X, X).real();
    const CommutatorIntegral ci = dirichlet_commutator_integral(spec, g.gs, jumps, k, X);
    const double r1 = std::abs(d - b) / std::max(std::abs(b), 1e-300);
    const double r2 = std::abs(ci.value - b) / std::max(std::abs(b), 1e-300);
    ResultRecord& r = rb.add(r1 <= 1e-7 && r2 <= 1e-5);
    put(r, "sample", static_cast<long>(i));
    put(r, "direct", d);
    put(r, "bilinear", b);
    put(r, "integral", ci.value);
    put(r, "integral_error_estimate", ci.error_estimate);
  }
  if (w.kind == WeightKind::metropolis) {
    const KernelIdentityReport kr = metropolis_kernel_identity();
    ResultRecord& r = rb.add(kr.pass);
    put(r, "sample", -1L);
    put(r, "direct", kr.max_rel_h);
    put(r, "bilinear", kr.max_abs_cosh);
    put(r, "integral", kr.g_integral);
    put(r, "integral_error_estimate", 0.0);
  }
}

void run_patching(const ScenarioConfig& c, RecordBuilder& rb) {
  const Hamiltonian H = c.build_model();
  PatchOptions o;
  o.rounds = c.rounds;
  o.backend = c.backend;
  o.weight = c.weight;
  o.omega_gamma = c.omega_gamma;
  for (double t : c.times) {
    const PatchResult pr = patching_prepare(H, c.beta, c.sigma_value(), c.patch_size, *c.ell, t, o);
    for (size_t i = 0; i < pr.after_patch.size(); ++i) {
      ResultRecord& r = rb.add();
      put(r, "t", t);
      put(r, "ell", static_cast<long>(*c.ell));
      put(r, "step", static_cast<long>(i + 1));
      put(r, "err_trace", pr.after_patch[i]);
    }
  }
}

void run_gap(const ScenarioConfig& c, RecordBuilder& rb) {
  const Hamiltonian H = c.build_model();
  if (H.n() > 4) throw CapacityError("gap experiment limited to n <= 4");
  const Generator g = assemble(H, single_site_jumps(c.region), c.make_weight());
  const std::vector<double> times = c.times.empty() ? std::vector<double>{0.1, 1.0, 10.0} : c.times;
  const GapDecayReport gr = gap_decay_check(g, times, 20, c.seed);
  for (const auto& row : gr.rows) {
    ResultRecord& r = rb.add(row.lhs <= row.rhs + 1e-8);
    put(r, "t", row.t);
    put(r, "gap", gr.gap);
    put(r, "lhs", row.lhs);
    put(r, "rhs", row.rhs);
  }
}

std::string cell_text(const Cell& v) {
  if (std::holds_alternative<double>(v)) return format_double(std::get<double>(v));
  if (std::holds_alternative<long>(v)) return std::to_string(std::get<long>(v));
  const std::string& s = std::get<std::string>(v);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

json cell_json(const Cell& v) {
  if (std::holds_alternative<double>(v)) {
    const double d = std::get<double>(v);
    // JSON has no NaN; the formatted string keeps the digits stable
    return std::isfinite(d) ? json(format_double(d)) : json(nullptr);
  }
  if (std::holds_alternative<long>(v)) return std::get<long>(v);
  return std::get<std::string>(v);
}

}  // namespace

std::vector<ResultRecord> run_scenario(const ScenarioConfig& cfg) {
  RecordBuilder rb{cfg, {}};
  switch (cfg.experiment) {
    case Experiment::verify: run_verify(cfg, rb); break;
    case Experiment::recovery: run_recovery(cfg, rb); break;
    case Experiment::cmi: run_cmi(cfg, rb); break;
    case Experiment::lr: run_lr(cfg, rb); break;
    case Experiment::dirichlet: run_dirichlet(cfg, rb); break;
    case Experiment::patching: run_patching(cfg, rb); break;
    case Experiment::gap: run_gap(cfg, rb); break;
  }
  return std::move(rb.out);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string to_csv(const std::vector<ResultRecord>& records) {
  if (records.empty()) throw InvalidParameter("no records to write");
  std::ostringstream os;
  os << "scenario_id";
  for (const auto& [k, v] : records.front().columns) os << ',' << k;
  os << ",pass\n";
  for (const auto& r : records) {
    os << cell_text(r.scenario_id);
    for (const auto& [k, v] : r.columns) os << ',' << cell_text(v);
    os << ',' << (r.pass ? (*r.pass ? "PASS" : "FAIL") : "") << '\n';
  }
  return os.str();
}

bool all_pass(const std::vector<ResultRecord>& records) {
  return std::none_of(records.begin(), records.end(), [](const auto& r) { return r.pass && !*r.pass; });
}

json summary_json(const ScenarioConfig& cfg, const std::vector<ResultRecord>& records) {
  json recs = json::array();
  long npass = 0, nfail = 0;
  for (const auto& r : records) {
    json o = json::object();
    for (const auto& [k, v] : r.columns) o[k] = cell_json(v);
    o["pass"] = r.pass ? json(*r.pass) : json(nullptr);
    if (r.pass) (*r.pass ? npass : nfail)++;
    recs.push_back(std::move(o));
  }
  return {{"scenario", cfg.id},
          {"experiment", experiment_name(cfg.experiment)},
          {"build_id", build_id()},
          {"seed", cfg.seed},
          {"records", std::move(recs)},
          {"pass_counts", {{"pass", npass}, {"fail", nfail}}}};
}

OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  if (s == "both") return OutputFormat::both;
  throw InvalidParameter("unknown format '" + s + "'");
}

void emit_results(const ScenarioConfig& cfg, const std::vector<ResultRecord>& records, const std::string& prefix,
                  OutputFormat fmt) {
  if (records.empty()) throw InvalidParameter("no records to write");
  auto write = [](const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed for " + path);
  };
  if (fmt != OutputFormat::json) write(prefix + ".csv", to_csv(records));
  if (fmt != OutputFormat::csv) write(prefix + ".json", summary_json(cfg, records).dump(2) + "\n");
}

}  // namespace qmarkov
