#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "qmarkov/bounds.hpp"
#include "qmarkov/cli.hpp"
#include "qmarkov/dirichlet.hpp"

using namespace qmarkov;
namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, failed = 1, bad_config = 2, capacity = 3, io = 4, other = 5 };

struct Overrides {
  std::string backend;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
};

void apply(ScenarioConfig& c, const Overrides& o) {
  if (!o.backend.empty()) c.backend = parse_backend(o.backend);
  if (o.seed) c.seed = *o.seed;
}

int run_one(ScenarioConfig c, const Overrides& o, const std::string& prefix) {
  apply(c, o);
  const auto t0 = std::chrono::steady_clock::now();
  const auto records = run_scenario(c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_results(c, records, prefix, parse_format(o.format));
  const bool good = all_pass(records);
  // wall time goes to stderr only so result files stay byte-identical
  std::fprintf(stderr, "%s %s (%s, %zu records, %.1f s) -> %s\n", good ? "PASS" : "FAIL", c.id.c_str(),
               experiment_name(c.experiment).c_str(), records.size(), secs, prefix.c_str());
  return good ? ok : failed;
}

std::string prefix_for(const ScenarioConfig& c, const Overrides& o, bool suite) {
  if (suite) return (fs::path(o.out.empty() ? "results" : o.out) / c.id).string();
  if (!o.out.empty()) return o.out;
  if (!c.output.empty()) return c.output;
  return c.id;
}

int verify(std::uint64_t seed) {
  bool good = true;
  auto line = [&](bool pass, const std::string& name, const std::string& detail) {
    good = good && pass;
    std::printf("%s %s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  };
  for (const BoundReport& r : {holder_loose_sweep(seed), kms_norm_sweep(seed + 1), imaginary_conjugation_sweep(seed + 2),
                               lr_sweep(seed + 3)})
    line(r.pass(), r.name, "instances=" + std::to_string(r.instances) + " max_violation=" + format_double(r.max_violation));
  for (const IdentityReport& r : {double_commutator_sweep(seed + 4), leibniz_sweep(seed + 5)})
    line(r.pass(), r.name, "instances=" + std::to_string(r.instances) + " max_deviation=" + format_double(r.max_deviation));
  const KernelIdentityReport kr = metropolis_kernel_identity();
  line(kr.pass, "metropolis_kernel_identity", "max_rel=" + format_double(kr.max_rel_h));

  for (const char* kind : {"metropolis", "gaussian"})
    for (double beta : {0.2, 1.0, 4.0}) {
      nlohmann::json j = {{"id", std::string("verify_") + kind},
                          {"model", {{"kind", "random"}, {"n", 2}, {"couplings", {{"k", 2}, {"m", 2}}}, {"seed", seed}}},
                          {"beta", beta},
                          {"weight", {{"kind", kind}, {"omega_gamma", 1.0 / beta}}},
                          {"region", {0}},
                          {"experiment", "verify"},
                          {"seed", seed}};
      const ScenarioConfig c = parse_config(j);
      for (const auto& r : run_scenario(c)) {
        const std::string name = std::get<std::string>(r.columns[0].second);
        line(r.pass.value_or(true), c.id + "_b" + format_double(beta).substr(0, 3) + "_" + name,
             "value=" + format_double(std::get<double>(r.columns[1].second)));
      }
    }
  return good ? ok : failed;
}

template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return bad_config;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return capacity;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return io;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return other;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qmarkov: local recovery and Markov-property experiments"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--backend", o.backend, "spectral or ode")->check(CLI::IsMember({"spectral", "ode"}));
  app.add_option("--seed", o.seed, "override the scenario seed");
  app.add_option("--out", o.out, "output prefix (run) or directory (suite)");
  app.add_option("--format", o.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));

  std::uint64_t vseed = 11;
  auto* verify_cmd = app.add_subcommand("verify", "run the built-in invariant suites");
  verify_cmd->add_option("--seed", vseed, "master seed");

  std::string config;
  auto* run_cmd = app.add_subcommand("run", "run one scenario config");
  run_cmd->add_option("config", config, "scenario JSON")->required();

  std::string dir;
  auto* suite_cmd = app.add_subcommand("suite", "run every *.json in a directory, in name order");
  suite_cmd->add_option("dir", dir, "config directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  if (*verify_cmd) return guarded([&] { return verify(o.seed.value_or(vseed)); });
  if (*run_cmd)
    return guarded([&] {
      ScenarioConfig c = load_config(config);
      return run_one(c, o, prefix_for(c, o, false));
    });
  return guarded([&] {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no *.json configs in " + dir);
    int status = ok;
    for (const auto& f : files) {
      const int s = guarded([&] {
        ScenarioConfig c = load_config(f);
        return run_one(c, o, prefix_for(c, o, true));
      });
      status = std::max(status, s);
    }
    return status;
  });
}
