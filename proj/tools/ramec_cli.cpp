#include "ramec/driver.hpp"
#include "ramec/validate.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

namespace {

ramec::Scenario load_or_default(const std::string& path) {
  if (path.empty()) return ramec::default_scenario();
  return ramec::load_scenario(path);
}

int do_run(const std::string& config, std::uint64_t seed, bool seed_given,
           const std::string& scheme, const std::string& out_path) {
  ramec::Scenario scn = ramec::load_scenario(config);
  scn.validate();
  const std::uint64_t s = seed_given ? seed : scn.base_seed;
  ramec::TrialContext ctx = ramec::make_trial(scn, s);
  ramec::RunRecord rec = ramec::run_scheme(scn, ramec::scheme_from_name(scheme), ctx);
  rec.trial = 0;
  rec.seed = s;
  ramec::write_csv(out_path, {rec}, {});
  std::cout << "scheme=" << rec.scheme << " seed=" << s << " tau_s=" << rec.tau_s
            << " iters=" << rec.iter_count << " -> " << out_path << "\n";
  return 0;
}

int do_sweep(const std::string& config, const std::string& param,
             const std::vector<double>& values, int trials, const std::string& out_path) {
  ramec::Scenario scn = ramec::load_scenario(config);
  scn.validate();
  ramec::SweepSpec spec;
  spec.param = param;
  spec.values = values;
  spec.trials = trials;
  const std::vector<ramec::RunRecord> records = ramec::run_sweep(scn, spec);
  ramec::write_csv(out_path, records, ramec::aggregate(records));
  std::cout << records.size() << " rows -> " << out_path << "\n";
  return 0;
}

int do_validate(const std::string& config) {
  ramec::Scenario scn = load_or_default(config);
  scn.validate();
  const auto results = ramec::run_validation(scn);
  bool all_pass = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "  residual=" << r.residual
              << "  " << r.note << "\n";
    all_pass = all_pass && r.pass;
  }
  std::cout << (all_pass ? "all checks passed" : "validation FAILED") << "\n";
  return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotatable-antenna edge-offloading latency simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string out_path;
  std::string scheme = "ra";
  std::uint64_t seed = 0;
  std::string param;
  std::vector<double> values;
  int trials = 50;

  CLI::App* run = app.add_subcommand("run", "run one trial of one scheme");
  run->add_option("--config", config, "scenario file")->required();
  CLI::Option* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--scheme", scheme, "ra|fixed|isotropic|random")
      ->check(CLI::IsMember({"ra", "fixed", "isotropic", "random"}));
  run->add_option("--out", out_path, "output CSV path")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "Monte-Carlo parameter sweep, all schemes");
  sweep->add_option("--config", config, "scenario file")->required();
  sweep->add_option("--param", param, "power|fmax|devices")
      ->check(CLI::IsMember({"power", "fmax", "devices", "power_dbm", "fmax_cps", "K"}))
      ->required();
  sweep->add_option("--values", values, "comma-separated swept values")
      ->delimiter(',')
      ->required();
  sweep->add_option("--trials", trials, "trials per value (default 50)");
  sweep->add_option("--out", out_path, "output CSV path")->required();

  CLI::App* validate = app.add_subcommand("validate", "run the oracle-backed self checks");
  validate->add_option("--config", config, "scenario file (defaults baked in)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (run->parsed())
      return do_run(config, seed, seed_opt->count() > 0, scheme, out_path);
    if (sweep->parsed()) return do_sweep(config, param, values, trials, out_path);
    if (validate->parsed()) return do_validate(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
