// dce: batch runner for the oscillating-cavity pipelines.
//
//   dce spectrum --config cfg.json --out results/
//   dce floquet  --set gamma=2 --set epsilon=0.01 --variant both
//   dce validate
#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "dce/acceptance.hpp"
#include "dce/experiments.hpp"
#include "dce/report.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  std::string variant;
  bool timing = false;
};

dce::RunConfig resolve(const Common& o) {
  dce::RunConfig rc;
  if (!o.config_path.empty()) {
    rc = dce::load_config(o.config_path);
  } else {
    rc.cavity.K = dce::default_truncation(rc.cavity.gamma);
  }
  for (const auto& s : o.overrides) dce::apply_override(rc, s);
  if (!o.variant.empty()) rc.variant = dce::parse_variant_selection(o.variant);
  dce::finalize_config(rc);
  return rc;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
  if (!f) throw std::runtime_error("write failed for " + p.string());
}

int run(const Common& o, const std::string& command) {
  dce::RunConfig rc;
  try {
    rc = resolve(o);
  } catch (const dce::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  dce::Artifacts art;
  const auto start = std::chrono::steady_clock::now();
  try {
    if (command == "spectrum") art = dce::run_spectrum(rc);
    else if (command == "evolve") art = dce::run_evolve(rc);
    else art = dce::run_floquet(rc);
  } catch (const dce::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  if (o.timing) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    art.report["timing"] = {{"wall_seconds", dt.count()}};
  }

  try {
    const std::filesystem::path dir(o.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "report.json", dce::render_json(art.report));
    for (const auto& [name, text] : art.files) write_file(dir / name, text);
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kExitConfig;
  }
  for (const auto& w : art.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote report.json";
  for (const auto& [name, text] : art.files) std::cout << ", " << name;
  std::cout << " to " << o.out_dir << "\n";
  return 0;
}

int validate(int only, const dce::acceptance::Options& opts) {
  const auto& all = dce::acceptance::criteria();
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    const auto r = all[i](opts);
    std::cout << dce::acceptance::format_result(r) << std::flush;
    failed += r.passed ? 0 : 1;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed\n" : "all criteria passed\n");
  return failed ? kExitNumerical : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon creation in a one-dimensional cavity with an oscillating wall"};
  app.set_version_flag("--version", std::string(dce::kToolVersion));
  app.require_subcommand(1);

  Common opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    sub->add_option("--set", opts.overrides, "override a config field, key=value (repeatable)")
        ->take_all()
        ->allow_extra_args(false);
    sub->add_option("--variant", opts.variant, "recurrence variant")
        ->check(CLI::IsMember({"eq44", "printed4x4", "both"}));
    sub->add_flag("--timing", opts.timing, "add wall-clock timing to report.json (breaks byte-identical reruns)");
  };

  auto* spectrum = app.add_subcommand("spectrum", "closed-form and integrated photon spectra");
  auto* evolve = app.add_subcommand("evolve", "integrate through the wall motion, N_k(t) time series");
  auto* floquet = app.add_subcommand("floquet", "Floquet exponents, monodromy oracle and variant arbitration");
  for (auto* sub : {spectrum, evolve, floquet}) add_common(sub);

  auto* validate_cmd = app.add_subcommand("validate", "run the acceptance criteria");
  int only = 0;
  dce::acceptance::Options canary;
  validate_cmd->add_option("--only", only, "run a single criterion (1-7)")->check(CLI::Range(1, 7));
  validate_cmd->add_option("--coupling-scale", canary.coupling_scale, "fault injection: scale all g_kj");
  validate_cmd->add_option("--step-divisor", canary.step_divisor, "fault injection: divide step counts")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*validate_cmd) return validate(only, canary);
  if (*spectrum) return run(opts, "spectrum");
  if (*evolve) return run(opts, "evolve");
  return run(opts, "floquet");
}
