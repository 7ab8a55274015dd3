#include <CLI11.hpp>
#include <iostream>

#include "dlab/config.hpp"
#include "dlab/error.hpp"
#include "dlab/experiment.hpp"

namespace {

struct Command {
  std::string config;
  dlab::RunOptions opts;
};

CLI::App* add_command(CLI::App& app, const char* name, const char* help, Command& cmd) {
  auto* sub = app.add_subcommand(name, help);
  sub->add_option("config", cmd.config, "experiment config (JSON)")->required();
  sub->add_flag("--strict", cmd.opts.strict, "exit with status 3 on a maximum-principle violation");
  sub->add_option_function<std::string>("--out", [&](const std::string& d) { cmd.opts.out_dir = d; },
                                        "output directory (overrides the config)");
  sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { cmd.opts.seed = s; },
                                          "random seed (overrides the config)");
  return sub;
}

int execute(const Command& cmd) {
  try {
    auto config = dlab::load_config(cmd.config);
    auto outcome = dlab::run_experiment(config, cmd.opts);
    const auto& report = outcome.report;
    std::cout << "mode: " << report["mode"].get<std::string>() << "\n"
              << "status: " << report["status"].get<std::string>() << "\n";
    if (report.contains("error")) {
      const auto& e = report["error"];
      std::cerr << "error in stage " << e["stage"].get<std::string>() << " (" << e["kind"].get<std::string>()
                << "): " << e["message"].get<std::string>() << "\n";
    }
    for (const auto& [name, ok] : report["pass"].items())
      std::cout << "  " << (ok.get<bool>() ? "pass" : "FAIL") << "  " << name << "\n";
    std::cout << "artifacts: " << outcome.out_dir.string() << "\n";
    return outcome.exit_code;
  } catch (const dlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return dlab::exit_code::config_error;
  } catch (const dlab::Error& e) {
    std::cerr << e.kind() << ": " << e.what() << "\n";
    return dlab::exit_code::numerical_failure;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << e.what() << "\n";
    return dlab::exit_code::numerical_failure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for Donaldson's equation and its parabolic flow on flat tori"};
  app.require_subcommand(1);
  Command run, verify, abp;
  auto* run_cmd = add_command(app, "run", "run the pipeline selected by the config's mode", run);
  auto* verify_cmd = add_command(app, "verify", "solve and certify the estimates (mode = verify)", verify);
  auto* abp_cmd = add_command(app, "abp", "run the ABP verifier suite (mode = abp)", abp);
  verify.opts.mode = dlab::Mode::verify;
  abp.opts.mode = dlab::Mode::abp;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : dlab::exit_code::config_error;
  }
  if (*run_cmd) return execute(run);
  if (*verify_cmd) return execute(verify);
  if (*abp_cmd) return execute(abp);
  return dlab::exit_code::config_error;
}
