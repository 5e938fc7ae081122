// Command-line front end: run, sweep, check, list-problems.

#include <filesystem>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"

#include "hocp/acceptance.hpp"
#include "hocp/runner.hpp"

namespace {

int cmd_run(const std::string& path) {
  hocp::RunConfig cfg;
  try {
    cfg = hocp::load_run_config(path);
  } catch (const hocp::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  const hocp::RunOutcome out = hocp::execute_run(cfg);
  hocp::write_outcome(cfg, out);
  std::cout << out.summary.value("status", "?") << ": wrote " << cfg.output << ".csv and " << cfg.output << ".json\n";
  return out.exit_code;
}

int cmd_sweep(const std::string& template_path, const std::string& grid_path) {
  hocp::json base, grid;
  try {
    base = hocp::read_json_file(template_path);
    grid = hocp::read_json_file(grid_path);
  } catch (const hocp::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  const auto parent = std::filesystem::path(template_path).parent_path();
  hocp::SweepOutcome out;
  try {
    out = hocp::run_sweep(base, grid, parent.empty() ? "." : parent.string(), hocp::thread_cap());
  } catch (const hocp::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  for (const auto& p : out.points) {
    std::cout << std::setw(3) << p.exit_code << "  " << p.label;
    if (p.summary.contains("status")) std::cout << "  " << p.summary["status"].get<std::string>();
    if (!p.error.empty()) std::cout << "  error: " << p.error;
    std::cout << '\n';
  }
  return out.exit_code;
}

int cmd_check(std::optional<double> kappa, const std::vector<int>& only) {
  hocp::acceptance::Options opt;
  opt.kappa = kappa;
  opt.only = only;
  const auto results = hocp::acceptance::run_all(opt);
  return hocp::acceptance::print_report(std::cout, results) ? 0 : 1;
}

int cmd_list_problems() {
  for (const auto& p : hocp::list_problems()) {
    std::cout << std::left << std::setw(10) << p["name"].get<std::string>() << " dim=" << std::setw(3)
              << p["dim"].dump() << " q<=" << p["max_q"].get<int>()
              << (p["bigfloat"].get<bool>() ? "  bigfloat" : "  binary64") << "  " << p["about"].get<std::string>()
              << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Higher-order cutting-plane bundle method"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one configuration, writing <output>.csv and <output>.json");
  run->add_option("config", config_path, "Run configuration (JSON)")->required();

  std::string template_path, grid_path;
  auto* sweep = app.add_subcommand("sweep", "Run a template over a parameter grid (HOCP_THREADS caps workers)");
  sweep->add_option("template", template_path, "Template configuration (JSON)")->required();
  sweep->add_option("grid", grid_path, "Parameter grid (JSON)")->required();

  double kappa = 0;
  std::vector<int> only;
  auto* check = app.add_subcommand("check", "Run the acceptance suite");
  auto* kappa_opt = check->add_option("--kappa", kappa, "Override kappa in every schedule (mutation test)");
  check->add_option("--only", only, "Criterion ids to run");

  auto* list = app.add_subcommand("list-problems", "List the built-in problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*sweep) return cmd_sweep(template_path, grid_path);
    if (*check) return cmd_check(kappa_opt->count() ? std::optional<double>(kappa) : std::nullopt, only);
    if (*list) return cmd_list_problems();
  } catch (const hocp::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
