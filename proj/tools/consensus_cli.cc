// consensus: run averaging-map scenarios from the command line.
//
//   consensus run simulate --name paper/one-over-t --out results
//   consensus run certify --file my.json --name fam --seed 3
//   consensus run matrix --file a.csv
//   consensus list
//   consensus export-builtins --out builtins.json

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "consensus/scenario.h"

namespace sc = consensus::scenario;

int main(int argc, char** argv) {
  CLI::App app{"Consensus dynamics of averaging maps"};
  app.require_subcommand(1);

  sc::CommandOptions options;
  std::string command;
  std::string file;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int max_steps = 0;
  double tol = 0.0;

  CLI::App* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("command", command, "simulate, certify, rendezvous or matrix")
      ->required()
      ->check(CLI::IsMember({"simulate", "certify", "rendezvous", "matrix"}));
  run->add_option("--file", file, "Scenario file (built-ins when omitted) or matrix file");
  run->add_option("--name", options.name, "Scenario name");
  run->add_option("--out", out_dir, "Output directory");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
  CLI::Option* steps_opt = run->add_option("--max-steps", max_steps, "Override max steps")
                               ->check(CLI::PositiveNumber);
  CLI::Option* tol_opt = run->add_option("--tol", tol, "Override the consensus tolerance")
                             ->check(CLI::PositiveNumber);

  CLI::App* list = app.add_subcommand("list", "List built-in scenarios");

  std::string export_path;
  CLI::App* exporter = app.add_subcommand("export-builtins", "Write the built-ins as a scenario file");
  exporter->add_option("--out", export_path, "Destination (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // CLI11 reports --help as success and everything else as exit 1 here.
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*list) {
    for (const sc::Scenario& s : sc::builtin_scenarios().scenarios) {
      std::cout << s.name << "  " << s.description << '\n';
    }
    return 0;
  }
  if (*exporter) {
    const std::string text = sc::to_json(sc::builtin_scenarios()).dump(2);
    if (export_path.empty()) {
      std::cout << text << '\n';
      return 0;
    }
    std::ofstream f(export_path);
    if (!f) {
      std::cerr << "error: cannot write " << export_path << '\n';
      return 1;
    }
    f << text << '\n';
    return 0;
  }

  if (!file.empty()) options.file = file;
  options.out = out_dir;
  if (*seed_opt) options.seed = seed;
  if (*steps_opt) options.max_steps = max_steps;
  if (*tol_opt) options.tol = tol;

  if (command == "simulate") return sc::cmd_simulate(options, std::cout, std::cerr);
  if (command == "certify") return sc::cmd_certify(options, std::cout, std::cerr);
  if (command == "rendezvous") return sc::cmd_rendezvous(options, std::cout, std::cerr);
  return sc::cmd_matrix(options, std::cout, std::cerr);
}
