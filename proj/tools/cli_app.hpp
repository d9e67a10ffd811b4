#pragma once

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"

namespace gabp::cli {

/// Parses `args` (without the program name) and runs one subcommand.
/// Returns 0 on convergence, 1 on usage or input errors, 2 on divergence.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian belief propagation linear solver and benchmark harness", "gabp"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Solve A x = b from files");
  solve->add_option("--matrix", solve_args.matrix, "Matrix Market file")->required();
  solve->add_option("--rhs", solve_args.rhs, "right-hand side, one value per line")->required();
  solve->add_option("--solver", solve_args.solver)
      ->check(CLI::IsMember({"gabp", "jacobi", "gs", "sor"}));
  solve->add_option("--schedule", solve_args.schedule)
      ->check(CLI::IsMember({"parallel", "serial", "broadcast"}));
  solve->add_option("--accel", solve_args.accel)
      ->check(CLI::IsMember({"none", "aitken", "steffensen"}));
  solve->add_option("--eps", solve_args.eps)->check(CLI::PositiveNumber);
  solve->add_option("--max-iter", solve_args.max_iter)->check(CLI::PositiveNumber);
  solve->add_option("--alpha", solve_args.alpha, "damping for sor; grid-searched when omitted");
  solve->add_option("--trace", solve_args.trace, "write per-iteration CSV here");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Run a built-in benchmark suite");
  bench->add_option("--suite", bench_args.suite, "toy3, cdma3, cdma4, nonpsd3 or poisson:P")
      ->required();
  bench->add_option("--solvers", bench_args.solvers, "comma-separated solver labels")
      ->delimiter(',');
  bench->add_option("--format", bench_args.format)->check(CLI::IsMember({"table", "csv"}));
  bench->add_option("--eps", bench_args.eps)->check(CLI::PositiveNumber);

  std::string analyze_matrix;
  auto* analyze_cmd = app.add_subcommand("analyze", "Convergence diagnostics for a matrix");
  analyze_cmd->add_option("--matrix", analyze_matrix)->required();

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Write a built-in problem to files");
  gen->add_option("--problem", gen_args.problem)
      ->required()
      ->check(CLI::IsMember({"toy3", "cdma3", "cdma4", "nonpsd3", "poisson"}));
  gen->add_option("--p", gen_args.p, "Poisson grid size")->check(CLI::PositiveNumber);
  gen->add_option("--out-prefix", gen_args.out_prefix)->required();

  LsqArgs lsq_args;
  auto* lsq = app.add_subcommand("lsq", "Regularized least squares via the augmented system");
  lsq->add_option("--matrix", lsq_args.matrix)->required();
  lsq->add_option("--rhs", lsq_args.rhs)->required();
  lsq->add_option("--psi", lsq_args.psi)->check(CLI::PositiveNumber);
  lsq->add_flag("--check", lsq_args.check, "compare against the dense normal equations");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kInputError;
  }

  try {
    if (*solve) return cmd_solve(solve_args, out, err);
    if (*bench) return cmd_bench(bench_args, out, err);
    if (*analyze_cmd) return cmd_analyze(analyze_matrix, out, err);
    if (*gen) return cmd_gen(gen_args, out, err);
    if (*lsq) return cmd_lsq(lsq_args, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace gabp::cli
