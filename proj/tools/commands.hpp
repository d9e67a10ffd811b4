#pragma once

#include <chrono>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gabp/gabp.hpp"

namespace gabp::cli {

enum ExitCode : int { kConverged = 0, kInputError = 1, kDiverged = 2 };

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

inline std::string fmt17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string trace_csv(const SolveReport& report) {
  std::ostringstream os;
  os << "iteration,max_change,residual_per_eq\n";
  for (const auto& row : report.trace()) {
    os << row.iteration << ',' << fmt17(row.max_change) << ',' << fmt17(row.residual_per_eq) << '\n';
  }
  return os.str();
}

inline Schedule parse_schedule(const std::string& s) {
  if (s == "parallel") return Schedule::parallel;
  if (s == "serial") return Schedule::serial;
  if (s == "broadcast") return Schedule::broadcast;
  throw InputError("unknown schedule '" + s + "'");
}

inline AccelMode parse_accel(const std::string& s) {
  if (s == "none") return AccelMode::none;
  if (s == "aitken") return AccelMode::aitken;
  if (s == "steffensen") return AccelMode::steffensen;
  throw InputError("unknown acceleration '" + s + "'");
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string matrix;
  std::string rhs;
  std::string solver = "gabp";
  std::string schedule = "parallel";
  std::string accel = "none";
  double eps = 1e-6;
  std::size_t max_iter = 10000;
  std::optional<double> alpha;
  std::string trace;
};

inline int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  const Vector b = parse_vector(read_file(args.rhs));
  const SymSystem system = parse_sym_system(read_file(args.matrix), b);
  const AccelConfig accel{parse_accel(args.accel)};

  SolveReport report;
  if (args.solver == "gabp") {
    SolveOptions o;
    o.epsilon = args.eps;
    o.max_iter = args.max_iter;
    o.schedule = parse_schedule(args.schedule);
    report = solve_accelerated(system, o, accel);
  } else {
    ClassicalOptions o;
    o.epsilon = args.eps;
    o.max_iter = args.max_iter;
    Method method = Method::jacobi;
    if (args.solver == "jacobi") {
      method = Method::jacobi;
    } else if (args.solver == "gs") {
      method = Method::gauss_seidel;
    } else if (args.solver == "sor") {
      method = Method::sor;
      if (args.alpha) {
        o.alpha = *args.alpha;
      } else {
        o.alpha = optimal_sor_alpha(system, o).alpha;
        err << "optimal alpha " << o.alpha << '\n';
      }
    } else {
      throw InputError("unknown solver '" + args.solver + "'");
    }
    report = solve_classical_accelerated(system, method, o, accel);
  }

  if (!args.trace.empty()) write_file(args.trace, trace_csv(report));
  if (!report.converged) {
    err << "diverged after " << report.iterations << " iterations";
    if (!report.note.empty()) err << ": " << report.note;
    err << '\n';
    return kDiverged;
  }
  out << std::fixed << std::setprecision(6);
  for (double v : report.means) out << (v == 0.0 ? 0.0 : v) << '\n';
  err << "converged in " << report.iterations << " iterations, residual per equation "
      << fmt17(report.residual_history.empty() ? 0.0 : report.residual_history.back()) << '\n';
  return kConverged;
}

// ---------------------------------------------------------------- bench

/// One (problem, solver) cell of a benchmark table.
struct BenchRow {
  std::string problem;
  std::string solver;
  std::string accel;
  bool converged = false;
  std::size_t iterations = 0;
  double residual = 0.0;
  double wall_ms = 0.0;
  std::optional<std::size_t> reference;
  std::string detail;  // e.g. the chosen SOR weight
};

inline std::vector<std::string> default_solvers() {
  return {"jacobi",
          "gs",
          "optimal_sor",
          "parallel_gabp",
          "serial_gabp",
          "parallel_gabp+aitken",
          "parallel_gabp+steffensen",
          "serial_gabp+steffensen"};
}

/// Runs one labeled solver: jacobi, gs, optimal_sor, sor:ALPHA,
/// {parallel,serial,broadcast}_gabp, optionally suffixed +aitken or
/// +steffensen.
inline BenchRow run_bench_cell(const ProblemInstance& problem, const std::string& label,
                               double eps = 1e-6) {
  BenchRow row;
  row.problem = problem.id;
  row.solver = label;
  std::string base = label;
  AccelConfig accel;
  if (auto plus = label.find('+'); plus != std::string::npos) {
    base = label.substr(0, plus);
    accel.mode = parse_accel(label.substr(plus + 1));
  }
  row.accel = std::string(to_string(accel.mode));
  if (auto it = problem.reference_iterations.find(label); it != problem.reference_iterations.end()) {
    row.reference = it->second;
  }

  const auto start = std::chrono::steady_clock::now();
  SolveReport report;
  if (base.ends_with("_gabp")) {
    SolveOptions o;
    o.epsilon = eps;
    o.schedule = parse_schedule(base.substr(0, base.size() - 5));
    report = solve_accelerated(problem.system, o, accel);
  } else {
    ClassicalOptions o;
    o.epsilon = eps;
    if (base == "jacobi") {
      report = solve_classical_accelerated(problem.system, Method::jacobi, o, accel);
    } else if (base == "gs") {
      report = solve_classical_accelerated(problem.system, Method::gauss_seidel, o, accel);
    } else if (base == "optimal_sor") {
      if (accel.mode != AccelMode::none) throw InputError("optimal_sor takes no acceleration");
      SorChoice choice = optimal_sor_alpha(problem.system, o);
      report = std::move(choice.report);
      if (report.converged) {
        std::ostringstream os;
        os << "alpha=" << choice.alpha;
        row.detail = os.str();
      }
    } else if (base.starts_with("sor:")) {
      o.alpha = std::stod(base.substr(4));
      report = solve_classical_accelerated(problem.system, Method::sor, o, accel);
    } else {
      throw InputError("unknown solver '" + label + "'");
    }
  }
  const auto stop = std::chrono::steady_clock::now();
  row.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  row.converged = report.converged;
  row.iterations = report.iterations;
  row.residual = report.residual_history.empty() ? std::numeric_limits<double>::infinity()
                                                 : report.residual_history.back();
  return row;
}

inline std::vector<BenchRow> run_bench(const ProblemInstance& problem,
                                       const std::vector<std::string>& solvers,
                                       double eps = 1e-6) {
  std::vector<BenchRow> rows;
  rows.reserve(solvers.size());
  for (const auto& s : solvers) rows.push_back(run_bench_cell(problem, s, eps));
  return rows;
}

/// Human-readable table; divergent rows show "-" for iterations.
inline std::string render_table(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "problem" << std::setw(28) << "solver" << std::right
     << std::setw(12) << "iterations" << std::setw(11) << "reference" << std::setw(14)
     << "residual" << std::setw(11) << "time_ms" << "  note\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(12) << r.problem << std::setw(28) << r.solver << std::right
       << std::setw(12) << (r.converged ? std::to_string(r.iterations) : std::string("-"))
       << std::setw(11) << (r.reference ? std::to_string(*r.reference) : std::string(""))
       << std::setw(14);
    if (r.converged) {
      os << std::scientific << std::setprecision(3) << r.residual;
    } else {
      os << "-";
    }
    os << std::setw(11) << std::fixed << std::setprecision(3) << r.wall_ms << "  " << r.detail
       << '\n';
    os.unsetf(std::ios::floatfield);
  }
  return os.str();
}

/// Stable CSV: no timings, 17 significant digits.
inline std::string render_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "problem,solver,accel,status,iterations,reference,residual_per_eq\n";
  for (const auto& r : rows) {
    os << r.problem << ',' << r.solver << ',' << r.accel << ','
       << (r.converged ? "converged" : "diverged") << ',' << r.iterations << ','
       << (r.reference ? std::to_string(*r.reference) : std::string()) << ','
       << fmt17(r.residual) << '\n';
  }
  return os.str();
}

struct BenchArgs {
  std::string suite;
  std::vector<std::string> solvers;
  std::string format = "table";
  double eps = 1e-6;
};

inline int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream&) {
  const ProblemInstance problem = problem_by_name(args.suite);
  if (args.format != "table" && args.format != "csv") {
    throw InputError("unknown format '" + args.format + "'");
  }
  const auto solvers = args.solvers.empty() ? default_solvers() : args.solvers;
  const auto rows = run_bench(problem, solvers, args.eps);
  out << (args.format == "csv" ? render_csv(rows) : render_table(rows));
  return kConverged;
}

// ---------------------------------------------------------------- analyze

inline std::string render_analysis(const SpectralReport& rep) {
  std::ostringstream os;
  os << "rho(|I - D^-1 A|): " << std::setprecision(6) << rep.rho << '\n';
  os << "dominance: " << to_string(rep.dominance) << '\n';
  os << "condition number: ";
  if (std::isinf(rep.kappa)) {
    os << "inf (singular)\n";
  } else {
    os << std::setprecision(6) << rep.kappa << '\n';
  }
  os << "diagonal-dominance test: "
     << (rep.dominance_guarantee() ? "converges" : "no guarantee") << '\n';
  os << "spectral-radius test: " << (rep.spectral_guarantee() ? "converges" : "no guarantee")
     << '\n';
  return os.str();
}

inline int cmd_analyze(const std::string& matrix, std::ostream& out, std::ostream&) {
  const SymSystem system = parse_sym_system(read_file(matrix));
  out << render_analysis(analyze(system));
  return kConverged;
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string problem;
  std::size_t p = 3;
  std::string out_prefix;
};

/// Writes PREFIX.mtx and PREFIX.rhs.
inline int cmd_gen(const GenArgs& args, std::ostream& out, std::ostream&) {
  const std::string name =
      args.problem == "poisson" ? "poisson:" + std::to_string(args.p) : args.problem;
  const ProblemInstance inst = problem_by_name(name);
  write_file(args.out_prefix + ".mtx", write_matrix_market(inst.system));
  write_file(args.out_prefix + ".rhs", write_vector(inst.system.rhs()));
  out << "wrote " << args.out_prefix << ".mtx and " << args.out_prefix << ".rhs ("
      << inst.system.size() << " unknowns)\n";
  return kConverged;
}

// ---------------------------------------------------------------- lsq

struct LsqArgs {
  std::string matrix;
  std::string rhs;
  double psi = 1e-6;
  bool check = false;
};

/// Dense solve of (S^T S + psi I) x = S^T y.
inline Vector normal_equations_solution(const RectMatrix& s, const Vector& y, double psi) {
  const std::size_t n = s.cols();
  std::vector<Vector> g(n, Vector(n, 0.0));
  for (const auto& [ij, v] : s.entries()) {
    for (const auto& [kl, w] : s.entries()) {
      if (ij.first == kl.first) g[ij.second][kl.second] += v * w;
    }
  }
  for (std::size_t i = 0; i < n; ++i) g[i][i] += psi;
  return DenseLu(std::move(g)).solve(s.multiply_transposed(y));
}

inline int cmd_lsq(const LsqArgs& args, std::ostream& out, std::ostream& err) {
  const RectMatrix s = to_rect_matrix(parse_matrix_market(read_file(args.matrix)));
  const Vector y = parse_vector(read_file(args.rhs));
  const LeastSquaresResult res = solve_least_squares(s, y, args.psi);
  if (!res.report.converged) {
    err << "GaBP diverged on the augmented system";
    if (!res.report.note.empty()) err << " (" << res.report.note << ")";
    err << "; rho(|I - D^-1 A|) = " << res.spectral_radius << '\n';
    return kDiverged;
  }
  out << std::fixed << std::setprecision(6);
  for (double v : res.x) out << (v == 0.0 ? 0.0 : v) << '\n';
  err << "converged in " << res.report.iterations << " iterations\n";
  if (args.check) {
    const Vector ref = normal_equations_solution(s, y, args.psi);
    double dev = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) dev = std::max(dev, std::abs(ref[i] - res.x[i]));
    err << "max deviation from normal-equations solution: " << std::scientific
        << std::setprecision(3) << dev << '\n';
  }
  return kConverged;
}

}  // namespace gabp::cli
