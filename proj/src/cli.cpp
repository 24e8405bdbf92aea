#include "sgdg/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <memory>

#include "CLI11.hpp"
#include "sgdg/assembly.hpp"
#include "sgdg/error.hpp"
#include "sgdg/linalg.hpp"
#include "sgdg/postproc.hpp"
#include "sgdg/problem.hpp"

namespace sgdg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Target {
  int dim = 0;
  ScalarField exact;
  VectorField exact_grad;
  std::optional<Problem> problem;
};

Target exp_prod_target(int d) {
  Target t;
  t.dim = d;
  t.exact = [](std::span<const double> x) {
    double p = 1.0;
    for (double v : x) p *= v;
    return std::exp(p);
  };
  t.exact_grad = [](std::span<const double> x, std::span<double> g) {
    double p = 1.0;
    for (double v : x) p *= v;
    const double u = std::exp(p);
    for (std::size_t m = 0; m < x.size(); ++m) {
      double q = 1.0;
      for (std::size_t j = 0; j < x.size(); ++j)
        if (j != m) q *= x[j];
      g[m] = u * q;
    }
  };
  return t;
}

Target resolve_target(const ExperimentConfig& cfg) {
  if (cfg.problem == "exp_prod") {
    if (cfg.mode == ExperimentConfig::Mode::Solve) throw ConfigError("exp_prod is only available in project mode");
    const int d = cfg.dim.value_or(2);
    if (d < 1 || d > 8) throw ConfigError("dimension must be in 1..8");
    return exp_prod_target(d);
  }
  Target t;
  t.problem = builtin_problem(cfg.problem);
  t.dim = t.problem->dim;
  if (cfg.dim && *cfg.dim != t.dim)
    throw ConfigError("problem " + cfg.problem + " is " + std::to_string(t.dim) + "-dimensional");
  if (!t.problem->has_exact()) throw ConfigError("problem " + cfg.problem + " has no exact solution");
  t.exact = t.problem->exact;
  t.exact_grad = t.problem->exact_grad;
  return t;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.problem.empty()) throw ConfigError("missing problem name");
  if (cfg.degree < 0 || cfg.degree > 6) throw ConfigError("degree k must be in 0..6");
  if (cfg.n_min < 0 || cfg.n_max < cfg.n_min) throw ConfigError("level range must be nonempty and ascending");
  if (cfg.iquad < 1) throw ConfigError("iquad must be at least 1");
  if (cfg.sigma < 0.0 || !std::isfinite(cfg.sigma)) throw ConfigError("sigma must be positive");
  if (cfg.error_points < 0 || cfg.error_points > 20) throw ConfigError("error points must be in 0..20");
  if (cfg.threads < 0) throw ConfigError("threads must be non-negative");
  if (cfg.mode == ExperimentConfig::Mode::Solve && cfg.degree < 1)
    throw ConfigError("solve mode needs k >= 1");
}

std::string sci3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2E", v);
  return buf;
}

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string order_text(const std::optional<double>& o, bool precise) {
  if (!o) return "";
  if (precise) return full(*o);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *o);
  return buf;
}

class CsvWriter {
public:
  CsvWriter(const ExperimentConfig& cfg, std::ostream& table) : solve_(cfg.mode == ExperimentConfig::Mode::Solve) {
    if (cfg.out.empty()) {
      display_ = &table;
    } else {
      display_file_ = std::make_unique<std::ofstream>(cfg.out);
      if (!*display_file_) throw ConfigError("cannot open " + cfg.out);
      display_ = display_file_.get();
      const std::string fp = full_path(cfg.out);
      full_file_ = std::make_unique<std::ofstream>(fp);
      if (!*full_file_) throw ConfigError("cannot open " + fp);
    }
    std::string head = "N,SGDOF,FGDOF,L1,order,L2,order,Linf,order,H1,order";
    if (solve_) head += ",NNZ,Order,Cond";
    *display_ << head << '\n' << std::flush;
    if (full_file_) {
      *full_file_ << head;
      if (solve_) *full_file_ << ",NNZ_stored,sigma,iterations,min_ritz";
      *full_file_ << ",seconds\n" << std::flush;
    }
  }

  static std::string full_path(const std::string& out) {
    const std::string ext = ".csv";
    if (out.size() > ext.size() && out.compare(out.size() - ext.size(), ext.size(), ext) == 0)
      return out.substr(0, out.size() - ext.size()) + ".full.csv";
    return out + ".full.csv";
  }

  void row(const ExperimentRow& r) {
    write(*display_, r, false);
    if (full_file_) write(*full_file_, r, true);
  }

private:
  void write(std::ostream& os, const ExperimentRow& r, bool precise) const {
    const auto num = [&](double v) { return precise ? full(v) : sci3(v); };
    os << r.n << ',' << r.sgdof << ',' << r.fgdof << ',' << num(r.l1) << ',' << order_text(r.o_l1, precise) << ','
       << num(r.l2) << ',' << order_text(r.o_l2, precise) << ',' << num(r.linf) << ','
       << order_text(r.o_linf, precise) << ',' << num(r.h1) << ',' << order_text(r.o_h1, precise);
    if (solve_) {
      os << ',' << r.nnz << ',' << order_text(r.nnz_order, precise) << ',' << (r.cond ? num(*r.cond) : "");
      if (precise) os << ',' << r.nnz_stored << ',' << full(r.sigma) << ',' << r.iterations << ',' << full(r.min_ritz);
    }
    if (precise) os << ',' << full(r.seconds);
    os << '\n' << std::flush;
  }

  bool solve_;
  std::ostream* display_ = nullptr;
  std::unique_ptr<std::ofstream> display_file_, full_file_;
};

std::optional<double> order_of(double prev, double cur) {
  if (!(prev > 0.0) || !(cur > 0.0)) return std::nullopt;
  return std::log2(prev / cur);
}

std::string export_stem(const ExperimentConfig& cfg) {
  if (!cfg.out.empty()) {
    const std::string ext = ".csv";
    const std::string& o = cfg.out;
    if (o.size() > ext.size() && o.compare(o.size() - ext.size(), ext.size(), ext) == 0)
      return o.substr(0, o.size() - ext.size());
    return o;
  }
  return cfg.problem + "_" + to_string(cfg.kind) + "_k" + std::to_string(cfg.degree);
}

}  // namespace

std::pair<int, int> parse_level_range(const std::string& text) {
  const auto parse_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad level range '" + text + "'");
    }
    if (used != s.size()) throw ConfigError("bad level range '" + text + "'");
    return v;
  };
  const auto dots = text.find("..");
  const int a = parse_int(text.substr(0, dots));
  const int b = dots == std::string::npos ? a : parse_int(text.substr(dots + 2));
  if (a < 0 || b < a) throw ConfigError("level range must be nonempty and ascending: '" + text + "'");
  return {a, b};
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg, std::ostream& table, std::ostream& log) {
  validate(cfg);
  const Target target = resolve_target(cfg);
  const int threads = resolve_threads(cfg.threads);
  CsvWriter csv(cfg, table);
  std::vector<ExperimentRow> rows;
  QuadConfig quad;
  quad.iquad = cfg.iquad;

  for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
    const auto t0 = Clock::now();
    const SpaceSpec space = enumerate(cfg.kind, target.dim, n, cfg.degree, cfg.dof_cap);
    ExperimentRow r;
    r.n = n;
    r.sgdof = space.size();
    r.fgdof = full_grid_dim(target.dim, n, cfg.degree);
    std::vector<double> coeffs;
    if (cfg.mode == ExperimentConfig::Mode::Project) {
      coeffs = l2_project_function(target.exact, space, quad);
    } else {
      SchemeParams params;
      params.sigma = cfg.sigma;
      params.quad = quad;
      params.threads = threads;
      const AssembledSystem sys = assemble(space, *target.problem, params);
      r.sigma = sys.sigma;
      r.nnz = sys.nnz_full();
      r.nnz_stored = sys.A.stored_nnz();
      r.nnz_order = std::log(static_cast<double>(r.nnz)) / std::log(static_cast<double>(r.sgdof));
      if (cfg.export_matrix) {
        const std::string stem = export_stem(cfg) + "_N" + std::to_string(n);
        write_matrix_market(sys.A, stem + ".mtx");
        write_vector(sys.b, stem + "_rhs.txt");
        if (!cfg.quiet) log << "  wrote " << stem << ".mtx\n";
      }
      SolveOptions so;
      so.threads = threads;
      const SolveReport rep = solve(sys.A, sys.b, so);
      r.iterations = rep.iterations;
      r.min_ritz = rep.min_ritz;
      coeffs = rep.x;
      if (cfg.cond) r.cond = cond_estimate(sys.A, 1e-6, threads).cond;
    }
    ErrorOptions eo;
    eo.threads = threads;
    eo.points = cfg.error_points;
    const DiscreteFunction uh(space, std::move(coeffs));
    const ErrorReport e =
        target.problem ? error_norms(uh, *target.problem, eo) : error_norms(uh, target.exact, target.exact_grad, eo);
    r.l1 = e.l1;
    r.l2 = e.l2;
    r.linf = e.linf;
    r.h1 = e.h1;
    if (!rows.empty()) {
      const ExperimentRow& p = rows.back();
      if (p.n + 1 == n) {
        r.o_l1 = order_of(p.l1, r.l1);
        r.o_l2 = order_of(p.l2, r.l2);
        r.o_linf = order_of(p.linf, r.linf);
        r.o_h1 = order_of(p.h1, r.h1);
      }
    }
    r.seconds = seconds_since(t0);
    csv.row(r);
    if (!cfg.quiet) log << "N=" << n << " dofs=" << r.sgdof << " L2=" << sci3(r.l2) << " (" << r.seconds << " s)\n";
    rows.push_back(r);
  }
  return rows;
}

namespace {

// "k=2" style tokens become "--k=2" so the examples in the README work verbatim.
std::vector<std::string> normalize_args(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) {
    std::string a = argv[i];
    const auto eq = a.find('=');
    if (a.rfind("-", 0) != 0 && eq != std::string::npos && eq > 0) a = "--" + a;
    args.push_back(a);
  }
  return args;  // CLI11 consumes the vector in reverse
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse-grid interior-penalty DG experiments"};
  ExperimentConfig cfg;
  std::string mode, range, kind = "vhat";
  int dim = 0;
  bool no_cond = false;
  app.set_config("--config", "", "flat key=value file; command line values take precedence");
  app.add_option("mode", mode, "project or solve")->required()->check(CLI::IsMember({"project", "solve"}));
  std::string names = "exp_prod (project mode)";
  for (const auto& n : builtin_problem_names()) names += ", " + n;
  app.add_option("problem", cfg.problem, names)->required();
  app.add_option("--d", dim, "dimension (exp_prod only)");
  app.add_option("--k", cfg.degree, "polynomial degree");
  app.add_option("--N", range, "level range A..B")->required();
  app.add_option("--kind", kind, "vhat, vtilde or vhathat");
  app.add_option("--sigma", cfg.sigma, "penalty; default depends on d and k");
  app.add_option("--iquad", cfg.iquad, "quadrature base level");
  app.add_option("--error-points", cfg.error_points, "Gauss points per coordinate and cell for the error norms");
  app.add_option("--out", cfg.out, "display CSV path; a .full.csv sibling gets full precision");
  app.add_flag("--export-matrix", cfg.export_matrix, "write A and b for every N");
  app.add_option("--threads", cfg.threads, "worker threads; default SGDG_THREADS or all cores");
  app.add_option("--max-dofs", cfg.dof_cap, "stop with a resource error above this many unknowns");
  app.add_flag("--no-cond", no_cond, "skip the condition number estimate");
  app.add_flag("--quiet", cfg.quiet, "no progress output");

  try {
    app.parse(normalize_args(argc, argv));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "sgdg: " << e.what() << '\n';
    return 2;
  }

  try {
    cfg.mode = mode == "project" ? ExperimentConfig::Mode::Project : ExperimentConfig::Mode::Solve;
    if (dim > 0) cfg.dim = dim;
    const auto [a, b] = parse_level_range(range);
    cfg.n_min = a;
    cfg.n_max = b;
    cfg.kind = parse_space_kind(kind);
    cfg.cond = !no_cond;
    run_experiment(cfg, out, err);
    return 0;
  } catch (const ConfigError& e) {
    err << "sgdg: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const SolveError& e) {
    err << "sgdg: solver failure: " << e.what() << '\n';
    return 3;
  } catch (const ResourceError& e) {
    err << "sgdg: resource limit: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    err << "sgdg: error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace sgdg
