#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ldw/bounds.hpp"
#include "ldw/distances.hpp"
#include "ldw/error.hpp"
#include "ldw/harness.hpp"
#include "ldw/matching.hpp"
#include "ldw/stein.hpp"

namespace {

using namespace ldw;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_estimate(const std::string& label, const MomentEstimate& e) {
  std::cout << label << " " << num(e.value);
  if (e.mode == Mode::mc) std::cout << " se " << num(e.std_error);
  std::cout << "\n";
}

// One float per line; blank lines and '#' comments are skipped.
std::vector<double> read_sample_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open sample file '" + path + "'");
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(line.data() + first, line.data() + last + 1, v);
    require(ec == std::errc() && ptr == line.data() + last + 1,
            path + ":" + std::to_string(line_no) + ": not a number");
    values.push_back(v);
  }
  return values;
}

// Options shared by `bound` and `rate`: each one, when given, is applied as a
// config key so flags override file values.
struct ModelFlags {
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    static const std::vector<std::pair<std::string, std::string>> keys = {
        {"model", "iid | mdep | ustat | erg | matching"},
        {"base", "rademacher | normal | bernoulli:<q>"},
        {"m", "m-dependence lag"},
        {"coefficients", "MA coefficients c_0,...,c_m (default all ones)"},
        {"kernel", "U-statistic kernel: mean | product | mixed"},
        {"kernel_order", "U-statistic order"},
        {"kernel_weight", "weight of the product part of the mixed kernel"},
        {"motif", "edge, path3, triangle, star3, cycle4, k4 or an edge-list file ('u v' per line, 0-indexed)"},
        {"p", "edge probability"},
        {"beta", "four-point law parameter"},
    };
    for (const auto& [key, help] : keys) {
      std::string flag = "--" + key;
      for (auto& ch : flag)
        if (ch == '_') ch = '-';
      app->add_option_function<std::string>(flag, [this, key = key](const std::string& v) { values[key] = v; },
                                            help);
    }
  }

  void apply(ExperimentConfig& config) const {
    for (const auto& [key, value] : values) set_config_value(config, key, value);
  }
};

int run_bound(const ModelFlags& flags, std::uint64_t n, const std::string& mode_text,
              std::uint64_t replicates, std::uint64_t seed, int max_rm, int wp, int depth) {
  ExperimentConfig config;
  flags.apply(config);
  Mode mode = parse_mode(mode_text);
  require(max_rm >= 0 && max_rm <= 12, "--rm must be in 0..12");
  require(wp >= 0 && wp <= 4, "--wp must be in 0..4");
  int need = std::max({3, max_rm + 1, wp + 1});
  LocalModel model = build_model(config.model, n, std::max(depth, need));
  McOptions mc{seed, replicates};
  BoundReport report = theorem1_terms(model, mode, mc);
  std::cout << "model " << model.name() << "\n"
            << "size " << model.size() << "\n"
            << "mode " << to_string(mode) << "\n";
  print_estimate("beta", report.beta);
  print_estimate("gamma1", report.gamma1);
  print_estimate("gamma2", report.gamma2);
  print_estimate("gamma3", report.gamma3);
  std::cout << "terms " << report.term_count << "\n";
  std::cout << "functional_w2 " << num(w2_bound_functional(report)) << "\n";
  for (int m = 1; m <= max_rm; ++m) print_estimate("R" + std::to_string(m), compute_Rm(model, m, mode, mc));
  if (wp > 0)
    std::cout << "rm_functional_w" << wp << " " << num(wp_conjecture_functional(model, wp, mode, mc)) << "\n";
  return 0;
}

int run_rate(const ModelFlags& flags, const std::string& config_path,
             const std::map<std::string, std::string>& overrides, bool fit) {
  ExperimentConfig config;
  if (!config_path.empty()) config = load_config(config_path);
  flags.apply(config);
  for (const auto& [key, value] : overrides) set_config_value(config, key, value);
  ExperimentResult result = run_experiment(config);
  for (const auto& e : result.errors) std::cerr << "error n=" << e.n << ": " << e.message << "\n";
  require(!result.rows.empty(), "no rows produced");
  if (config.output.empty())
    emit(result.rows, std::cout, config.format);
  else
    emit_file(result.rows, config.output, config.format);
  if (!fit) return 0;
  RateFit rate = fit_rate(result.rows);
  std::ostream& out = config.output.empty() ? std::cerr : std::cout;
  out << "slope " << num(rate.slope) << "\n"
      << "intercept " << num(rate.intercept) << "\n"
      << "r_squared " << num(rate.r_squared) << "\n";
  for (std::size_t k = 0; k < rate.n.size(); ++k)
    out << "n " << rate.n[k] << " mean " << num(rate.mean_distance[k]) << " floor "
        << num(rate.baseline_floor[k]) << (rate.usable[k] ? "" : " (below floor)") << "\n";
  return 0;
}

int run_stein_check(const std::string& name, double lo, double hi, double step, double tol) {
  require(step > 0.0 && hi >= lo, "stein-check: need lo <= hi and step > 0");
  SteinSolver solver(test_functions::by_name(name), tol);
  std::cout << "h " << name << "\nNh " << num(solver.nh()) << "\n";
  std::cout << "w f f' f'' residual\n";
  double worst = 0.0;
  int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  for (int k = 0; k <= count; ++k) {
    double w = lo + k * step;
    double r = stein_residual(solver, w);
    worst = std::max(worst, std::abs(r));
    std::cout << num(w) << " " << num(solver(w)) << " " << num(solver.derivative(w, 1)) << " "
              << num(solver.derivative(w, 2)) << " " << num(r) << "\n";
  }
  std::cout << "max_residual " << num(worst) << "\n";
  for (int p = 2; p <= 3; ++p) {
    LipschitzCheck c = derivative_lipschitz_check(solver.test_function(), p, lo, hi, std::max(step, 0.05));
    std::cout << "f^(" << p << ") lipschitz " << num(c.quotient) << " refined " << num(c.refined_quotient)
              << (c.violation ? " violation" : "") << "\n";
  }
  return 0;
}

void print_law(const DiscreteLaw& law) {
  std::cout << "n " << (law.n_selected ? std::to_string(*law.n_selected) : "none (V_n = N(0,1))") << "\n";
  std::cout << "c2 " << to_string(law.c2) << "\n";
  for (std::size_t k = 0; k < law.atoms.size(); ++k)
    std::cout << "atom " << to_string(law.atoms[k]) << " prob " << law.probs[k].to_string() << " ("
              << num(law.probs[k].to_double()) << ")\n";
  LawCumulants c = law_cumulants(law);
  std::cout << "mass " << law.total_mass().to_string() << "\n"
            << "mean " << c.mean.to_string() << "\n"
            << "variance " << c.variance.to_string() << "\n"
            << "kappa3 " << c.kappa3.to_string() << "\n"
            << "kappa4 " << c.kappa4.to_string() << "\n";
}

int run_law(const std::string& kind, const std::string& beta, const std::string& k3,
            const std::string& k4) {
  if (kind == "four-point") {
    require(!beta.empty(), "four-point needs --beta");
    print_law(four_point_law(parse_rational(beta)));
  } else if (kind == "five-point") {
    require(!k3.empty() && !k4.empty(), "five-point needs --kappa3 and --kappa4");
    print_law(five_point_law(parse_rational(k3), parse_rational(k4)));
  } else {
    throw ConfigError("law: expected four-point or five-point");
  }
  return 0;
}

int run_wp(const std::string& path, const std::string& against, const std::string& metric, double p) {
  EmpiricalSample a(read_sample_file(path));
  std::cout << "size " << a.size() << "\n";
  if (!against.empty()) {
    EmpiricalSample b(read_sample_file(against));
    require(metric == "wp", "two-sample mode supports only --metric wp");
    std::cout << "w" << num(p) << " " << num(empirical_wp(a, b, p)) << "\n";
    return 0;
  }
  if (metric == "wp") {
    std::cout << "w" << num(p) << " " << num(wp_vs_normal(a, p)) << "\n";
  } else if (metric == "kolmogorov") {
    std::cout << "kolmogorov " << num(kolmogorov_vs_normal(a)) << "\n";
  } else if (metric == "zolotarev") {
    int order = static_cast<int>(p);
    require(order == 2 || order == 3, "zolotarev needs --p 2 or 3");
    std::cout << "zolotarev" << order << "_lower "
              << num(zolotarev_lower_bound(a, order, test_functions::family(order))) << "\n";
  } else {
    throw ConfigError("metric: expected wp | kolmogorov | zolotarev");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normal-approximation bounds for sums of locally dependent variables"};
  app.require_subcommand(1);

  ModelFlags bound_flags, rate_flags;

  auto* bound = app.add_subcommand("bound", "Print the bound terms for a model");
  bound_flags.attach(bound);
  std::uint64_t bound_n = 16, bound_reps = 100000, bound_seed = 1;
  std::string bound_mode = "exact";
  int bound_rm = 0, bound_wp = 0, bound_depth = 4;
  bound->add_option("-n,--n", bound_n, "number of summands (vertices for erg)")->capture_default_str();
  bound->add_option("--mode", bound_mode, "exact | mc")->capture_default_str();
  bound->add_option("--replicates", bound_reps, "Monte Carlo replicates")->capture_default_str();
  bound->add_option("--seed", bound_seed)->capture_default_str();
  bound->add_option("--rm", bound_rm, "also print R_1..R_m")->capture_default_str();
  bound->add_option("--wp", bound_wp, "also print sum_{m<=p} R_m^{1/m}")->capture_default_str();
  bound->add_option("--depth", bound_depth, "declared neighborhood depth")->capture_default_str();

  auto* rate = app.add_subcommand("rate", "Run a seeded rate study and fit the log-log slope");
  rate_flags.attach(rate);
  std::string rate_config;
  std::map<std::string, std::string> rate_overrides;
  bool rate_no_fit = false;
  rate->add_option("-c,--config", rate_config, "key = value config file")->check(CLI::ExistingFile);
  for (std::string key : {"grid", "replicates", "samples", "distance", "seed", "output", "format"})
    rate->add_option_function<std::string>("--" + key,
                                           [&rate_overrides, key](const std::string& v) { rate_overrides[key] = v; });
  rate->add_flag("--no-fit", rate_no_fit, "emit rows only");
  rate->footer(
      "Config keys: model base m coefficients kernel kernel_order kernel_weight motif p beta\n"
      "grid (e.g. 64,128,256 or 2^6..2^12) replicates samples distance seed output format.\n"
      "Motif files: one 'u v' edge per line, 0-indexed, '#' comments.");

  auto* stein = app.add_subcommand("stein-check", "Tabulate the Stein solution and its residual");
  std::string stein_h = "square";
  double stein_lo = -4.0, stein_hi = 4.0, stein_step = 0.5, stein_tol = 1e-13;
  stein->add_option("--function", stein_h, "test function name")->capture_default_str();
  stein->add_option("--lo", stein_lo)->capture_default_str();
  stein->add_option("--hi", stein_hi)->capture_default_str();
  stein->add_option("--step", stein_step)->capture_default_str();
  stein->add_option("--tol", stein_tol, "quadrature tolerance")->capture_default_str();

  auto* law = app.add_subcommand("law", "Build a cumulant-matching law");
  std::string law_kind, law_beta, law_k3, law_k4;
  law->add_option("kind", law_kind, "four-point | five-point")->required();
  law->add_option("--beta", law_beta);
  law->add_option("--kappa3", law_k3);
  law->add_option("--kappa4", law_k4);

  auto* wp = app.add_subcommand("wp", "Distances of a sample file (one float per line) to N(0,1)");
  std::string wp_path, wp_against, wp_metric = "wp";
  double wp_p = 2.0;
  wp->add_option("sample", wp_path)->required()->check(CLI::ExistingFile);
  wp->add_option("--against", wp_against, "second sample: two-sample W_p")->check(CLI::ExistingFile);
  wp->add_option("--metric", wp_metric, "wp | kolmogorov | zolotarev")->capture_default_str();
  wp->add_option("--p", wp_p)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*bound) return run_bound(bound_flags, bound_n, bound_mode, bound_reps, bound_seed, bound_rm, bound_wp, bound_depth);
    if (*rate) return run_rate(rate_flags, rate_config, rate_overrides, !rate_no_fit);
    if (*stein) return run_stein_check(stein_h, stein_lo, stein_hi, stein_step, stein_tol);
    if (*law) return run_law(law_kind, law_beta, law_k3, law_k4);
    if (*wp) return run_wp(wp_path, wp_against, wp_metric, wp_p);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
