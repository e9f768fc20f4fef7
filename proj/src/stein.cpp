#include "ldw/stein.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "ldw/bounds.hpp"
#include "ldw/distances.hpp"
#include "ldw/error.hpp"
#include "ldw/normal.hpp"
#include "ldw/parallel.hpp"
#include "ldw/summary.hpp"

namespace ldw {

bool TestFunction::in_class(int p) const {
  return std::find(classes.begin(), classes.end(), p) != classes.end();
}

namespace test_functions {

TestFunction identity() { return {"identity", [](double w) { return w; }, {}, 1.0, {}}; }
TestFunction square() { return {"square", [](double w) { return w * w; }, {}, 1.0, {}}; }
TestFunction cube() { return {"cube", [](double w) { return w * w * w; }, {}, 1.0, {}}; }

TestFunction square_half() {
  return {"square_half", [](double w) { return 0.5 * w * w; }, {2, 3}, 1.0, {}};
}

TestFunction cubic_sixth() {
  return {"cubic_sixth", [](double w) { return w * w * w / 6.0; }, {3}, 1.0, {}};
}

TestFunction cosine() { return {"cosine", [](double w) { return std::cos(w); }, {2, 3}, 1.0, {}}; }
TestFunction sine() { return {"sine", [](double w) { return std::sin(w); }, {2, 3}, 1.0, {}}; }

TestFunction smoothed_hinge() {
  // Stable softplus.
  return {"smoothed_hinge",
          [](double w) { return std::max(w, 0.0) + std::log1p(std::exp(-std::abs(w))); },
          {2, 3},
          1.0,
          {}};
}

TestFunction gaussian_bump() {
  return {"gaussian_bump", [](double w) { return std::exp(-0.5 * w * w); }, {2}, 1.0, {}};
}

TestFunction absolute() { return {"absolute", [](double w) { return std::abs(w); }, {}, 1.0, {0.0}}; }

TestFunction monomial(unsigned k) {
  return {"w^" + std::to_string(k), [k](double w) { return std::pow(w, static_cast<double>(k)); },
          {}, 1.0, {}};
}

TestFunction by_name(const std::string& name) {
  for (auto make : {identity, square, cube, square_half, cubic_sixth, cosine, sine, smoothed_hinge,
                    gaussian_bump, absolute}) {
    TestFunction f = make();
    if (f.name == name) return f;
  }
  throw ConfigError("unknown test function '" + name + "'");
}

std::vector<TestFunction> library() {
  return {square_half(), cubic_sixth(), cosine(), sine(), smoothed_hinge(), gaussian_bump()};
}

std::vector<TestFunction> family(int p) {
  std::vector<TestFunction> out;
  for (auto& f : library())
    if (f.in_class(p)) out.push_back(std::move(f));
  return out;
}

}  // namespace test_functions

namespace {

constexpr double kNormalRange = 14.0;

double gauss_hermite_sum(const std::function<double(double)>& h, int order) {
  const auto& rule = gauss_hermite(order);
  CompensatedSum total;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    if (rule.weights[k] == 0.0) continue;
    total.add(rule.weights[k] * h(rule.nodes[k]));
  }
  return total.value();
}

double kronrod_normal(const std::function<double(double)>& h, std::vector<double> cuts, double tol) {
  cuts.push_back(-kNormalRange);
  cuts.push_back(kNormalRange);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0, error_total = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    if (cuts[c] < -kNormalRange || cuts[c + 1] > kNormalRange) continue;
    double error = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double x) { return h(x) * normal_pdf(x); }, cuts[c], cuts[c + 1], 15, 1e-14, &error);
    error_total += error;
  }
  if (!std::isfinite(total) || error_total > tol)
    throw NumericalError("normal functional: quadrature did not converge");
  return total;
}

double normal_functional_impl(const std::function<double(double)>& h,
                              const std::vector<double>& kinks, double tol) {
  require(tol > 0, "quadrature tolerance must be positive");
  if (kinks.empty()) {
    double previous = gauss_hermite_sum(h, 40);
    for (int order : {80, 160}) {
      double current = gauss_hermite_sum(h, order);
      if (!std::isfinite(current)) break;
      if (std::abs(current - previous) <= tol) return current;
      previous = current;
    }
  }
  return kronrod_normal(h, kinks, tol);
}

}  // namespace

double normal_functional(const TestFunction& h, double tol) {
  return normal_functional_impl(h.h, h.kinks, tol);
}

double normal_functional(const std::function<double(double)>& h, double tol) {
  return normal_functional_impl(h, {}, tol);
}

SteinSolver::SteinSolver(TestFunction h, double tol)
    : h_(std::move(h)), nh_(normal_functional(h_)), tol_(tol) {
  require(tol > 0, "Stein tolerance must be positive");
}

SteinSolver::SteinSolver(TestFunction h, double nh, double tol)
    : h_(std::move(h)), nh_(nh), tol_(tol) {
  require(tol > 0, "Stein tolerance must be positive");
}

double SteinSolver::integrate(double w, bool lower_branch) const {
  constexpr double kUpper = 14.0;
  auto integrand = [&](double u) {
    double t = lower_branch ? w - u : w + u;
    double weight = std::exp((lower_branch ? w * u : -w * u) - 0.5 * u * u);
    return weight == 0.0 ? 0.0 : weight * (h_.h(t) - nh_);
  };
  if (double tail = std::abs(integrand(kUpper)); !(tail <= tol_ * 1e-3))
    throw NumericalError("Stein solution: tail truncation failed at w = " + std::to_string(w));
  std::vector<double> cuts{0.0, kUpper};
  for (double k : h_.kinks) {
    double u = lower_branch ? w - k : k - w;
    if (u > 0.0 && u < kUpper) cuts.push_back(u);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0, error_total = 0.0, l1_total = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    double error = 0.0, l1 = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, cuts[c], cuts[c + 1], 15, tol_, &error, &l1);
    error_total += error;
    l1_total += l1;
  }
  if (!std::isfinite(total) || error_total > std::max(1e3 * tol_ * l1_total, tol_))
    throw NumericalError("Stein solution: quadrature did not converge at w = " + std::to_string(w));
  return lower_branch ? total : -total;
}

double SteinSolver::lower(double w) const { return integrate(w, true); }
double SteinSolver::upper(double w) const { return integrate(w, false); }

double SteinSolver::derivative(double w, int order) const {
  require(order >= 0 && order <= 3, "Stein derivatives are available for orders 0..3");
  const SteinSolver& f = *this;
  if (order == 0) return f(w);
  auto central = [&](double step) {
    switch (order) {
      case 1:
        return (f(w + step) - f(w - step)) / (2.0 * step);
      case 2:
        return (f(w + step) - 2.0 * f(w) + f(w - step)) / (step * step);
      default:
        return (f(w + 2 * step) - 2.0 * f(w + step) + 2.0 * f(w - step) - f(w - 2 * step)) /
               (2.0 * step * step * step);
    }
  };
  double step = order == 3 ? 0.02 : 0.01;
  return (4.0 * central(0.5 * step) - central(step)) / 3.0;
}

double solve_stein(const TestFunction& h, double w, double tol) { return SteinSolver(h, tol)(w); }

double stein_residual(const SteinSolver& solver, double w) {
  return solver.derivative(w, 1) - w * solver(w) - (solver.test_function()(w) - solver.nh());
}

LipschitzCheck derivative_lipschitz_check(const TestFunction& h, int order, double lo, double hi,
                                          double step) {
  require(order == 2 || order == 3, "Lipschitz check is defined for orders 2 and 3");
  require(hi > lo && step > 0 && step <= hi - lo, "Lipschitz check needs lo < hi and 0 < step");
  SteinSolver solver(h);
  auto max_quotient = [&](double dx) {
    auto points = static_cast<std::size_t>(std::llround((hi - lo) / dx)) + 1;
    std::vector<double> d(points);
    parallel_for(points, [&](std::size_t k) { d[k] = solver.derivative(lo + dx * k, order); });
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < points; ++k) {
      double q = std::abs(d[k + 1] - d[k]) / dx;
      if (!std::isfinite(q)) return q;
      worst = std::max(worst, q);
    }
    return worst;
  };
  LipschitzCheck check;
  check.order = order;
  check.step = step;
  check.quotient = max_quotient(step);
  check.refined_quotient = max_quotient(0.5 * step);
  check.violation = !std::isfinite(check.quotient) || !std::isfinite(check.refined_quotient) ||
                    check.refined_quotient > 1.5 * check.quotient + 1e-3;
  return check;
}

double normal_g2(const SteinSolver& solver, double nf2) {
  auto f2 = [&](double w) { return solver.derivative(w, 2); };
  // f'' carries differencing noise, so g uses a fixed rule rather than an
  // adaptive one: Gauss-Kronrod panels on cuts geometric in the weight's
  // decay length 1/max(1, |w|), toward the nearer tail as in SteinSolver.
  auto g = [&](double w) {
    const bool lower_branch = w <= 0.0;
    auto integrand = [&](double u) {
      double weight = std::exp((lower_branch ? w * u : -w * u) - 0.5 * u * u);
      return weight == 0.0 ? 0.0 : weight * (f2(lower_branch ? w - u : w + u) - nf2);
    };
    double total = 0.0;
    double a = 0.0, b = 1.0 / std::max(1.0, std::abs(w));
    while (a < 14.0) {
      b = std::min(b, 14.0);
      total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, a, b, 0);
      a = b;
      b *= 2.0;
    }
    return lower_branch ? total : -total;
  };
  // g'' from the Stein equation for g: g' = w g + f'' - Nf''.
  auto g2 = [&](double w) {
    return (1.0 + w * w) * g(w) + w * (f2(w) - nf2) + solver.derivative(w, 3);
  };
  return normal_functional(g2, 1e-5);
}

namespace {

// Scaled law of W from the exact support.
std::vector<std::pair<double, double>> scaled_exact_law(const LocalModel& model) {
  auto law = exact_sum_law(model.exact_support());
  std::vector<std::pair<double, double>> out;
  out.reserve(law.size());
  for (const auto& [w, p] : law) out.emplace_back(w.get_d() * model.scale(), p.get_d());
  return out;
}

}  // namespace

ExpansionResidual expansion_residual(const LocalModel& model, const TestFunction& h, int order,
                                     Mode mode, const ExpansionOptions& options) {
  require(order == 2 || order == 3, "expansion order must be 2 or 3");
  require(model.standardized(), "expansion residual needs a standardized model");
  const double p = order;
  ExpansionResidual out;
  out.order = order;
  out.mode = mode;

  SteinSolver solver(h);
  out.nh = solver.nh();
  auto f2 = [&](double w) { return solver.derivative(w, 2); };
  auto f3 = [&](double w) { return solver.derivative(w, 3); };
  out.nf2 = normal_functional(f2, 1e-7);

  if (mode == Mode::exact) {
    auto law = scaled_exact_law(model);
    CompensatedSum eh;
    for (const auto& [w, prob] : law) eh.add(prob * h(w));
    out.eh = eh.value();
    out.distance = wp_law_vs_normal(law, p);
  } else {
    const auto& mc = options.mc;
    require(mc.replicates >= 2, "Monte Carlo needs at least 2 replicates");
    std::vector<double> values(mc.replicates);
    parallel_for(mc.replicates, [&](std::size_t r) {
      Rng rng(mc.seed, stream_id(r, 14));
      values[r] = h(model.sample_sum(rng));
    });
    Summary s = summarize(values);
    out.eh = s.mean;
    out.lhs_std_error = s.std_error;
    require(options.w_samples >= 100, "distance term needs at least 100 draws of W");
    std::vector<double> draws(options.w_samples);
    parallel_for(draws.size(), [&](std::size_t r) {
      Rng rng(mc.seed, stream_id(r, 15));
      draws[r] = model.sample_sum(rng);
    });
    out.distance = wp_vs_normal(EmpiricalSample(std::move(draws), {mc.seed, model.name()}), p);
  }

  if (order == 2) {
    BoundReport report = theorem1_terms(model, mode, options.mc);
    out.kappa3 = report.beta.value;
    double gammas = report.gamma1.value + report.gamma2.value + report.gamma3.value;
    out.lhs = std::abs(out.eh - out.nh + 0.5 * out.kappa3 * out.nf2);
    out.rhs = std::abs(out.kappa3) * out.distance + gammas;
    return out;
  }

  SumCumulants cumulants = cumulants_of_sum(model, 4, mode, options.mc);
  out.kappa3 = cumulants.kappa3.value;
  out.kappa4 = cumulants.kappa4->value;
  out.nf3 = normal_functional(f3, 1e-6);
  if (out.kappa3 != 0.0) out.ng2 = normal_g2(solver, out.nf2);
  double r1 = compute_Rm(model, 1, mode, options.mc).value;
  double r2 = compute_Rm(model, 2, mode, options.mc).value;
  double r3 = compute_Rm(model, 3, mode, options.mc).value;
  out.lhs = std::abs(out.eh - out.nh + 0.5 * out.kappa3 * out.nf2 + out.kappa4 / 6.0 * out.nf3 -
                     0.25 * out.kappa3 * out.kappa3 * out.ng2);
  out.rhs = (r1 * r1 + r2) * out.distance + r1 * r2 + r3;
  return out;
}

}  // namespace ldw
