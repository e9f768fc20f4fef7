#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ldw/moments.hpp"

namespace ldw {

// Test function with its declared smoothness. `classes` lists the p for which
// h (times `scale`, already applied) lies in Lambda_p: h^{(p-1)} is
// 1-Lipschitz. `kinks` are points where h is not smooth; quadrature splits
// there.
struct TestFunction {
  std::string name;
  std::function<double(double)> h;
  std::vector<int> classes;
  double scale = 1.0;
  std::vector<double> kinks;

  double operator()(double w) const { return h(w); }
  bool in_class(int p) const;
};

namespace test_functions {
TestFunction identity();           // w
TestFunction square();             // w^2
TestFunction cube();               // w^3
TestFunction square_half();        // w^2/2, Lambda_2 and Lambda_3
TestFunction cubic_sixth();        // w^3/6, Lambda_3
TestFunction cosine();             // cos w, Lambda_2 and Lambda_3
TestFunction sine();               // sin w, Lambda_2 and Lambda_3
TestFunction smoothed_hinge();     // log(1 + e^w), Lambda_2 and Lambda_3
TestFunction gaussian_bump();      // e^{-w^2/2}, Lambda_2
TestFunction absolute();           // |w|, Lipschitz only: negative control for Lambda_2
TestFunction monomial(unsigned k); // w^k
TestFunction by_name(const std::string& name);
std::vector<TestFunction> library();  // the smooth members above
std::vector<TestFunction> family(int p);  // library members declared in Lambda_p
}  // namespace test_functions

// E h(Z) for Z ~ N(0,1). Gauss-Hermite of orders 40, 80, 160 until two
// successive orders agree to `tol`; kinked or slowly converging h fall back to
// adaptive Gauss-Kronrod on [-14, 14] split at the kinks.
double normal_functional(const TestFunction& h, double tol = 1e-10);
double normal_functional(const std::function<double(double)>& h, double tol = 1e-10);

// Bounded-growth solution of f'(w) - w f(w) = h(w) - Nh. For w <= 0 it
// integrates toward the lower tail, f(w) = int_0^inf e^{wu - u^2/2}(h(w-u) - Nh) du,
// otherwise toward the upper tail, f(w) = -int_0^inf e^{-wu - u^2/2}(h(w+u) - Nh) du.
class SteinSolver {
 public:
  explicit SteinSolver(TestFunction h, double tol = 1e-13);
  SteinSolver(TestFunction h, double nh, double tol);

  const TestFunction& test_function() const { return h_; }
  double nh() const { return nh_; }
  double tol() const { return tol_; }

  double operator()(double w) const { return w <= 0.0 ? lower(w) : upper(w); }
  double lower(double w) const;
  double upper(double w) const;

  // Richardson-extrapolated central differences with steps H0 and H0/2
  // (H0 = 0.01 for orders 1-2, 0.02 for order 3).
  double derivative(double w, int order) const;

 private:
  double integrate(double w, bool lower_branch) const;

  TestFunction h_;
  double nh_;
  double tol_;
};

double solve_stein(const TestFunction& h, double w, double tol = 1e-13);

// f' - w f - (h - Nh), with f' by Richardson differences.
double stein_residual(const SteinSolver& solver, double w);

// N g'' where g solves the Stein equation with f_h'' in place of h and
// nf2 = N f_h''.
double normal_g2(const SteinSolver& solver, double nf2);

struct LipschitzCheck {
  int order = 2;
  double step = 0.0;
  double quotient = 0.0;          // max adjacent difference quotient at `step`
  double refined_quotient = 0.0;  // same at step / 2
  bool violation = false;         // quotient grows under refinement
};

// Difference quotients of f_h^{(order)} over adjacent points of
// [lo, hi] with the given step, repeated at half the step.
LipschitzCheck derivative_lipschitz_check(const TestFunction& h, int order, double lo, double hi,
                                          double step);

struct ExpansionOptions {
  McOptions mc;                     // replicates for E h(W) and the bound terms
  std::uint64_t w_samples = 100000;  // draws of W for the distance term
};

struct ExpansionResidual {
  int order = 2;
  Mode mode = Mode::exact;
  double lhs = 0.0;
  double lhs_std_error = 0.0;
  double rhs = 0.0;
  double eh = 0.0, nh = 0.0;
  double nf2 = 0.0, nf3 = 0.0, ng2 = 0.0;
  double kappa3 = 0.0, kappa4 = 0.0;
  double distance = 0.0;  // W_2 (order 2) or W_3 (order 3) of W against N(0,1)
};

// Order 2: |E h(W) - Nh + (beta/2) N f''| against |beta| W_2 + gamma1 + gamma2 + gamma3.
// Order 3: |E h(W) - Nh + (k3/2) N f'' + (k4/6) N f''' - (k3^2/4) N g''| against
// (R_1^2 + R_2) W_3 + R_1 R_2 + R_3, with g the Stein solution for f''. In
// exact mode E h(W), the cumulants, the bound terms and W_p come from the
// exact law of W.
ExpansionResidual expansion_residual(const LocalModel& model, const TestFunction& h, int order,
                                     Mode mode, const ExpansionOptions& options = {});

}  // namespace ldw
