#pragma once

#include <functional>
#include <span>
#include <vector>

#include "execq/model.hpp"

namespace execq {

// Continuation-value table v_q(tau) = w(T - tau, q) on a caller-supplied
// ascending tau grid. Row conventions: values[ti][q], q = 0..Q0, with
// values[.][0] == 1 exactly and values[tau=0][q] == G_q.
struct WTable {
    enum class Method { NonDegenerate, Degenerate, Quadrature, Hybrid };

    std::vector<double> tau_grid;
    std::vector<std::vector<double>> values;
    Method method = Method::NonDegenerate;

    int max_q() const { return values.empty() ? -1 : static_cast<int>(values[0].size()) - 1; }
    double at(std::size_t ti, int q) const { return values[ti][static_cast<std::size_t>(q)]; }

    // log w at arbitrary tau, linear in log w between grid nodes (w is a
    // positive exponential mixture, so log-linear interpolation dominates
    // linear interpolation in relative error). Exact at grid nodes.
    double log_interp(double tau, int q) const;
};

// Divided difference of x -> exp(x * tau) over nodes A[r..q], computed via
// the recursive difference table. Equals
//   sum_{i=r}^{q} exp(A_i tau) / prod_{j != i} (A_i - A_j)
// when the nodes are distinct; throws DegenerateCoefficients when any pair
// among A[r..q] is closer than rel_tol * max(1, max|A|).
double divided_difference_exp(std::span<const double> A, int r, int q, double tau,
                              double rel_tol = kDefaultCoefficientTol);

// Closed-form solution for pairwise-distinct A:
//   v_q(tau) = sum_{r=0}^{q} C^{q-r} G_r * dd_exp(A, r, q, tau).
WTable solve_nondegenerate(const CoefficientSet& coeffs, std::vector<double> tau_grid,
                           int threads = 1, double rel_tol = kDefaultCoefficientTol);

// Closed-form solution for A identically zero:
//   v_q(tau) = sum_{i=0}^{q} (C^i / i!) G_{q-i} tau^i.
WTable solve_degenerate(const CoefficientSet& coeffs, std::vector<double> tau_grid,
                        double rel_tol = kDefaultCoefficientTol);

inline double default_quadrature_step(double tau_max) {
    return std::min(1e-2, tau_max / 2000.0);
}

// Ground-truth oracle: classical fourth-order Runge-Kutta on the triangular
// system dv_q/dtau = A(tau, q) v_q + C v_{q-1}, v_q(0) = G_q, v_0 == 1.
// Valid in every regime, including clustered and time-dependent A. A is
// parameterized by remaining time tau (A(tau, q) corresponds to calendar
// time T - tau).
WTable solve_quadrature(const std::function<double(double, int)>& A_of_tau_q, double C,
                        std::vector<double> G, std::vector<double> tau_grid, double step);

// Dispatch on the coefficient classification: AllZero -> degenerate closed
// form, Distinct -> non-degenerate closed form, Clustered -> quadrature.
// The method tag records the route taken.
WTable solve(const CoefficientSet& coeffs, std::vector<double> tau_grid,
             double rel_tol = kDefaultCoefficientTol, int threads = 1, double step = 0.0);

// Time-dependent coefficients always route through the quadrature oracle.
WTable solve(const std::function<double(double, int)>& A_of_tau_q, double C,
             std::vector<double> G, std::vector<double> tau_grid, double step = 0.0);

// Single-tau evaluation of w for all q (closed form or quadrature per the
// classification). Shares the per-point kernels with the grid solvers.
std::vector<double> eval_w(const CoefficientSet& coeffs, double tau,
                           double rel_tol = kDefaultCoefficientTol);

// log w(tau, q) evaluated with max-shifted (log-sum-exp) accumulation so
// horizons with A_max * tau up to ~700 log units do not overflow. Requires
// an AllZero or Distinct coefficient set.
double log_w(const CoefficientSet& coeffs, double tau, int q,
             double rel_tol = kDefaultCoefficientTol);

}  // namespace execq
