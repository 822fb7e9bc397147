// Timing comparison of the OpenMP kernels against their serial reference
// paths, plus closed-form solvers against the Runge-Kutta oracle.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "execq/parallel.hpp"
#include "execq/quotes.hpp"
#include "execq/simulate.hpp"
#include "execq/triangular.hpp"

using namespace execq;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

ModelParams baseline() {
    ModelParams p;
    p.lambda = 5.0 / 6.0;
    p.kappa = 1000.0;
    p.sigma = 0.01;
    p.T = 30.0;
    p.Q0 = 2;
    p.M0 = 100.0;
    return p;
}

}  // namespace

int main() {
    const int threads = hardware_threads();
    std::printf("hardware threads: %d\n\n", threads);

    {
        const auto params = baseline();
        const auto penalties = PenaltySpec::builtin(params.Q0, 0.001, 0.0);
        const auto signal = SignalSpec::constant(0.0);
        const auto vs = make_value_spec(params, signal, penalties,
                                        Criterion::RiskNeutral, linspace(0, 30, 4097));
        const auto surface = build_quote_surface(vs, linspace(0, 30, 4097));
        const auto policy = Policy::from_surface(surface);
        const long n_paths = 40000;

        auto t0 = std::chrono::steady_clock::now();
        auto serial = run_paths(params, signal, penalties, Criterion::RiskNeutral,
                                policy, n_paths, 7, 1);
        const double t_serial = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        auto parallel = run_paths(params, signal, penalties, Criterion::RiskNeutral,
                                  policy, n_paths, 7, threads);
        const double t_parallel = seconds_since(t0);
        const bool identical = serial == parallel;
        std::printf("monte carlo, %ld paths:   serial %.3fs   %d threads %.3fs   "
                    "speedup %.2fx   identical=%s\n",
                    n_paths, t_serial, threads, t_parallel, t_serial / t_parallel,
                    identical ? "yes" : "NO");
    }

    {
        ModelParams params = baseline();
        params.Q0 = 10;
        params.sigma = 0.01;
        params.gamma = 0.01;
        const auto penalties = PenaltySpec::builtin(params.Q0, 0.001, 0.0);
        const auto signal = SignalSpec::constant(2e-4);
        const auto coeffs =
            reduced_coefficients(params, signal, penalties, Criterion::Cara);
        const auto grid = linspace(0.0, 30.0, 200001);

        auto t0 = std::chrono::steady_clock::now();
        const auto w_serial = solve_nondegenerate(coeffs, grid, 1);
        const double t_serial = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        const auto w_parallel = solve_nondegenerate(coeffs, grid, threads);
        const double t_parallel = seconds_since(t0);
        const bool identical = w_serial.values == w_parallel.values;
        std::printf("triangular solve, %zu x %d grid:   serial %.3fs   %d threads %.3fs "
                    "  speedup %.2fx   identical=%s\n",
                    grid.size(), params.Q0 + 1, t_serial, threads, t_parallel,
                    t_serial / t_parallel, identical ? "yes" : "NO");

        const auto small_grid = linspace(0.0, 30.0, 31);
        t0 = std::chrono::steady_clock::now();
        const auto w_closed = solve_nondegenerate(coeffs, small_grid, 1);
        const double t_closed = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        const std::vector<double> A = coeffs.A;
        const auto w_oracle = solve_quadrature(
            [&A](double, int q) { return A[static_cast<std::size_t>(q)]; }, coeffs.C,
            coeffs.G, small_grid, 1e-3);
        const double t_oracle = seconds_since(t0);
        double max_rel = 0.0;
        for (std::size_t ti = 0; ti < small_grid.size(); ++ti)
            for (int q = 0; q <= params.Q0; ++q) {
                const double rel = std::fabs(w_closed.at(ti, q) - w_oracle.at(ti, q)) /
                                   w_oracle.at(ti, q);
                max_rel = std::max(max_rel, rel);
            }
        std::printf("closed form vs RK4 oracle, 31-point grid:   closed %.6fs   oracle "
                    "%.3fs   max rel diff %.2e\n",
                    t_closed, t_oracle, max_rel);
    }
    return 0;
}
