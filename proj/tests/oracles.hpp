// Independent oracles used by the tests. These deliberately avoid the
// library's implementation paths: the divided-difference sum is the literal
// ratio form, and the benchmark quotes are coded directly from their
// polynomial-sum representations.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "execq/model.hpp"

namespace oracles {

// Literal sum-of-ratios form: sum_i exp(A_i tau) / prod_{j != i} (A_i - A_j).
// Accurate only at well-separated nodes; retained as a cross-check.
inline double phi_literal(const std::vector<double>& A, int r, int q, double tau) {
    double sum = 0.0;
    for (int i = r; i <= q; ++i) {
        double denom = 1.0;
        for (int j = r; j <= q; ++j) {
            if (j != i) denom *= A[static_cast<std::size_t>(i)] - A[static_cast<std::size_t>(j)];
        }
        sum += std::exp(A[static_cast<std::size_t>(i)] * tau) / denom;
    }
    return sum;
}

// No-drift risk-neutral benchmark quote (a=0, b=1, g=0, I(q)=alpha q):
//   delta(t,q) = (1/kappa) [1 + log(S_q / S_{q-1})],
//   S_q = sum_i ((lambda/e)^i / i!) exp(-kappa alpha (q-i)^2) tau^i.
inline double benchmark_quote_risk_neutral(double lambda, double kappa, double alpha,
                                           double tau, int q) {
    auto S = [&](int qq) {
        double sum = 0.0;
        double coef = 1.0;  // (lambda/e)^i / i!
        for (int i = 0; i <= qq; ++i) {
            const double r = static_cast<double>(qq - i);
            sum += coef * std::exp(-kappa * alpha * r * r) * std::pow(tau, i);
            coef *= lambda * std::exp(-1.0) / static_cast<double>(i + 1);
        }
        return sum;
    };
    return (1.0 / kappa) * (1.0 + std::log(S(q) / S(q - 1)));
}

// No-drift, no-volatility exponential-utility benchmark quote
// (a=0, b=1, g=0, sigma=0, I(q)=alpha for q>=1):
//   delta(t,q) = -alpha
//              + (1/kappa) log(1 + (lh^q/q!) tau^q / sum_{j<q} (lh^j/j!) e^{-kappa alpha (q-j)} tau^j)
//              + (1/gamma) log(1 + gamma/kappa),
//   lh = lambda (kappa/(kappa+gamma))^{kappa/gamma + 1}.
inline double benchmark_quote_cara(double lambda, double kappa, double gamma,
                                   double alpha, double tau, int q) {
    const double lh =
        lambda * std::exp(-(kappa / gamma + 1.0) * std::log1p(gamma / kappa));
    double top = 1.0;  // lh^q / q!
    for (int i = 1; i <= q; ++i) top *= lh / static_cast<double>(i);
    top *= std::pow(tau, q);
    double bottom = 0.0;
    double coef = 1.0;  // lh^j / j!
    for (int j = 0; j < q; ++j) {
        bottom += coef * std::exp(-kappa * alpha * static_cast<double>(q - j)) *
                  std::pow(tau, j);
        coef *= lh / static_cast<double>(j + 1);
    }
    return -alpha + (1.0 / kappa) * std::log1p(top / bottom) +
           (1.0 / gamma) * std::log1p(gamma / kappa);
}

// Coefficient set with pairwise-distinct A (minimum gap enforced), C > 0 and
// positive G; Q0 levels beyond A_0 = 0.
inline execq::CoefficientSet random_distinct_coefficients(std::mt19937_64& rng, int Q0,
                                                          double a_range = 1.0,
                                                          double min_gap = 5e-3) {
    std::uniform_real_distribution<double> ua(-a_range, a_range);
    std::uniform_real_distribution<double> uc(0.05, 1.0);
    std::uniform_real_distribution<double> ug(-5.0, 0.0);
    execq::CoefficientSet cs;
    cs.A.assign(static_cast<std::size_t>(Q0) + 1, 0.0);
    cs.G.assign(static_cast<std::size_t>(Q0) + 1, 1.0);
    for (int q = 1; q <= Q0; ++q) {
        while (true) {
            const double cand = ua(rng);
            bool ok = true;
            for (int j = 0; j < q; ++j) {
                if (std::fabs(cand - cs.A[static_cast<std::size_t>(j)]) < min_gap) {
                    ok = false;
                    break;
                }
            }
            if (std::fabs(cand) < min_gap) ok = false;
            if (ok) {
                cs.A[static_cast<std::size_t>(q)] = cand;
                break;
            }
        }
        cs.G[static_cast<std::size_t>(q)] = std::exp(ug(rng));
    }
    cs.C = uc(rng);
    return cs;
}

}  // namespace oracles
