#pragma once

#include <vector>

#include "execq/model.hpp"

namespace execq {

enum class GrowthRegime { NonDegenerate, Degenerate, OutOfTheory };

// Long-horizon growth of the optimal quote at inventory level q:
//   NonDegenerate: lim delta/(T-t)      = (Abar_q - Abar_{q-1}) / kappa,
//                  Abar_q = max_{0<=i<=q} A_i
//   Degenerate:    lim delta/log(T-t)   = 1 / kappa
// Clustered-but-distinct coefficients fall outside both statements and are
// reported as OutOfTheory.
struct GrowthRate {
    GrowthRegime regime = GrowthRegime::NonDegenerate;
    double value = 0.0;
};

GrowthRate theoretical_growth_rate(const CoefficientSet& coeffs, int q, double kappa,
                                   double rel_tol = kDefaultCoefficientTol);

struct GrowthReport {
    GrowthRegime regime = GrowthRegime::NonDegenerate;
    int q = 0;
    double theoretical_rate = 0.0;
    double fitted_rate = 0.0;
    std::vector<double> horizons;
    double rel_error = 0.0;  // |fitted - theoretical| / max(|theoretical|, floor)
    // quote variation across the horizon list; the operational test for a
    // bounded quote is variation < 1e-6 across a horizon decade
    double quote_variation = 0.0;
};

// Least-squares slope of the exact initial quote delta(0, q) against T
// (non-degenerate) or log T (degenerate), evaluated in the log domain so
// horizons with A_max * T up to ~700 log units do not overflow.
GrowthReport fit_growth_rate(const ModelParams& params, const SignalSpec& signal,
                             const PenaltySpec& penalties, Criterion criterion, int q,
                             std::vector<double> horizons,
                             double rel_tol = kDefaultCoefficientTol);

// Exact initial quote at horizon T for inventory q, log-domain evaluation.
double long_horizon_quote(const ModelParams& params, const CoefficientSet& coeffs,
                          Criterion criterion, double horizon, int q,
                          double rel_tol = kDefaultCoefficientTol);

}  // namespace execq
