#include "execq/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "execq/quotes.hpp"
#include "execq/triangular.hpp"

namespace execq {

GrowthRate theoretical_growth_rate(const CoefficientSet& coeffs, int q, double kappa,
                                   double rel_tol) {
    coeffs.validate();
    if (q < 1 || q > coeffs.max_q()) throw InvalidParameter("q outside 1..Q0");
    if (!(kappa > 0.0)) throw InvalidParameter("kappa must be > 0");
    const auto cls = classify_coefficients(coeffs, rel_tol);
    switch (cls.kind) {
        case Classification::Kind::AllZero:
            return {GrowthRegime::Degenerate, 1.0 / kappa};
        case Classification::Kind::Clustered:
            return {GrowthRegime::OutOfTheory, 0.0};
        case Classification::Kind::Distinct: {
            double abar_prev = 0.0, abar = 0.0;
            for (int i = 0; i <= q; ++i) {
                abar = std::max(abar, coeffs.A[static_cast<std::size_t>(i)]);
                if (i <= q - 1) abar_prev = std::max(abar_prev, coeffs.A[static_cast<std::size_t>(i)]);
            }
            return {GrowthRegime::NonDegenerate, (abar - abar_prev) / kappa};
        }
    }
    throw InvalidParameter("unreachable classification");
}

double long_horizon_quote(const ModelParams& params, const CoefficientSet& coeffs,
                          Criterion criterion, double horizon, int q, double rel_tol) {
    const double log_ratio = log_w(coeffs, horizon, q, rel_tol) -
                             log_w(coeffs, horizon, q - 1, rel_tol);
    return quote_constant(criterion, params) + params.a / params.b +
           log_ratio / params.kappa;
}

namespace {

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace

GrowthReport fit_growth_rate(const ModelParams& params, const SignalSpec& signal,
                             const PenaltySpec& penalties, Criterion criterion, int q,
                             std::vector<double> horizons, double rel_tol) {
    if (horizons.size() < 4) throw InvalidParameter("need at least 4 horizons");
    for (std::size_t i = 1; i < horizons.size(); ++i)
        if (!(horizons[i] > horizons[i - 1]))
            throw InvalidParameter("horizons must be strictly ascending");

    const auto coeffs = reduced_coefficients(params, signal, penalties, criterion);
    const auto rate = theoretical_growth_rate(coeffs, q, params.kappa, rel_tol);
    if (rate.regime == GrowthRegime::OutOfTheory)
        throw DegenerateCoefficients(
            "clustered coefficients are outside the growth-rate theory");

    GrowthReport report;
    report.regime = rate.regime;
    report.q = q;
    report.theoretical_rate = rate.value;
    report.horizons = horizons;

    std::vector<double> x(horizons.size()), y(horizons.size());
    double qmin = 0.0, qmax = 0.0;
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        const double quote =
            long_horizon_quote(params, coeffs, criterion, horizons[i], q, rel_tol);
        x[i] = rate.regime == GrowthRegime::Degenerate ? std::log(horizons[i])
                                                       : horizons[i];
        y[i] = quote;
        if (i == 0) {
            qmin = qmax = quote;
        } else {
            qmin = std::min(qmin, quote);
            qmax = std::max(qmax, quote);
        }
    }
    report.fitted_rate = least_squares_slope(x, y);
    report.quote_variation = qmax - qmin;
    const double floor = 1e-12;
    report.rel_error = std::fabs(report.fitted_rate - report.theoretical_rate) /
                       std::max(std::fabs(report.theoretical_rate), floor);
    return report;
}

}  // namespace execq
