#include "execq/quotes.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "execq/parallel.hpp"

namespace execq {

namespace {

std::vector<double> tau_grid_for(const ModelParams& params,
                                 const std::vector<double>& t_grid) {
    std::set<double> taus{0.0, params.T};
    for (double t : t_grid) {
        if (t < 0.0 || t > params.T)
            throw InvalidParameter("t grid must lie in [0, T]");
        taus.insert(params.T - t);
    }
    return {taus.begin(), taus.end()};
}

double log_w_at(const ValueSpec& vs, double tau, int q) {
    return vs.w.log_interp(tau, q);
}

QuotePair quote_from_log_ratio(Criterion criterion, const ModelParams& params,
                               double log_ratio) {
    const double unc = quote_constant(criterion, params) + params.a / params.b +
                       log_ratio / params.kappa;
    return {unc, params.bounds.clamp(unc)};
}

}  // namespace

ValueSpec make_value_spec(const ModelParams& params, const SignalSpec& signal,
                          const PenaltySpec& penalties, Criterion criterion,
                          const std::vector<double>& t_grid, double rel_tol, int threads) {
    ValueSpec vs;
    vs.criterion = criterion;
    vs.params = params;
    vs.penalties = penalties;
    vs.coeffs = reduced_coefficients(params, signal, penalties, criterion);
    vs.w = solve(vs.coeffs, tau_grid_for(params, t_grid), rel_tol, threads);
    return vs;
}

double quote_constant(Criterion criterion, const ModelParams& p) {
    if (!uses_cara(criterion)) return 1.0 / p.kappa;
    if (!(p.gamma > 0.0)) throw InvalidParameter("CARA criteria require gamma > 0");
    return std::log1p(p.b * p.gamma / p.kappa) / (p.b * p.gamma);
}

QuotePair optimal_quote(const ValueSpec& vs, double t, int q) {
    if (q == 0) throw NoInventory("no quote exists at zero inventory");
    if (q < 0 || q > vs.params.Q0) throw InvalidParameter("q outside 1..Q0");
    if (t < 0.0 || t > vs.params.T) throw InvalidParameter("t outside [0, T]");
    const double tau = vs.params.T - t;
    const double lw_q = log_w_at(vs, tau, q);
    const double lw_qm1 = log_w_at(vs, tau, q - 1);
    if (!std::isfinite(lw_q) || !std::isfinite(lw_qm1))
        throw std::logic_error("continuation value lost positivity");
    return quote_from_log_ratio(vs.criterion, vs.params, lw_q - lw_qm1);
}

double value_function(const ValueSpec& vs, double t, double x, double M, int q) {
    if (q < 0 || q > vs.params.Q0) throw InvalidParameter("q outside 0..Q0");
    if (t < 0.0 || t > vs.params.T) throw InvalidParameter("t outside [0, T]");
    const bool cara = uses_cara(vs.criterion);
    if (q == 0) return cara ? -std::exp(-vs.params.gamma * x) : x;
    const double tau = vs.params.T - t;
    const double certainty_equivalent =
        (vs.params.b / vs.params.kappa) * log_w_at(vs, tau, q);
    const double wealth = x + static_cast<double>(q) * M + certainty_equivalent;
    return cara ? -std::exp(-vs.params.gamma * wealth) : wealth;
}

double hamiltonian_maximizer(HamiltonianFamily family, double Delta,
                             const ModelParams& p) {
    p.validate();
    if (family == HamiltonianFamily::RiskNeutral)
        return 1.0 / p.kappa + (p.a - Delta) / p.b;
    if (!(p.gamma > 0.0)) throw InvalidParameter("CARA maximizer requires gamma > 0");
    return (p.a - Delta) / p.b + std::log1p(p.b * p.gamma / p.kappa) / (p.b * p.gamma);
}

QuoteSurface build_quote_surface(const ValueSpec& vs, const std::vector<double>& t_grid,
                                 int threads) {
    QuoteSurface s;
    s.t_grid = t_grid;
    s.q_max = vs.params.Q0;
    const std::size_t nt = t_grid.size();
    const std::size_t nq = static_cast<std::size_t>(s.q_max);
    s.unconstrained.assign(nt, std::vector<double>(nq));
    s.projected.assign(nt, std::vector<double>(nq));
    s.interior.assign(nt, std::vector<char>(nq));
    parallel_for(nt, threads, [&](std::size_t ti) {
        for (int q = 1; q <= s.q_max; ++q) {
            const auto qp = optimal_quote(vs, t_grid[ti], q);
            s.unconstrained[ti][static_cast<std::size_t>(q - 1)] = qp.unconstrained;
            s.projected[ti][static_cast<std::size_t>(q - 1)] = qp.projected;
            s.interior[ti][static_cast<std::size_t>(q - 1)] =
                vs.params.bounds.contains(qp.unconstrained) ? 1 : 0;
        }
    });
    return s;
}

AdmissibilityReport check_interior_admissibility(const QuoteSurface& surface) {
    AdmissibilityReport report;
    for (std::size_t ti = 0; ti < surface.t_grid.size(); ++ti) {
        for (int q = 1; q <= surface.q_max; ++q) {
            if (surface.interior[ti][static_cast<std::size_t>(q - 1)]) continue;
            report.all_interior = false;
            const double unc = surface.unconstrained[ti][static_cast<std::size_t>(q - 1)];
            const double prj = surface.projected[ti][static_cast<std::size_t>(q - 1)];
            report.violations.push_back({surface.t_grid[ti], q, unc < prj ? -1 : +1});
        }
    }
    return report;
}

QuoteSurface frozen_signal_surface(const ModelParams& params, const SignalSpec& signal,
                                   const PenaltySpec& penalties, Criterion criterion,
                                   const std::vector<double>& t_grid, double rel_tol,
                                   int threads) {
    params.validate();
    penalties.validate(params.Q0);
    signal.validate_on_horizon(params.T);

    QuoteSurface s;
    s.t_grid = t_grid;
    s.q_max = params.Q0;
    const std::size_t nt = t_grid.size();
    const std::size_t nq = static_cast<std::size_t>(params.Q0);
    s.unconstrained.assign(nt, std::vector<double>(nq));
    s.projected.assign(nt, std::vector<double>(nq));
    s.interior.assign(nt, std::vector<char>(nq));
    parallel_for(nt, threads, [&](std::size_t ti) {
        const double t = t_grid[ti];
        if (t < 0.0 || t > params.T) throw InvalidParameter("t grid must lie in [0, T]");
        const auto coeffs = reduced_coefficients(
            params, SignalSpec::constant(signal.level(t)), penalties, criterion);
        const auto row = eval_w(coeffs, params.T - t, rel_tol);
        for (int q = 1; q <= params.Q0; ++q) {
            // same expression shape as the surface path so a constant signal
            // reproduces the constant-coefficient surface bit for bit
            const double log_ratio = std::log(row[static_cast<std::size_t>(q)]) -
                                     std::log(row[static_cast<std::size_t>(q - 1)]);
            const auto qp = quote_from_log_ratio(criterion, params, log_ratio);
            s.unconstrained[ti][static_cast<std::size_t>(q - 1)] = qp.unconstrained;
            s.projected[ti][static_cast<std::size_t>(q - 1)] = qp.projected;
            s.interior[ti][static_cast<std::size_t>(q - 1)] =
                params.bounds.contains(qp.unconstrained) ? 1 : 0;
        }
    });
    return s;
}

}  // namespace execq
