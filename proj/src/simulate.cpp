#include "execq/simulate.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

#include "execq/parallel.hpp"
#include "execq/rng.hpp"
#include "execq/stats.hpp"
#include "execq/triangular.hpp"

namespace execq {

Policy Policy::constant(double delta) {
    Policy p;
    p.fn_ = [delta](double, int) { return delta; };
    p.fn_lower_bound_ = delta;
    return p;
}

Policy Policy::from_function(std::function<double(double, int)> fn,
                             std::optional<double> lower_bound) {
    if (!fn) throw InvalidParameter("policy requires a function");
    Policy p;
    p.fn_ = std::move(fn);
    p.fn_lower_bound_ = lower_bound;
    return p;
}

Policy Policy::from_surface(const QuoteSurface& surface) {
    if (surface.t_grid.size() < 2) throw InvalidParameter("surface needs >= 2 time nodes");
    Policy p;
    p.t_grid_ = surface.t_grid;
    p.delta_.assign(static_cast<std::size_t>(surface.q_max), {});
    p.node_min_.assign(static_cast<std::size_t>(surface.q_max),
                       std::numeric_limits<double>::infinity());
    for (int q = 1; q <= surface.q_max; ++q) {
        auto& row = p.delta_[static_cast<std::size_t>(q - 1)];
        row.resize(surface.t_grid.size());
        for (std::size_t ti = 0; ti < surface.t_grid.size(); ++ti) {
            row[ti] = surface.projected[ti][static_cast<std::size_t>(q - 1)];
            p.node_min_[static_cast<std::size_t>(q - 1)] =
                std::min(p.node_min_[static_cast<std::size_t>(q - 1)], row[ti]);
        }
    }
    return p;
}

double Policy::raw_quote(double t, int q) const {
    if (fn_) return fn_(t, q);
    if (q < 1 || q > static_cast<int>(delta_.size()))
        throw InvalidParameter("policy has no row for this inventory level");
    const auto& grid = t_grid_;
    const auto& row = delta_[static_cast<std::size_t>(q - 1)];
    if (t <= grid.front()) return row.front();
    if (t >= grid.back()) return row.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    const std::size_t lo = hi - 1;
    const double theta = (t - grid[lo]) / (grid[hi] - grid[lo]);
    return (1.0 - theta) * row[lo] + theta * row[hi];
}

double Policy::quote(double t, int q) const {
    double d = raw_quote(t, q) + offset_;
    if (clamp_) d = clamp_->clamp(d);
    return d;
}

std::optional<double> Policy::lower_bound(int q) const {
    std::optional<double> lb;
    if (fn_) {
        lb = fn_lower_bound_;
    } else {
        if (q < 1 || q > static_cast<int>(node_min_.size()))
            throw InvalidParameter("policy has no row for this inventory level");
        lb = node_min_[static_cast<std::size_t>(q - 1)];
    }
    if (lb) *lb += offset_;
    if (clamp_) {
        if (lb) return clamp_->clamp(*lb);
        if (clamp_->lower) return clamp_->lower;
    }
    return lb;
}

Policy Policy::shifted(double eps) const {
    Policy p = *this;
    p.offset_ += eps;
    return p;
}

Policy Policy::clamped(const QuoteBounds& bounds) const {
    Policy p = *this;
    p.clamp_ = bounds;
    return p;
}

PathRecord simulate_path(const ModelParams& params, const SignalSpec& signal,
                         const PenaltySpec& penalties, const Policy& policy,
                         std::uint64_t seed) {
    params.validate();
    penalties.validate(params.Q0);

    CounterRng rng(seed);
    PathRecord pr;
    pr.fill_times.reserve(static_cast<std::size_t>(params.Q0));
    pr.fill_prices.reserve(static_cast<std::size_t>(params.Q0));
    pr.M_samples.reserve(static_cast<std::size_t>(params.Q0) + 1);

    int q = params.Q0;
    double t = 0.0;
    double M = params.M0;
    double X = params.X0;
    double level_start = 0.0;
    double last_M_time = 0.0;

    auto advance_price = [&](double to) {
        const double dt = to - last_M_time;
        const double drift = signal.drift_integral(last_M_time, to);
        const double shock = params.sigma * std::sqrt(dt) * rng.normal();
        M += drift + shock;
        pr.martingale_cv += static_cast<double>(q) * shock;
        last_M_time = to;
    };

    while (q > 0) {
        std::optional<double> lb = policy.lower_bound(q);
        if (params.bounds.lower) lb = lb ? std::max(*lb, *params.bounds.lower)
                                         : params.bounds.lower;
        if (!lb)
            throw MissingThinningBound(
                "policy has no finite lower quote bound and delta_min is unbounded");
        const double rate_bound = params.lambda * std::exp(-params.kappa * *lb);

        bool filled = false;
        while (true) {
            const double wait = rng.exponential(rate_bound);
            const double t_cand = t + wait;
            if (!(t_cand < params.T)) {
                t = params.T;
                break;
            }
            t = t_cand;
            const double delta = policy.quote(t, q);
            const double accept = std::exp(-params.kappa * (delta - *lb));
            if (rng.uniform() <= accept) {
                advance_price(t);
                const double price = M - params.a + params.b * delta;
                X += price;
                pr.fill_times.push_back(t);
                pr.fill_prices.push_back(price);
                pr.M_samples.push_back(M);
                pr.running_cost += penalties.J(q) * (t - level_start);
                --q;
                level_start = t;
                filled = true;
                break;
            }
        }
        if (!filled) break;  // horizon reached
    }

    if (q > 0) {
        pr.running_cost += penalties.J(q) * (params.T - level_start);
        advance_price(params.T);
        pr.M_samples.push_back(M);
        pr.tau_liq = params.T;
    } else {
        pr.tau_liq = pr.fill_times.back();
    }
    pr.X_final = X;
    pr.Q_final = q;
    return pr;
}

namespace {

double path_wealth(const PenaltySpec& penalties, Criterion criterion,
                   const PathRecord& pr) {
    double w = pr.X_final;
    if (pr.Q_final > 0)
        w += static_cast<double>(pr.Q_final) *
             (pr.terminal_M() - penalties.I(pr.Q_final));
    if (uses_running_cost(criterion)) w -= pr.running_cost;
    return w;
}

struct CaraAggregate {
    double shift = 0.0;          // m = max(-gamma W_i)
    std::size_t argmax = 0;
    std::vector<double> scaled;  // exp(-gamma W_i - m), in (0, 1]
};

CaraAggregate cara_scale(const std::vector<double>& wealth, double gamma,
                         std::uint64_t seed) {
    CaraAggregate agg;
    agg.shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < wealth.size(); ++i) {
        const double s = -gamma * wealth[i];
        if (s > agg.shift) {
            agg.shift = s;
            agg.argmax = i;
        }
    }
    if (!(agg.shift < 700.0))
        throw ExtremePayoff("exponential-utility payoff overflows double precision",
                            seed + agg.argmax);
    agg.scaled.resize(wealth.size());
    for (std::size_t i = 0; i < wealth.size(); ++i)
        agg.scaled[i] = std::exp(-gamma * wealth[i] - agg.shift);
    return agg;
}

MCEstimate aggregate_payoffs(const std::vector<double>& wealth, Criterion criterion,
                             double gamma, std::uint64_t seed) {
    MCEstimate est;
    est.n_paths = static_cast<long>(wealth.size());
    est.seed = seed;
    if (!uses_cara(criterion)) {
        est.mean = mean(wealth);
        est.stderr_ = sample_stderr(wealth, est.mean);
        return est;
    }
    const auto agg = cara_scale(wealth, gamma, seed);
    const double scale = std::exp(agg.shift);
    const double m = mean(agg.scaled);
    est.mean = -scale * m;
    est.stderr_ = scale * sample_stderr(agg.scaled, m);
    return est;
}

}  // namespace

std::vector<double> run_paths(const ModelParams& params, const SignalSpec& signal,
                              const PenaltySpec& penalties, Criterion criterion,
                              const Policy& policy, long n_paths, std::uint64_t seed,
                              int threads, std::vector<double>* martingale_cv) {
    if (n_paths < 1) throw InvalidParameter("n_paths must be >= 1");
    std::vector<double> wealth(static_cast<std::size_t>(n_paths));
    if (martingale_cv) martingale_cv->assign(static_cast<std::size_t>(n_paths), 0.0);
    parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t i) {
        const auto pr = simulate_path(params, signal, penalties, policy,
                                      seed + static_cast<std::uint64_t>(i));
        wealth[i] = path_wealth(penalties, criterion, pr);
        if (martingale_cv) (*martingale_cv)[i] = pr.martingale_cv;
    });
    return wealth;
}

MCEstimate estimate_objective(const ModelParams& params, const SignalSpec& signal,
                              const PenaltySpec& penalties, Criterion criterion,
                              const Policy& policy, long n_paths, std::uint64_t seed,
                              int threads) {
    if (n_paths < 2) throw InvalidParameter("n_paths must be >= 2");
    const auto wealth =
        run_paths(params, signal, penalties, criterion, policy, n_paths, seed, threads);
    return aggregate_payoffs(wealth, criterion, params.gamma, seed);
}

namespace {

// Payoff estimate with the martingale control variate subtracted. The
// variate has mean zero by construction, and the coefficient is a fixed
// constant, so the estimator stays unbiased for any coefficient choice.
MCEstimate estimate_with_cv(const ModelParams& params, const SignalSpec& signal,
                            const PenaltySpec& penalties, Criterion criterion,
                            const Policy& policy, long n_paths, std::uint64_t seed,
                            int threads, double cv_coefficient) {
    std::vector<double> cv;
    const auto wealth = run_paths(params, signal, penalties, criterion, policy, n_paths,
                                  seed, threads, &cv);
    MCEstimate est;
    est.n_paths = n_paths;
    est.seed = seed;
    std::vector<double> residual(wealth.size());
    if (!uses_cara(criterion)) {
        for (std::size_t i = 0; i < wealth.size(); ++i)
            residual[i] = wealth[i] - cv_coefficient * cv[i];
        est.mean = mean(residual);
        est.stderr_ = sample_stderr(residual, est.mean);
        return est;
    }
    const auto agg = cara_scale(wealth, params.gamma, seed);
    const double scale = std::exp(agg.shift);
    const double scaled_coeff = cv_coefficient / scale;
    for (std::size_t i = 0; i < wealth.size(); ++i)
        residual[i] = -agg.scaled[i] - scaled_coeff * cv[i];
    const double m = mean(residual);
    est.mean = scale * m;
    est.stderr_ = scale * sample_stderr(residual, m);
    return est;
}

std::vector<double> uniform_grid(double T, std::size_t nodes) {
    std::vector<double> g(nodes);
    for (std::size_t i = 0; i < nodes; ++i)
        g[i] = T * static_cast<double>(i) / static_cast<double>(nodes - 1);
    g.back() = T;
    return g;
}

// Measured interpolation error of the gridded policy against the exact
// closed form at cell midpoints, in quote units.
double policy_interp_error(const ValueSpec& vs, const std::vector<double>& t_grid) {
    double worst = 0.0;
    const double constant = quote_constant(vs.criterion, vs.params) +
                            vs.params.a / vs.params.b;
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i) {
        const double tm = 0.5 * (t_grid[i] + t_grid[i + 1]);
        const auto row = eval_w(vs.coeffs, vs.params.T - tm);
        for (int q = 1; q <= vs.params.Q0; ++q) {
            const double exact =
                constant + (std::log(row[static_cast<std::size_t>(q)]) -
                            std::log(row[static_cast<std::size_t>(q - 1)])) /
                               vs.params.kappa;
            const auto interp = optimal_quote(vs, tm, q);
            worst = std::max(worst, std::fabs(exact - interp.unconstrained));
        }
    }
    return worst;
}

}  // namespace

VerificationReport verify_value_function(const ModelParams& params,
                                         const SignalSpec& signal,
                                         const PenaltySpec& penalties,
                                         Criterion criterion, long n_paths,
                                         const std::vector<double>& perturbations,
                                         std::uint64_t seed,
                                         const VerifyOptions& options) {
    if (n_paths < 2) throw InvalidParameter("n_paths must be >= 2");
    params.validate();
    const auto coeffs = reduced_coefficients(params, signal, penalties, criterion);
    const auto cls = classify_coefficients(coeffs, options.rel_tol);
    if (cls.kind == Classification::Kind::Clustered)
        throw InvalidParameter(
            "verification against the closed form requires non-clustered coefficients");

    // dense policy grid, refined until interpolation error clears tolerance
    std::size_t nodes = options.policy_grid_nodes;
    ValueSpec vs;
    for (int attempt = 0;; ++attempt) {
        vs = make_value_spec(params, signal, penalties, criterion,
                             uniform_grid(params.T, nodes), options.rel_tol,
                             options.threads);
        const double err = policy_interp_error(vs, uniform_grid(params.T, nodes));
        if (err < options.interp_tol) break;
        if (attempt >= 8)
            throw NumericalBlowup("policy grid interpolation error stuck above tolerance",
                                  params.T, params.Q0);
        nodes = nodes * 2 - 1;
    }
    const auto t_grid = uniform_grid(params.T, nodes);
    const auto surface = build_quote_surface(vs, t_grid, options.threads);

    VerificationReport report;
    report.criterion = criterion;
    report.n_paths = n_paths;
    report.seed = seed;
    const auto admissibility = check_interior_admissibility(surface);
    report.all_interior = admissibility.all_interior;
    report.constrained_regime = !admissibility.all_interior;

    report.closed_form_value =
        value_function(vs, 0.0, params.X0, params.M0, params.Q0);

    double cv_coeff = 0.0;
    if (!report.constrained_regime) {
        cv_coeff = uses_cara(criterion)
                       ? params.gamma * std::fabs(report.closed_form_value)
                       : 1.0;
    }

    const auto policy = Policy::from_surface(surface);
    report.optimal = estimate_with_cv(params, signal, penalties, criterion, policy,
                                      n_paths, seed, options.threads, cv_coeff);

    const double diff = report.optimal.mean - report.closed_form_value;
    const double slack =
        32.0 * DBL_EPSILON *
        (std::fabs(report.closed_form_value) + std::fabs(report.optimal.mean));
    report.z_score = report.optimal.stderr_ > 0.0 ? diff / report.optimal.stderr_
                     : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
    report.value_matches = std::fabs(diff) <= 3.0 * report.optimal.stderr_ + slack;

    bool all_dominated = true;
    for (double eps : perturbations) {
        Policy shifted = policy.shifted(eps);
        if (params.bounds.lower || params.bounds.upper)
            shifted = shifted.clamped(params.bounds);
        PerturbationResult pr;
        pr.eps = eps;
        pr.estimate = estimate_with_cv(params, signal, penalties, criterion, shifted,
                                       n_paths, seed, options.threads, cv_coeff);
        pr.gap = report.optimal.mean - pr.estimate.mean;
        pr.combined_stderr = std::sqrt(report.optimal.stderr_ * report.optimal.stderr_ +
                                       pr.estimate.stderr_ * pr.estimate.stderr_);
        pr.tie = pr.gap == 0.0;
        pr.dominated = pr.gap > 2.0 * pr.combined_stderr;
        if (eps != 0.0 && !pr.dominated) all_dominated = false;
        report.perturbations.push_back(pr);
    }
    report.pass =
        !report.constrained_regime && report.value_matches && all_dominated;
    return report;
}

}  // namespace execq
