#include "execq/model.hpp"

#include <algorithm>
#include <cmath>

namespace execq {

void ModelParams::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw InvalidParameter("lambda must be finite and >= 0");
    if (!(kappa > 0.0) || !std::isfinite(kappa))
        throw InvalidParameter("kappa must be finite and > 0");
    if (!(b > 0.0) || !std::isfinite(b))
        throw InvalidParameter("b must be finite and > 0");
    if (!(a >= 0.0) || !std::isfinite(a))
        throw InvalidParameter("a must be finite and >= 0");
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw InvalidParameter("sigma must be finite and >= 0");
    if (!(T > 0.0) || !std::isfinite(T))
        throw InvalidParameter("T must be finite and > 0");
    if (Q0 < 1) throw InvalidParameter("Q0 must be a positive integer");
    if (bounds.lower && bounds.upper && !(*bounds.lower < *bounds.upper))
        throw InvalidParameter("delta_min must be strictly below delta_max");
    if (!std::isfinite(M0) || !std::isfinite(X0))
        throw InvalidParameter("M0 and X0 must be finite");
}

std::string criterion_name(Criterion c) {
    switch (c) {
        case Criterion::RiskNeutral: return "risk_neutral";
        case Criterion::RiskNeutralRunning: return "risk_neutral_running";
        case Criterion::Cara: return "cara";
        case Criterion::CaraRunning: return "cara_running";
    }
    throw InvalidParameter("unknown criterion");
}

Criterion criterion_from_name(const std::string& name) {
    if (name == "risk_neutral") return Criterion::RiskNeutral;
    if (name == "risk_neutral_running") return Criterion::RiskNeutralRunning;
    if (name == "cara") return Criterion::Cara;
    if (name == "cara_running") return Criterion::CaraRunning;
    throw ConfigError("unknown criterion '" + name + "'");
}

SignalSpec SignalSpec::constant(double g) {
    return SignalSpec(Kind::Constant, g, 0.0, 0.0, nullptr, "constant");
}

SignalSpec SignalSpec::exponential_decay(double g, double c) {
    if (!(c >= 0.0)) throw InvalidParameter("decay rate must be >= 0");
    return SignalSpec(Kind::ExponentialDecay, g, c, 0.0, nullptr, "exponential_decay");
}

SignalSpec SignalSpec::delayed_decay(double g, double c, double t0) {
    if (!(c >= 0.0)) throw InvalidParameter("decay rate must be >= 0");
    return SignalSpec(Kind::DelayedDecay, g, c, t0, nullptr, "delayed_decay");
}

SignalSpec SignalSpec::custom(std::function<double(double)> fn, std::string label) {
    if (!fn) throw InvalidParameter("custom signal requires a function");
    return SignalSpec(Kind::Custom, 0.0, 0.0, 0.0, std::move(fn), std::move(label));
}

double SignalSpec::constant_level() const {
    if (kind_ != Kind::Constant)
        throw UnsupportedSignal("operation requires a constant signal (got " + label_ + ")");
    return g_;
}

double SignalSpec::level(double t) const {
    switch (kind_) {
        case Kind::Constant: return g_;
        case Kind::ExponentialDecay: return g_ * std::exp(-c_ * t);
        case Kind::DelayedDecay: return g_ * std::exp(-c_ * std::fabs(t - t0_));
        case Kind::Custom: return fn_(t);
    }
    return 0.0;
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double flo, double fmid, double fhi, double whole, double tol,
                        int depth) {
    const double mid = 0.5 * (lo + hi);
    const double lmid = 0.5 * (lo + mid);
    const double rmid = 0.5 * (mid + hi);
    const double flmid = f(lmid);
    const double frmid = f(rmid);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flmid + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frmid + fhi);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, lo, mid, flo, flmid, fmid, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, mid, hi, fmid, frmid, fhi, right, tol / 2.0, depth - 1);
}

// integral of g e^{-c|u - t0|} over [lo, hi] with lo <= hi
double delayed_decay_integral(double g, double c, double t0, double lo, double hi) {
    if (c == 0.0) return g * (hi - lo);
    auto one_sided = [&](double x0, double x1) {
        // both >= t0: integral of e^{-c(u - t0)}
        return (std::exp(-c * (x0 - t0)) - std::exp(-c * (x1 - t0))) / c;
    };
    auto mirrored = [&](double x0, double x1) {
        // both <= t0: integral of e^{-c(t0 - u)}
        return (std::exp(-c * (t0 - x1)) - std::exp(-c * (t0 - x0))) / c;
    };
    if (lo >= t0) return g * one_sided(lo, hi);
    if (hi <= t0) return g * mirrored(lo, hi);
    return g * (mirrored(lo, t0) + one_sided(t0, hi));
}

}  // namespace

double SignalSpec::drift_integral(double t0, double t1) const {
    if (t1 < t0) return -drift_integral(t1, t0);
    switch (kind_) {
        case Kind::Constant:
            return g_ * (t1 - t0);
        case Kind::ExponentialDecay:
            if (c_ == 0.0) return g_ * (t1 - t0);
            return g_ / c_ * (std::exp(-c_ * t0) - std::exp(-c_ * t1));
        case Kind::DelayedDecay:
            return delayed_decay_integral(g_, c_, t0_, t0, t1);
        case Kind::Custom: {
            if (t1 == t0) return 0.0;
            const double mid = 0.5 * (t0 + t1);
            const double flo = fn_(t0), fmid = fn_(mid), fhi = fn_(t1);
            const double whole = (t1 - t0) / 6.0 * (flo + 4.0 * fmid + fhi);
            return adaptive_simpson(fn_, t0, t1, flo, fmid, fhi, whole, 1e-13, 48);
        }
    }
    return 0.0;
}

SignalSpec SignalSpec::with_level(double g) const {
    switch (kind_) {
        case Kind::Constant: return constant(g);
        case Kind::ExponentialDecay: return exponential_decay(g, c_);
        case Kind::DelayedDecay: return delayed_decay(g, c_, t0_);
        case Kind::Custom:
            throw InvalidParameter("cannot rescale a custom signal");
    }
    return constant(g);
}

void SignalSpec::validate_on_horizon(double T, int check_points) const {
    for (int i = 0; i <= check_points; ++i) {
        const double t = T * static_cast<double>(i) / static_cast<double>(check_points);
        if (!std::isfinite(level(t)))
            throw InvalidParameter("signal is not finite at t=" + std::to_string(t));
    }
}

PenaltySpec PenaltySpec::none(int Q0) { return builtin(Q0, 0.0, 0.0); }

PenaltySpec PenaltySpec::builtin(int Q0, double alpha, double beta) {
    if (Q0 < 0) throw InvalidParameter("Q0 must be >= 0");
    PenaltySpec p;
    p.terminal.resize(static_cast<std::size_t>(Q0) + 1);
    p.running.resize(static_cast<std::size_t>(Q0) + 1);
    for (int q = 0; q <= Q0; ++q) {
        const double qd = static_cast<double>(q);
        p.terminal[static_cast<std::size_t>(q)] = alpha * qd;
        p.running[static_cast<std::size_t>(q)] = beta * qd * qd;
    }
    return p;
}

void PenaltySpec::validate(int Q0) const {
    if (static_cast<int>(terminal.size()) != Q0 + 1 ||
        static_cast<int>(running.size()) != Q0 + 1)
        throw InvalidParameter("penalty tables must cover 0..Q0");
    if (terminal[0] != 0.0) throw InvalidParameter("I(0) must be 0");
    if (running[0] != 0.0) throw InvalidParameter("J(0) must be 0");
    for (double v : terminal)
        if (!std::isfinite(v) || v < 0.0)
            throw InvalidParameter("terminal penalty entries must be finite and >= 0");
    for (double v : running)
        if (!std::isfinite(v) || v < 0.0)
            throw InvalidParameter("running penalty entries must be finite and >= 0");
}

double effective_holding_rate(const ModelParams& params, double g,
                              const PenaltySpec& penalties, Criterion criterion, int q) {
    const double base = g * static_cast<double>(q);
    double cost = 0.0;
    if (uses_cara(criterion)) cost += volatility_penalty(params.sigma, params.gamma, q);
    if (uses_running_cost(criterion)) cost += penalties.J(q);
    return base - cost;
}

double risk_neutral_execution_coefficient(const ModelParams& p) {
    return p.lambda * std::exp(-p.kappa * p.a / p.b - 1.0);
}

double cara_execution_coefficient(const ModelParams& p) {
    if (!(p.gamma > 0.0)) throw InvalidParameter("CARA criteria require gamma > 0");
    const double ratio = p.b * p.gamma / p.kappa;
    const double exponent =
        -(p.kappa / (p.b * p.gamma) + 1.0) * std::log1p(ratio) - p.kappa * p.a / p.b;
    return p.lambda * std::exp(exponent);
}

void CoefficientSet::validate() const {
    if (A.empty() || A.size() != G.size())
        throw InvalidParameter("coefficient arrays must be non-empty and equal length");
    if (A[0] != 0.0) throw InvalidParameter("A_0 must be 0");
    if (G[0] != 1.0) throw InvalidParameter("G_0 must be 1");
    if (!(C >= 0.0) || !std::isfinite(C))
        throw InvalidParameter("C must be finite and >= 0");
    for (double v : A)
        if (!std::isfinite(v)) throw InvalidParameter("A entries must be finite");
    for (double v : G)
        if (!(v > 0.0) || !std::isfinite(v))
            throw InvalidParameter("G entries must be finite and > 0");
}

CoefficientSet reduced_coefficients(const ModelParams& params, const SignalSpec& signal,
                                    const PenaltySpec& penalties, Criterion criterion) {
    params.validate();
    penalties.validate(params.Q0);
    const double g = signal.constant_level();
    if (uses_cara(criterion) && !(params.gamma > 0.0))
        throw InvalidParameter("CARA criteria require gamma > 0");

    CoefficientSet cs;
    const std::size_t n = static_cast<std::size_t>(params.Q0) + 1;
    cs.A.resize(n);
    cs.G.resize(n);
    for (int q = 0; q <= params.Q0; ++q) {
        const std::size_t i = static_cast<std::size_t>(q);
        cs.A[i] = (params.kappa / params.b) *
                  effective_holding_rate(params, g, penalties, criterion, q);
        cs.G[i] = std::exp(-(params.kappa / params.b) * static_cast<double>(q) *
                           penalties.I(q));
    }
    cs.A[0] = 0.0;
    cs.G[0] = 1.0;
    cs.C = uses_cara(criterion) ? cara_execution_coefficient(params)
                                : risk_neutral_execution_coefficient(params);
    cs.validate();
    return cs;
}

Classification classify_coefficients(const CoefficientSet& coeffs, double rel_tol) {
    if (!(rel_tol > 0.0)) throw InvalidParameter("rel_tol must be > 0");
    double max_abs = 0.0;
    for (double v : coeffs.A) max_abs = std::max(max_abs, std::fabs(v));
    const double scale = std::max(1.0, max_abs);
    const double tol = rel_tol * scale;

    Classification out;
    if (max_abs <= tol) {
        out.kind = Classification::Kind::AllZero;
        return out;
    }
    const int n = coeffs.max_q();
    for (int i = 0; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            if (std::fabs(coeffs.A[static_cast<std::size_t>(i)] -
                          coeffs.A[static_cast<std::size_t>(j)]) <= tol) {
                out.clustered_pairs.emplace_back(i, j);
            }
        }
    }
    out.kind = out.clustered_pairs.empty() ? Classification::Kind::Distinct
                                           : Classification::Kind::Clustered;
    return out;
}

}  // namespace execq
