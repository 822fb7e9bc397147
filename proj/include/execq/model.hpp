#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "execq/errors.hpp"

namespace execq {

// Admissible quote interval. Absent bounds mean the side is unconstrained;
// clamping against an absent bound is an exact no-op.
struct QuoteBounds {
    std::optional<double> lower;
    std::optional<double> upper;

    static QuoteBounds unbounded() { return {}; }
    static QuoteBounds interval(double lo, double hi) { return {lo, hi}; }

    double clamp(double x) const {
        if (lower && x < *lower) return *lower;
        if (upper && x > *upper) return *upper;
        return x;
    }
    bool contains(double x) const {
        return (!lower || x >= *lower) && (!upper || x <= *upper);
    }
    bool is_bounded() const { return lower && upper; }
};

// Market and objective constants shared by every module.
struct ModelParams {
    double lambda = 0.0;  // base fill intensity (events per unit time)
    double kappa = 0.0;   // intensity decay per unit quote depth
    double a = 0.0;       // fixed execution-price adjustment
    double b = 1.0;       // depth-to-price coefficient
    double sigma = 0.0;   // reference-price volatility
    double gamma = 0.0;   // absolute risk aversion (CARA criteria only)
    double T = 0.0;       // horizon
    int Q0 = 0;           // initial inventory
    QuoteBounds bounds;   // admissible quote interval
    double M0 = 0.0;      // initial reference price
    double X0 = 0.0;      // initial cash

    void validate() const;
};

enum class Criterion {
    RiskNeutral,         // expected terminal wealth
    RiskNeutralRunning,  // expected terminal wealth less running inventory cost
    Cara,                // exponential utility of terminal wealth
    CaraRunning,         // exponential utility, running inventory cost inside
};

inline bool uses_cara(Criterion c) {
    return c == Criterion::Cara || c == Criterion::CaraRunning;
}
inline bool uses_running_cost(Criterion c) {
    return c == Criterion::RiskNeutralRunning || c == Criterion::CaraRunning;
}

std::string criterion_name(Criterion c);
Criterion criterion_from_name(const std::string& name);

// Drift signal g(s,t) of the reference price. The constant variant is the
// one the closed-form coefficient map accepts directly; deterministic
// time-dependent variants are handled by freezing or by the quadrature
// solver.
class SignalSpec {
public:
    enum class Kind { Constant, ExponentialDecay, DelayedDecay, Custom };

    static SignalSpec constant(double g);
    // g * exp(-c t)
    static SignalSpec exponential_decay(double g, double c);
    // g * exp(-c |t - t0|)
    static SignalSpec delayed_decay(double g, double c, double t0);
    static SignalSpec custom(std::function<double(double)> fn, std::string label = "custom");

    Kind kind() const { return kind_; }
    bool is_constant() const { return kind_ == Kind::Constant; }
    double constant_level() const;

    // Signal level at time t.
    double level(double t) const;
    // Integral of the level over [t0, t1]; closed form for builtins,
    // adaptive quadrature for custom functions.
    double drift_integral(double t0, double t1) const;
    // Same builtin shape with the base level replaced by g.
    SignalSpec with_level(double g) const;

    // Throws if the level is not finite anywhere on a grid over [0, T].
    void validate_on_horizon(double T, int check_points = 1024) const;

    double base_level() const { return g_; }
    double decay_rate() const { return c_; }
    double delay_center() const { return t0_; }
    const std::string& label() const { return label_; }

private:
    SignalSpec(Kind k, double g, double c, double t0,
               std::function<double(double)> fn, std::string label)
        : kind_(k), g_(g), c_(c), t0_(t0), fn_(std::move(fn)), label_(std::move(label)) {}

    Kind kind_;
    double g_ = 0.0;
    double c_ = 0.0;
    double t0_ = 0.0;
    std::function<double(double)> fn_;
    std::string label_;
};

// Terminal penalty I(q) and running penalty J(q) as tables on {0..Q0}, so
// arbitrary (possibly non-monotone) specifications are first class. Builtin
// families fill the tables.
struct PenaltySpec {
    std::vector<double> terminal;  // I(q), price per share
    std::vector<double> running;   // J(q), price per unit time

    static PenaltySpec none(int Q0);
    // I(q) = alpha q, J(q) = beta q^2
    static PenaltySpec builtin(int Q0, double alpha, double beta);

    double I(int q) const { return terminal[static_cast<std::size_t>(q)]; }
    double J(int q) const { return running[static_cast<std::size_t>(q)]; }
    int max_q() const { return static_cast<int>(terminal.size()) - 1; }

    void validate(int Q0) const;
};

// Certainty-equivalent inventory cost induced by exponential utility.
inline double volatility_penalty(double sigma, double gamma, int q) {
    const double qd = static_cast<double>(q);
    return 0.5 * sigma * sigma * gamma * (qd * qd);
}

// Per-unit-time value of holding inventory level q under the criterion:
// signal benefit less the running and certainty-equivalent costs.
double effective_holding_rate(const ModelParams& params, double g,
                              const PenaltySpec& penalties, Criterion criterion, int q);

// Reduced data of the triangular continuation-value system for one
// criterion: dv_q/dtau = A_q v_q + C v_{q-1}, v_q(0) = G_q.
struct CoefficientSet {
    std::vector<double> A;  // A[0..Q0], A[0] = 0
    double C = 0.0;         // effective execution coefficient
    std::vector<double> G;  // G[0..Q0], G[0] = 1, all > 0

    int max_q() const { return static_cast<int>(A.size()) - 1; }
    void validate() const;
};

// Effective execution coefficient for the CARA criteria; evaluated via
// exp of log products so exponents of order kappa/(b gamma) do not overflow.
double cara_execution_coefficient(const ModelParams& params);
// lambda * exp(-kappa a / b - 1), the risk-neutral counterpart.
double risk_neutral_execution_coefficient(const ModelParams& params);

// The criterion-to-coefficient map that makes the four problems one.
// Requires a constant signal; time-dependent signals route through the
// quadrature solver or the frozen-signal surface.
CoefficientSet reduced_coefficients(const ModelParams& params, const SignalSpec& signal,
                                    const PenaltySpec& penalties, Criterion criterion);

struct Classification {
    enum class Kind { AllZero, Distinct, Clustered };
    Kind kind = Kind::Distinct;
    std::vector<std::pair<int, int>> clustered_pairs;  // offending index pairs
};

inline constexpr double kDefaultCoefficientTol = 1e-8;

// Routes between the closed-form solvers: AllZero if every A_q vanishes to
// tolerance, Distinct if all pairwise gaps clear it, Clustered otherwise.
Classification classify_coefficients(const CoefficientSet& coeffs,
                                     double rel_tol = kDefaultCoefficientTol);

}  // namespace execq
