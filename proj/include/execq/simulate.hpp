#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "execq/model.hpp"
#include "execq/quotes.hpp"

namespace execq {

// Feedback quote policy delta(t, q). The gridded form is piecewise linear
// in t per inventory level, so its exact minimum is attained at a grid node
// and the thinning bound is tight.
class Policy {
public:
    static Policy constant(double delta);
    static Policy from_function(std::function<double(double, int)> fn,
                                std::optional<double> lower_bound);
    // Piecewise-linear policy through the projected surface quotes.
    static Policy from_surface(const QuoteSurface& surface);

    double quote(double t, int q) const;
    // Lower bound on values the policy can return at inventory level q
    // (valid for all t); absent when no finite bound is known.
    std::optional<double> lower_bound(int q) const;
    // Same policy with every quote shifted by eps.
    Policy shifted(double eps) const;
    // Same policy with quotes clamped to the admissible interval.
    Policy clamped(const QuoteBounds& bounds) const;

private:
    // gridded representation (uniform or general ascending grid)
    std::vector<double> t_grid_;
    std::vector<std::vector<double>> delta_;  // [q-1][ti]
    std::vector<double> node_min_;            // per level
    // functional representation
    std::function<double(double, int)> fn_;
    std::optional<double> fn_lower_bound_;

    double offset_ = 0.0;
    std::optional<QuoteBounds> clamp_;

    double raw_quote(double t, int q) const;
};

// One simulated trajectory of the controlled execution model.
struct PathRecord {
    std::vector<double> fill_times;   // ascending
    std::vector<double> fill_prices;  // M - a + b delta at each fill
    std::vector<double> M_samples;    // M at fill times, plus at T if Q_final > 0
    double X_final = 0.0;
    int Q_final = 0;
    double tau_liq = 0.0;      // min(T, first time inventory hits 0)
    double running_cost = 0.0; // integral of J(Q_s) ds over [0, tau_liq]
    // martingale component sum Q * (dM - g dt); exactly mean zero, used as a
    // control variate by the verification estimator
    double martingale_cv = 0.0;

    double terminal_M() const { return M_samples.back(); }
};

// Exact simulation: fills by thinning against per-level intensity bounds,
// reference price advanced by exact Gaussian increments only where needed
// (fills and the horizon), running cost integrated exactly over the
// piecewise-constant inventory path.
PathRecord simulate_path(const ModelParams& params, const SignalSpec& signal,
                         const PenaltySpec& penalties, const Policy& policy,
                         std::uint64_t seed);

struct MCEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    long n_paths = 0;
    std::uint64_t seed = 0;
};

// Per-path objective values for paths seeded seed + path_index; identical
// output for any thread count. The parallel path and the threads<=1 serial
// reference share one body and are compared bit for bit in tests.
std::vector<double> run_paths(const ModelParams& params, const SignalSpec& signal,
                              const PenaltySpec& penalties, Criterion criterion,
                              const Policy& policy, long n_paths, std::uint64_t seed,
                              int threads, std::vector<double>* martingale_cv = nullptr);

// Sample mean and stderr of the per-path payoff.
MCEstimate estimate_objective(const ModelParams& params, const SignalSpec& signal,
                              const PenaltySpec& penalties, Criterion criterion,
                              const Policy& policy, long n_paths, std::uint64_t seed,
                              int threads = 1);

struct PerturbationResult {
    double eps = 0.0;
    MCEstimate estimate;
    double gap = 0.0;             // MC(optimal) - MC(perturbed)
    double combined_stderr = 0.0; // sqrt(se_opt^2 + se_pert^2)
    bool tie = false;             // identical estimates (eps = 0)
    bool dominated = false;       // gap > 2 * combined_stderr
};

struct VerificationReport {
    Criterion criterion = Criterion::RiskNeutral;
    long n_paths = 0;
    std::uint64_t seed = 0;
    bool all_interior = true;
    bool constrained_regime = false;  // closed-form comparison not applicable
    double closed_form_value = 0.0;
    MCEstimate optimal;
    double z_score = 0.0;
    bool value_matches = false;  // |MC - V| <= 3 stderr
    std::vector<PerturbationResult> perturbations;
    bool pass = false;
};

struct VerifyOptions {
    int threads = 1;
    // nodes of the dense policy grid; doubled until the measured
    // interpolation error in quote units is below interp_tol
    std::size_t policy_grid_nodes = 131073;
    double interp_tol = 1e-9;
    double rel_tol = kDefaultCoefficientTol;
};

// Empirical check of the verification theorem: the closed-form value must
// match the Monte Carlo estimate of the optimal feedback policy, and
// quote-shifted policies must be dominated. Estimates use the exact
// mean-zero martingale control variate with a deterministic coefficient.
VerificationReport verify_value_function(const ModelParams& params,
                                         const SignalSpec& signal,
                                         const PenaltySpec& penalties,
                                         Criterion criterion, long n_paths,
                                         const std::vector<double>& perturbations,
                                         std::uint64_t seed,
                                         const VerifyOptions& options = {});

}  // namespace execq
