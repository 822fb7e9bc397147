#pragma once

#include <vector>

#include "execq/model.hpp"
#include "execq/triangular.hpp"

namespace execq {

// A criterion together with the solved continuation-value table it needs.
struct ValueSpec {
    Criterion criterion = Criterion::RiskNeutral;
    ModelParams params;
    PenaltySpec penalties;
    CoefficientSet coeffs;
    WTable w;
};

// Builds coefficients and solves the triangular system on tau = T - t for
// the supplied calendar-time grid (plus tau = 0 and tau = T).
ValueSpec make_value_spec(const ModelParams& params, const SignalSpec& signal,
                          const PenaltySpec& penalties, Criterion criterion,
                          const std::vector<double>& t_grid,
                          double rel_tol = kDefaultCoefficientTol, int threads = 1);

// Additive quote constant: 1/kappa for the risk-neutral criteria,
// log(1 + b gamma / kappa) / (b gamma) for the CARA ones.
double quote_constant(Criterion criterion, const ModelParams& params);

struct QuotePair {
    double unconstrained;
    double projected;
};

// Optimal feedback quote at (t, q), 1 <= q <= Q0. The projected quote is
// the unconstrained one clamped to the admissible interval.
QuotePair optimal_quote(const ValueSpec& vs, double t, int q);

// Candidate value function: x + q M + (b/kappa) log w for the risk-neutral
// criteria, -exp(-gamma (x + q M + (b/kappa) log w)) for the CARA ones.
double value_function(const ValueSpec& vs, double t, double x, double M, int q);

enum class HamiltonianFamily { RiskNeutral, Cara };

// Unconstrained maximizer of the execution Hamiltonian at value gap Delta.
double hamiltonian_maximizer(HamiltonianFamily family, double Delta,
                             const ModelParams& params);

struct QuoteSurface {
    std::vector<double> t_grid;
    int q_max = 0;  // rows cover q = 1..q_max
    std::vector<std::vector<double>> unconstrained;  // [ti][q-1]
    std::vector<std::vector<double>> projected;
    std::vector<std::vector<char>> interior;  // projection inactive?
    double delta_at(std::size_t ti, int q) const {
        return projected[ti][static_cast<std::size_t>(q - 1)];
    }
};

QuoteSurface build_quote_surface(const ValueSpec& vs, const std::vector<double>& t_grid,
                                 int threads = 1);

struct AdmissibilityReport {
    struct Violation {
        double t;
        int q;
        int side;  // -1 below delta_min, +1 above delta_max
    };
    bool all_interior = true;
    std::vector<Violation> violations;
};

// Flags every grid point where the unconstrained quote leaves the
// admissible interval. Any violation disables closed-form value claims for
// the constrained problem; callers must mark downstream verification
// "not applicable - constrained regime".
AdmissibilityReport check_interior_admissibility(const QuoteSurface& surface);

// Deterministic-signal heuristic: at each t the instantaneous level g(s,t)
// is inserted into the constant-coefficient closed form at tau = T - t.
// This is distinct from the exact time-dependent recursion available via
// solve_quadrature; outputs built from it must be labeled heuristic.
QuoteSurface frozen_signal_surface(const ModelParams& params, const SignalSpec& signal,
                                   const PenaltySpec& penalties, Criterion criterion,
                                   const std::vector<double>& t_grid,
                                   double rel_tol = kDefaultCoefficientTol,
                                   int threads = 1);

}  // namespace execq
