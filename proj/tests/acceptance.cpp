// Acceptance suite: one pass/fail line per criterion, exit code equals the
// number of failures. Criterion 9 shells out to the CLI binary whose path
// arrives as argv[1].

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "execq/asymptotics.hpp"
#include "execq/parallel.hpp"
#include "execq/quotes.hpp"
#include "execq/simulate.hpp"
#include "execq/triangular.hpp"
#include "oracles.hpp"

using namespace execq;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %-34s %s\n", pass ? "PASS" : "FAIL", criterion,
                name.c_str(), detail.c_str());
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

ModelParams table_params() {
    ModelParams p;
    p.lambda = 5.0 / 6.0;
    p.kappa = 1000.0;
    p.a = 0.0;
    p.b = 1.0;
    p.sigma = 0.0;
    p.gamma = 0.0;
    p.T = 30.0;
    p.Q0 = 2;
    p.M0 = 100.0;
    p.X0 = 0.0;
    return p;
}

// 1. Closed-form solvers vs the RK4 oracle over 200 random draws with
//    q <= 10, |A_q| <= 1, tau <= 100, to 1e-8 relative, in under 10 s.
void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> grid = {0.0, 0.05, 1.0, 10.0, 25.0, 50.0, 100.0};
    const int n_draws = 200;
    std::vector<double> worst(n_draws, 0.0);
    parallel_for(n_draws, hardware_threads(), [&](std::size_t i) {
        std::mt19937_64 rng(555000 + i);
        const int Q0 = 1 + static_cast<int>(rng() % 10);
        const auto cs = oracles::random_distinct_coefficients(rng, Q0, 1.0, 5e-3);
        const auto closed = solve_nondegenerate(cs, grid);
        const std::vector<double> A = cs.A;
        const auto oracle = solve_quadrature(
            [&A](double, int q) { return A[static_cast<std::size_t>(q)]; }, cs.C, cs.G,
            grid, 1e-3);
        for (std::size_t ti = 0; ti < grid.size(); ++ti)
            for (int q = 0; q <= Q0; ++q) {
                const double rel = std::fabs(closed.at(ti, q) - oracle.at(ti, q)) /
                                   std::fabs(oracle.at(ti, q));
                worst[i] = std::max(worst[i], rel);
            }
    });
    double max_rel = 0.0;
    for (double w : worst) max_rel = std::max(max_rel, w);
    const double elapsed = seconds_since(t0);
    char detail[128];
    std::snprintf(detail, sizeof(detail), "max rel %.2e over 200 draws, %.1fs", max_rel,
                  elapsed);
    report(1, "oracle equivalence", max_rel <= 1e-8 && elapsed < 10.0, detail);
}

// 2. Benchmark formulas on a 100-point tau grid, q <= 5, to 1e-12 relative.
void criterion_2() {
    const double lambda = 5.0 / 6.0, kappa = 1000.0, alpha = 0.001, gamma = 0.01;
    // relative to the quote, floored at the natural quote unit 1/kappa so the
    // comparison stays meaningful where the benchmark quote crosses zero
    double max_rel = 0.0;
    auto rel_gap = [&](double mine, double ref) {
        return std::fabs(mine - ref) / std::max(std::fabs(ref), 1.0 / kappa);
    };

    auto p = table_params();
    p.Q0 = 5;
    const auto grid = linspace(0.0, p.T, 100);
    const auto vs_rn = make_value_spec(p, SignalSpec::constant(0.0),
                                       PenaltySpec::builtin(5, alpha, 0.0),
                                       Criterion::RiskNeutral, grid);
    for (double t : grid)
        for (int q = 1; q <= 5; ++q) {
            const double ref =
                oracles::benchmark_quote_risk_neutral(lambda, kappa, alpha, p.T - t, q);
            const double mine = optimal_quote(vs_rn, t, q).unconstrained;
            max_rel = std::max(max_rel, rel_gap(mine, ref));
        }

    p.gamma = gamma;
    p.sigma = 0.0;
    auto pen = PenaltySpec::none(5);
    for (int q = 1; q <= 5; ++q) pen.terminal[static_cast<std::size_t>(q)] = alpha;
    const auto vs_cara =
        make_value_spec(p, SignalSpec::constant(0.0), pen, Criterion::Cara, grid);
    for (double t : grid) {
        if (t == p.T) continue;  // the benchmark ratio form degenerates at tau = 0
        for (int q = 1; q <= 5; ++q) {
            const double ref =
                oracles::benchmark_quote_cara(lambda, kappa, gamma, alpha, p.T - t, q);
            const double mine = optimal_quote(vs_cara, t, q).unconstrained;
            max_rel = std::max(max_rel, rel_gap(mine, ref));
        }
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail), "max rel %.2e", max_rel);
    report(2, "benchmark formulas", max_rel <= 1e-12, detail);
}

// 3. Verification theorem, empirically: optimal MC within 3 stderr of the
//    closed form and +-2/kappa perturbations dominated, 1e5 paths, < 60 s.
void criterion_3() {
    const auto t0 = std::chrono::steady_clock::now();
    const long n_paths = 100000;
    const std::uint64_t seed = 20250810;
    const std::vector<double> perturbations = {0.002, -0.002};
    VerifyOptions options;
    options.threads = hardware_threads();

    struct Case {
        const char* name;
        Criterion criterion;
        double sigma, gamma, beta;
    };
    const std::vector<Case> cases = {
        {"risk-neutral", Criterion::RiskNeutral, 0.01, 0.0, 0.0},
        {"cara", Criterion::Cara, 0.1, 0.01, 0.0},
        {"cara-running", Criterion::CaraRunning, 0.1, 0.01, 1e-4},
    };
    bool all_pass = true;
    std::string detail;
    for (const auto& c : cases) {
        auto p = table_params();
        p.sigma = c.sigma;
        p.gamma = c.gamma;
        const auto pen = PenaltySpec::builtin(p.Q0, 0.001, c.beta);
        const auto report_one = verify_value_function(
            p, SignalSpec::constant(0.0), pen, c.criterion, n_paths, perturbations, seed,
            options);
        all_pass = all_pass && report_one.pass;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%s z=%.2f dom=%d/%d ", c.name,
                      report_one.z_score,
                      static_cast<int>(report_one.perturbations[0].dominated) +
                          static_cast<int>(report_one.perturbations[1].dominated),
                      2);
        detail += buf;
    }
    const double elapsed = seconds_since(t0);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1fs", elapsed);
    report(3, "verification theorem", all_pass && elapsed < 60.0, detail + buf);
}

// 4. Positivity, boundary and terminal conditions over >= 1e4 random draws.
void criterion_4() {
    const int n_distinct = 8000, n_zero = 1000, n_clustered = 1000;
    std::vector<int> violations(n_distinct + n_zero + n_clustered, 0);
    const std::vector<double> grid = {0.0, 0.5, 5.0, 20.0, 50.0};
    auto check_table = [&](const WTable& t, const CoefficientSet& cs) {
        int bad = 0;
        for (std::size_t ti = 0; ti < t.tau_grid.size(); ++ti) {
            if (t.at(ti, 0) != 1.0) ++bad;
            for (int q = 0; q <= cs.max_q(); ++q)
                if (!(t.at(ti, q) > 0.0)) ++bad;
        }
        for (int q = 0; q <= cs.max_q(); ++q) {
            const double g = cs.G[static_cast<std::size_t>(q)];
            if (std::fabs(t.at(0, q) - g) > 1e-12 * g) ++bad;
        }
        return bad;
    };
    parallel_for(static_cast<std::size_t>(n_distinct + n_zero + n_clustered),
                 hardware_threads(), [&](std::size_t i) {
        std::mt19937_64 rng(777000 + i);
        std::uniform_real_distribution<double> ug(-5.0, 0.0);
        std::uniform_real_distribution<double> uc(0.05, 1.0);
        const int Q0 = 1 + static_cast<int>(rng() % 8);
        CoefficientSet cs;
        if (i < static_cast<std::size_t>(n_distinct)) {
            cs = oracles::random_distinct_coefficients(rng, Q0, 1.0, 1e-4);
        } else {
            cs.A.assign(static_cast<std::size_t>(Q0) + 1, 0.0);
            cs.G.assign(static_cast<std::size_t>(Q0) + 1, 1.0);
            for (int q = 1; q <= Q0; ++q) cs.G[static_cast<std::size_t>(q)] = std::exp(ug(rng));
            cs.C = uc(rng);
            if (i >= static_cast<std::size_t>(n_distinct + n_zero)) {
                // clustered: two nearly equal entries force the oracle route
                cs.A[1] = 1e-11;
                if (Q0 >= 2) cs.A[2] = 0.3;
            }
        }
        violations[i] = check_table(solve(cs, grid), cs);
    });
    long total = 0;
    for (int v : violations) total += v;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "%d draws, %ld violations",
                  n_distinct + n_zero + n_clustered, total);
    report(4, "positivity and boundary", total == 0, detail);
}

// 5. Long-horizon asymptotics: fitted linear and logarithmic rates within
//    5 percent; bounded quote varies < 1e-6 across a horizon decade.
void criterion_5() {
    auto p = table_params();
    p.Q0 = 1;
    const auto pen = PenaltySpec::builtin(1, 0.001, 0.0);

    std::vector<double> linear_horizons;
    for (int k = 1; k <= 10; ++k) linear_horizons.push_back(100.0 * k);
    const auto lin = fit_growth_rate(p, SignalSpec::constant(1e-4), pen,
                                     Criterion::RiskNeutral, 1, linear_horizons);

    const std::vector<double> log_horizons = {100.0, 316.22776601683796, 1000.0,
                                              3162.2776601683795, 10000.0};
    const auto logfit = fit_growth_rate(p, SignalSpec::constant(0.0), pen,
                                        Criterion::RiskNeutral, 1, log_horizons);

    auto p3 = table_params();
    p3.Q0 = 1;
    p3.sigma = 0.1;
    p3.gamma = 0.05;  // negative holding value at q = 1
    const auto bounded = fit_growth_rate(p3, SignalSpec::constant(1e-4), pen,
                                         Criterion::Cara, 1,
                                         {1000.0, 2000.0, 4000.0, 8000.0, 10000.0});

    const bool pass = lin.rel_error <= 0.05 && logfit.rel_error <= 0.05 &&
                      bounded.quote_variation < 1e-6;
    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "linear err %.2f%%, log err %.2f%%, bounded variation %.1e",
                  100.0 * lin.rel_error, 100.0 * logfit.rel_error,
                  bounded.quote_variation);
    report(5, "long-horizon asymptotics", pass, detail);
}

// 6. Small-gamma expansion of the CARA quote constant at gamma = 1e-3.
void criterion_6() {
    auto p = table_params();
    p.gamma = 1e-3;
    const double measured = quote_constant(Criterion::Cara, p) - 1.0 / p.kappa;
    const double predicted = -p.b * p.gamma / (2.0 * p.kappa * p.kappa);
    const double rel = std::fabs(measured - predicted) / std::fabs(predicted);
    char detail[96];
    std::snprintf(detail, sizeof(detail), "measured %.6e predicted %.6e rel %.2e",
                  measured, predicted, rel);
    report(6, "small-gamma expansion", rel <= 0.01, detail);
}

// 7. Matched quadratic running penalty: identical A arrays bitwise, yet
//    strictly different quotes at gamma = 0.05, sigma = 0.1.
void criterion_7() {
    auto p = table_params();
    p.sigma = 0.1;
    p.gamma = 0.05;
    auto pen = PenaltySpec::builtin(p.Q0, 0.001, 0.0);
    for (int q = 0; q <= p.Q0; ++q)
        pen.running[static_cast<std::size_t>(q)] = volatility_penalty(p.sigma, p.gamma, q);
    const auto grid = linspace(0.0, p.T, 61);
    const auto vs_running = make_value_spec(p, SignalSpec::constant(0.0), pen,
                                            Criterion::RiskNeutralRunning, grid);
    const auto vs_cara = make_value_spec(p, SignalSpec::constant(0.0),
                                         PenaltySpec::builtin(p.Q0, 0.001, 0.0),
                                         Criterion::Cara, grid);
    const bool same_A = vs_running.coeffs.A == vs_cara.coeffs.A;
    const double d1 = optimal_quote(vs_running, 0.0, 1).unconstrained;
    const double d2 = optimal_quote(vs_cara, 0.0, 1).unconstrained;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "A bitwise equal: %s, quote gap %.3e",
                  same_A ? "yes" : "no", d1 - d2);
    report(7, "coefficient coincidence", same_A && d1 != d2, detail);
}

// 8. Qualitative monotonicity scans on the configured parameter ladders.
void criterion_8() {
    const auto grid = linspace(0.0, 30.0, 601);
    long breaches = 0;
    const double slack = 1e-15;

    auto surface_of = [&](Criterion crit, double g, double alpha, double beta,
                          double sigma, double gamma) {
        auto p = table_params();
        p.sigma = sigma;
        p.gamma = gamma;
        const auto vs = make_value_spec(p, SignalSpec::constant(g),
                                        PenaltySpec::builtin(p.Q0, alpha, beta), crit,
                                        grid);
        return build_quote_surface(vs, grid);
    };
    auto expect_leq = [&](const QuoteSurface& lo, const QuoteSurface& hi) {
        for (std::size_t ti = 0; ti < grid.size(); ++ti)
            for (int q = 1; q <= 2; ++q) {
                const std::size_t col = static_cast<std::size_t>(q - 1);
                if (lo.unconstrained[ti][col] > hi.unconstrained[ti][col] + slack)
                    ++breaches;
            }
    };

    // increasing in the signal level
    const std::vector<double> ladder = {-3e-4, -2e-4, -1e-4, 0.0, 1e-4, 2e-4, 3e-4};
    for (std::size_t k = 1; k < ladder.size(); ++k)
        expect_leq(surface_of(Criterion::RiskNeutral, ladder[k - 1], 0.001, 0, 0, 0),
                   surface_of(Criterion::RiskNeutral, ladder[k], 0.001, 0, 0, 0));
    // decreasing in alpha
    expect_leq(surface_of(Criterion::RiskNeutral, 0, 0.005, 0, 0, 0),
               surface_of(Criterion::RiskNeutral, 0, 0.001, 0, 0, 0));
    // decreasing in beta
    for (auto [b_hi, b_lo] : std::initializer_list<std::pair<double, double>>{
             {0.0005, 0.0001}, {0.001, 0.0005}}) {
        expect_leq(surface_of(Criterion::RiskNeutralRunning, 0, 0.001, b_hi, 0, 0),
                   surface_of(Criterion::RiskNeutralRunning, 0, 0.001, b_lo, 0, 0));
        expect_leq(surface_of(Criterion::CaraRunning, 0, 0.001, b_hi, 0.1, 0.01),
                   surface_of(Criterion::CaraRunning, 0, 0.001, b_lo, 0.1, 0.01));
    }
    // decreasing in gamma and sigma
    expect_leq(surface_of(Criterion::Cara, 0, 0.001, 0, 0.1, 0.05),
               surface_of(Criterion::Cara, 0, 0.001, 0, 0.1, 0.01));
    expect_leq(surface_of(Criterion::Cara, 0, 0.001, 0, 0.1, 0.01),
               surface_of(Criterion::Cara, 0, 0.001, 0, 0.01, 0.01));
    expect_leq(surface_of(Criterion::CaraRunning, 0, 0.001, 1e-4, 0.1, 0.05),
               surface_of(Criterion::CaraRunning, 0, 0.001, 1e-4, 0.01, 0.05));

    char detail[64];
    std::snprintf(detail, sizeof(detail), "%ld ordering breaches", breaches);
    report(8, "monotonicity scans", breaches == 0, detail);
}

// 9. cmd_verify byte determinism across 1 and 8 worker threads.
void criterion_9(const char* cli_path) {
    if (cli_path == nullptr) {
        report(9, "thread-count determinism", false, "CLI path not supplied");
        return;
    }
    const fs::path work = fs::temp_directory_path() / "execq_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);
    const fs::path cfg_path = work / "cfg.json";
    {
        std::ofstream cfg(cfg_path);
        cfg << R"({
  "format_version": 1,
  "criterion": "risk_neutral",
  "params": {"lambda": 0.8333333333333334, "kappa": 1000.0, "T": 30.0, "Q0": 2,
             "sigma": 0.01, "M0": 100.0},
  "signal": {"type": "constant", "g": 0.0},
  "penalties": {"alpha": 0.001},
  "mc": {"n_paths": 20000, "seed": 424242}
})";
    }
    auto run = [&](int threads, const fs::path& out) {
        fs::create_directories(out);
        std::ostringstream cmd;
        cmd << '"' << cli_path << '"' << " verify --config " << cfg_path << " --out "
            << out << " --threads " << threads << " > " << (out / "stdout.log").string()
            << " 2>&1";
        return std::system(cmd.str().c_str());
    };
    const int rc1 = run(1, work / "t1");
    const int rc8 = run(8, work / "t8");
    auto slurp = [](const fs::path& f) {
        std::ifstream in(f, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const bool csv_equal =
        slurp(work / "t1" / "verify.csv") == slurp(work / "t8" / "verify.csv");
    const bool txt_equal =
        slurp(work / "t1" / "verify.txt") == slurp(work / "t8" / "verify.txt");
    const bool nonempty = !slurp(work / "t1" / "verify.csv").empty();
    char detail[96];
    std::snprintf(detail, sizeof(detail), "exit codes %d/%d, csv %s, txt %s", rc1, rc8,
                  csv_equal ? "identical" : "DIFFER", txt_equal ? "identical" : "DIFFER");
    report(9, "thread-count determinism", csv_equal && txt_equal && nonempty && rc1 == rc8,
           detail);
}

}  // namespace

int main(int argc, char** argv) {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9(argc > 1 ? argv[1] : nullptr);
    if (g_failures == 0) std::printf("all acceptance criteria passed\n");
    return g_failures;
}
