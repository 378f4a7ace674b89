// Acceptance suite: one pass/fail line per criterion, nonzero exit when a
// hard criterion fails. Criterion 10 reports conjecture consistency and never
// fails the run.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "fbp/cli.hpp"
#include "fbp/diagnostics.hpp"
#include "fbp/dynamics.hpp"
#include "fbp/measures.hpp"
#include "fbp/riemann.hpp"
#include "fbp/steady_states.hpp"

using namespace fbp;
namespace fs = std::filesystem;

namespace {

std::mt19937_64 rng(20240601);

GridFunction random_nonneg(int N, double mean, double amp, std::uint64_t seed) {
    std::mt19937_64 r(seed);
    GridFunction u((GridDomain(N)), 0.0);
    for (int i = 0; i <= N; ++i) {
        double x = (r() >> 11) * 0x1.0p-53;
        u[i] = std::max(0.0, mean + amp * (2.0 * x - 1.0));
    }
    return u;
}

EntropyPair random_poly_pair(std::mt19937_64& r) {
    std::uniform_real_distribution<double> c(0.0, 1.0);
    double a = c(r), b = c(r), d = c(r);
    EntropyPair p;
    p.g = [=](double v) { return a * v + b * v * v * v / 3.0 + d; };
    p.dg = [=](double v) { return a + b * v * v; };
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o, double seconds, bool hard = true) {
    if (!o.pass && hard) ++failures;
    std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
                seconds, o.detail.empty() ? "" : " - ", o.detail.c_str());
    std::fflush(stdout);
}

template <class F>
void run(int id, const std::string& name, F&& f, bool hard = true) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = f();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(id, name, o, secs, hard);
}

// ---------------------------------------------------------------------------

Outcome c1_product_rule() {
    Outcome o;
    auto cu = cubic_nonlinearity();
    double worst = 0.0;
    for (int N : {8, 64, 512}) {
        for (int rep = 0; rep < 100; ++rep) {
            auto u = random_nonneg(N, 1.0, 1.0, rng());
            EntropyPair p = random_poly_pair(rng);
            double res = entropy_identity_residual(cu, p, u);
            double scale = diagnostic_scale(cu, u, &p);
            worst = std::max(worst, res / scale);
            if (res > 1e-11 * scale) {
                o.pass = false;
                o.detail = "residual " + std::to_string(res) + " at N=" + std::to_string(N);
                return o;
            }
        }
    }
    o.detail = "worst residual/scale = " + std::to_string(worst);
    return o;
}

Outcome c2_mass_conservation() {
    Outcome o;
    double worst = 0.0;
    for (const auto& n : {cubic_nonlinearity(), perona_malik_nonlinearity()}) {
        const int N = 128;
        auto u0 = random_nonneg(N, 1.2, 1.0, 42);
        SolverConfig cfg;
        double dt = resolve_dt(n, u0, cfg);
        cfg.t_end = 100000 * dt;
        cfg.record_every = cfg.t_end / 10.0;
        auto traj = integrate(n, u0, cfg);
        if (traj.steps < 100000 && !traj.converged) {
            o.pass = false;
            o.detail = "run ended early";
            return o;
        }
        for (double m : traj.mass) worst = std::max(worst, std::abs(m - traj.mass[0]) / traj.mass[0]);
    }
    o.pass = worst <= 1e-10;
    o.detail = "max relative drift " + std::to_string(worst);
    return o;
}

Outcome c3_invariant_set() {
    Outcome o;
    auto pm = perona_malik_nonlinearity();
    auto cu = cubic_nonlinearity();
    for (int rep = 0; rep < 20; ++rep) {
        SolverConfig cfg;
        cfg.t_end = 0.5;
        cfg.record_every = 0.05;
        auto u0 = random_nonneg(64, 1.5 + 0.05 * rep, 1.5, 1000 + rep);
        auto traj = integrate(pm, u0, cfg, std::nullopt);
        auto repr = check_invariant_set(traj, InvariantSetSpec::for_problem(pm, u0));
        if (!repr.ok()) {
            o.pass = false;
            o.detail = "nonnegativity violated (u_plus = inf)";
            return o;
        }
    }
    for (int rep = 0; rep < 20; ++rep) {
        SolverConfig cfg;
        cfg.t_end = 0.5;
        cfg.record_every = 0.05;
        auto u0 = random_nonneg(64, 1.0 + 0.04 * rep, 1.0, 2000 + rep);
        auto traj = integrate(cu, u0, cfg, std::nullopt);
        auto repr = check_invariant_set(traj, InvariantSetSpec::for_problem(cu, u0));
        if (!repr.ok()) {
            o.pass = false;
            o.detail = "bound violated (u_plus < inf)";
            return o;
        }
    }
    o.detail = "20 + 20 runs clean";
    return o;
}

Outcome c4_lyapunov_monotone() {
    Outcome o;
    auto cu = cubic_nonlinearity();
    auto pm = perona_malik_nonlinearity();
    int runs = 0;
    auto check_traj = [&](const Nonlinearity& n, const Trajectory& traj, double scale) {
        double prev = lyapunov(n, traj.state(0));
        for (int j = 1; j < traj.n_samples(); ++j) {
            double L = lyapunov(n, traj.state(j));
            if (L > prev + 1e-10 * scale) return false;
            prev = L;
        }
        ++runs;
        return true;
    };
    for (int rep = 0; rep < 5; ++rep) {
        SolverConfig cfg;
        cfg.t_end = 1.0;
        cfg.record_every = 0.02;
        auto u0c = random_nonneg(64, 1.1, 0.9, 300 + rep);
        if (!check_traj(cu, integrate(cu, u0c, cfg), diagnostic_scale(cu, u0c, nullptr))) {
            o.pass = false;
            o.detail = "cubic run increased L";
            return o;
        }
        auto u0p = random_nonneg(64, 2.0, 0.5, 400 + rep);
        if (!check_traj(pm, integrate(pm, u0p, cfg), diagnostic_scale(pm, u0p, nullptr))) {
            o.pass = false;
            o.detail = "perona-malik run increased L";
            return o;
        }
    }
    for (auto [w1, w3] : {std::pair{0.3, 1.9}, {0.5, 1.5}, {0.1, 1.45}}) {
        SolverConfig cfg;
        cfg.t_end = 1.0;
        cfg.record_every = 0.02;
        auto traj = run_riemann(cu, {w1, w3, 32}, 64, cfg);
        GridFunction u0 = traj.state(0);
        if (!check_traj(cu, traj, diagnostic_scale(cu, u0, nullptr))) {
            o.pass = false;
            o.detail = "riemann run increased L";
            return o;
        }
    }
    o.detail = std::to_string(runs) + " runs monotone";
    return o;
}

struct Atlas {
    const Nonlinearity* n;
    SteadyState s;
    Verdict recursion;
    Verdict oracle;
};

std::vector<Atlas> full_atlas() {
    static std::vector<Atlas> atlas;
    if (!atlas.empty()) return atlas;
    static auto cu = cubic_nonlinearity();
    static auto pm = perona_malik_nonlinearity();
    for (int N = 2; N <= 12; ++N) {
        for (const Nonlinearity* n : {&cu, &pm}) {
            for (double mean : {0.8, 1.0, 1.2, 1.5}) {
                for (auto& s : enumerate_steady_states(*n, N, mean)) {
                    Atlas a;
                    a.n = n;
                    a.s = s;
                    a.recursion = stability_recursion(*n, s).verdict;
                    a.oracle = stability_eigen_oracle(*n, s).verdict;
                    atlas.push_back(std::move(a));
                }
            }
        }
    }
    return atlas;
}

Outcome c5_classifier_crosscheck() {
    Outcome o;
    int compared = 0, skipped = 0;
    for (const auto& a : full_atlas()) {
        if (a.oracle == Verdict::undetermined || a.recursion == Verdict::undetermined) {
            ++skipped;
            continue;
        }
        ++compared;
        if (a.recursion != a.oracle) {
            o.pass = false;
            o.detail = "disagreement at counts (" + std::to_string(a.s.n1) + "," +
                       std::to_string(a.s.n2) + "," + std::to_string(a.s.n3) + ")";
            return o;
        }
    }
    o.detail = std::to_string(compared) + " states agree, " + std::to_string(skipped) +
               " oracle-undetermined";
    return o;
}

Outcome c6_stability_theorems() {
    Outcome o;
    int n2_many = 0, n2_zero = 0, bound_checked = 0;
    for (const auto& a : full_atlas()) {
        if (a.s.n2 >= 2 && a.oracle != Verdict::unstable) {
            o.pass = false;
            o.detail = "n2 >= 2 state not unstable";
            return o;
        }
        if (a.s.n2 >= 2) ++n2_many;
        if (a.n->finite_uplus() && a.s.n2 == 0 && a.oracle != Verdict::stable) {
            o.pass = false;
            o.detail = "n2 = 0 state not stable";
            return o;
        }
        if (a.n->finite_uplus() && a.s.n2 == 0) ++n2_zero;
        if (!a.s.homogeneous() && a.oracle == Verdict::stable) {
            ++bound_checked;
            if (!check_bound(*a.n, a.s)) {
                o.pass = false;
                o.detail = "stable non-homogeneous state violates the bound";
                return o;
            }
        }
    }
    o.detail = std::to_string(n2_many) + " unstable-by-count, " + std::to_string(n2_zero) +
               " stable two-phase, " + std::to_string(bound_checked) + " bound checks";
    return o;
}

Outcome c7_homogeneous_dichotomy() {
    Outcome o;
    auto cu = cubic_nonlinearity();
    auto pm = perona_malik_nonlinearity();
    auto classify_hom = [&](const Nonlinearity& n, double mean, Verdict want) {
        auto states = enumerate_steady_states(n, 10, mean);
        for (const auto& s : states) {
            if (!s.homogeneous()) continue;
            return stability_recursion(n, s).verdict == want &&
                   stability_eigen_oracle(n, s).verdict == want;
        }
        return false;
    };
    const double margin = 0.03;
    for (int k = 0; k < 10; ++k) {  // outside [u_minus, u_plus]: stable
        double lo = 0.05 + (cu.u_minus - margin - 0.05) * k / 9.0;
        if (!classify_hom(cu, lo, Verdict::stable)) {
            o.pass = false;
            o.detail = "cubic mean " + std::to_string(lo) + " not stable";
            return o;
        }
        double hi = (cu.u_plus + margin) + (2.2 - cu.u_plus - margin) * k / 9.0;
        if (!classify_hom(cu, hi, Verdict::stable)) {
            o.pass = false;
            o.detail = "cubic mean " + std::to_string(hi) + " not stable";
            return o;
        }
        double in = (cu.u_minus + margin) + (cu.u_plus - cu.u_minus - 2 * margin) * k / 9.0;
        if (!classify_hom(cu, in, Verdict::unstable)) {
            o.pass = false;
            o.detail = "cubic mean " + std::to_string(in) + " not unstable";
            return o;
        }
        double plo = 0.05 + (pm.u_minus - margin - 0.05) * k / 9.0;
        double pin = (pm.u_minus + margin) + 4.0 * k / 9.0;
        if (!classify_hom(pm, plo, Verdict::stable) || !classify_hom(pm, pin, Verdict::unstable)) {
            o.pass = false;
            o.detail = "perona-malik dichotomy failed";
            return o;
        }
    }

    // perturbed unstable mean relaxes onto the stable branches
    auto cu2 = cubic_nonlinearity();
    auto u0 = random_nonneg(16, 1.0, 0.05, 77);
    SolverConfig cfg;
    cfg.t_end = 2000.0;
    cfg.record_every = 50.0;
    cfg.convergence_tol = 1e-9;
    auto traj = integrate(cu2, u0, cfg);
    if (!traj.converged) {
        o.pass = false;
        o.detail = "perturbed run did not converge";
        return o;
    }
    GridFunction uf = traj.state(traj.n_samples() - 1);
    if (lp_norm(rhs(cu2, uf), Lp::inf) > 1e-9) {
        o.pass = false;
        o.detail = "final ||rhs|| above 1e-9";
        return o;
    }
    std::vector<double> levels(uf.size());
    for (int i = 0; i < uf.size(); ++i) levels[i] = cu2.phi(uf[i]);
    std::nth_element(levels.begin(), levels.begin() + levels.size() / 2, levels.end());
    double c = levels[levels.size() / 2];
    double s1 = branch_inverse(cu2, BranchId::S1, c);
    double s3 = branch_inverse(cu2, BranchId::S3, c);
    bool low = false, high = false;
    for (int i = 0; i < uf.size(); ++i) {
        double d = std::min(std::abs(uf[i] - s1), std::abs(uf[i] - s3));
        if (d > 1e-6) {
            o.pass = false;
            o.detail = "final node off the stable branches by " + std::to_string(d);
            return o;
        }
        (std::abs(uf[i] - s1) < std::abs(uf[i] - s3) ? low : high) = true;
    }
    if (!(low && high)) {
        o.pass = false;
        o.detail = "final state is homogeneous";
        return o;
    }
    o.detail = "20 means per flux + perturbed run on stable branches";
    return o;
}

std::vector<std::pair<RiemannData, Trajectory>> riemann_grid_runs() {
    static std::vector<std::pair<RiemannData, Trajectory>> runs;
    if (!runs.empty()) return runs;
    auto cu = cubic_nonlinearity();
    for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 5; ++b) {
            RiemannData d;
            d.omega1 = 0.05 + 0.5 * a / 4.0;
            d.omega3 = 1.45 + 0.5 * b / 4.0;
            d.split_index = 32;
            SolverConfig cfg;
            cfg.t_end = 2.0;
            cfg.record_every = 0.02;
            runs.emplace_back(d, run_riemann(cu, d, 64, cfg));
        }
    }
    return runs;
}

Outcome c8_interface_thinness() {
    Outcome o;
    auto cu = cubic_nonlinearity();
    int wmax = 0;
    for (const auto& [d, traj] : riemann_grid_runs())
        wmax = std::max(wmax, interface_width(cu, traj));
    if (wmax > 1) {
        o.pass = false;
        o.detail = "riemann interface width " + std::to_string(wmax);
        return o;
    }
    // two jumps: at most two spinodal nodes
    GridFunction u0((GridDomain(64)), 0.0);
    for (int i = 0; i <= 64; ++i) u0[i] = (i >= 20 && i < 44) ? 1.9 : 0.3;
    SolverConfig cfg;
    cfg.t_end = 2.0;
    cfg.record_every = 0.02;
    auto traj = integrate(cu, u0, cfg, CrossingThresholds{cu.u_minus, cu.u_plus});
    int w2 = interface_width(cu, traj);
    if (w2 > 2) {
        o.pass = false;
        o.detail = "two-jump interface width " + std::to_string(w2);
        return o;
    }
    o.detail = "grid width <= 1, two-jump width " + std::to_string(w2);
    return o;
}

Outcome c9_no_transition_and_triggers() {
    Outcome o;
    auto cu = cubic_nonlinearity();
    int events_total = 0, predicate_true_cells = 0;
    for (const auto& [d, traj] : riemann_grid_runs()) {
        auto events = detect_transitions(cu, traj);
        events_total += static_cast<int>(events.size());
        if (no_transition_predicate(cu, d)) {
            ++predicate_true_cells;
            if (!events.empty()) {
                o.pass = false;
                o.detail = "predicate-true cell produced events";
                return o;
            }
        }
        for (const auto& e : events) {
            bool ok = e.direction == PhaseTransitionEvent::Direction::upward
                          ? e.trigger_lhs > e.trigger_rhs
                          : e.trigger_lhs < e.trigger_rhs;
            if (!ok) {
                o.pass = false;
                o.detail = "event violates its trigger inequality";
                return o;
            }
        }
    }
    o.detail = std::to_string(predicate_true_cells) + " quiet cells, " +
               std::to_string(events_total) + " events all satisfy triggers";
    return o;
}

Outcome c10_coarsening_conjecture() {
    Outcome o;
    auto pm = perona_malik_nonlinearity();
    const int N = 64;
    const double cutoff = default_cutoff(N, pm.u_minus);
    int consistent = 0;
    for (int k = 0; k < 10; ++k) {
        auto u0 = random_nonneg(N, 2.0, 0.5, 9000 + k);
        SolverConfig cfg;
        cfg.t_end = 40.0;
        cfg.record_every = 1.0;
        auto traj = integrate(pm, u0, cfg);
        auto s = coarsening_indicator(traj, traj.mass.front(), cutoff);
        bool grew = s.back() > s.front();
        auto dec = decompose(traj.state(traj.n_samples() - 1), traj.mass.front(), cutoff);
        double reg_max = 0.0;
        for (int i = 0; i < dec.regular_part.size(); ++i)
            reg_max = std::max(reg_max, dec.regular_part[i]);
        if (grew && reg_max <= pm.u_minus + 1e-3) ++consistent;
    }
    o.pass = true;  // conjecture report: flagged, never failing
    o.detail = std::to_string(consistent) + "/10 runs coarsen; " +
               (consistent >= 9 ? "CONJECTURE-CONSISTENT" : "CONJECTURE-INCONSISTENT");
    return o;
}

Outcome c11_weak_residual_order() {
    Outcome o;
    auto cu = cubic_nonlinearity();
    const int N = 32;
    GridFunction u0((GridDomain(N)), 0.0);
    for (int i = 0; i <= N; ++i) {
        double x = static_cast<double>(i) / N;
        u0[i] = 0.3 + 0.15 * std::exp(-40.0 * (x - 0.5) * (x - 0.5));
    }
    SolverConfig probe;
    probe.safety = 0.8;
    const double horizon = 800.0 * resolve_dt(cu, u0, probe);
    auto run_once = [&](double safety) {
        SolverConfig cfg;
        cfg.safety = safety;
        double dt = resolve_dt(cu, u0, cfg);
        cfg.record_every = dt;
        cfg.t_end = horizon;
        cfg.convergence_tol = 0.0;  // disable early stopping
        return integrate(cu, u0, cfg);
    };
    auto t1 = run_once(0.8);
    auto t2 = run_once(0.4);
    auto psi = TestFunction::separable_bump(t1.final_time(), 2.0, 0.5, 0.4);
    double r1 = weak_residual(cu, t1, psi);
    double r2 = weak_residual(cu, t2, psi);
    double ratio = std::abs(r2) / std::abs(r1);
    o.pass = ratio > 0.4 && ratio < 0.6;
    std::ostringstream d;
    d << "residuals " << r1 << " -> " << r2 << ", ratio " << ratio;
    o.detail = d.str();
    return o;
}

Outcome c12_determinism() {
    Outcome o;
    fs::path dir = fs::temp_directory_path() / "fbp_acceptance_det";
    fs::remove_all(dir);

    cli::ExperimentConfig cfg;
    cfg.phi = "perona-malik";
    cfg.N = 32;
    cfg.initial = "random:2.0,0.5";
    cfg.seed = 5;
    cfg.t_end = 0.5;
    cfg.record_every = 0.05;

    cfg.out_dir = (dir / "a").string();
    if (cli::cmd_simulate(cfg) != 0) {
        o.pass = false;
        o.detail = "simulate failed";
        return o;
    }
    cfg.out_dir = (dir / "b").string();
    cli::cmd_simulate(cfg);
    for (const char* f : {"trajectory.csv", "diagnostics.csv", "events.jsonl"}) {
        if (slurp(dir / "a" / f) != slurp(dir / "b" / f)) {
            o.pass = false;
            o.detail = std::string("repeat run differs in ") + f;
            return o;
        }
    }

    cfg.seeds = "1,2,3,4,5,6,7,8";
    cfg.workers = 1;
    cfg.out_dir = (dir / "w1").string();
    if (cli::cmd_sweep(cfg) != 0) {
        o.pass = false;
        o.detail = "sweep failed";
        return o;
    }
    cfg.workers = 8;
    cfg.out_dir = (dir / "w8").string();
    cli::cmd_sweep(cfg);
    if (slurp(dir / "w1" / "summary.csv") != slurp(dir / "w8" / "summary.csv")) {
        o.pass = false;
        o.detail = "summary depends on worker count";
        return o;
    }
    fs::remove_all(dir);
    o.detail = "repeat runs and worker counts byte-identical";
    return o;
}

}  // namespace

int main() {
    run(1, "discrete product-rule identity", c1_product_rule);
    run(2, "mass conservation over 1e5 steps", c2_mass_conservation);
    run(3, "invariant set (positivity / bound)", c3_invariant_set);
    run(4, "lyapunov monotonicity", c4_lyapunov_monotone);
    run(5, "recursion vs eigenvalue oracle", c5_classifier_crosscheck);
    run(6, "stability theorems (n2 counts, bound)", c6_stability_theorems);
    run(7, "homogeneous-state dichotomy", c7_homogeneous_dichotomy);
    run(8, "riemann interface thinness", c8_interface_thinness);
    run(9, "no-transition corollary and triggers", c9_no_transition_and_triggers);
    run(10, "coarsening conjecture report", c10_coarsening_conjecture, /*hard=*/false);
    run(11, "weak-residual first-order consistency", c11_weak_residual_order);
    run(12, "determinism of outputs", c12_determinism);

    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all hard criteria passed\n");
    return 0;
}
