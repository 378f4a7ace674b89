#include "fbp/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace fbp {

namespace {

void phi_of(const Nonlinearity& n, const std::vector<double>& u, std::vector<double>& out) {
    out.resize(u.size());
    for (size_t i = 0; i < u.size(); ++i) out[i] = n.phi(u[i]);
}

int first_nonfinite(const std::vector<double>& v) {
    for (size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i])) return static_cast<int>(i);
    return -1;
}

double max_abs_dphi(const Nonlinearity& n, double lo, double hi) {
    const int k = 4096;
    double m = 0.0;
    for (int i = 0; i <= k; ++i) {
        double u = lo + (hi - lo) * i / k;
        m = std::max(m, std::abs(n.dphi(u)));
    }
    return m;
}

}  // namespace

GridFunction rhs(const Nonlinearity& n, const GridFunction& u) {
    std::vector<double> ph;
    phi_of(n, u.values, ph);
    GridFunction out(u.domain, 0.0);
    laplacian_neumann_into(ph, u.domain.spacing, out.values);
    return out;
}

GridFunction step(const Nonlinearity& n, const GridFunction& u, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    GridFunction r = rhs(n, u);
    GridFunction out(u.domain, 0.0);
    for (int i = 0; i < u.size(); ++i) out[i] = u[i] + dt * r[i];
    int bad = first_nonfinite(out.values);
    if (bad >= 0) throw BlowupError(bad, 0.0);
    return out;
}

double resolve_dt(const Nonlinearity& n, const GridFunction& u0, const SolverConfig& cfg) {
    const double eps = u0.domain.spacing;
    if (cfg.dt_policy == DtPolicy::derivation) return eps * eps;
    if (!(cfg.safety > 0.0) || cfg.safety > 1.0)
        throw std::invalid_argument("SolverConfig: safety must lie in (0,1]");
    double hi;
    if (n.finite_uplus()) {
        hi = InvariantSetSpec::for_problem(n, u0).upper;
    } else {
        double umax = lp_norm(u0, Lp::inf);
        hi = std::max(2.0 * umax, 10.0 * std::max(1.0, n.u_minus));
    }
    double m = max_abs_dphi(n, 0.0, hi);
    if (!(m > 0.0)) m = 1.0;
    double dt = cfg.safety * eps * eps / (2.0 * m);
    if (!(dt > 0.0)) throw std::invalid_argument("SolverConfig: dt policy produced dt <= 0");
    return dt;
}

double default_convergence_tol(const Nonlinearity& n, const GridDomain& d) {
    return 1e-10 * n.phi_at_uminus / (d.spacing * d.spacing);
}

InvariantSetSpec InvariantSetSpec::for_problem(const Nonlinearity& n, const GridFunction& u0) {
    InvariantSetSpec s;
    s.lower = 0.0;
    if (n.finite_uplus()) {
        double s3 = branch_inverse(n, BranchId::S3, n.phi_at_uminus);
        s.upper = std::max(lp_norm(u0, Lp::inf), s3);
    }
    return s;
}

Trajectory integrate(const Nonlinearity& n, const GridFunction& u0, const SolverConfig& cfg,
                     const std::optional<CrossingThresholds>& watch) {
    u0.require_finite("integrate: initial data");
    for (int i = 0; i < u0.size(); ++i)
        if (u0[i] < 0.0)
            throw std::invalid_argument("integrate: initial data must be nonnegative (node " +
                                        std::to_string(i) + ")");
    if (!(cfg.t_end >= 0.0)) throw std::invalid_argument("SolverConfig: t_end must be >= 0");
    if (!(cfg.record_every > 0.0))
        throw std::invalid_argument("SolverConfig: record_every must be positive");

    const double eps = u0.domain.spacing;
    const double dt = resolve_dt(n, u0, cfg);
    const double tol = cfg.convergence_tol > 0.0
                           ? cfg.convergence_tol
                           : (cfg.convergence_tol == 0.0 ? -1.0  // never reached
                                                         : default_convergence_tol(n, u0.domain));

    Trajectory traj;
    traj.domain = u0.domain;
    traj.dt = dt;
    traj.monitored = watch.has_value();

    std::vector<double> u = u0.values;
    std::vector<double> ph(u.size()), lap(u.size()), unext(u.size());

    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.states.push_back(u);
        double m = 0.0, lo = u[0], hi = u[0];
        for (double v : u) {
            m += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        traj.mass.push_back(eps * m);
        traj.min_u.push_back(lo);
        traj.max_u.push_back(hi);
    };

    record(0.0);
    if (cfg.t_end == 0.0) return traj;

    const long n_steps = static_cast<long>(std::ceil(cfg.t_end / dt - 1e-12));
    long next_record = 1;  // record at the first step time >= k*record_every

    for (long s = 0; s < n_steps; ++s) {
        const double t = s * dt;
        phi_of(n, u, ph);
        laplacian_neumann_into(ph, eps, lap);

        double rinf = 0.0;
        for (double v : lap) rinf = std::max(rinf, std::abs(v));
        if (rinf <= tol) {
            traj.converged = true;
            if (traj.times.back() != t) record(t);
            traj.steps = s;
            return traj;
        }

        const double tn = (s + 1) * dt;
        for (size_t i = 0; i < u.size(); ++i) unext[i] = u[i] + dt * lap[i];

        int bad = first_nonfinite(unext);
        if (bad >= 0) throw BlowupError(bad, tn);

        if (watch) {
            auto scan = [&](double thr, NodeCrossing::Which which, bool want_rising) {
                if (!std::isfinite(thr)) return;
                for (size_t i = 0; i < u.size(); ++i) {
                    const bool rising = u[i] < thr && unext[i] >= thr;
                    const bool falling = u[i] > thr && unext[i] <= thr;
                    if (!((want_rising && rising) || (!want_rising && falling))) continue;
                    // Bisect the linear interpolant for the crossing time.
                    double a = 0.0, b = 1.0;
                    auto val = [&](double th) { return u[i] + th * (unext[i] - u[i]) - thr; };
                    while ((b - a) * dt > 1e-9) {
                        double mth = 0.5 * (a + b);
                        if ((val(a) <= 0.0) == (val(mth) <= 0.0))
                            a = mth;
                        else
                            b = mth;
                    }
                    double theta = 0.5 * (a + b);
                    NodeCrossing c;
                    c.time = t + theta * dt;
                    c.node = static_cast<int>(i);
                    c.threshold = which;
                    c.rising = want_rising;
                    c.state_before = u;
                    c.state_at_cross.resize(u.size());
                    for (size_t j = 0; j < u.size(); ++j)
                        c.state_at_cross[j] = u[j] + theta * (unext[j] - u[j]);
                    c.state_at_cross[i] = thr;
                    traj.crossings.push_back(std::move(c));
                }
            };
            scan(watch->lower, NodeCrossing::Which::lower, true);   // entering from below
            scan(watch->upper, NodeCrossing::Which::upper, false);  // entering from above
        }

        std::swap(u, unext);

        if (tn >= next_record * cfg.record_every - 1e-12 * cfg.record_every) {
            record(tn);
            while (tn >= next_record * cfg.record_every - 1e-12 * cfg.record_every) ++next_record;
        }
        traj.steps = s + 1;
    }

    if (traj.times.back() != n_steps * dt) record(n_steps * dt);
    return traj;
}

InvariantReport check_invariant_set(const Trajectory& traj, const InvariantSetSpec& spec) {
    InvariantReport rep;
    double scale = 1.0;
    if (std::isfinite(spec.upper)) scale = std::max(scale, std::abs(spec.upper));
    if (std::isfinite(spec.lower)) scale = std::max(scale, std::abs(spec.lower));
    rep.tol = 1e-9 * scale;
    for (int j = 0; j < traj.n_samples(); ++j) {
        const auto& st = traj.states[j];
        for (size_t i = 0; i < st.size(); ++i) {
            if (st[i] < spec.lower - rep.tol)
                rep.violations.push_back({j, static_cast<int>(i), st[i], spec.lower});
            else if (st[i] > spec.upper + rep.tol)
                rep.violations.push_back({j, static_cast<int>(i), st[i], spec.upper});
        }
    }
    return rep;
}

}  // namespace fbp
