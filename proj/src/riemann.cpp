#include "fbp/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace fbp {

namespace {

void validate(const Nonlinearity& n, const RiemannData& d, int N) {
    if (!n.finite_uplus())
        throw std::invalid_argument("riemann: the Riemann problem requires u_plus < inf");
    if (d.omega1 < 0.0 || d.omega1 > n.u_minus)
        throw std::invalid_argument("riemann: omega1 must lie in [0, u_minus]");
    if (d.omega3 < n.u_plus)
        throw std::invalid_argument("riemann: omega3 must lie in [u_plus, inf)");
    if (d.split_index < 0 || d.split_index > N)
        throw std::invalid_argument("riemann: split index out of range");
}

// Upward selection: i is the last node of the all-below-u_minus prefix.
bool maximality_holds(const std::vector<double>& u, int i, double um) {
    for (int m = 0; m <= i; ++m)
        if (u[m] > um) return false;
    return i + 1 >= static_cast<int>(u.size()) || u[i + 1] > um;
}

// Downward selection, mirrored: i is the first node of the all-above-u_plus
// suffix.
bool minimality_holds(const std::vector<double>& u, int i, double up) {
    const int N = static_cast<int>(u.size()) - 1;
    for (int m = i; m <= N; ++m)
        if (u[m] < up) return false;
    return i == 0 || u[i - 1] < up;
}

bool build_event(const Nonlinearity& n, double time, int i, bool upward,
                 const std::vector<double>& at_cross, const std::vector<double>& before,
                 PhaseTransitionEvent& ev) {
    const int N = static_cast<int>(at_cross.size()) - 1;
    const double left = i > 0 ? at_cross[i - 1] : at_cross[i];
    const double right = i < N ? at_cross[i + 1] : at_cross[i];
    const double lhs = n.phi(left) + n.phi(right);
    const double rhs = 2.0 * (upward ? n.phi_at_uminus : n.phi_at_uplus);
    if (upward && !(lhs > rhs)) return false;
    if (!upward && !(lhs < rhs)) return false;
    if (upward && !maximality_holds(before, i, n.u_minus)) return false;
    if (!upward && !minimality_holds(before, i, n.u_plus)) return false;
    ev.time = time;
    ev.node = i;
    ev.direction =
        upward ? PhaseTransitionEvent::Direction::upward : PhaseTransitionEvent::Direction::downward;
    ev.pre_value = at_cross[i];
    ev.trigger_lhs = lhs;
    ev.trigger_rhs = rhs;
    return true;
}

}  // namespace

GridFunction make_riemann(const Nonlinearity& n, const RiemannData& d, int N) {
    validate(n, d, N);
    GridFunction u((GridDomain(N)), 0.0);
    for (int i = 0; i <= N; ++i) u[i] = i <= d.split_index ? d.omega1 : d.omega3;
    return u;
}

Trajectory run_riemann(const Nonlinearity& n, const RiemannData& d, int N,
                       const SolverConfig& cfg) {
    GridFunction u0 = make_riemann(n, d, N);
    return integrate(n, u0, cfg, CrossingThresholds{n.u_minus, n.u_plus});
}

std::vector<PhaseTransitionEvent> detect_transitions(const Nonlinearity& n,
                                                     const Trajectory& traj) {
    std::vector<PhaseTransitionEvent> events;

    if (traj.monitored) {
        // Per-step crossing log from integrate: already precise in time.
        for (const auto& c : traj.crossings) {
            const bool upward = c.threshold == NodeCrossing::Which::lower && c.rising;
            const bool downward = c.threshold == NodeCrossing::Which::upper && !c.rising;
            if (!upward && !downward) continue;
            PhaseTransitionEvent ev;
            if (build_event(n, c.time, c.node, upward, c.state_at_cross, c.state_before, ev))
                events.push_back(ev);
        }
        return events;
    }

    // Sample-scan fallback for trajectories assembled without the step log.
    for (int j = 0; j + 1 < traj.n_samples(); ++j) {
        const auto& a = traj.states[j];
        const auto& b = traj.states[j + 1];
        const double t0 = traj.times[j], t1 = traj.times[j + 1];
        for (size_t i = 0; i < a.size(); ++i) {
            int crossings_here = (a[i] < n.u_minus) != (b[i] < n.u_minus);
            crossings_here += (a[i] > n.u_plus) != (b[i] > n.u_plus);
            if (crossings_here > 1)
                std::cerr << "detect_transitions: node " << i
                          << " crosses both turning points within one sampling interval; "
                             "sampling is too coarse\n";
            auto handle = [&](double thr, bool upward) {
                const bool crossed = upward ? (a[i] < thr && b[i] >= thr)
                                            : (a[i] > thr && b[i] <= thr);
                if (!crossed) return;
                double lo = 0.0, hi = 1.0;
                auto val = [&](double th) { return a[i] + th * (b[i] - a[i]) - thr; };
                while ((hi - lo) * (t1 - t0) > 1e-9) {
                    double mid = 0.5 * (lo + hi);
                    if ((val(lo) <= 0.0) == (val(mid) <= 0.0))
                        lo = mid;
                    else
                        hi = mid;
                }
                double th = 0.5 * (lo + hi);
                std::vector<double> at(a.size());
                for (size_t k = 0; k < a.size(); ++k) at[k] = a[k] + th * (b[k] - a[k]);
                at[i] = thr;
                PhaseTransitionEvent ev;
                if (build_event(n, t0 + th * (t1 - t0), static_cast<int>(i), upward, at, a, ev))
                    events.push_back(ev);
            };
            handle(n.u_minus, true);
            handle(n.u_plus, false);
        }
    }
    std::sort(events.begin(), events.end(),
              [](const auto& x, const auto& y) { return x.time < y.time; });
    return events;
}

std::vector<int> interface_counts(const Nonlinearity& n, const Trajectory& traj) {
    std::vector<int> out;
    out.reserve(traj.n_samples());
    for (int j = 0; j < traj.n_samples(); ++j) {
        int c = 0;
        for (double v : traj.states[j])
            if (v > n.u_minus && v < n.u_plus) ++c;
        out.push_back(c);
    }
    return out;
}

int interface_width(const Nonlinearity& n, const Trajectory& traj) {
    int m = 0;
    for (int c : interface_counts(n, traj)) m = std::max(m, c);
    return m;
}

bool no_transition_predicate(const Nonlinearity& n, const RiemannData& d, bool literal_omega2) {
    double right = n.phi(d.omega3);
    if (literal_omega2) right = n.phi(branch_inverse(n, BranchId::S2, n.phi(d.omega3)));
    // strictly greater beyond the branch-inverse resolution: equal levels
    // stay excluded even when produced by the root-finder
    return n.phi(d.omega1) > right + 1e-11 * std::max(1.0, std::abs(right));
}

HysteresisTrace hysteresis_trace(const Nonlinearity& n, const Trajectory& traj, int node) {
    if (node < 0 || node > traj.domain.n_intervals)
        throw std::invalid_argument("hysteresis_trace: node out of range");
    HysteresisTrace tr;
    tr.points.reserve(traj.n_samples());
    double ulo = traj.states[0][node], uhi = ulo;
    for (int j = 0; j < traj.n_samples(); ++j) {
        double u = traj.states[j][node];
        ulo = std::min(ulo, u);
        uhi = std::max(uhi, u);
        tr.points.emplace_back(u, n.phi(u));
    }
    // A trace closes when it returns near its start relative to the range it
    // covered; only then does the closing chord of the shoelace make sense.
    double du = std::abs(tr.points.back().first - tr.points.front().first);
    double range = uhi - ulo;
    tr.closed = du <= 0.15 * range || range == 0.0;
    if (tr.closed) {
        double area2 = 0.0;
        for (size_t k = 0; k < tr.points.size(); ++k) {
            const auto& p = tr.points[k];
            const auto& q = tr.points[(k + 1) % tr.points.size()];
            area2 += p.first * q.second - q.first * p.second;
        }
        tr.signed_area = 0.5 * area2;
    }
    return tr;
}

}  // namespace fbp
