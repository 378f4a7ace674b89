#pragma once

#include <vector>

#include "fbp/dynamics.hpp"
#include "fbp/grid.hpp"
#include "fbp/nonlinearity.hpp"

namespace fbp {

// Two-block initial data: omega1 on nodes 0..split_index, omega3 after.
// Requires the finite-u_plus regime.
struct RiemannData {
    double omega1 = 0.0;  // in [0, u_minus]
    double omega3 = 0.0;  // in [u_plus, inf)
    int split_index = 0;  // 0 <= n <= N
};

struct PhaseTransitionEvent {
    double time = 0.0;
    int node = -1;
    enum class Direction { upward, downward } direction = Direction::upward;
    double pre_value = 0.0;    // node value as it reaches the turning point
    double trigger_lhs = 0.0;  // phi(u_{i-1}) + phi(u_{i+1}) at the crossing
    double trigger_rhs = 0.0;  // 2 phi(u_minus) or 2 phi(u_plus)
};

GridFunction make_riemann(const Nonlinearity& n, const RiemannData& d, int N);

// Integrate with per-step monitoring of the turning points, so transitions
// cannot be missed between samples.
Trajectory run_riemann(const Nonlinearity& n, const RiemannData& d, int N,
                       const SolverConfig& cfg);

// Filters the trajectory's recorded threshold crossings through the
// transition conditions: the neighbor-sum trigger inequality and the
// maximality (upward) / minimality (downward) selection of the interface
// node. When the trajectory carries no per-step crossing log (built by
// hand), falls back to scanning consecutive samples; a warning is emitted
// on stderr if a node crosses more than once per sampling interval.
std::vector<PhaseTransitionEvent> detect_transitions(const Nonlinearity& n,
                                                     const Trajectory& traj);

// Per-sample count of nodes strictly inside the spinodal interval.
std::vector<int> interface_counts(const Nonlinearity& n, const Trajectory& traj);

// Maximum of interface_counts over the trajectory.
int interface_width(const Nonlinearity& n, const Trajectory& traj);

// phi(omega1) > phi(omega3): the left phase dominates and no transition can
// trigger. literal_omega2 evaluates the right side through the middle-branch
// companion S2(phi(omega3)) of the right state's level; since
// phi(S2(phi(w))) = phi(w), both readings coincide up to root-finder
// tolerance.
bool no_transition_predicate(const Nonlinearity& n, const RiemannData& d,
                             bool literal_omega2 = false);

struct HysteresisTrace {
    std::vector<std::pair<double, double>> points;  // (u_node, phi(u_node)) in time order
    double signed_area = 0.0;  // shoelace of the closed polyline; negative =
                               // clockwise; 0 when the trace does not close
    bool closed = false;       // trace returns near its starting point
};

HysteresisTrace hysteresis_trace(const Nonlinearity& n, const Trajectory& traj, int node);

}  // namespace fbp
