#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbp/grid.hpp"
#include "fbp/nonlinearity.hpp"

namespace fbp {

enum class DtPolicy {
    derivation,  // dt = eps^2, as in the random-walk derivation
    cfl          // dt = safety * eps^2 / (2 max|phi'| over the invariant set)
};

struct SolverConfig {
    DtPolicy dt_policy = DtPolicy::cfl;
    double safety = 0.9;            // in (0,1]
    double t_end = 1.0;
    double record_every = 0.1;      // diagnostic sampling period, > 0
    double convergence_tol = -1.0;  // ||rhs||_inf threshold; < 0 selects the
                                    // default, 0 disables early stopping
};

// Thresholds monitored per step during integration (u_minus / u_plus).
struct CrossingThresholds {
    double lower;
    double upper;
};

// A node value passing through a monitored threshold within one step.
// Crossing state is linearly interpolated between the step endpoints and the
// crossing time solved by bisection on the interpolant (tol 1e-9).
struct NodeCrossing {
    double time = 0.0;
    int node = -1;
    enum class Which { lower, upper } threshold = Which::lower;
    bool rising = false;
    std::vector<double> state_at_cross;  // full state at the crossing time
    std::vector<double> state_before;    // state at the step start
};

struct Trajectory {
    GridDomain domain;
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<double> mass;   // per sample
    std::vector<double> min_u;  // per sample
    std::vector<double> max_u;  // per sample
    std::vector<NodeCrossing> crossings;
    bool monitored = false;  // integrate ran with per-step threshold monitoring
    bool converged = false;
    double dt = 0.0;
    long steps = 0;

    int n_samples() const { return static_cast<int>(times.size()); }
    GridFunction state(int j) const { return GridFunction(domain, states[j]); }
    const std::vector<double>& final_state() const { return states.back(); }
    double final_time() const { return times.back(); }
};

class BlowupError : public std::runtime_error {
  public:
    BlowupError(int node, double time)
        : std::runtime_error("blow-up: non-finite value at node " + std::to_string(node) +
                             ", t = " + std::to_string(time)),
          node_(node),
          time_(time) {}
    int node() const { return node_; }
    double time() const { return time_; }

  private:
    int node_;
    double time_;
};

// Right-hand side of the semi-discrete system: Delta_Lambda(phi o u).
GridFunction rhs(const Nonlinearity& n, const GridFunction& u);

// One forward-Euler update u + dt*rhs(u); conserves sum(u) up to roundoff.
// Throws BlowupError (time reported as 0) if the result is non-finite.
GridFunction step(const Nonlinearity& n, const GridFunction& u, double dt);

// Time step implied by the policy for this initial state.
double resolve_dt(const Nonlinearity& n, const GridFunction& u0, const SolverConfig& cfg);

// Default stopping threshold: 1e-10 * phi(u_minus)/eps^2.
double default_convergence_tol(const Nonlinearity& n, const GridDomain& d);

// Advance to t_end or until ||rhs||_inf <= convergence_tol, recording a
// sample every record_every. The initial data must be nonnegative.
// When watch is set, node crossings of the thresholds are recorded per step.
Trajectory integrate(const Nonlinearity& n, const GridFunction& u0, const SolverConfig& cfg,
                     const std::optional<CrossingThresholds>& watch = std::nullopt);

struct InvariantSetSpec {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();

    // lower 0; upper max{||u0||_inf, S3(phi(u_minus))} when u_plus < inf.
    static InvariantSetSpec for_problem(const Nonlinearity& n, const GridFunction& u0);
};

struct InvariantViolation {
    int sample;
    int node;
    double value;
    double bound;
};

struct InvariantReport {
    std::vector<InvariantViolation> violations;
    double tol = 0.0;
    bool ok() const { return violations.empty(); }
};

// Flags samples violating lower - tol <= u_i <= upper + tol,
// tol = 1e-9 * max(1, |bounds|).
InvariantReport check_invariant_set(const Trajectory& traj, const InvariantSetSpec& spec);

}  // namespace fbp
