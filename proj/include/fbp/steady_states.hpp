#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "fbp/grid.hpp"
#include "fbp/nonlinearity.hpp"

namespace fbp {

enum class Verdict { stable, unstable, undetermined };
enum class StabilityMethod { recursion, eigen_oracle };

const char* to_string(Verdict v);

// A grid state with phi(u_i) = c at every node: each node sits on one of the
// branch values omega_1 < u_minus < omega_2 < u_plus < omega_3 at the common
// level c. counts (n1,n2,n3) sum to N+1.
struct SteadyState {
    double level = 0.0;
    std::optional<double> omega1, omega2, omega3;
    int n1 = 0, n2 = 0, n3 = 0;
    std::vector<int> branch_of_node;  // entries in {1,2,3}, one per node

    Verdict verdict = Verdict::undetermined;
    StabilityMethod verdict_method = StabilityMethod::eigen_oracle;

    int n_nodes() const { return static_cast<int>(branch_of_node.size()); }
    bool homogeneous() const;

    // Node values as a grid function on [0,1] with N = n_nodes()-1 intervals.
    GridFunction values() const;
};

struct StabilityWitness {
    Verdict verdict = Verdict::undetermined;
    StabilityMethod method = StabilityMethod::eigen_oracle;
    std::vector<double> X;                      // recursion values X_1..X_N
    std::vector<bool> sign_pattern;             // (-1)^i X_i > 0
    std::vector<std::complex<double>> eigenvalues;  // oracle spectrum of J
};

// All steady states at the given mean: one canonical representative per
// admissible count vector and level root (branch-1 block, branch-2 block,
// branch-3 block), plus the homogeneous state. Levels are deduplicated
// within 1e-10; count vectors without a root contribute nothing.
std::vector<SteadyState> enumerate_steady_states(const Nonlinearity& n, int N, double mean);

// Sign-pattern criterion from the determinant recursion
//   X_1 = -(phi'(p_0) + phi'(p_1)),
//   X_{i+1} = -phi'(p_{i+1}) X_i + (-1)^{i+1} prod_{j<=i} phi'(p_j);
// stable iff (-1)^i X_i > 0 for i = 1..N. Products are tracked in
// log-magnitude + sign form. Requires the canonical block arrangement;
// other arrangements must go to the eigenvalue oracle.
StabilityWitness stability_recursion(const Nonlinearity& n, const SteadyState& s);

// Independent classification from the spectrum of J = A diag(phi'(p_i)),
// A the Neumann Laplacian matrix. J always carries the structural zero
// eigenvalue (left eigenvector 1, mass conservation); the verdict is taken
// on the remaining spectrum, with margin 1e-8 * max(1, ||J||_inf).
StabilityWitness stability_eigen_oracle(const Nonlinearity& n, const SteadyState& s);

// Necessary stability bound on the unstable-branch slope:
//   |phi'(w2)| < max{phi'(w1),phi'(w3)}^2 / (N min{phi'(w1),phi'(w3)}),
// or |phi'(w2)| < phi'(w1)/N when u_plus = +inf. States without an
// unstable-branch node (n2 = 0) have nothing to bound and return true.
// Throws for homogeneous states.
bool check_bound(const Nonlinearity& n, const SteadyState& s);

}  // namespace fbp
