#pragma once

#include <vector>

#include "fbp/dynamics.hpp"
#include "fbp/grid.hpp"

namespace fbp {

// Windowed empirical distribution of node values below the singular cutoff.
// Weights are normalized by the (boundary-clipped) window size; the deficit
// carries the above-cutoff fraction, so weights + deficit sum to 1.
struct ValueHistogram {
    double center_x = 0.0;
    double radius = 0.0;
    std::vector<double> edges;    // bins+1 edges, uniform on [0, cutoff]
    std::vector<double> weights;  // one per bin
    double deficit = 0.0;
};

// Split of a state into its bounded part and the above-cutoff spike mass.
struct MeasureDecomposition {
    GridFunction regular_part;         // values above the cutoff zeroed out
    std::vector<int> singular_sites;   // nodes with u_i > cutoff
    double singular_mass = 0.0;        // eps * sum over singular sites
    std::vector<double> mu_tilde;      // site weights, sum to 1 when mass > 0
    double disintegration_factor = 0.0;  // int u0 - int regular_part
};

// Default spike threshold: sqrt(N) * max(1, u_minus); any N-divergent
// threshold separates O(1) values from concentrating spikes.
double default_cutoff(int N, double u_minus);

// Mesoscale window: max(3, N/16) rounded up to odd.
int default_window(int N);

std::vector<ValueHistogram> young_histogram(const GridFunction& u, int window_nodes, int bins,
                                            double cutoff);

MeasureDecomposition decompose(const GridFunction& u, double u0_mass, double cutoff);

// Per-sample singular fraction s(t) = singular_mass(t)/u0_mass.
std::vector<double> coarsening_indicator(const Trajectory& traj, double u0_mass, double cutoff);

// Whether s(t) is nondecreasing after the given transient, up to slack.
// The coarsening claim is a conjecture: callers report this flag, they do
// not assert it.
bool coarsening_trend_consistent(const std::vector<double>& s, int skip_samples, double slack);

}  // namespace fbp
