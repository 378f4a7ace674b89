#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbp {

// Uniform grid on [0,1]: N intervals, spacing eps = 1/N, nodes x_i = i*eps.
struct GridDomain {
    int n_intervals = 0;
    double spacing = 0.0;

    GridDomain() = default;
    explicit GridDomain(int n);

    int n_nodes() const { return n_intervals + 1; }
    double x(int i) const { return i * spacing; }

    friend bool operator==(const GridDomain& a, const GridDomain& b) {
        return a.n_intervals == b.n_intervals;
    }
};

// Real-valued function on the grid nodes; values[i] = u(i*eps).
struct GridFunction {
    GridDomain domain;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(GridDomain d, double fill);
    GridFunction(GridDomain d, std::vector<double> vals);

    int size() const { return static_cast<int>(values.size()); }
    double& operator[](int i) { return values[i]; }
    double operator[](int i) const { return values[i]; }

    // Throws std::invalid_argument if any entry is NaN or infinite.
    void require_finite(const std::string& what) const;
};

// (D+ f)_i = (f_{i+1} - f_i)/eps for i < N; last node padded with zero.
GridFunction forward_diff(const GridFunction& f);

// (D- f)_i = (f_i - f_{i-1})/eps for i >= 1; first node padded with zero.
GridFunction backward_diff(const GridFunction& f);

// Three-point second difference with zero-flux boundary rows:
//   interior: (f_{i-1} - 2 f_i + f_{i+1})/eps^2
//   i = 0:    (f_1 - f_0)/eps^2,   i = N: (f_{N-1} - f_N)/eps^2
// Row sums vanish, so the output always sums to zero (mass conservation).
GridFunction laplacian_neumann(const GridFunction& f);
void laplacian_neumann_into(const std::vector<double>& f, double eps, std::vector<double>& out);

// eps * sum_i f_i
double grid_integral(const GridFunction& f);

// eps * sum_i f_i g_i; throws on domain mismatch.
double inner_product(const GridFunction& f, const GridFunction& g);

enum class Lp { one, two, inf };

double lp_norm(const GridFunction& f, Lp p);

double max_abs(const std::vector<double>& v);

}  // namespace fbp
