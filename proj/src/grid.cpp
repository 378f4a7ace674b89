#include "fbp/grid.hpp"

#include <algorithm>
#include <cstdlib>

namespace fbp {

GridDomain::GridDomain(int n) : n_intervals(n), spacing(1.0 / n) {
    if (n < 2) throw std::invalid_argument("GridDomain: need N >= 2, got " + std::to_string(n));
    if (std::abs(spacing * n - 1.0) > 1e-15)
        throw std::invalid_argument("GridDomain: eps*N deviates from 1 beyond 1e-15");
}

GridFunction::GridFunction(GridDomain d, double fill)
    : domain(d), values(static_cast<size_t>(d.n_nodes()), fill) {}

GridFunction::GridFunction(GridDomain d, std::vector<double> vals)
    : domain(d), values(std::move(vals)) {
    if (size() != domain.n_nodes())
        throw std::invalid_argument("GridFunction: expected " + std::to_string(domain.n_nodes()) +
                                    " values, got " + std::to_string(size()));
}

void GridFunction::require_finite(const std::string& what) const {
    for (int i = 0; i < size(); ++i)
        if (!std::isfinite(values[i]))
            throw std::invalid_argument(what + ": non-finite value at node " + std::to_string(i));
}

GridFunction forward_diff(const GridFunction& f) {
    const int n = f.domain.n_intervals;
    const double eps = f.domain.spacing;
    GridFunction out(f.domain, 0.0);
    for (int i = 0; i < n; ++i) out[i] = (f[i + 1] - f[i]) / eps;
    return out;  // out[n] = 0 by the zero-extension convention
}

GridFunction backward_diff(const GridFunction& f) {
    const int n = f.domain.n_intervals;
    const double eps = f.domain.spacing;
    GridFunction out(f.domain, 0.0);
    for (int i = 1; i <= n; ++i) out[i] = (f[i] - f[i - 1]) / eps;
    return out;
}

void laplacian_neumann_into(const std::vector<double>& f, double eps, std::vector<double>& out) {
    const int n = static_cast<int>(f.size()) - 1;
    out.resize(f.size());
    const double e2 = eps * eps;
    out[0] = (f[1] - f[0]) / e2;
    for (int i = 1; i < n; ++i) out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) / e2;
    out[n] = (f[n - 1] - f[n]) / e2;
}

GridFunction laplacian_neumann(const GridFunction& f) {
    GridFunction out(f.domain, 0.0);
    laplacian_neumann_into(f.values, f.domain.spacing, out.values);
    return out;
}

double grid_integral(const GridFunction& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return f.domain.spacing * s;
}

double inner_product(const GridFunction& f, const GridFunction& g) {
    if (!(f.domain == g.domain))
        throw std::invalid_argument("inner_product: grid domains do not match");
    double s = 0.0;
    for (int i = 0; i < f.size(); ++i) s += f[i] * g[i];
    return f.domain.spacing * s;
}

double lp_norm(const GridFunction& f, Lp p) {
    switch (p) {
        case Lp::one: {
            double s = 0.0;
            for (double v : f.values) s += std::abs(v);
            return f.domain.spacing * s;
        }
        case Lp::two: {
            double s = 0.0;
            for (double v : f.values) s += v * v;
            return std::sqrt(f.domain.spacing * s);
        }
        case Lp::inf: {
            double m = 0.0;
            for (double v : f.values) m = std::max(m, std::abs(v));
            return m;
        }
    }
    return 0.0;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace fbp
