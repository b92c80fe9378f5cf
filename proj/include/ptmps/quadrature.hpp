#ifndef PTMPS_QUADRATURE_HPP
#define PTMPS_QUADRATURE_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace ptmps {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(std::size_t order);

    /// Integrate f over [a, b].
    template <typename F>
    auto integrate(F&& f, double a, double b) const -> decltype(f(0.0)) {
        using R = decltype(f(0.0));
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        R acc = R(0.0);
        for (std::size_t i = 0; i < nodes.size(); ++i)
            acc += R(weights[i]) * f(mid + half * nodes[i]);
        return R(half) * acc;
    }
};

} // namespace ptmps

#endif
