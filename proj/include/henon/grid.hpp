/// @file grid.hpp
/// @brief Geometric (log-uniform) grids specified by interval count.
///
/// Refinement contract: geometric_grid(r0, r1, 2*n) contains exactly the
/// nodes of geometric_grid(r0, r1, n) and halves every logarithmic step.
/// Richardson extrapolation of eigenvalues relies on this exact-doubling
/// property; refining by "roughly twice the nodes" does not cancel the
/// second-order error term and stalls the extrapolation around 1e-9.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace henon {

/// Nodes r0 * (r1/r0)^{j/n}, j = 0..n, with both endpoints exact.
template <class F>
std::vector<F> geometric_grid(F r0, F r1, int intervals) {
    if (!(r0 > F(0)) || !(r1 > r0))
        throw std::invalid_argument("geometric_grid: requires 0 < r0 < r1");
    if (intervals < 1)
        throw std::invalid_argument("geometric_grid: need at least one interval");
    std::vector<F> nodes(static_cast<std::size_t>(intervals) + 1);
    const F L = std::log(r1) - std::log(r0);
    for (int j = 0; j <= intervals; ++j)
        nodes[static_cast<std::size_t>(j)] =
            r0 * std::exp(L * static_cast<F>(j) / static_cast<F>(intervals));
    nodes.front() = r0;
    nodes.back() = r1;
    return nodes;
}

} // namespace henon
