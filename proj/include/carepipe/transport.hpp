#pragma once
// Exact solver for the balanced transportation problem:
//
//   min sum_ij T_ij * cost(i,j)   s.t.  row sums = supply, col sums = demand
//
// Supplies and demands are integers (scale rational marginals up front);
// costs are arbitrary non-negative reals. Successive shortest augmenting
// paths with node potentials keep every intermediate solution integral, so
// the returned optimum is exact up to floating-point summation.

#include <cstdint>
#include <functional>
#include <vector>

namespace carepipe {

struct TransportResult {
    double cost = 0.0;
    // flow[i][j] units moved from supply i to demand j
    std::vector<std::vector<int64_t>> flow;
};

// Requires sum(supplies) == sum(demands) and all costs >= 0.
TransportResult solve_transport(const std::vector<int64_t>& supplies,
                                const std::vector<int64_t>& demands,
                                const std::function<double(std::size_t, std::size_t)>& cost);

}  // namespace carepipe
