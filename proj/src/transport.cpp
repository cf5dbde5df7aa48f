#include "carepipe/transport.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace carepipe {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TransportResult solve_transport(const std::vector<int64_t>& supplies,
                                const std::vector<int64_t>& demands,
                                const std::function<double(std::size_t, std::size_t)>& cost) {
    const std::size_t ns = supplies.size();
    const std::size_t nd = demands.size();
    if (std::accumulate(supplies.begin(), supplies.end(), int64_t{0}) !=
        std::accumulate(demands.begin(), demands.end(), int64_t{0}))
        throw std::invalid_argument("transport: unbalanced supplies/demands");

    // Cache the cost matrix once; callers re-derive costs lazily otherwise.
    std::vector<std::vector<double>> c(ns, std::vector<double>(nd));
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < nd; ++j) {
            c[i][j] = cost(i, j);
            if (!(c[i][j] >= 0.0)) throw std::invalid_argument("transport: negative cost");
        }

    std::vector<int64_t> remaining_supply = supplies;
    std::vector<int64_t> remaining_demand = demands;
    std::vector<std::vector<int64_t>> flow(ns, std::vector<int64_t>(nd, 0));

    // Node layout: [0, ns) supplies, [ns, ns+nd) demands.
    const std::size_t n = ns + nd;
    std::vector<double> potential(n, 0.0);

    int64_t outstanding =
        std::accumulate(supplies.begin(), supplies.end(), int64_t{0});

    while (outstanding > 0) {
        // Multi-source Dijkstra over reduced costs from all supplies with
        // remaining stock. Graph is small (docs are capped at 64 tokens), so
        // the dense O(n^2) scan is fine.
        std::vector<double> dist(n, kInf);
        std::vector<int> prev(n, -1);  // predecessor node, -1 = path start
        std::vector<char> done(n, 0);
        for (std::size_t i = 0; i < ns; ++i)
            if (remaining_supply[i] > 0) dist[i] = 0.0;

        for (;;) {
            std::size_t u = n;
            double best = kInf;
            for (std::size_t v = 0; v < n; ++v)
                if (!done[v] && dist[v] < best) best = dist[v], u = v;
            if (u == n) break;
            done[u] = 1;

            if (u < ns) {
                // forward arcs i -> j, unlimited residual
                for (std::size_t j = 0; j < nd; ++j) {
                    const std::size_t v = ns + j;
                    double rc = c[u][j] + potential[u] - potential[v];
                    if (rc < 0.0) rc = 0.0;  // floating-point guard
                    if (dist[u] + rc < dist[v]) {
                        dist[v] = dist[u] + rc;
                        prev[v] = static_cast<int>(u);
                    }
                }
            } else {
                // backward arcs j -> i, residual = current flow
                const std::size_t j = u - ns;
                for (std::size_t i = 0; i < ns; ++i) {
                    if (flow[i][j] <= 0) continue;
                    double rc = -c[i][j] + potential[u] - potential[i];
                    if (rc < 0.0) rc = 0.0;
                    if (dist[u] + rc < dist[i]) {
                        dist[i] = dist[u] + rc;
                        prev[i] = static_cast<int>(u);
                    }
                }
            }
        }

        // Closest demand with remaining need.
        std::size_t sink = n;
        double best = kInf;
        for (std::size_t j = 0; j < nd; ++j) {
            const std::size_t v = ns + j;
            if (remaining_demand[j] > 0 && dist[v] < best) best = dist[v], sink = v;
        }
        if (sink == n) throw std::logic_error("transport: no augmenting path");

        for (std::size_t v = 0; v < n; ++v)
            if (dist[v] < kInf) potential[v] += dist[v];

        // Walk back to the path's source, collecting the bottleneck.
        int64_t push = remaining_demand[sink - ns];
        std::size_t v = sink;
        while (prev[v] != -1) {
            const std::size_t u = static_cast<std::size_t>(prev[v]);
            if (u < ns) {
                // forward arc, no cap
            } else {
                push = std::min(push, flow[v][u - ns]);
            }
            v = u;
        }
        assert(v < ns);
        push = std::min(push, remaining_supply[v]);

        v = sink;
        while (prev[v] != -1) {
            const std::size_t u = static_cast<std::size_t>(prev[v]);
            if (u < ns)
                flow[u][v - ns] += push;
            else
                flow[v][u - ns] -= push;
            v = u;
        }
        remaining_supply[v] -= push;
        remaining_demand[sink - ns] -= push;
        outstanding -= push;
    }

    TransportResult result;
    result.flow = std::move(flow);
    double total = 0.0;
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < nd; ++j)
            if (result.flow[i][j] > 0) total += static_cast<double>(result.flow[i][j]) * c[i][j];
    result.cost = total;
    return result;
}

}  // namespace carepipe
