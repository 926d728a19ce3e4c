#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "uvi/errors.hpp"
#include "uvi/preprocess.hpp"

namespace uvi {

struct SilhouetteReport {
    std::vector<double> per_point;                       // s(i) in [-1, 1]
    std::vector<std::vector<double>> per_cluster_sorted; // s(i) per cluster, descending
    double mean_score = 0.0;

    bool operator==(const SilhouetteReport&) const = default;
};

/// Per-point silhouette values with Euclidean distances:
///   a(i) = mean distance to the other members of i's cluster,
///   b(i) = min over other clusters of the mean distance to that cluster,
///   s(i) = (b - a) / max(a, b), and 0 for singleton-cluster points.
inline SilhouetteReport silhouette_samples(const FeatureMatrix& m,
                                           const std::vector<int>& assignments) {
    const std::size_t n = m.rows;
    if (assignments.size() != n)
        throw DataError("silhouette: assignments length " + std::to_string(assignments.size()) +
                        " != rows " + std::to_string(n));

    int max_label = -1;
    for (int a : assignments) {
        if (a < 0) throw DataError("silhouette: negative cluster index");
        max_label = std::max(max_label, a);
    }
    const std::size_t k = static_cast<std::size_t>(max_label) + 1;

    std::vector<std::size_t> sizes(k, 0);
    for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
    const auto populated =
        static_cast<std::size_t>(std::count_if(sizes.begin(), sizes.end(),
                                               [](std::size_t s) { return s > 0; }));
    if (populated < 2) throw DataError("silhouette: needs at least 2 non-empty clusters");

    // Pairwise Euclidean distances, summed per (point, cluster).
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = std::sqrt(detail::dist2(m.row(i), m.row(j)));
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    SilhouetteReport rep;
    rep.per_point.assign(n, 0.0);
    std::vector<double> sum_to_cluster(k);
    for (std::size_t i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(assignments[i]);
        if (sizes[own] <= 1) {
            rep.per_point[i] = 0.0; // singleton rule
            continue;
        }
        std::fill(sum_to_cluster.begin(), sum_to_cluster.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            sum_to_cluster[static_cast<std::size_t>(assignments[j])] += dist[i * n + j];

        const double a = sum_to_cluster[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c == own || sizes[c] == 0) continue;
            b = std::min(b, sum_to_cluster[c] / static_cast<double>(sizes[c]));
        }
        const double denom = std::max(a, b);
        rep.per_point[i] = denom > 0.0 ? (b - a) / denom : 0.0;
    }

    rep.per_cluster_sorted.assign(k, {});
    for (std::size_t i = 0; i < n; ++i)
        rep.per_cluster_sorted[static_cast<std::size_t>(assignments[i])].push_back(
            rep.per_point[i]);
    for (auto& v : rep.per_cluster_sorted) std::sort(v.begin(), v.end(), std::greater<>());

    double sum = 0.0;
    for (double s : rep.per_point) sum += s;
    rep.mean_score = sum / static_cast<double>(n);
    return rep;
}

inline double silhouette_score(const FeatureMatrix& m, const std::vector<int>& assignments) {
    return silhouette_samples(m, assignments).mean_score;
}

} // namespace uvi
