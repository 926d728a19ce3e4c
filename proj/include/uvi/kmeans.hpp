#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "uvi/errors.hpp"
#include "uvi/preprocess.hpp"
#include "uvi/rng.hpp"

namespace uvi {

struct KMeansConfig {
    int k = 2;
    int n_init = 10;       // independent restarts with fresh random centroids
    int max_iter = 300;    // iteration cap per restart
    double tol = 1e-6;     // stop when no centroid moved further than this
    std::uint64_t seed = 0;

    bool operator==(const KMeansConfig&) const = default;
};

struct ClusteringResult {
    std::vector<int> assignments;               // n indices in 0..k-1, no cluster empty
    std::vector<std::vector<double>> centroids; // k x d
    double inertia = 0.0;                       // sum of squared point-to-centroid distances
    int n_iter = 0;                             // iterations of the winning restart
    int restarts_run = 0;
    int best_restart = 0;
    bool converged = false;
    // inertia after each iteration, per restart; non-increasing within a restart
    std::vector<std::vector<double>> restart_traces;

    bool operator==(const ClusteringResult&) const = default;
};

/// The clustering objective: sum over points of the squared Euclidean
/// distance to their assigned centroid.
inline double inertia(const FeatureMatrix& m, const std::vector<int>& assignments,
                      const std::vector<std::vector<double>>& centroids) {
    if (assignments.size() != m.rows)
        throw DataError("inertia: assignments length " + std::to_string(assignments.size()) +
                        " != rows " + std::to_string(m.rows));
    if (centroids.empty()) throw DataError("inertia: no centroids");
    for (const auto& c : centroids)
        if (c.size() != m.cols) throw DataError("inertia: centroid dimension mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) {
        const int a = assignments[i];
        if (a < 0 || static_cast<std::size_t>(a) >= centroids.size())
            throw DataError("inertia: assignment index out of range");
        total += detail::dist2(m.row(i), centroids[static_cast<std::size_t>(a)]);
    }
    return total;
}

namespace detail {

struct LloydRun {
    std::vector<int> assignments;
    std::vector<std::vector<double>> centroids;
    std::vector<double> trace;
    double inertia = 0.0;
    int n_iter = 0;
    bool converged = false;
};

inline LloydRun lloyd_once(const FeatureMatrix& m, const KMeansConfig& cfg, std::uint64_t seed) {
    const std::size_t n = m.rows;
    const auto k = static_cast<std::size_t>(cfg.k);
    Rng rng(seed);

    LloydRun run;
    run.centroids.reserve(k);
    for (std::size_t idx : rng.sample_indices(n, k)) {
        const auto r = m.row(idx);
        run.centroids.emplace_back(r.begin(), r.end());
    }

    std::vector<int> prev_assign;
    std::vector<std::size_t> counts(k, 0);
    bool final_assign_pending = false;

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        run.n_iter = iter;

        // Assignment: nearest centroid, ties to the lowest index.
        run.assignments.assign(n, 0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = dist2(m.row(i), run.centroids[c]);
                if (d < best) {
                    best = d;
                    best_c = static_cast<int>(c);
                }
            }
            run.assignments[i] = best_c;
            ++counts[static_cast<std::size_t>(best_c)];
        }

        // Repair: an emptied cluster is reseeded with the worst-fitted point.
        // The donor cluster must keep at least one member.
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            double worst = -1.0;
            std::size_t pick = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(run.assignments[i])] < 2) continue;
                const double d =
                    dist2(m.row(i), run.centroids[static_cast<std::size_t>(run.assignments[i])]);
                if (d > worst) {
                    worst = d;
                    pick = i;
                }
            }
            --counts[static_cast<std::size_t>(run.assignments[pick])];
            run.assignments[pick] = static_cast<int>(c);
            counts[c] = 1;
            const auto r = m.row(pick);
            run.centroids[c].assign(r.begin(), r.end());
        }

        if (iter > 1 && run.assignments == prev_assign) {
            // Fixpoint: centroids are already the member means, so the
            // assignment is optimal against them.
            run.converged = true;
            break;
        }
        if (final_assign_pending) {
            run.trace.push_back(inertia(m, run.assignments, run.centroids));
            run.converged = true;
            break;
        }

        // Update step.
        double max_shift2 = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            std::vector<double> mean(m.cols, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                if (static_cast<std::size_t>(run.assignments[i]) != c) continue;
                const auto r = m.row(i);
                for (std::size_t j = 0; j < m.cols; ++j) mean[j] += r[j];
            }
            for (std::size_t j = 0; j < m.cols; ++j) mean[j] /= static_cast<double>(counts[c]);
            max_shift2 = std::max(max_shift2, dist2(mean, run.centroids[c]));
            run.centroids[c] = std::move(mean);
        }

        run.trace.push_back(inertia(m, run.assignments, run.centroids));
        prev_assign = run.assignments;
        if (std::sqrt(max_shift2) < cfg.tol) final_assign_pending = true;
    }

    run.inertia = inertia(m, run.assignments, run.centroids);
    return run;
}

} // namespace detail

/// Lloyd's algorithm with cfg.n_init random restarts (Forgy initialization
/// from distinct data rows); returns the restart with minimal inertia, ties
/// to the lowest restart index. Deterministic given cfg.seed.
inline ClusteringResult kmeans_fit(const FeatureMatrix& m, const KMeansConfig& cfg) {
    if (m.rows == 0 || m.cols == 0) throw DataError("kmeans_fit: empty matrix");
    if (cfg.k < 2) throw DataError("kmeans_fit: k must be at least 2, got " + std::to_string(cfg.k));
    if (static_cast<std::size_t>(cfg.k) > m.rows)
        throw DataError("kmeans_fit: k = " + std::to_string(cfg.k) + " exceeds " +
                        std::to_string(m.rows) + " rows");
    if (cfg.n_init < 1) throw ConfigError("kmeans_fit: n_init must be >= 1");
    if (cfg.max_iter < 1) throw ConfigError("kmeans_fit: max_iter must be >= 1");
    if (cfg.tol < 0.0) throw ConfigError("kmeans_fit: tol must be non-negative");

    ClusteringResult result;
    result.restarts_run = cfg.n_init;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.n_init; ++r) {
        auto run = detail::lloyd_once(m, cfg, derive_seed(cfg.seed, "kmeans-restart",
                                                          static_cast<std::uint64_t>(r)));
        result.restart_traces.push_back(run.trace);
        if (run.inertia < best) {
            best = run.inertia;
            result.assignments = std::move(run.assignments);
            result.centroids = std::move(run.centroids);
            result.inertia = run.inertia;
            result.n_iter = run.n_iter;
            result.converged = run.converged;
            result.best_restart = r;
        }
    }
    return result;
}

} // namespace uvi
