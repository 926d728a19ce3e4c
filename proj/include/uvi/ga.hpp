#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "uvi/errors.hpp"
#include "uvi/kmeans.hpp"
#include "uvi/rng.hpp"
#include "uvi/silhouette.hpp"

namespace uvi {

/// One GA individual: the four clustering genes. The feature mask is over
/// matrix columns (bit j <-> column j) and always has at least 2 bits set.
struct Chromosome {
    int n_init = 2;
    int max_iter = 50;
    int k = 2;
    std::uint32_t feature_mask = 0;

    bool operator==(const Chromosome&) const = default;
};

struct IntRange {
    int lo = 0;
    int hi = 0;
    bool contains(int v) const { return v >= lo && v <= hi; }
    bool operator==(const IntRange&) const = default;
};

// Defaults bracket the reference configuration (n_init 14, max_iter 196, k 5).
struct GeneRanges {
    IntRange n_init{2, 20};
    IntRange max_iter{50, 300};
    IntRange k{2, 12};

    bool operator==(const GeneRanges&) const = default;
};

struct GAConfig {
    int generations = 50;
    int population = 40;
    double mutation_rate = 0.1;   // per-gene redraw probability
    double breed_fraction = 0.5;  // top fraction eligible to breed
    GeneRanges ranges;
    std::optional<int> fixed_k;                 // locks the cluster-count gene
    std::optional<std::uint32_t> fixed_mask;    // locks the feature gene
    bool reinit_whole_chromosome = false;       // mutate all genes at once instead
    double kmeans_tol = 1e-6;
    std::uint64_t seed = 0;

    bool operator==(const GAConfig&) const = default;
};

struct GAGeneration {
    double max_fitness = 0.0;  // best-so-far, non-decreasing under elitism
    double mean_fitness = 0.0; // mean over the generation's population

    bool operator==(const GAGeneration&) const = default;
};

struct GAHistory {
    std::vector<GAGeneration> generations;
    Chromosome best;
    double best_fitness = -1.0;

    bool operator==(const GAHistory&) const = default;
};

namespace detail {

inline void check_ga_config(const GAConfig& cfg, std::size_t n_features) {
    if (cfg.population < 2) throw ConfigError("ga: population must be >= 2");
    if (cfg.generations < 1) throw ConfigError("ga: generations must be >= 1");
    if (cfg.mutation_rate < 0.0 || cfg.mutation_rate > 1.0)
        throw ConfigError("ga: mutation_rate must be in [0,1]");
    if (cfg.breed_fraction <= 0.0 || cfg.breed_fraction > 1.0)
        throw ConfigError("ga: breed_fraction must be in (0,1]");
    for (const IntRange& r : {cfg.ranges.n_init, cfg.ranges.max_iter, cfg.ranges.k})
        if (r.lo > r.hi) throw ConfigError("ga: empty gene range");
    if (n_features < 2 || n_features > 32) throw ConfigError("ga: need 2..32 features");
    if (cfg.fixed_k && *cfg.fixed_k < 2) throw ConfigError("ga: fixed_k must be >= 2");
    if (cfg.fixed_mask) {
        if (std::popcount(*cfg.fixed_mask) < 2)
            throw ConfigError("ga: fixed_mask needs at least 2 features");
        if (*cfg.fixed_mask >> n_features)
            throw ConfigError("ga: fixed_mask selects unknown features");
    }
}

inline std::uint32_t random_mask(Rng& rng, std::size_t n_features) {
    const auto all = static_cast<std::uint32_t>((std::uint64_t{1} << n_features) - 1);
    for (;;) {
        const auto m = static_cast<std::uint32_t>(rng.uniform_int(1, all));
        if (std::popcount(m) >= 2) return m;
    }
}

inline int draw_gene(Rng& rng, const IntRange& r) {
    return static_cast<int>(rng.uniform_int(r.lo, r.hi));
}

inline Chromosome random_chromosome(Rng& rng, const GAConfig& cfg, std::size_t n_features) {
    Chromosome c;
    c.n_init = draw_gene(rng, cfg.ranges.n_init);
    c.max_iter = draw_gene(rng, cfg.ranges.max_iter);
    c.k = cfg.fixed_k ? *cfg.fixed_k : draw_gene(rng, cfg.ranges.k);
    c.feature_mask = cfg.fixed_mask ? *cfg.fixed_mask : random_mask(rng, n_features);
    return c;
}

} // namespace detail

/// Cluster the masked column subset with the chromosome's k-means genes and
/// score it by the mean silhouette. The seed should be derived per fitness
/// call so the whole search stays reproducible.
inline double evaluate_fitness(const Chromosome& c, const FeatureMatrix& m, std::uint64_t seed,
                               double tol = 1e-6) {
    if (c.feature_mask == 0 || (m.cols < 32 && (c.feature_mask >> m.cols) != 0))
        throw DataError("evaluate_fitness: mask selects columns outside the matrix");
    if (std::popcount(c.feature_mask) < 2)
        throw DataError("evaluate_fitness: mask needs at least 2 features");
    if (static_cast<std::size_t>(c.k) >= m.rows)
        throw DataError("evaluate_fitness: k = " + std::to_string(c.k) +
                        " is degenerate for " + std::to_string(m.rows) + " rows");
    const FeatureMatrix sub = m.subset(c.feature_mask);
    KMeansConfig kc;
    kc.k = c.k;
    kc.n_init = c.n_init;
    kc.max_iter = c.max_iter;
    kc.tol = tol;
    kc.seed = seed;
    const ClusteringResult res = kmeans_fit(sub, kc);
    return silhouette_score(sub, res.assignments);
}

/// Generation 0: every gene uniform over its configured range; locked genes
/// (fixed_k / fixed_mask) identical everywhere.
inline std::vector<Chromosome> init_population(const GAConfig& cfg, std::size_t n_features) {
    detail::check_ga_config(cfg, n_features);
    Rng rng(derive_seed(cfg.seed, "ga-init"));
    std::vector<Chromosome> pop;
    pop.reserve(static_cast<std::size_t>(cfg.population));
    for (int i = 0; i < cfg.population; ++i)
        pop.push_back(detail::random_chromosome(rng, cfg, n_features));
    return pop;
}

/// Called after each generation's evaluation with the population and scores.
using GenerationObserver =
    std::function<void(int generation, const std::vector<Chromosome>&, const std::vector<double>&)>;

/// The generations loop: evaluate, truncate to the top breed_fraction, refill
/// by uniform gene-wise crossover of random parent pairs, mutate, and carry
/// the best-so-far individual unchanged (elitism) with its recorded score.
/// Evaluation failures score -1 so the search can route around invalid genes;
/// any other failure aborts annotated with (generation, chromosome index).
inline GAHistory evolve(const GAConfig& cfg, const FeatureMatrix& m,
                        const GenerationObserver& observe = {}) {
    detail::check_ga_config(cfg, m.cols);
    if (m.rows <= static_cast<std::size_t>(cfg.ranges.k.lo))
        throw DataError("evolve: matrix has too few rows for the configured k range");

    Rng breed_rng(derive_seed(cfg.seed, "ga-evolve"));
    std::vector<Chromosome> pop = init_population(cfg, m.cols);
    const auto pop_n = static_cast<std::size_t>(cfg.population);

    GAHistory history;
    history.best_fitness = -std::numeric_limits<double>::infinity();
    std::vector<double> fitness(pop_n, -1.0);

    for (int gen = 0; gen < cfg.generations; ++gen) {
        const bool has_elite = gen > 0; // slot 0 keeps its recorded fitness
        for (std::size_t i = 0; i < pop_n; ++i) {
            if (has_elite && i == 0) {
                fitness[i] = history.best_fitness;
                continue;
            }
            try {
                fitness[i] = evaluate_fitness(
                    pop[i], m,
                    derive_seed(cfg.seed, "ga-fitness", static_cast<std::uint64_t>(gen), i),
                    cfg.kmeans_tol);
            } catch (const DataError&) {
                fitness[i] = -1.0;
            } catch (const std::exception& e) {
                throw ConfigError("evolve: generation " + std::to_string(gen) + ", chromosome " +
                                  std::to_string(i) + ": " + e.what());
            }
            if (fitness[i] > history.best_fitness) {
                history.best_fitness = fitness[i];
                history.best = pop[i];
            }
        }

        const double mean =
            std::accumulate(fitness.begin(), fitness.end(), 0.0) / static_cast<double>(pop_n);
        history.generations.push_back({history.best_fitness, mean});
        if (observe) observe(gen, pop, fitness);
        if (gen + 1 == cfg.generations) break;

        // Truncation selection by (fitness desc, index asc).
        std::vector<std::size_t> order(pop_n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });
        const auto n_parents = static_cast<std::size_t>(
            std::min<double>(static_cast<double>(pop_n),
                             std::ceil(cfg.breed_fraction * static_cast<double>(pop_n))));

        std::vector<Chromosome> next;
        next.reserve(pop_n);
        next.push_back(history.best); // elite
        while (next.size() < pop_n) {
            const auto pa = order[static_cast<std::size_t>(
                breed_rng.uniform_int(0, static_cast<std::int64_t>(n_parents) - 1))];
            const auto pb = order[static_cast<std::size_t>(
                breed_rng.uniform_int(0, static_cast<std::int64_t>(n_parents) - 1))];

            Chromosome child;
            child.n_init = breed_rng.uniform() < 0.5 ? pop[pa].n_init : pop[pb].n_init;
            child.max_iter = breed_rng.uniform() < 0.5 ? pop[pa].max_iter : pop[pb].max_iter;
            child.k = breed_rng.uniform() < 0.5 ? pop[pa].k : pop[pb].k;
            child.feature_mask =
                breed_rng.uniform() < 0.5 ? pop[pa].feature_mask : pop[pb].feature_mask;

            if (cfg.reinit_whole_chromosome) {
                if (breed_rng.uniform() < cfg.mutation_rate)
                    child = detail::random_chromosome(breed_rng, cfg, m.cols);
            } else {
                if (breed_rng.uniform() < cfg.mutation_rate)
                    child.n_init = detail::draw_gene(breed_rng, cfg.ranges.n_init);
                if (breed_rng.uniform() < cfg.mutation_rate)
                    child.max_iter = detail::draw_gene(breed_rng, cfg.ranges.max_iter);
                if (!cfg.fixed_k && breed_rng.uniform() < cfg.mutation_rate)
                    child.k = detail::draw_gene(breed_rng, cfg.ranges.k);
                if (!cfg.fixed_mask && breed_rng.uniform() < cfg.mutation_rate)
                    child.feature_mask = detail::random_mask(breed_rng, m.cols);
            }
            next.push_back(child);
        }
        pop = std::move(next);
    }
    return history;
}

} // namespace uvi
