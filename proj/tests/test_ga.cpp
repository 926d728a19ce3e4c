#include <gtest/gtest.h>

#include <bit>
#include <set>

#include "test_util.hpp"
#include "uvi/ga.hpp"

namespace {

using testutil::make_blobs;
using testutil::make_matrix;

uvi::FeatureMatrix two_blob_matrix() {
    // duplicated points: two tight blobs separated in both features
    return make_matrix({{0.1, 0.1}, {0.1, 0.1}, {0.1, 0.1}, {0.9, 0.9}, {0.9, 0.9}, {0.9, 0.9}});
}

TEST(GaInit, PopulationSatisfiesInvariants) {
    uvi::GAConfig cfg;
    cfg.population = 10;
    cfg.seed = 5;
    const auto pop = uvi::init_population(cfg, 8);
    ASSERT_EQ(pop.size(), 10u);
    for (const auto& c : pop) {
        EXPECT_TRUE(cfg.ranges.n_init.contains(c.n_init));
        EXPECT_TRUE(cfg.ranges.max_iter.contains(c.max_iter));
        EXPECT_TRUE(cfg.ranges.k.contains(c.k));
        EXPECT_GE(std::popcount(c.feature_mask), 2);
        EXPECT_EQ(c.feature_mask >> 8, 0u);
    }
}

TEST(GaInit, FixedKLocksEveryChromosome) {
    uvi::GAConfig cfg;
    cfg.population = 12;
    cfg.fixed_k = 10;
    cfg.ranges.k = {2, 12};
    cfg.seed = 6;
    for (const auto& c : uvi::init_population(cfg, 8)) EXPECT_EQ(c.k, 10);
}

TEST(GaInit, DeterministicGivenSeed) {
    uvi::GAConfig cfg;
    cfg.population = 20;
    cfg.seed = 7;
    EXPECT_EQ(uvi::init_population(cfg, 8), uvi::init_population(cfg, 8));
}

TEST(GaFitness, PerfectSeparationScoresNearOne) {
    const auto m = two_blob_matrix();
    uvi::Chromosome c;
    c.k = 2;
    c.n_init = 4;
    c.max_iter = 100;
    c.feature_mask = 0b11;
    EXPECT_NEAR(uvi::evaluate_fitness(c, m, 1), 1.0, 1e-12);
}

TEST(GaFitness, DegenerateKEqualsRowsIsAnError) {
    const auto m = two_blob_matrix();
    uvi::Chromosome c;
    c.k = 6; // as many clusters as rows
    c.feature_mask = 0b11;
    EXPECT_THROW(uvi::evaluate_fitness(c, m, 1), uvi::DataError);
}

TEST(GaFitness, CorrectKBeatsWrongKOnPlantedBlobs) {
    const auto blobs = make_blobs(99,
                                  {{0.1, 0.1, 0.5}, {0.5, 0.9, 0.1}, {0.9, 0.3, 0.9}}, 15, 0.02);
    uvi::Chromosome right;
    right.k = 3;
    right.n_init = 6;
    right.max_iter = 200;
    right.feature_mask = 0b111;
    uvi::Chromosome wrong = right;
    wrong.k = 2;
    const double f_right = uvi::evaluate_fitness(right, blobs.matrix, 42);
    const double f_wrong = uvi::evaluate_fitness(wrong, blobs.matrix, 42);
    EXPECT_GT(f_right, f_wrong);

    // cross-check the ordering with the independent silhouette oracle
    uvi::KMeansConfig kc;
    kc.n_init = 6;
    kc.max_iter = 200;
    kc.seed = 42;
    kc.k = 3;
    const auto res3 = uvi::kmeans_fit(blobs.matrix, kc);
    kc.k = 2;
    const auto res2 = uvi::kmeans_fit(blobs.matrix, kc);
    EXPECT_GT(testutil::silhouette_oracle_mean(blobs.matrix, res3.assignments),
              testutil::silhouette_oracle_mean(blobs.matrix, res2.assignments));
}

TEST(GaEvolve, ClosedPopulationKeepsBestConstant) {
    const auto m = two_blob_matrix();
    uvi::GAConfig cfg;
    cfg.generations = 6;
    cfg.population = 6;
    cfg.mutation_rate = 0.0;
    cfg.breed_fraction = 1.0;
    cfg.fixed_k = 2;
    cfg.fixed_mask = 0b11;
    cfg.ranges.n_init = {4, 4};     // identical chromosomes everywhere
    cfg.ranges.max_iter = {60, 60};
    cfg.seed = 17;
    const auto hist = uvi::evolve(cfg, m);
    ASSERT_EQ(hist.generations.size(), 6u);
    for (const auto& g : hist.generations)
        EXPECT_DOUBLE_EQ(g.max_fitness, hist.generations.front().max_fitness);
}

TEST(GaEvolve, MaxFitnessIsNonDecreasing) {
    const auto blobs = make_blobs(3, {{0.1, 0.2, 0.8, 0.5}, {0.9, 0.7, 0.2, 0.4}}, 12, 0.05);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        uvi::GAConfig cfg;
        cfg.generations = 8;
        cfg.population = 8;
        cfg.mutation_rate = 0.4;
        cfg.seed = seed;
        cfg.ranges.k = {2, 5};
        cfg.ranges.n_init = {2, 4};
        cfg.ranges.max_iter = {50, 80};
        const auto hist = uvi::evolve(cfg, blobs.matrix);
        for (std::size_t g = 1; g < hist.generations.size(); ++g)
            EXPECT_GE(hist.generations[g].max_fitness, hist.generations[g - 1].max_fitness);
    }
}

TEST(GaEvolve, EveryGenerationSatisfiesChromosomeInvariants) {
    const auto blobs = make_blobs(4, {{0.2, 0.2, 0.6}, {0.8, 0.6, 0.2}}, 10, 0.05);
    uvi::GAConfig cfg;
    cfg.generations = 10;
    cfg.population = 10;
    cfg.mutation_rate = 0.6; // stress the operators
    cfg.seed = 23;
    cfg.ranges.k = {2, 6};
    int observed = 0;
    const auto hist = uvi::evolve(cfg, blobs.matrix,
                                  [&](int, const std::vector<uvi::Chromosome>& pop,
                                      const std::vector<double>&) {
                                      ++observed;
                                      for (const auto& c : pop) {
                                          EXPECT_TRUE(cfg.ranges.n_init.contains(c.n_init));
                                          EXPECT_TRUE(cfg.ranges.max_iter.contains(c.max_iter));
                                          EXPECT_TRUE(cfg.ranges.k.contains(c.k));
                                          EXPECT_GE(std::popcount(c.feature_mask), 2);
                                          EXPECT_EQ(c.feature_mask >> 3, 0u);
                                      }
                                  });
    EXPECT_EQ(observed, 10);
    EXPECT_GE(std::popcount(hist.best.feature_mask), 2);
}

TEST(GaEvolve, FixedGenesHonoredEverywhere) {
    const auto blobs = make_blobs(5, {{0.2, 0.2, 0.7, 0.4}, {0.8, 0.6, 0.3, 0.9}}, 10, 0.05);
    uvi::GAConfig cfg;
    cfg.generations = 5;
    cfg.population = 8;
    cfg.mutation_rate = 0.5;
    cfg.fixed_k = 2;
    cfg.fixed_mask = 0b1011;
    cfg.seed = 29;
    const auto hist = uvi::evolve(cfg, blobs.matrix,
                                  [&](int, const std::vector<uvi::Chromosome>& pop,
                                      const std::vector<double>&) {
                                      for (const auto& c : pop) {
                                          EXPECT_EQ(c.k, 2);
                                          EXPECT_EQ(c.feature_mask, 0b1011u);
                                      }
                                  });
    EXPECT_EQ(hist.best.k, 2);
    EXPECT_EQ(hist.best.feature_mask, 0b1011u);
}

TEST(GaEvolve, DeterministicGivenConfigAndMatrix) {
    const auto blobs = make_blobs(6, {{0.3, 0.1}, {0.7, 0.9}}, 8, 0.04);
    uvi::GAConfig cfg;
    cfg.generations = 6;
    cfg.population = 6;
    cfg.seed = 31;
    const auto a = uvi::evolve(cfg, blobs.matrix);
    const auto b = uvi::evolve(cfg, blobs.matrix);
    EXPECT_EQ(a, b);
}

TEST(GaEvolve, RejectsBadConfig) {
    const auto m = two_blob_matrix();
    uvi::GAConfig cfg;
    cfg.population = 1;
    EXPECT_THROW(uvi::evolve(cfg, m), uvi::ConfigError);
    cfg.population = 4;
    cfg.mutation_rate = 1.5;
    EXPECT_THROW(uvi::evolve(cfg, m), uvi::ConfigError);
    cfg.mutation_rate = 0.1;
    cfg.breed_fraction = 0.0;
    EXPECT_THROW(uvi::evolve(cfg, m), uvi::ConfigError);
}

} // namespace
