#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uvi/errors.hpp"
#include "uvi/kmeans.hpp"
#include "uvi/rng.hpp"
#include "uvi/silhouette.hpp"

namespace uvi {

/// One clustering run on a feature subset and its silhouette score.
struct SubsetRun {
    std::uint32_t mask = 0;
    double score = -1.0;
    bool failed = false;

    bool operator==(const SubsetRun&) const = default;
};

struct ForestConfig {
    int n_trees = 250;
    std::optional<int> max_depth;          // unlimited when unset
    int min_samples_leaf = 1;
    bool bootstrap = true;
    std::optional<int> features_per_split; // unset -> ceil(d/3); >= d -> all
    std::uint64_t seed = 0;

    bool operator==(const ForestConfig&) const = default;
};

struct TreeNode {
    int feature = -1; // < 0 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool operator==(const TreeNode&) const = default;
};

struct Tree {
    std::vector<TreeNode> nodes; // node 0 is the root

    bool operator==(const Tree&) const = default;
};

struct Forest {
    std::vector<Tree> trees;
    int n_features = 0;
    std::vector<double> raw_importance; // mean per-tree impurity decrease, unnormalized

    bool operator==(const Forest&) const = default;
};

/// Non-negative per-feature weights summing to 1, plus the ids (or column
/// positions when no ids are supplied) in descending-weight order.
struct FeatureWeights {
    std::vector<double> weights;
    std::vector<int> ordering;

    bool operator==(const FeatureWeights&) const = default;
};

/// Cluster every column subset with >= min_bits features and record each
/// silhouette score. Masks run in ascending numeric order; each run's k-means
/// seed is derived from the mask so results do not depend on enumeration
/// order. Runs whose clustering is infeasible are flagged with score -1.
inline std::vector<SubsetRun> enumerate_subsets(const FeatureMatrix& m, const KMeansConfig& base,
                                                int min_bits = 2) {
    if (m.cols > 16)
        throw DataError("enumerate_subsets: " + std::to_string(m.cols) +
                        " features would generate too many subsets (max 16)");
    if (m.cols < 1) throw DataError("enumerate_subsets: empty matrix");
    if (min_bits < 1) throw ConfigError("enumerate_subsets: min_bits must be >= 1");

    const auto all = static_cast<std::uint32_t>((std::uint64_t{1} << m.cols) - 1);
    std::vector<SubsetRun> runs;
    for (std::uint32_t mask = 1; mask <= all; ++mask) {
        if (std::popcount(mask) < min_bits) continue;
        SubsetRun run;
        run.mask = mask;
        try {
            const FeatureMatrix sub = m.subset(mask);
            KMeansConfig cfg = base;
            cfg.seed = derive_seed(base.seed, "subset", mask);
            const ClusteringResult res = kmeans_fit(sub, cfg);
            run.score = silhouette_score(sub, res.assignments);
        } catch (const DataError&) {
            run.score = -1.0;
            run.failed = true;
        }
        runs.push_back(run);
    }
    return runs;
}

namespace detail {

struct TreeSample {
    std::vector<std::uint32_t> masks; // row features: bit j of the mask
    std::vector<double> y;
};

inline double bit_value(std::uint32_t mask, int feature) {
    return (mask >> feature) & 1u ? 1.0 : 0.0;
}

class TreeBuilder {
public:
    TreeBuilder(const TreeSample& sample, const ForestConfig& cfg, int n_features,
                std::vector<double>& importance, Rng& rng)
        : sample_(sample), cfg_(cfg), d_(n_features), importance_(importance), rng_(rng) {}

    Tree build(std::vector<std::size_t> indices) {
        n_root_ = indices.size();
        grow(std::move(indices), 0);
        return std::move(tree_);
    }

private:
    static void mean_var(const TreeSample& s, const std::vector<std::size_t>& idx, double& mean,
                         double& var) {
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t i : idx) {
            sum += s.y[i];
            sum2 += s.y[i] * s.y[i];
        }
        const double n = static_cast<double>(idx.size());
        mean = sum / n;
        var = std::max(0.0, sum2 / n - mean * mean);
    }

    std::vector<int> candidate_features() {
        int fps = cfg_.features_per_split ? *cfg_.features_per_split : (d_ + 2) / 3;
        fps = std::clamp(fps, 1, d_);
        if (fps == d_) {
            std::vector<int> all(static_cast<std::size_t>(d_));
            std::iota(all.begin(), all.end(), 0);
            return all;
        }
        auto picks = rng_.sample_indices(static_cast<std::size_t>(d_),
                                         static_cast<std::size_t>(fps));
        std::vector<int> out(picks.begin(), picks.end());
        std::sort(out.begin(), out.end()); // lowest-index tie-breaking needs ascending scan
        return out;
    }

    int grow(std::vector<std::size_t> indices, int depth) {
        const auto node_id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();

        double mean = 0.0, var = 0.0;
        mean_var(sample_, indices, mean, var);
        tree_.nodes[static_cast<std::size_t>(node_id)].value = mean;

        const auto n = indices.size();
        const bool depth_capped = cfg_.max_depth && depth >= *cfg_.max_depth;
        if (var <= 0.0 || depth_capped ||
            n < 2 * static_cast<std::size_t>(cfg_.min_samples_leaf))
            return node_id;

        // Best split: maximal variance reduction, ties to the lowest feature
        // index then the lowest threshold (ascending scan, strict improvement).
        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        for (int f : candidate_features()) {
            std::vector<double> vals;
            vals.reserve(n);
            for (std::size_t i : indices) vals.push_back(bit_value(sample_.masks[i], f));
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
            for (std::size_t t = 0; t + 1 < vals.size(); ++t) {
                const double thr = (vals[t] + vals[t + 1]) / 2.0;
                double ls = 0.0, ls2 = 0.0, rs = 0.0, rs2 = 0.0;
                std::size_t ln = 0, rn = 0;
                for (std::size_t i : indices) {
                    const double x = bit_value(sample_.masks[i], f);
                    const double y = sample_.y[i];
                    if (x <= thr) {
                        ls += y;
                        ls2 += y * y;
                        ++ln;
                    } else {
                        rs += y;
                        rs2 += y * y;
                        ++rn;
                    }
                }
                if (ln < static_cast<std::size_t>(cfg_.min_samples_leaf) ||
                    rn < static_cast<std::size_t>(cfg_.min_samples_leaf))
                    continue;
                const double lvar = std::max(0.0, ls2 / static_cast<double>(ln) -
                                                      (ls / static_cast<double>(ln)) *
                                                          (ls / static_cast<double>(ln)));
                const double rvar = std::max(0.0, rs2 / static_cast<double>(rn) -
                                                      (rs / static_cast<double>(rn)) *
                                                          (rs / static_cast<double>(rn)));
                const double gain = var - (static_cast<double>(ln) / static_cast<double>(n)) * lvar -
                                    (static_cast<double>(rn) / static_cast<double>(n)) * rvar;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = thr;
                }
            }
        }
        if (best_feature < 0) return node_id;

        importance_[static_cast<std::size_t>(best_feature)] +=
            (static_cast<double>(n) / static_cast<double>(n_root_)) * best_gain;

        std::vector<std::size_t> left, right;
        for (std::size_t i : indices) {
            if (bit_value(sample_.masks[i], best_feature) <= best_threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        indices.clear();
        indices.shrink_to_fit();

        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        TreeNode& node = tree_.nodes[static_cast<std::size_t>(node_id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return node_id;
    }

    const TreeSample& sample_;
    const ForestConfig& cfg_;
    int d_;
    std::vector<double>& importance_;
    Rng& rng_;
    Tree tree_;
    std::size_t n_root_ = 0;
};

} // namespace detail

/// Train n_trees regression trees on (mask bits -> silhouette score), each on
/// a bootstrap resample when enabled. Failed runs carry no silhouette
/// evidence and are excluded. A zero-variance target yields leaf-only trees.
inline Forest fit_forest(const std::vector<SubsetRun>& runs, const ForestConfig& cfg,
                         int n_features = 0) {
    if (cfg.n_trees < 1) throw ConfigError("fit_forest: n_trees must be >= 1");
    if (cfg.min_samples_leaf < 1) throw ConfigError("fit_forest: min_samples_leaf must be >= 1");

    detail::TreeSample sample;
    std::uint32_t seen = 0;
    for (const auto& r : runs) {
        if (r.failed) continue;
        sample.masks.push_back(r.mask);
        sample.y.push_back(r.score);
        seen |= r.mask;
    }
    if (sample.y.size() < 2) throw DataError("fit_forest: need at least 2 usable subset runs");

    Forest forest;
    forest.n_features = n_features > 0 ? n_features : std::bit_width(seen);
    forest.raw_importance.assign(static_cast<std::size_t>(forest.n_features), 0.0);

    const std::size_t n = sample.y.size();
    for (int t = 0; t < cfg.n_trees; ++t) {
        Rng rng(derive_seed(cfg.seed, "tree", static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> indices(n);
        if (cfg.bootstrap) {
            for (auto& i : indices)
                i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
        } else {
            std::iota(indices.begin(), indices.end(), 0);
        }
        detail::TreeBuilder builder(sample, cfg, forest.n_features, forest.raw_importance, rng);
        forest.trees.push_back(builder.build(std::move(indices)));
    }
    for (auto& v : forest.raw_importance) v /= static_cast<double>(cfg.n_trees);
    return forest;
}

inline double predict(const Tree& tree, std::uint32_t mask) {
    int node = 0;
    for (;;) {
        const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
        if (nd.feature < 0) return nd.value;
        node = detail::bit_value(mask, nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
}

inline double predict(const Forest& forest, std::uint32_t mask) {
    double sum = 0.0;
    for (const auto& t : forest.trees) sum += predict(t, mask);
    return sum / static_cast<double>(forest.trees.size());
}

/// Mean decrease in impurity, normalized to sum 1. With nothing to split on
/// (all targets equal) every feature weighs 1/d.
inline FeatureWeights importances(const Forest& forest, std::span<const int> col_ids = {}) {
    if (forest.trees.empty() || forest.n_features < 1)
        throw DataError("importances: forest is not trained");
    if (!col_ids.empty() && col_ids.size() != static_cast<std::size_t>(forest.n_features))
        throw DataError("importances: col_ids size mismatch");

    const auto d = static_cast<std::size_t>(forest.n_features);
    FeatureWeights fw;
    fw.weights = forest.raw_importance;
    const double total = std::accumulate(fw.weights.begin(), fw.weights.end(), 0.0);
    if (total <= 0.0)
        std::fill(fw.weights.begin(), fw.weights.end(), 1.0 / static_cast<double>(d));
    else
        for (auto& w : fw.weights) w /= total;

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fw.weights[a] > fw.weights[b]; });
    for (std::size_t pos : order)
        fw.ordering.push_back(col_ids.empty() ? static_cast<int>(pos) : col_ids[pos]);
    return fw;
}

} // namespace uvi
