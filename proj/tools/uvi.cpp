#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "uvi/pipeline.hpp"

namespace {

void add_common(CLI::App* sub, uvi::RunConfig& cfg, std::optional<int>& year) {
    sub->add_option("--data", cfg.data_path, "dataset CSV (da_id,year,district_id,f1..fd)")
        ->required();
    sub->add_option("--features", cfg.features_path,
                    "feature spec JSON (defaults to the built-in eight features)");
    sub->add_option("--year", year, "year to analyze (defaults to the latest)");
    sub->add_option("--seed", cfg.seed, "global seed; every stage derives from it");
    sub->add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
    std::map<std::string, uvi::NormalizationScope> scopes{
        {"per-year", uvi::NormalizationScope::per_year},
        {"pooled", uvi::NormalizationScope::pooled}};
    sub->add_option("--scope", cfg.scope, "normalization scope")
        ->transform(CLI::CheckedTransformer(scopes, CLI::ignore_case));
}

void add_kmeans(CLI::App* sub, uvi::RunConfig& cfg) {
    sub->add_option("--n-init", cfg.kmeans.n_init, "k-means restarts")->capture_default_str();
    sub->add_option("--max-iter", cfg.kmeans.max_iter, "k-means iteration cap")
        ->capture_default_str();
    sub->add_option("--tol", cfg.kmeans.tol, "k-means centroid-shift tolerance")
        ->capture_default_str();
}

void add_ga(CLI::App* sub, uvi::RunConfig& cfg) {
    sub->add_option("--generations", cfg.ga.generations)->capture_default_str();
    sub->add_option("--population", cfg.ga.population)->capture_default_str();
    sub->add_option("--mutation-rate", cfg.ga.mutation_rate)->capture_default_str();
    sub->add_option("--breed-fraction", cfg.ga.breed_fraction)->capture_default_str();
    sub->add_flag("--reinit-whole", cfg.ga.reinit_whole_chromosome,
                  "mutation reinitializes the whole chromosome instead of single genes");
    sub->add_option("--k-min", cfg.ga.ranges.k.lo)->capture_default_str();
    sub->add_option("--k-max", cfg.ga.ranges.k.hi)->capture_default_str();
    sub->add_option("--n-init-min", cfg.ga.ranges.n_init.lo)->capture_default_str();
    sub->add_option("--n-init-max", cfg.ga.ranges.n_init.hi)->capture_default_str();
    sub->add_option("--max-iter-min", cfg.ga.ranges.max_iter.lo)->capture_default_str();
    sub->add_option("--max-iter-max", cfg.ga.ranges.max_iter.hi)->capture_default_str();
}

void add_forest(CLI::App* sub, uvi::RunConfig& cfg, std::optional<int>& depth,
                std::optional<int>& fps) {
    sub->add_option("--trees", cfg.forest.n_trees, "forest size")->capture_default_str();
    sub->add_option("--max-depth", depth, "tree depth cap (unlimited when omitted)");
    sub->add_option("--min-samples-leaf", cfg.forest.min_samples_leaf)->capture_default_str();
    sub->add_flag("!--no-bootstrap", cfg.forest.bootstrap, "disable bootstrap resampling");
    sub->add_option("--features-per-split", fps,
                    "split candidates per node (default ceil(d/3); >= d means all)");
    sub->add_option("--min-bits", cfg.subset_min_bits, "minimum subset size to enumerate")
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"district vitality index engine: normalize, cluster, weigh, predict"};
    app.require_subcommand(1);

    uvi::RunConfig cfg;
    std::optional<int> year;
    std::optional<int> depth;
    std::optional<int> fps;
    std::vector<int> mask;
    std::vector<int> targets;
    int fixed_k = 0;
    std::string mode = "optimize";

    auto* validate = app.add_subcommand("validate", "check the dataset against the schema");
    add_common(validate, cfg, year);

    auto* cluster = app.add_subcommand("cluster", "fixed-cluster mode for one year");
    add_common(cluster, cfg, year);
    add_kmeans(cluster, cfg);
    cluster->add_option("--k", fixed_k, "number of clusters")->required();
    cluster->add_option("--mask", mask, "feature ids to cluster on (default: all)");

    auto* optimize = app.add_subcommand("optimize", "GA search over clustering configurations");
    add_common(optimize, cfg, year);
    add_ga(optimize, cfg);
    optimize->add_option("--k", fixed_k, "lock the cluster-count gene");
    optimize->add_option("--mask", mask, "lock the feature-mask gene (feature ids)");

    auto* weigh = app.add_subcommand("weigh", "feature weights from exhaustive subset runs");
    add_common(weigh, cfg, year);
    add_kmeans(weigh, cfg);
    add_forest(weigh, cfg, depth, fps);
    weigh->add_option("--k", fixed_k, "cluster count for the subset runs "
                                      "(default: best k from a cached ga.json in --out)");

    auto* predict = app.add_subcommand("predict", "per-district OLS trends and extrapolation");
    add_common(predict, cfg, year);
    predict->add_option("--targets", targets, "target years (default: last year +5 and +10)");

    auto* run_all = app.add_subcommand("run-all", "the whole pipeline plus report and figures");
    add_common(run_all, cfg, year);
    add_kmeans(run_all, cfg);
    add_ga(run_all, cfg);
    add_forest(run_all, cfg, depth, fps);
    run_all->add_option("--mode", mode, "optimize | fixed")->capture_default_str();
    run_all->add_option("--k", fixed_k, "cluster count (fixed mode) or locked k gene");
    run_all->add_option("--mask", mask, "feature ids (fixed mode) or locked mask gene");
    run_all->add_option("--targets", targets, "target years");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    cfg.year = year;
    cfg.forest.max_depth = depth;
    cfg.forest.features_per_split = fps;
    cfg.mask_ids = mask;
    cfg.target_years = targets;
    if (fixed_k > 0) cfg.fixed_k = fixed_k;

    try {
        if (validate->parsed()) return uvi::cmd_validate(cfg);
        if (cluster->parsed()) {
            cfg.mode = uvi::RunConfig::Mode::fixed;
            return uvi::cmd_cluster(cfg);
        }
        if (optimize->parsed()) return uvi::cmd_optimize(cfg);
        if (weigh->parsed()) return uvi::cmd_weigh(cfg);
        if (predict->parsed()) return uvi::cmd_predict(cfg);
        if (run_all->parsed()) {
            if (mode == "fixed")
                cfg.mode = uvi::RunConfig::Mode::fixed;
            else if (mode == "optimize")
                cfg.mode = uvi::RunConfig::Mode::optimize;
            else
                throw uvi::ConfigError("--mode must be optimize or fixed, got " + mode);
            return uvi::cmd_run_all(cfg);
        }
    } catch (const uvi::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const uvi::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
