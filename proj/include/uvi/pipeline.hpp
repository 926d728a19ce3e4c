#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uvi/data_model.hpp"
#include "uvi/errors.hpp"
#include "uvi/feature_weights.hpp"
#include "uvi/ga.hpp"
#include "uvi/kmeans.hpp"
#include "uvi/preprocess.hpp"
#include "uvi/report.hpp"
#include "uvi/rng.hpp"
#include "uvi/silhouette.hpp"
#include "uvi/vitality.hpp"

namespace uvi {

/// Everything one CLI invocation needs. One global seed fans out to per-stage
/// seeds by fixed labels, so stages are reproducible in isolation.
struct RunConfig {
    enum class Mode { optimize, fixed };

    std::string data_path;
    std::string features_path;   // empty -> the canonical default specs
    std::optional<int> year;     // empty -> latest observed year
    Mode mode = Mode::optimize;
    std::optional<int> fixed_k;  // fixed mode: required; optimize mode: locks the k gene
    std::vector<int> mask_ids;   // fixed mode: features to cluster on (empty -> all);
                                 // optimize mode: locks the feature-mask gene
    GAConfig ga;
    KMeansConfig kmeans;         // base clustering parameters (k is resolved per mode)
    ForestConfig forest;
    int subset_min_bits = 2;
    NormalizationScope scope = NormalizationScope::per_year;
    std::vector<int> target_years; // empty -> {max_year + 5, max_year + 10}
    std::string out_dir = "out";
    std::uint64_t seed = 0;
};

namespace pipeline {

inline bool log_quiet() {
    const char* v = std::getenv("UVI_LOG");
    return v != nullptr && std::string_view(v) == "quiet";
}

inline void info(const std::string& msg) {
    if (!log_quiet()) std::cout << msg << "\n";
}

inline std::vector<FeatureSpec> load_specs(const RunConfig& cfg) {
    return cfg.features_path.empty() ? default_feature_specs()
                                     : load_feature_specs(cfg.features_path);
}

inline Dataset load_inputs(const RunConfig& cfg) {
    if (cfg.data_path.empty()) throw ConfigError("no dataset path given (--data)");
    return load_dataset(cfg.data_path, load_specs(cfg));
}

inline std::vector<int> all_feature_ids(const Dataset& ds) {
    std::vector<int> ids;
    for (const auto& s : ds.specs) ids.push_back(s.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

inline int resolve_year(const Dataset& ds, const RunConfig& cfg) {
    if (ds.years.empty()) throw DataError("dataset has no records");
    if (!cfg.year) return ds.years.back();
    if (!std::binary_search(ds.years.begin(), ds.years.end(), *cfg.year))
        throw DataError("year " + std::to_string(*cfg.year) + " not present in dataset");
    return *cfg.year;
}

inline std::vector<int> resolve_targets(const Dataset& ds, const RunConfig& cfg) {
    std::vector<int> targets = cfg.target_years;
    if (targets.empty() && !ds.years.empty())
        targets = {ds.years.back() + 5, ds.years.back() + 10};
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    if (!ds.years.empty() && !targets.empty() && targets.front() < ds.years.front())
        throw ConfigError("target year " + std::to_string(targets.front()) +
                          " precedes the first observed year");
    return targets;
}

/// Feature ids -> column-bit mask over a matrix's column order.
inline std::uint32_t ids_to_mask(const std::vector<int>& ids, const std::vector<int>& col_ids) {
    std::uint32_t mask = 0;
    for (int id : ids) {
        const auto it = std::find(col_ids.begin(), col_ids.end(), id);
        if (it == col_ids.end())
            throw DataError("unknown feature id " + std::to_string(id));
        mask |= std::uint32_t{1} << (it - col_ids.begin());
    }
    return mask;
}

inline std::vector<int> mask_to_ids(std::uint32_t mask, const std::vector<int>& col_ids) {
    std::vector<int> ids;
    for (std::size_t j = 0; j < col_ids.size(); ++j)
        if (mask & (std::uint32_t{1} << j)) ids.push_back(col_ids[j]);
    return ids;
}

inline std::vector<int> row_numerics(const FeatureMatrix& m) {
    std::vector<int> out;
    out.reserve(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) out.push_back(numeric_part(m.row(i)));
    return out;
}

inline double row_mean(std::span<const double> row) {
    double sum = 0.0;
    for (double v : row) sum += v;
    return sum / static_cast<double>(row.size());
}

// --- clustering stage --------------------------------------------------------

struct ClusterStage {
    int year = 0;
    std::vector<int> feature_ids; // used for clustering
    KMeansConfig config;          // fully resolved, including the derived seed
    FeatureMatrix full;           // all configured features for the year
    ClusteringResult result;
    SilhouetteReport silhouette;
    std::vector<int> numerics;    // per row of `full`
    std::vector<std::string> letters;
};

inline ClusterStage cluster_with(const Dataset& ds, const RunConfig& cfg, int year, int k,
                                 const std::vector<int>& feature_ids, int n_init, int max_iter) {
    ClusterStage st;
    st.year = year;
    st.feature_ids = feature_ids;
    st.full = build_feature_matrix(ds, year, all_feature_ids(ds), cfg.scope);
    st.numerics = row_numerics(st.full);

    st.config = cfg.kmeans;
    st.config.k = k;
    st.config.n_init = n_init;
    st.config.max_iter = max_iter;
    st.config.seed = derive_seed(cfg.seed, "cluster");

    const FeatureMatrix sub = st.full.subset(ids_to_mask(feature_ids, st.full.col_ids));
    st.result = kmeans_fit(sub, st.config);
    st.silhouette = silhouette_samples(sub, st.result.assignments);
    for (char c : assign_letters(st.result, st.numerics)) st.letters.emplace_back(1, c);
    return st;
}

/// Fixed-cluster mode: the expert-chosen k over an explicit feature set.
inline ClusterStage fixed_cluster_stage(const Dataset& ds, const RunConfig& cfg, int year) {
    if (!cfg.fixed_k) throw ConfigError("fixed-cluster mode needs --k");
    const std::vector<int> ids = cfg.mask_ids.empty() ? all_feature_ids(ds) : cfg.mask_ids;
    return cluster_with(ds, cfg, year, *cfg.fixed_k, ids, cfg.kmeans.n_init, cfg.kmeans.max_iter);
}

// --- ga stage ------------------------------------------------------------------

struct OptimizeStage {
    int year = 0;
    GAHistory history;
    std::vector<int> best_feature_ids;
};

inline OptimizeStage optimize_stage(const Dataset& ds, const RunConfig& cfg, int year) {
    OptimizeStage st;
    st.year = year;
    const FeatureMatrix full = build_feature_matrix(ds, year, all_feature_ids(ds), cfg.scope);

    GAConfig ga = cfg.ga;
    ga.seed = derive_seed(cfg.seed, "ga");
    if (cfg.fixed_k) ga.fixed_k = cfg.fixed_k;
    if (!cfg.mask_ids.empty()) ga.fixed_mask = ids_to_mask(cfg.mask_ids, full.col_ids);

    st.history = evolve(ga, full);
    st.best_feature_ids = mask_to_ids(st.history.best.feature_mask, full.col_ids);
    return st;
}

// --- weighting stage -------------------------------------------------------------

struct WeighStage {
    int year = 0;
    int k = 0;
    std::vector<SubsetRun> runs;
    Forest forest;
    FeatureWeights weights; // ordering carries feature ids
};

inline WeighStage weigh_stage(const Dataset& ds, const RunConfig& cfg, int year, int k) {
    WeighStage st;
    st.year = year;
    st.k = k;
    const FeatureMatrix full = build_feature_matrix(ds, year, all_feature_ids(ds), cfg.scope);

    KMeansConfig base = cfg.kmeans;
    base.k = k;
    base.seed = derive_seed(cfg.seed, "subsets");
    st.runs = enumerate_subsets(full, base, cfg.subset_min_bits);

    ForestConfig fc = cfg.forest;
    fc.seed = derive_seed(cfg.seed, "forest");
    st.forest = fit_forest(st.runs, fc, static_cast<int>(full.cols));
    st.weights = importances(st.forest, full.col_ids);
    return st;
}

// --- trend stage --------------------------------------------------------------

struct TrendStage {
    std::vector<int> targets;
    std::vector<DistrictTrend> trends; // sorted by district id
    bool any_error = false;
};

inline TrendStage trend_stage(const Dataset& ds, const RunConfig& cfg) {
    TrendStage st;
    st.targets = resolve_targets(ds, cfg);

    // Pool unrounded numeric parts per district over every (DA, year).
    std::map<std::string, std::vector<std::pair<int, double>>> points;
    const std::vector<int> ids = all_feature_ids(ds);
    for (int year : ds.years) {
        const FeatureMatrix m = build_feature_matrix(ds, year, ids, cfg.scope);
        std::map<std::pair<std::string, int>, std::size_t> row_of;
        for (std::size_t i = 0; i < m.rows; ++i) row_of[m.row_ids[i]] = i;
        for (const auto& rec : ds.records) {
            if (rec.year != year) continue;
            const auto it = row_of.find({rec.da_id, rec.year});
            if (it == row_of.end()) continue;
            points[rec.district_id].emplace_back(year, 100.0 * row_mean(m.row(it->second)));
        }
    }

    for (auto& [district, pts] : points) {
        std::sort(pts.begin(), pts.end());
        DistrictTrend t;
        t.points = pts;
        try {
            t.model = fit_trend(pts, district);
            for (int y : t.model.years_used) {
                const Prediction p = predict(t.model, y);
                t.fitted.push_back({y, t.model.slope * y + t.model.intercept, p.numeric, p.clamped});
            }
            for (int y : st.targets) {
                const Prediction p = predict(t.model, y);
                t.predicted.push_back(
                    {y, t.model.slope * y + t.model.intercept, p.numeric, p.clamped});
            }
        } catch (const DataError& e) {
            t.model.district_id = district;
            t.error = e.what();
            st.any_error = true;
        }
        st.trends.push_back(std::move(t));
    }
    return st;
}

inline std::string trends_to_csv(const TrendStage& st) {
    std::string out = "district_id,slope,intercept,n_points,year,kind,numeric,clamped\n";
    for (const auto& t : st.trends) {
        if (!t.error.empty()) {
            out += t.model.district_id + ",,,,,error,,\n";
            continue;
        }
        const std::string head = t.model.district_id + "," +
                                 detail::format_double(t.model.slope) + "," +
                                 detail::format_double(t.model.intercept) + "," +
                                 std::to_string(t.model.n_points) + ",";
        for (const auto& p : t.fitted)
            out += head + std::to_string(p.year) + ",fitted," + std::to_string(p.numeric) + "," +
                   (p.clamped ? "true" : "false") + "\n";
        for (const auto& p : t.predicted)
            out += head + std::to_string(p.year) + ",predicted," + std::to_string(p.numeric) +
                   "," + (p.clamped ? "true" : "false") + "\n";
    }
    return out;
}

// --- full run -------------------------------------------------------------------

inline std::vector<VitalityRow> vitality_rows(const Dataset& ds, const RunConfig& cfg,
                                              const ClusterStage& cluster) {
    std::vector<VitalityRow> rows;
    const std::vector<int> ids = all_feature_ids(ds);
    for (int year : ds.years) {
        const FeatureMatrix m = (year == cluster.year)
                                    ? cluster.full
                                    : build_feature_matrix(ds, year, ids, cfg.scope);
        std::map<std::pair<std::string, int>, const DARecord*> rec_of;
        for (const auto& rec : ds.records) rec_of[{rec.da_id, rec.year}] = &rec;
        for (std::size_t i = 0; i < m.rows; ++i) {
            VitalityRow row;
            row.da_id = m.row_ids[i].first;
            row.year = year;
            row.district_id = rec_of.at(m.row_ids[i])->district_id;
            row.values.assign(m.row(i).begin(), m.row(i).end());
            row.mean_value = row_mean(m.row(i));
            row.numeric = numeric_part(m.row(i));
            if (year == cluster.year) {
                row.cluster = cluster.result.assignments[i];
                row.letter = cluster.letters[static_cast<std::size_t>(row.cluster)];
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline DatasetSummary summarize(const Dataset& ds) {
    DatasetSummary s;
    s.n_records = static_cast<int>(ds.records.size());
    s.n_features = static_cast<int>(ds.specs.size());
    s.years = ds.years;
    std::set<std::string> das, districts;
    for (const auto& r : ds.records) {
        das.insert(r.da_id);
        districts.insert(r.district_id);
    }
    s.n_areas = static_cast<int>(das.size());
    s.n_districts = static_cast<int>(districts.size());
    return s;
}

/// Rethrow with the failing stage's name so a run-all abort names its stage.
template <typename F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const DataError& e) {
        throw DataError("stage " + std::string(name) + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError("stage " + std::string(name) + ": " + e.what());
    }
}

/// The whole pipeline: validate, preprocess, optimize or fixed-cluster,
/// weigh, vitality indices, trends. Pure function of (files, config).
inline RunReport run_all(const RunConfig& cfg) {
    const Dataset ds = stage("load", [&] { return load_inputs(cfg); });
    const auto issues = validate(ds);
    if (has_errors(issues)) {
        std::string msg = "stage validate:";
        for (const auto& i : issues)
            if (i.severity == ValidationIssue::Severity::error) msg += "\n  " + i.message;
        throw DataError(msg);
    }

    const int year = resolve_year(ds, cfg);

    RunReport rep;
    rep.dataset = summarize(ds);
    rep.specs = ds.specs;
    rep.normalization_scope = cfg.scope == NormalizationScope::per_year ? "per_year" : "pooled";
    rep.clustered_year = year;
    rep.seed = cfg.seed;

    ClusterStage cluster;
    if (cfg.mode == RunConfig::Mode::optimize) {
        rep.mode = "optimize";
        const OptimizeStage ga = stage("optimize", [&] { return optimize_stage(ds, cfg, year); });
        rep.ga = ga.history;
        cluster = stage("cluster", [&] {
            return cluster_with(ds, cfg, year, rep.ga->best.k, ga.best_feature_ids,
                                rep.ga->best.n_init, rep.ga->best.max_iter);
        });
    } else {
        rep.mode = "fixed";
        cluster = stage("cluster", [&] { return fixed_cluster_stage(ds, cfg, year); });
    }
    rep.clustering_config = cluster.config;
    rep.selected_features = cluster.feature_ids;
    rep.clustering = cluster.result;
    rep.letters = cluster.letters;
    rep.silhouette = cluster.silhouette;

    const WeighStage weigh =
        stage("weigh", [&] { return weigh_stage(ds, cfg, year, cluster.config.k); });
    rep.subset_runs = weigh.runs;
    rep.weights = weigh.weights;

    const TrendStage trends = stage("predict", [&] { return trend_stage(ds, cfg); });
    rep.target_years = trends.targets;
    rep.trends = trends.trends;

    rep.vitality = vitality_rows(ds, cfg, cluster);
    return rep;
}

// --- fragment writers ------------------------------------------------------------

inline void write_json(const std::string& out_dir, const std::string& name,
                       const nlohmann::json& j) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create " + out_dir + ": " + ec.message());
    detail::write_text_file((fs::path(out_dir) / name).string(), j.dump(2) + "\n");
}

inline nlohmann::json cluster_fragment(const ClusterStage& st) {
    nlohmann::json vi = nlohmann::json::array();
    for (std::size_t i = 0; i < st.full.rows; ++i) {
        const auto c = static_cast<std::size_t>(st.result.assignments[i]);
        vi.push_back({{"da_id", st.full.row_ids[i].first},
                      {"numeric", st.numerics[i]},
                      {"letter", st.letters[c]},
                      {"vi", st.letters[c] + std::to_string(st.numerics[i])}});
    }
    return {{"year", st.year},
            {"feature_ids", st.feature_ids},
            {"config", st.config},
            {"letters", st.letters},
            {"inertia", st.result.inertia},
            {"silhouette_score", st.silhouette.mean_score},
            {"assignments", st.result.assignments},
            {"vitality", vi}};
}

} // namespace pipeline

// --- CLI entry points -----------------------------------------------------------

/// validate: exit 0 iff the dataset loads cleanly and has no error issues.
inline int cmd_validate(const RunConfig& cfg) {
    Dataset ds;
    try {
        ds = pipeline::load_inputs(cfg);
    } catch (const DataError& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return 1;
    }
    const auto issues = validate(ds);
    for (const auto& i : issues)
        std::cerr << (i.severity == ValidationIssue::Severity::error ? "error: " : "advisory: ")
                  << i.message << "\n";
    if (has_errors(issues)) return 1;
    pipeline::info("ok: " + std::to_string(ds.records.size()) + " records, " +
                   std::to_string(ds.years.size()) + " years");
    return 0;
}

/// cluster: fixed-mode clustering for the selected year.
inline int cmd_cluster(const RunConfig& cfg) {
    const Dataset ds = pipeline::load_inputs(cfg);
    const int year = pipeline::resolve_year(ds, cfg);
    const auto st = pipeline::fixed_cluster_stage(ds, cfg, year);

    pipeline::write_json(cfg.out_dir, "clustering.json", pipeline::cluster_fragment(st));
    const std::string tag = std::to_string(year);

    // letter-ordered figure inputs
    const std::size_t k = st.letters.size();
    std::vector<std::size_t> cluster_by_letter(k);
    for (std::size_t c = 0; c < k; ++c)
        cluster_by_letter[static_cast<std::size_t>(st.letters[c][0] - 'A')] = c;
    std::vector<std::size_t> sizes(k, 0);
    std::vector<std::vector<int>> groups(k);
    std::vector<std::string> letter_order;
    for (std::size_t rank = 0; rank < k; ++rank) {
        const std::size_t c = cluster_by_letter[rank];
        letter_order.push_back(st.letters[c]);
        for (std::size_t i = 0; i < st.full.rows; ++i) {
            if (static_cast<std::size_t>(st.result.assignments[i]) == c) {
                ++sizes[rank];
                groups[rank].push_back(st.numerics[i]);
            }
        }
    }
    namespace fs = std::filesystem;
    detail::write_text_file((fs::path(cfg.out_dir) / ("cluster_histogram_" + tag + ".svg")).string(),
                            cluster_histogram_svg(sizes, letter_order));
    detail::write_text_file((fs::path(cfg.out_dir) / ("vitality_strip_" + tag + ".svg")).string(),
                            vitality_strip_svg(groups, letter_order));
    detail::write_text_file((fs::path(cfg.out_dir) / ("silhouette_" + tag + ".svg")).string(),
                            silhouette_svg(st.silhouette, letter_order));

    pipeline::info("clustered year " + tag + " into " + std::to_string(k) +
                   " clusters, silhouette " + svg::val(st.silhouette.mean_score));
    for (std::size_t rank = 0; rank < k; ++rank)
        pipeline::info("  cluster " + letter_order[rank] + ": " + std::to_string(sizes[rank]) +
                       " areas");
    return 0;
}

/// optimize: GA search for the best clustering configuration.
inline int cmd_optimize(const RunConfig& cfg) {
    const Dataset ds = pipeline::load_inputs(cfg);
    const int year = pipeline::resolve_year(ds, cfg);
    const auto st = pipeline::optimize_stage(ds, cfg, year);

    nlohmann::json frag = {{"year", st.year},
                           {"history", st.history},
                           {"best_feature_ids", st.best_feature_ids}};
    pipeline::write_json(cfg.out_dir, "ga.json", frag);
    namespace fs = std::filesystem;
    detail::write_text_file((fs::path(cfg.out_dir) / "ga_history.svg").string(),
                            ga_history_svg(st.history));

    std::string ids;
    for (std::size_t i = 0; i < st.best_feature_ids.size(); ++i)
        ids += (i ? "," : "") + std::to_string(st.best_feature_ids[i]);
    pipeline::info("best chromosome: n_init=" + std::to_string(st.history.best.n_init) +
                   " max_iter=" + std::to_string(st.history.best.max_iter) +
                   " k=" + std::to_string(st.history.best.k) + " features=" + ids);
    pipeline::info("best silhouette: " + svg::val(st.history.best_fitness));
    return 0;
}

/// weigh: exhaustive subset runs + random-forest feature weights.
inline int cmd_weigh(const RunConfig& cfg) {
    const Dataset ds = pipeline::load_inputs(cfg);
    const int year = pipeline::resolve_year(ds, cfg);

    int k = 0;
    if (cfg.fixed_k) {
        k = *cfg.fixed_k;
    } else {
        // reuse a cached GA stage when present
        const auto ga_path = std::filesystem::path(cfg.out_dir) / "ga.json";
        if (std::filesystem::exists(ga_path)) {
            try {
                const auto frag = nlohmann::json::parse(detail::read_text_file(ga_path.string()));
                k = frag.at("history").at("best").at("k").get<int>();
                pipeline::info("using k=" + std::to_string(k) + " from " + ga_path.string());
            } catch (const std::exception& e) {
                throw ConfigError("cannot reuse " + ga_path.string() + ": " + e.what());
            }
        }
    }
    if (k == 0)
        throw ConfigError("no cluster count: pass --k or run `optimize` into the same --out first");

    const auto st = pipeline::weigh_stage(ds, cfg, year, k);

    nlohmann::json table = nlohmann::json::array();
    std::map<int, std::string> names;
    std::map<int, double> weight_by_id;
    for (const auto& s : ds.specs) names[s.id] = s.name;
    {
        const auto ids = pipeline::all_feature_ids(ds);
        for (std::size_t j = 0; j < ids.size(); ++j) weight_by_id[ids[j]] = st.weights.weights[j];
    }
    for (std::size_t rank = 0; rank < st.weights.ordering.size(); ++rank) {
        const int id = st.weights.ordering[rank];
        table.push_back({{"rank", rank + 1},
                         {"id", id},
                         {"name", names.at(id)},
                         {"weight", weight_by_id.at(id)}});
    }
    nlohmann::json frag = {{"year", year},
                           {"k", k},
                           {"runs", st.runs},
                           {"weights", st.weights},
                           {"table", table}};
    pipeline::write_json(cfg.out_dir, "weights.json", frag);

    std::vector<std::string> labels;
    for (const auto& s : ds.specs) labels.push_back("f" + std::to_string(s.id));
    namespace fs = std::filesystem;
    detail::write_text_file(
        (fs::path(cfg.out_dir) / ("feature_weights_" + std::to_string(year) + ".svg")).string(),
        weights_bar_svg(st.weights, labels));

    pipeline::info(std::to_string(st.runs.size()) + " subset runs, k=" + std::to_string(k));
    for (std::size_t rank = 0; rank < st.weights.ordering.size(); ++rank) {
        const int id = st.weights.ordering[rank];
        pipeline::info(std::to_string(rank + 1) + ". feature " + std::to_string(id) + " (" +
                       svg::val(weight_by_id.at(id)) + ") " + names.at(id));
    }
    return 0;
}

/// predict: per-district OLS trends and extrapolations.
inline int cmd_predict(const RunConfig& cfg) {
    const Dataset ds = pipeline::load_inputs(cfg);
    const auto st = pipeline::trend_stage(ds, cfg);

    nlohmann::json frag = {{"targets", st.targets}, {"districts", st.trends}};
    pipeline::write_json(cfg.out_dir, "trends.json", frag);
    namespace fs = std::filesystem;
    detail::write_text_file((fs::path(cfg.out_dir) / "trends.csv").string(),
                            pipeline::trends_to_csv(st));
    for (const auto& t : st.trends) {
        if (!t.error.empty() || t.points.empty()) continue;
        detail::write_text_file(
            (fs::path(cfg.out_dir) /
             ("regression_" + detail::safe_name(t.model.district_id) + ".svg"))
                .string(),
            regression_svg(t.points, t.model, st.targets,
                           "District " + t.model.district_id + " vitality trend"));
    }

    for (const auto& t : st.trends) {
        if (!t.error.empty()) {
            std::cerr << t.model.district_id << ": " << t.error << "\n";
            continue;
        }
        std::string line = t.model.district_id + ": slope " + svg::val(t.model.slope) + "/yr;";
        for (const auto& p : t.predicted)
            line += " " + std::to_string(p.year) + " -> " + std::to_string(p.numeric) +
                    (p.clamped ? " (clamped)" : "");
        pipeline::info(line);
    }
    return st.any_error ? 1 : 0;
}

/// run-all: the full pipeline plus report.json, every figure and the manifest.
inline int cmd_run_all(const RunConfig& cfg) {
    const RunReport rep = pipeline::run_all(cfg);
    const auto manifest = emit_report(rep, cfg.out_dir);

    // cache the stage fragments alongside the report
    if (rep.ga) {
        nlohmann::json frag = {{"year", rep.clustered_year},
                               {"history", *rep.ga},
                               {"best_feature_ids", rep.selected_features}};
        pipeline::write_json(cfg.out_dir, "ga.json", frag);
    }
    pipeline::info("wrote " + std::to_string(manifest.size() + 1) + " files to " + cfg.out_dir);
    pipeline::info("mode " + rep.mode + ", year " + std::to_string(rep.clustered_year) + ", k=" +
                   std::to_string(rep.clustering_config.k) + ", silhouette " +
                   svg::val(rep.silhouette.mean_score));
    return 0;
}

} // namespace uvi
