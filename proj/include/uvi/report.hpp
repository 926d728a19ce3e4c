#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "uvi/data_model.hpp"
#include "uvi/errors.hpp"
#include "uvi/feature_weights.hpp"
#include "uvi/ga.hpp"
#include "uvi/kmeans.hpp"
#include "uvi/silhouette.hpp"
#include "uvi/vitality.hpp"

namespace nlohmann {
template <typename T>
struct adl_serializer<std::optional<T>> {
    static void to_json(json& j, const std::optional<T>& v) {
        if (v)
            j = *v;
        else
            j = nullptr;
    }
    static void from_json(const json& j, std::optional<T>& v) {
        if (j.is_null())
            v.reset();
        else
            v = j.get<T>();
    }
};
} // namespace nlohmann

namespace uvi {

// --- run report ------------------------------------------------------------

struct DatasetSummary {
    int n_records = 0;
    int n_areas = 0;
    int n_districts = 0;
    int n_features = 0;
    std::vector<int> years;

    bool operator==(const DatasetSummary&) const = default;
};

struct VitalityRow {
    std::string da_id;
    int year = 0;
    std::string district_id;
    std::vector<double> values; // normalized features, ascending id order
    double mean_value = 0.0;    // unrounded mean of values
    int numeric = 0;            // rounded VI numeric part
    int cluster = -1;           // set for the clustered year only
    std::string letter;         // set for the clustered year only

    bool operator==(const VitalityRow&) const = default;
};

struct DistrictPrediction {
    int year = 0;
    double line_value = 0.0; // unrounded fitted/extrapolated value
    int numeric = 0;
    bool clamped = false;

    bool operator==(const DistrictPrediction&) const = default;
};

struct DistrictTrend {
    TrendModel model;
    std::vector<std::pair<int, double>> points; // pooled (year, unrounded numeric)
    std::vector<DistrictPrediction> fitted;     // at observed years
    std::vector<DistrictPrediction> predicted;  // at target years
    std::string error; // non-empty when the district could not be fitted

    bool operator==(const DistrictTrend&) const = default;
};

/// Everything one pipeline run produced; serializes to report.json and feeds
/// every figure emitter.
struct RunReport {
    DatasetSummary dataset;
    std::vector<FeatureSpec> specs;
    std::string normalization_scope; // "per_year" | "pooled"
    std::string mode;                // "optimize" | "fixed"
    int clustered_year = 0;
    KMeansConfig clustering_config;
    std::vector<int> selected_features; // feature ids used for clustering
    ClusteringResult clustering;
    std::vector<std::string> letters; // cluster index -> letter
    std::vector<VitalityRow> vitality;
    SilhouetteReport silhouette;
    std::optional<GAHistory> ga;
    std::vector<SubsetRun> subset_runs;
    std::optional<FeatureWeights> weights;
    std::vector<DistrictTrend> trends;
    std::vector<int> target_years;
    std::uint64_t seed = 0;

    bool operator==(const RunReport&) const = default;
};

// --- json ------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const ImputeStrategy& s) {
    if (s.kind == ImputeKind::mean)
        j = {{"kind", "mean"}};
    else
        j = {{"kind", "constant"}, {"value", s.value}};
}

inline void from_json(const nlohmann::json& j, ImputeStrategy& s) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "mean") {
        s = ImputeStrategy::mean_of_column();
    } else if (kind == "constant") {
        s = ImputeStrategy::constant(j.at("value").get<double>());
    } else {
        throw ConfigError("impute kind must be mean or constant, got " + kind);
    }
}

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FeatureSpec, id, name, log_scale, invert, impute)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(KMeansConfig, k, n_init, max_iter, tol, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ClusteringResult, assignments, centroids, inertia, n_iter,
                                   restarts_run, best_restart, converged, restart_traces)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SilhouetteReport, per_point, per_cluster_sorted, mean_score)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Chromosome, n_init, max_iter, k, feature_mask)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GAGeneration, max_fitness, mean_fitness)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(GAHistory, generations, best, best_fitness)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SubsetRun, mask, score, failed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FeatureWeights, weights, ordering)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TrendModel, district_id, slope, intercept, n_points, years_used)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DatasetSummary, n_records, n_areas, n_districts, n_features,
                                   years)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(VitalityRow, da_id, year, district_id, values, mean_value,
                                   numeric, cluster, letter)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DistrictPrediction, year, line_value, numeric, clamped)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DistrictTrend, model, points, fitted, predicted, error)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RunReport, dataset, specs, normalization_scope, mode,
                                   clustered_year, clustering_config, selected_features,
                                   clustering, letters, vitality, silhouette, ga, subset_runs,
                                   weights, trends, target_years, seed)

// --- svg helpers -----------------------------------------------------------

namespace svg {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kMargin = 60.0;

inline std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string val(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::string escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string header(const std::string& title) {
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
                      "viewBox=\"0 0 800 600\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
    out += "<text x=\"400\" y=\"28\" font-size=\"16\" text-anchor=\"middle\" fill=\"#222\">" +
           escape(title) + "</text>\n";
    return out;
}

inline std::string footer() { return "</svg>\n"; }

inline std::string line(double x1, double y1, double x2, double y2, const std::string& stroke,
                        const std::string& extra = {}) {
    return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
           num(y2) + "\" stroke=\"" + stroke + "\"" + (extra.empty() ? "" : " " + extra) + "/>\n";
}

inline std::string circle(double cx, double cy, double r, const std::string& fill,
                          const std::string& extra = {}) {
    return "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" +
           fill + "\"" + (extra.empty() ? "" : " " + extra) + "/>\n";
}

inline std::string rect(double x, double y, double w, double h, const std::string& fill,
                        const std::string& extra = {}) {
    return "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" +
           num(h) + "\" fill=\"" + fill + "\"" + (extra.empty() ? "" : " " + extra) + "/>\n";
}

inline std::string text(double x, double y, const std::string& content,
                        const std::string& extra = {}) {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"12\" fill=\"#222\"" +
           (extra.empty() ? "" : " " + extra) + ">" + escape(content) + "</text>\n";
}

// y grows downward in SVG; map a data value into the plot band.
inline double map_y(double v, double lo, double hi) {
    return kHeight - kMargin - (v - lo) / (hi - lo) * (kHeight - 2.0 * kMargin);
}

inline double map_x(double v, double lo, double hi) {
    return kMargin + (v - lo) / (hi - lo) * (kWidth - 2.0 * kMargin);
}

} // namespace svg

// --- figure emitters ---------------------------------------------------------

namespace detail {

inline void radar_frame(std::string& out, std::size_t d, std::span<const std::string> labels,
                        double cx, double cy, double radius) {
    for (double ring : {0.25, 0.5, 0.75, 1.0}) {
        out += "<circle cx=\"" + svg::num(cx) + "\" cy=\"" + svg::num(cy) + "\" r=\"" +
               svg::num(radius * ring) + "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
    }
    for (std::size_t i = 0; i < d; ++i) {
        const double ang = -std::numbers::pi / 2.0 +
                           2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(d);
        const double ex = cx + radius * std::cos(ang);
        const double ey = cy + radius * std::sin(ang);
        out += svg::line(cx, cy, ex, ey, "#999999");
        const double lx = cx + radius * 1.10 * std::cos(ang);
        const double ly = cy + radius * 1.10 * std::sin(ang);
        out += svg::text(lx, ly, labels[i], "text-anchor=\"middle\"");
    }
}

inline std::string radar_polygon(std::span<const double> row, double cx, double cy, double radius,
                                 const std::string& style) {
    std::string pts;
    const std::size_t d = row.size();
    for (std::size_t i = 0; i < d; ++i) {
        const double ang = -std::numbers::pi / 2.0 +
                           2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(d);
        if (i) pts += ' ';
        pts += svg::num(cx + radius * row[i] * std::cos(ang)) + ',' +
               svg::num(cy + radius * row[i] * std::sin(ang));
    }
    return "<polygon points=\"" + pts + "\" " + style + "/>\n";
}

inline void check_radar_input(std::span<const double> row, std::span<const std::string> labels) {
    if (row.size() < 3) throw DataError("radar: needs at least 3 axes");
    if (labels.size() != row.size()) throw DataError("radar: one label per axis required");
    for (double v : row)
        if (v < 0.0 || v > 1.0)
            throw DataError("radar: value " + std::to_string(v) + " outside [0,1]");
}

} // namespace detail

/// One closed polygon over d equally spaced axes, axis 0 at 12 o'clock,
/// gridline rings at 0.25/0.5/0.75/1.
inline std::string radar_svg(std::span<const double> row, std::span<const std::string> labels,
                             const std::string& title = "Feature radar") {
    detail::check_radar_input(row, labels);
    std::string out = svg::header(title);
    const double cx = 400.0, cy = 320.0, radius = 220.0;
    detail::radar_frame(out, row.size(), labels, cx, cy, radius);
    out += detail::radar_polygon(row, cx, cy, radius,
                                 "fill=\"steelblue\" fill-opacity=\"0.35\" stroke=\"steelblue\" "
                                 "stroke-width=\"2\"");
    out += svg::footer();
    return out;
}

/// Every member polygon of one cluster overlaid on a shared radar frame.
inline std::string stacked_radar_svg(std::span<const std::vector<double>> rows,
                                     std::span<const std::string> labels,
                                     const std::string& title = "Cluster radar") {
    if (rows.empty()) throw DataError("stacked radar: no rows");
    for (const auto& r : rows) {
        if (r.size() != rows.front().size())
            throw DataError("stacked radar: inconsistent dimensions");
        detail::check_radar_input(r, labels);
    }
    std::string out = svg::header(title);
    const double cx = 400.0, cy = 320.0, radius = 220.0;
    detail::radar_frame(out, rows.front().size(), labels, cx, cy, radius);
    for (const auto& r : rows)
        out += detail::radar_polygon(r, cx, cy, radius,
                                     "fill=\"steelblue\" fill-opacity=\"0.15\" "
                                     "stroke=\"steelblue\" stroke-opacity=\"0.6\"");
    out += svg::footer();
    return out;
}

/// Bar per cluster in letter order, bar height proportional to member count.
inline std::string cluster_histogram_svg(std::span<const std::size_t> sizes,
                                         std::span<const std::string> letters,
                                         const std::string& title = "Clusters distribution") {
    if (sizes.empty()) throw DataError("cluster histogram: no clusters");
    if (sizes.size() != letters.size())
        throw DataError("cluster histogram: one letter per cluster required");
    const double max_size = static_cast<double>(*std::max_element(sizes.begin(), sizes.end()));
    if (max_size <= 0.0) throw DataError("cluster histogram: all clusters empty");

    std::string out = svg::header(title);
    const double band = (svg::kWidth - 2.0 * svg::kMargin) / static_cast<double>(sizes.size());
    const double base = svg::kHeight - svg::kMargin;
    out += svg::line(svg::kMargin, base, svg::kWidth - svg::kMargin, base, "#222222");
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        const double h =
            (static_cast<double>(sizes[c]) / max_size) * (svg::kHeight - 2.0 * svg::kMargin);
        const double x = svg::kMargin + band * static_cast<double>(c) + band * 0.15;
        out += svg::rect(x, base - h, band * 0.7, h, "steelblue");
        out += svg::text(x + band * 0.35, base + 18.0, letters[c], "text-anchor=\"middle\"");
        out += svg::text(x + band * 0.35, base - h - 6.0, std::to_string(sizes[c]),
                         "text-anchor=\"middle\"");
    }
    out += svg::footer();
    return out;
}

/// Per-DA numerics in cluster order: red separators divide the clusters,
/// dashed lines mark each cluster's mean.
inline std::string vitality_strip_svg(std::span<const std::vector<int>> groups,
                                      std::span<const std::string> letters,
                                      const std::string& title = "Feature average per area") {
    if (groups.empty()) throw DataError("vitality strip: no clusters");
    if (groups.size() != letters.size())
        throw DataError("vitality strip: one letter per cluster required");
    std::size_t total = 0;
    for (const auto& g : groups) total += g.size();
    if (total == 0) throw DataError("vitality strip: no points");

    std::string out = svg::header(title);
    const double base = svg::kHeight - svg::kMargin;
    out += svg::line(svg::kMargin, base, svg::kWidth - svg::kMargin, base, "#222222");
    out += svg::line(svg::kMargin, svg::kMargin, svg::kMargin, base, "#222222");
    for (int tick : {0, 25, 50, 75, 100}) {
        const double y = svg::map_y(tick, 0.0, 100.0);
        out += svg::text(svg::kMargin - 8.0, y + 4.0, std::to_string(tick),
                         "text-anchor=\"end\"");
    }

    const double step = (svg::kWidth - 2.0 * svg::kMargin) / static_cast<double>(total);
    std::size_t pos = 0;
    for (std::size_t c = 0; c < groups.size(); ++c) {
        const std::size_t begin = pos;
        double sum = 0.0;
        for (int v : groups[c]) {
            const double x = svg::kMargin + step * (static_cast<double>(pos) + 0.5);
            out += svg::circle(x, svg::map_y(v, 0.0, 100.0), 3.0, "steelblue");
            sum += v;
            ++pos;
        }
        if (!groups[c].empty()) {
            const double mean = sum / static_cast<double>(groups[c].size());
            const double x0 = svg::kMargin + step * static_cast<double>(begin);
            const double x1 = svg::kMargin + step * static_cast<double>(pos);
            out += svg::line(x0, svg::map_y(mean, 0.0, 100.0), x1, svg::map_y(mean, 0.0, 100.0),
                             "#444444", "stroke-dasharray=\"4 3\"");
            out += svg::text((x0 + x1) / 2.0, base + 18.0, letters[c], "text-anchor=\"middle\"");
        }
        if (c + 1 < groups.size()) {
            const double x = svg::kMargin + step * static_cast<double>(pos);
            out += svg::line(x, svg::kMargin, x, base, "red");
        }
    }
    out += svg::footer();
    return out;
}

/// Horizontal bar per point, grouped by cluster, each cluster sorted by
/// descending s(i); red vertical line at the mean score.
inline std::string silhouette_svg(const SilhouetteReport& rep,
                                  std::span<const std::string> letters = {},
                                  const std::string& title = "Silhouette metrics") {
    std::size_t n = 0;
    for (const auto& g : rep.per_cluster_sorted) n += g.size();
    if (n == 0) throw DataError("silhouette plot: empty report");
    if (!letters.empty() && letters.size() != rep.per_cluster_sorted.size())
        throw DataError("silhouette plot: one letter per cluster required");

    std::string out = svg::header(title);
    const double x_zero = svg::map_x(0.0, -1.0, 1.0);
    out += svg::line(x_zero, svg::kMargin, x_zero, svg::kHeight - svg::kMargin, "#222222");
    for (double tick : {-1.0, -0.5, 0.5, 1.0}) {
        out += svg::text(svg::map_x(tick, -1.0, 1.0), svg::kHeight - svg::kMargin + 18.0,
                         svg::val(tick), "text-anchor=\"middle\"");
    }

    const double band = (svg::kHeight - 2.0 * svg::kMargin) / static_cast<double>(n);
    const double bar_h = std::max(1.0, band * 0.8);
    std::size_t row = 0;
    for (std::size_t c = 0; c < rep.per_cluster_sorted.size(); ++c) {
        const std::size_t begin = row;
        for (double s : rep.per_cluster_sorted[c]) {
            const double y = svg::kMargin + band * static_cast<double>(row);
            const double xs = svg::map_x(s, -1.0, 1.0);
            const double x0 = std::min(xs, x_zero);
            out += svg::rect(x0, y, std::max(0.1, std::abs(xs - x_zero)), bar_h, "steelblue");
            ++row;
        }
        if (row > begin) {
            const std::string label =
                letters.empty() ? std::to_string(c) : letters[c];
            out += svg::text(svg::kMargin - 30.0,
                             svg::kMargin + band * static_cast<double>(begin + row) / 2.0, label);
        }
    }
    out += svg::line(svg::map_x(rep.mean_score, -1.0, 1.0), svg::kMargin,
                     svg::map_x(rep.mean_score, -1.0, 1.0), svg::kHeight - svg::kMargin, "red",
                     "stroke-dasharray=\"5 4\"");
    out += svg::text(svg::map_x(rep.mean_score, -1.0, 1.0), svg::kMargin - 8.0,
                     "mean " + svg::val(rep.mean_score), "text-anchor=\"middle\"");
    out += svg::footer();
    return out;
}

/// Fitness evolution: red mean curve, green maximum curve (drawn on top).
inline std::string ga_history_svg(const GAHistory& h,
                                  const std::string& title = "Silhouette score by generation") {
    if (h.generations.empty()) throw DataError("ga history plot: no generations");
    double lo = h.generations.front().mean_fitness, hi = lo;
    for (const auto& g : h.generations) {
        lo = std::min({lo, g.mean_fitness, g.max_fitness});
        hi = std::max({hi, g.mean_fitness, g.max_fitness});
    }
    lo -= 0.05;
    hi += 0.05;

    const auto n = h.generations.size();
    const auto poly = [&](bool use_max, const std::string& color) {
        std::string pts;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = n == 1 ? svg::kWidth / 2.0
                                    : svg::map_x(static_cast<double>(i), 0.0,
                                                 static_cast<double>(n - 1));
            const double v =
                use_max ? h.generations[i].max_fitness : h.generations[i].mean_fitness;
            if (i) pts += ' ';
            pts += svg::num(x) + ',' + svg::num(svg::map_y(v, lo, hi));
        }
        return "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
    };

    std::string out = svg::header(title);
    const double base = svg::kHeight - svg::kMargin;
    out += svg::line(svg::kMargin, base, svg::kWidth - svg::kMargin, base, "#222222");
    out += svg::line(svg::kMargin, svg::kMargin, svg::kMargin, base, "#222222");
    out += svg::text(svg::kWidth - svg::kMargin, base + 18.0,
                     "generation " + std::to_string(n - 1), "text-anchor=\"end\"");
    out += svg::text(svg::kMargin, svg::kMargin - 8.0, "max " + svg::val(hi - 0.05));
    out += poly(false, "red");
    out += poly(true, "green");
    out += svg::footer();
    return out;
}

/// Bar per feature in id order with its weight; rank labels follow the
/// descending-weight ordering.
inline std::string weights_bar_svg(const FeatureWeights& w, std::span<const std::string> labels,
                                   const std::string& title = "Weights of features") {
    if (w.weights.empty()) throw DataError("weights plot: no weights");
    if (labels.size() != w.weights.size())
        throw DataError("weights plot: one label per feature required");
    const double max_w = *std::max_element(w.weights.begin(), w.weights.end());
    if (max_w <= 0.0) throw DataError("weights plot: weights are all zero");

    // rank by descending weight, stable on ties; matches FeatureWeights.ordering
    std::vector<std::size_t> rank(w.weights.size(), 0);
    std::vector<std::size_t> order(w.weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return w.weights[a] > w.weights[b];
    });
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;

    std::string out = svg::header(title);
    const double band = (svg::kWidth - 2.0 * svg::kMargin) / static_cast<double>(w.weights.size());
    const double base = svg::kHeight - svg::kMargin;
    out += svg::line(svg::kMargin, base, svg::kWidth - svg::kMargin, base, "#222222");
    for (std::size_t i = 0; i < w.weights.size(); ++i) {
        const double h = (w.weights[i] / max_w) * (svg::kHeight - 2.0 * svg::kMargin);
        const double x = svg::kMargin + band * static_cast<double>(i) + band * 0.15;
        out += svg::rect(x, base - h, band * 0.7, h, "steelblue");
        out += svg::text(x + band * 0.35, base - h - 20.0, svg::val(w.weights[i]),
                         "text-anchor=\"middle\"");
        out += svg::text(x + band * 0.35, base - h - 6.0, "#" + std::to_string(rank[i] + 1),
                         "text-anchor=\"middle\"");
        out += svg::text(x + band * 0.35, base + 18.0, labels[i], "text-anchor=\"middle\"");
    }
    out += svg::footer();
    return out;
}

/// Observed (year, numeric) scatter, the fitted line across the full span,
/// and marked predictions at the target years.
inline std::string regression_svg(std::span<const std::pair<int, double>> points,
                                  const TrendModel& t, std::span<const int> targets,
                                  const std::string& title = "Vitality trend") {
    if (points.empty()) throw DataError("regression plot: no points");
    int x_lo = points.front().first, x_hi = x_lo;
    for (const auto& [year, value] : points) {
        (void)value;
        x_lo = std::min(x_lo, year);
        x_hi = std::max(x_hi, year);
    }
    for (int y : targets) {
        x_lo = std::min(x_lo, y);
        x_hi = std::max(x_hi, y);
    }
    if (x_lo == x_hi) {
        --x_lo;
        ++x_hi;
    }

    std::string out = svg::header(title);
    const double base = svg::kHeight - svg::kMargin;
    out += svg::line(svg::kMargin, base, svg::kWidth - svg::kMargin, base, "#222222");
    out += svg::line(svg::kMargin, svg::kMargin, svg::kMargin, base, "#222222");
    for (int tick : {0, 25, 50, 75, 100}) {
        out += svg::text(svg::kMargin - 8.0, svg::map_y(tick, 0.0, 100.0) + 4.0,
                         std::to_string(tick), "text-anchor=\"end\"");
    }

    const auto clamp_y = [](double v) { return std::clamp(v, 0.0, 100.0); };
    const double xs = static_cast<double>(x_lo), xe = static_cast<double>(x_hi);
    out += svg::line(svg::map_x(xs, xs, xe), svg::map_y(clamp_y(t.slope * xs + t.intercept), 0, 100),
                     svg::map_x(xe, xs, xe), svg::map_y(clamp_y(t.slope * xe + t.intercept), 0, 100),
                     "#444444", "stroke-width=\"2\"");
    for (const auto& [year, value] : points) {
        out += svg::circle(svg::map_x(year, xs, xe), svg::map_y(clamp_y(value), 0.0, 100.0), 4.0,
                           "steelblue");
        out += svg::text(svg::map_x(year, xs, xe), base + 18.0, std::to_string(year),
                         "text-anchor=\"middle\"");
    }
    for (int target : targets) {
        const Prediction p = predict(t, target);
        const double x = svg::map_x(target, xs, xe);
        const double y = svg::map_y(p.numeric, 0.0, 100.0);
        out += svg::rect(x - 5.0, y - 5.0, 10.0, 10.0, "orange", "class=\"prediction\"");
        out += svg::text(x, y - 10.0, std::to_string(target) + ": " + std::to_string(p.numeric),
                         "text-anchor=\"middle\"");
    }
    out += svg::footer();
    return out;
}

/// Scatter of one normalized feature over all dissemination areas.
inline std::string feature_scatter_svg(std::span<const double> values, const std::string& title) {
    if (values.empty()) throw DataError("feature scatter: no values");
    std::string out = svg::header(title);
    const double base = svg::kHeight - svg::kMargin;
    out += svg::line(svg::kMargin, base, svg::kWidth - svg::kMargin, base, "#222222");
    out += svg::line(svg::kMargin, svg::kMargin, svg::kMargin, base, "#222222");
    for (double tick : {0.0, 0.5, 1.0}) {
        out += svg::text(svg::kMargin - 8.0, svg::map_y(tick, 0.0, 1.0) + 4.0, svg::val(tick),
                         "text-anchor=\"end\"");
    }
    const double step = (svg::kWidth - 2.0 * svg::kMargin) / static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += svg::circle(svg::kMargin + step * (static_cast<double>(i) + 0.5),
                           svg::map_y(values[i], 0.0, 1.0), 3.0, "steelblue");
    }
    out += svg::footer();
    return out;
}

// --- report emission ---------------------------------------------------------

namespace detail {

inline std::string safe_name(std::string_view s) {
    std::string out;
    for (char c : s)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out;
}

} // namespace detail

/// Write report.json plus every figure with deterministic names into out_dir;
/// returns the sorted manifest (also written as manifest.json).
inline std::vector<std::string> emit_report(const RunReport& r, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("emit_report: cannot create " + out_dir + ": " + ec.message());

    std::vector<std::string> manifest;
    const auto emit = [&](const std::string& name, const std::string& content) {
        detail::write_text_file((fs::path(out_dir) / name).string(), content);
        manifest.push_back(name);
    };

    emit("report.json", nlohmann::json(r).dump(2) + "\n");

    std::vector<std::string> feature_names;
    for (const auto& s : r.specs)
        if (std::find(r.selected_features.begin(), r.selected_features.end(), s.id) !=
            r.selected_features.end())
            feature_names.push_back("f" + std::to_string(s.id));
    // full-feature labels for radars (rows carry every configured feature)
    std::vector<std::string> all_names;
    for (const auto& s : r.specs) all_names.push_back("f" + std::to_string(s.id));

    const std::string year_tag = std::to_string(r.clustered_year);
    const std::size_t k = r.letters.size();

    const bool radars = r.specs.size() >= 3; // radar plots need at least 3 axes
    std::vector<std::vector<const VitalityRow*>> by_cluster(k);
    for (const auto& row : r.vitality) {
        if (row.year != r.clustered_year) continue;
        if (radars)
            emit("radar_" + detail::safe_name(row.da_id) + "_" + year_tag + ".svg",
                 radar_svg(row.values, all_names,
                           "DA " + row.da_id + " " + year_tag + " (" + row.letter +
                               std::to_string(row.numeric) + ")"));
        if (row.cluster >= 0 && static_cast<std::size_t>(row.cluster) < k)
            by_cluster[static_cast<std::size_t>(row.cluster)].push_back(&row);
    }

    if (k > 0) {
        std::vector<std::size_t> sizes(k, 0);
        std::vector<std::vector<int>> groups(k);
        // letter order: A first
        std::vector<std::size_t> cluster_by_letter(k, 0);
        for (std::size_t c = 0; c < k; ++c) {
            const auto rank = static_cast<std::size_t>(r.letters[c][0] - 'A');
            cluster_by_letter[rank] = c;
        }
        std::vector<std::string> letter_order;
        for (std::size_t rank = 0; rank < k; ++rank) {
            const std::size_t c = cluster_by_letter[rank];
            sizes[rank] = by_cluster[c].size();
            for (const VitalityRow* row : by_cluster[c]) groups[rank].push_back(row->numeric);
            letter_order.push_back(r.letters[c]);

            std::vector<std::vector<double>> member_rows;
            for (const VitalityRow* row : by_cluster[c]) member_rows.push_back(row->values);
            if (radars && !member_rows.empty())
                emit("stacked_radar_" + r.letters[c] + "_" + year_tag + ".svg",
                     stacked_radar_svg(member_rows, all_names,
                                       "Cluster " + r.letters[c] + " (" +
                                           std::to_string(member_rows.size()) + " areas)"));
        }
        emit("cluster_histogram_" + year_tag + ".svg",
             cluster_histogram_svg(sizes, letter_order,
                                   "Clusters distribution " + year_tag));
        emit("vitality_strip_" + year_tag + ".svg",
             vitality_strip_svg(groups, letter_order, "Feature average per area " + year_tag));
        emit("silhouette_" + year_tag + ".svg",
             silhouette_svg(r.silhouette, letter_order, "Silhouette metrics " + year_tag));
    }

    // one scatter panel per configured feature, clustered year
    for (std::size_t j = 0; j < r.specs.size(); ++j) {
        std::vector<double> column;
        for (const auto& row : r.vitality)
            if (row.year == r.clustered_year && j < row.values.size())
                column.push_back(row.values[j]);
        if (!column.empty())
            emit("feature_f" + std::to_string(r.specs[j].id) + "_" + year_tag + ".svg",
                 feature_scatter_svg(column, "Feature " + std::to_string(r.specs[j].id) + ": " +
                                                 r.specs[j].name));
    }

    if (r.ga) emit("ga_history.svg", ga_history_svg(*r.ga));
    if (r.weights) {
        std::vector<std::string> labels;
        for (const auto& s : r.specs) labels.push_back("f" + std::to_string(s.id));
        emit("feature_weights_" + year_tag + ".svg",
             weights_bar_svg(*r.weights, labels, "Weights of features " + year_tag));
    }
    for (const auto& t : r.trends) {
        if (!t.error.empty() || t.points.empty()) continue;
        emit("regression_" + detail::safe_name(t.model.district_id) + ".svg",
             regression_svg(t.points, t.model, r.target_years,
                            "District " + t.model.district_id + " vitality trend"));
    }

    std::sort(manifest.begin(), manifest.end());
    detail::write_text_file((fs::path(out_dir) / "manifest.json").string(),
                            nlohmann::json{{"files", manifest}}.dump(2) + "\n");
    return manifest;
}

} // namespace uvi
