#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uvi/errors.hpp"
#include "uvi/kmeans.hpp"

namespace uvi {

/// Two-part vitality index: cluster profile letter + rounded percent of the
/// mean normalized feature value, e.g. "C45".
struct VitalityIndex {
    char letter = 'A';
    int numeric = 0;

    bool operator==(const VitalityIndex&) const = default;
};

struct TrendModel {
    std::string district_id;
    double slope = 0.0; // numeric units per year
    double intercept = 0.0;
    int n_points = 0;
    std::vector<int> years_used; // sorted distinct

    bool operator==(const TrendModel&) const = default;
};

struct Prediction {
    int numeric = 0;
    bool clamped = false;

    bool operator==(const Prediction&) const = default;
};

namespace detail {

inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

} // namespace detail

/// round(100 * mean(row)), half-up. Raising any feature never lowers it.
inline int numeric_part(std::span<const double> row) {
    if (row.empty()) throw DataError("numeric_part: empty row");
    double sum = 0.0;
    for (double v : row) {
        if (v < 0.0 || v > 1.0)
            throw DataError("numeric_part: value " + std::to_string(v) + " outside [0,1]");
        sum += v;
    }
    return detail::round_half_up(100.0 * sum / static_cast<double>(row.size()));
}

/// Letters by descending mean member numeric: 'A' marks the most vital
/// cluster. Equal means resolve to the lower original cluster index.
inline std::vector<char> assign_letters(const ClusteringResult& res,
                                        const std::vector<int>& numerics) {
    if (numerics.size() != res.assignments.size())
        throw DataError("assign_letters: numerics length mismatch");
    const std::size_t k = res.centroids.size();
    if (k == 0 || k > 26) throw DataError("assign_letters: cluster count must be 1..26");

    std::vector<double> sums(k, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < numerics.size(); ++i) {
        const auto c = static_cast<std::size_t>(res.assignments[i]);
        sums[c] += numerics[i];
        ++counts[c];
    }
    std::vector<double> means(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) throw DataError("assign_letters: empty cluster " + std::to_string(c));
        means[c] = sums[c] / static_cast<double>(counts[c]);
    }

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return means[a] > means[b]; });

    std::vector<char> letters(k, 'A');
    for (std::size_t rank = 0; rank < k; ++rank)
        letters[order[rank]] = static_cast<char>('A' + rank);
    return letters;
}

inline std::string format_vi(const VitalityIndex& v) {
    if (v.numeric < 0 || v.numeric > 100)
        throw DataError("format_vi: numeric part outside 0..100");
    return std::string(1, v.letter) + std::to_string(v.numeric);
}

/// Ordinary least squares over the pooled (year, numeric) points of one
/// district, all dissemination areas and years together.
inline TrendModel fit_trend(std::span<const std::pair<int, double>> points,
                            std::string district_id = {}) {
    TrendModel t;
    t.district_id = std::move(district_id);
    t.n_points = static_cast<int>(points.size());
    for (const auto& [year, value] : points) {
        (void)value;
        if (!std::binary_search(t.years_used.begin(), t.years_used.end(), year))
            t.years_used.insert(
                std::upper_bound(t.years_used.begin(), t.years_used.end(), year), year);
    }
    if (points.size() < 2 || t.years_used.size() < 2)
        throw DataError("fit_trend: need at least 2 points spanning 2 distinct years");

    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& [x, y] : points) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= static_cast<double>(points.size());
    mean_y /= static_cast<double>(points.size());

    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        const double dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (y - mean_y);
    }
    t.slope = sxy / sxx;
    t.intercept = mean_y - t.slope * mean_x;
    return t;
}

/// Evaluate the fitted line, round half-up, clamp into [0, 100].
inline Prediction predict(const TrendModel& t, int target_year) {
    const double value = t.slope * target_year + t.intercept;
    const int rounded = detail::round_half_up(value);
    Prediction p;
    p.numeric = std::clamp(rounded, 0, 100);
    p.clamped = rounded != p.numeric;
    return p;
}

} // namespace uvi
