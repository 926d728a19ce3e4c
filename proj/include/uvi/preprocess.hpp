#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uvi/data_model.hpp"
#include "uvi/errors.hpp"

namespace uvi {

/// Normalized n×d matrix; rows are (dissemination area, year) keys, columns
/// are feature ids, every value in [0, 1] with 1 = better vitality.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values; // row-major
    std::vector<std::pair<std::string, int>> row_ids;
    std::vector<int> col_ids;

    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }

    /// Column subset selected by bit j <-> column j; row ids preserved.
    FeatureMatrix subset(std::uint32_t mask) const {
        FeatureMatrix out;
        out.rows = rows;
        out.row_ids = row_ids;
        for (std::size_t j = 0; j < cols; ++j) {
            if (mask & (std::uint32_t{1} << j)) out.col_ids.push_back(col_ids[j]);
        }
        out.cols = out.col_ids.size();
        out.values.reserve(rows * out.cols);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
                if (mask & (std::uint32_t{1} << j)) out.values.push_back(at(i, j));
            }
        }
        return out;
    }

    bool operator==(const FeatureMatrix&) const = default;
};

namespace detail {

inline double dist2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

} // namespace detail

/// Fill missing cells; present values are never changed.
inline std::vector<double> impute(const std::vector<std::optional<double>>& column,
                                  const ImputeStrategy& strategy) {
    std::vector<double> out(column.size());
    double fill = strategy.value;
    if (strategy.kind == ImputeKind::mean) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& v : column) {
            if (v) {
                sum += *v;
                ++n;
            }
        }
        if (n == 0) throw DataError("impute: mean strategy on an all-missing column");
        fill = sum / static_cast<double>(n);
    }
    for (std::size_t i = 0; i < column.size(); ++i) out[i] = column[i] ? *column[i] : fill;
    return out;
}

/// ln(1 + x), order preserving on non-negative input.
inline std::vector<double> log_scale(const std::vector<double>& column) {
    std::vector<double> out(column.size());
    for (std::size_t i = 0; i < column.size(); ++i) {
        if (column[i] < 0.0)
            throw DataError("log_scale: negative value " + std::to_string(column[i]));
        out[i] = std::log1p(column[i]);
    }
    return out;
}

/// (x - min) / (max - min); a constant column maps to 0.5 everywhere.
inline std::vector<double> minmax(const std::vector<double>& column) {
    if (column.empty()) throw DataError("minmax: empty column");
    const auto [lo_it, hi_it] = std::minmax_element(column.begin(), column.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(column.size());
    if (lo == hi) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    const double span = hi - lo;
    for (std::size_t i = 0; i < column.size(); ++i) out[i] = (column[i] - lo) / span;
    return out;
}

/// 1 - x on a normalized column, so that 1 always means better.
inline std::vector<double> invert(const std::vector<double>& column) {
    std::vector<double> out(column.size());
    for (std::size_t i = 0; i < column.size(); ++i) {
        if (column[i] < 0.0 || column[i] > 1.0)
            throw DataError("invert: value " + std::to_string(column[i]) + " outside [0,1]");
        out[i] = 1.0 - column[i];
    }
    return out;
}

/// Whether each year's columns are normalized independently (the default) or
/// all years share one min/max per feature.
enum class NormalizationScope { per_year, pooled };

/// Full per-feature pipeline of the feature table: impute, optional log
/// scaling, minmax, optional inversion. Columns are assembled in ascending
/// feature-id order; rows are the requested year's records in dataset order.
inline FeatureMatrix build_feature_matrix(const Dataset& ds, int year,
                                          std::vector<int> feature_ids,
                                          NormalizationScope scope = NormalizationScope::per_year) {
    if (feature_ids.empty()) throw DataError("build_feature_matrix: no features selected");
    std::sort(feature_ids.begin(), feature_ids.end());
    feature_ids.erase(std::unique(feature_ids.begin(), feature_ids.end()), feature_ids.end());

    if (!std::binary_search(ds.years.begin(), ds.years.end(), year))
        throw DataError("build_feature_matrix: year " + std::to_string(year) +
                        " not present in dataset");

    std::vector<std::size_t> spec_idx; // position of each selected feature in ds.specs
    for (int id : feature_ids) {
        const auto it = std::find_if(ds.specs.begin(), ds.specs.end(),
                                     [id](const FeatureSpec& s) { return s.id == id; });
        if (it == ds.specs.end())
            throw DataError("build_feature_matrix: unknown feature id " + std::to_string(id));
        spec_idx.push_back(static_cast<std::size_t>(it - ds.specs.begin()));
    }

    // Scope rows: the pipeline runs over these, output keeps the year's rows.
    std::vector<std::size_t> scope_rows, year_rows;
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const bool in_year = ds.records[i].year == year;
        if (in_year) year_rows.push_back(i);
        if (scope == NormalizationScope::pooled || in_year) scope_rows.push_back(i);
    }

    FeatureMatrix m;
    m.rows = year_rows.size();
    m.cols = feature_ids.size();
    m.col_ids = feature_ids;
    m.values.assign(m.rows * m.cols, 0.0);
    for (std::size_t r : year_rows)
        m.row_ids.emplace_back(ds.records[r].da_id, ds.records[r].year);

    for (std::size_t j = 0; j < spec_idx.size(); ++j) {
        const FeatureSpec& spec = ds.specs[spec_idx[j]];
        std::vector<std::optional<double>> raw;
        raw.reserve(scope_rows.size());
        for (std::size_t r : scope_rows) raw.push_back(ds.records[r].raw[spec_idx[j]]);

        std::vector<double> col = impute(raw, spec.impute);
        if (spec.log_scale) col = log_scale(col);
        col = minmax(col);
        if (spec.invert) col = invert(col);

        // scope_rows -> year rows
        std::size_t out_i = 0;
        for (std::size_t s = 0; s < scope_rows.size(); ++s) {
            if (ds.records[scope_rows[s]].year == year) m.at(out_i++, j) = col[s];
        }
    }
    return m;
}

} // namespace uvi
