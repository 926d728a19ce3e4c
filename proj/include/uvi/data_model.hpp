#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "uvi/errors.hpp"

namespace uvi {

enum class ImputeKind { mean, constant };

struct ImputeStrategy {
    ImputeKind kind = ImputeKind::mean;
    double value = 0.0; // used when kind == constant

    static ImputeStrategy mean_of_column() { return {ImputeKind::mean, 0.0}; }
    static ImputeStrategy constant(double v) { return {ImputeKind::constant, v}; }

    bool operator==(const ImputeStrategy&) const = default;
};

/// Per-feature schema and preprocessing flags (one row of the feature table).
struct FeatureSpec {
    int id = 0; // 1-based feature id
    std::string name;
    bool log_scale = false;
    bool invert = false;
    ImputeStrategy impute;

    bool operator==(const FeatureSpec&) const = default;
};

/// One dissemination area's raw feature values for one calendar year.
struct DARecord {
    std::string da_id;
    int year = 0;
    std::string district_id;
    std::vector<std::optional<double>> raw; // one slot per FeatureSpec, missing permitted

    bool operator==(const DARecord&) const = default;
};

struct Dataset {
    std::vector<DARecord> records;
    std::vector<FeatureSpec> specs;
    std::vector<int> years; // sorted distinct years present in records

    bool operator==(const Dataset&) const = default;
};

struct ValidationIssue {
    enum class Severity { error, advisory };
    Severity severity = Severity::error;
    std::string message;

    bool operator==(const ValidationIssue&) const = default;
};

/// The eight canonical features. The log/invert flags are engine defaults
/// (documented assumptions, configurable via the JSON feature config), not
/// facts of the source data.
inline std::vector<FeatureSpec> default_feature_specs() {
    const auto mean = ImputeStrategy::mean_of_column();
    return {
        {1, "Major renovation permit", true, false, mean},
        {2, "Proportion of dwelling requiring major repairs", false, true, mean},
        {3, "Proportion of dwelling requiring minor repairs", false, true, mean},
        {4, "Material deprivation index", false, true, mean},
        {5, "Social deprivation index", false, true, mean},
        {6, "Average value of single-family homes", true, false, mean},
        {7, "Median value per dwelling", true, false, mean},
        {8, "Housing vacancy rate", false, true, mean},
    };
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline bool parse_int(std::string_view s, int& out) {
    s = trim(s);
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && !s.empty();
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && !s.empty();
}

/// Shortest representation that round-trips exactly; '.' decimal separator
/// regardless of locale.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
    if (!out) throw ConfigError("write failed: " + path);
}

} // namespace detail

/// Parse the JSON feature configuration:
///   {"features": [{"id":1,"name":"...","log_scale":true,"invert":false,
///                  "impute":"mean" | {"constant": 0.0}}, ...]}
inline std::vector<FeatureSpec> load_feature_specs(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(detail::read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("feature config " + path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("features") || !doc["features"].is_array())
        throw ConfigError("feature config " + path + ": expected {\"features\": [...]}");

    std::vector<FeatureSpec> specs;
    std::set<int> seen;
    for (const auto& f : doc["features"]) {
        FeatureSpec s;
        try {
            s.id = f.at("id").get<int>();
            s.name = f.at("name").get<std::string>();
            s.log_scale = f.value("log_scale", false);
            s.invert = f.value("invert", false);
            if (f.contains("impute")) {
                const auto& im = f["impute"];
                if (im.is_string() && im.get<std::string>() == "mean") {
                    s.impute = ImputeStrategy::mean_of_column();
                } else if (im.is_object() && im.contains("constant")) {
                    s.impute = ImputeStrategy::constant(im["constant"].get<double>());
                } else {
                    throw ConfigError("feature config: impute must be \"mean\" or {\"constant\": x}");
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("feature config " + path + ": " + e.what());
        }
        if (s.id <= 0) throw ConfigError("feature config: ids must be positive");
        if (!seen.insert(s.id).second)
            throw ConfigError("feature config: duplicate feature id " + std::to_string(s.id));
        specs.push_back(std::move(s));
    }
    if (specs.empty()) throw ConfigError("feature config " + path + ": no features declared");
    return specs;
}

/// Load the dataset CSV: header `da_id,year,district_id,f<id>...`, one row per
/// (dissemination area, year), blank feature cells meaning missing. Total over
/// arbitrary byte input: anything malformed raises a typed error.
inline Dataset load_dataset(const std::string& csv_path, std::vector<FeatureSpec> specs) {
    if (specs.empty()) throw ConfigError("load_dataset: empty feature spec list");
    const std::string text = detail::read_text_file(csv_path);
    const std::size_t d = specs.size();

    Dataset ds;
    ds.specs = std::move(specs);

    std::set<std::pair<std::string, int>> keys;
    std::set<int> years;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool saw_header = false;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (eol == std::string::npos ? text.size() : eol) - pos);
        pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        if (detail::trim(line).empty()) continue;

        auto cells = detail::split_line(line);
        if (!saw_header) {
            if (cells.size() != 3 + d)
                throw DataError("header: expected " + std::to_string(3 + d) + " columns, got " +
                                std::to_string(cells.size()));
            if (detail::trim(cells[0]) != "da_id" || detail::trim(cells[1]) != "year" ||
                detail::trim(cells[2]) != "district_id")
                throw DataError("header: expected columns da_id,year,district_id,...");
            saw_header = true;
            continue;
        }

        if (cells.size() != 3 + d)
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(3 + d) + " columns, got " + std::to_string(cells.size()));

        DARecord rec;
        rec.da_id = std::string(detail::trim(cells[0]));
        if (!detail::parse_int(cells[1], rec.year))
            throw DataError("line " + std::to_string(line_no) + ": year is not an integer");
        rec.district_id = std::string(detail::trim(cells[2]));
        rec.raw.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            const auto cell = detail::trim(cells[3 + j]);
            if (cell.empty()) continue; // missing value
            double v = 0.0;
            if (!detail::parse_double(cell, v))
                throw DataError("line " + std::to_string(line_no) + ": feature " +
                                std::to_string(ds.specs[j].id) + " cell '" + std::string(cell) +
                                "' is not numeric");
            rec.raw[j] = v;
        }

        if (!keys.insert({rec.da_id, rec.year}).second)
            throw DataError("line " + std::to_string(line_no) + ": duplicate (da_id, year) = (" +
                            rec.da_id + ", " + std::to_string(rec.year) + ")");
        years.insert(rec.year);
        ds.records.push_back(std::move(rec));
    }
    if (!saw_header) throw DataError(csv_path + ": missing header row");

    ds.years.assign(years.begin(), years.end());
    return ds;
}

/// Inverse of load_dataset; load(save(ds)) == ds.
inline std::string dataset_to_csv(const Dataset& ds) {
    std::string out = "da_id,year,district_id";
    for (const auto& s : ds.specs) out += ",f" + std::to_string(s.id);
    out += '\n';
    for (const auto& r : ds.records) {
        out += r.da_id;
        out += ',' + std::to_string(r.year);
        out += ',' + r.district_id;
        for (const auto& cell : r.raw) {
            out += ',';
            if (cell) out += detail::format_double(*cell);
        }
        out += '\n';
    }
    return out;
}

inline void save_dataset_csv(const Dataset& ds, const std::string& path) {
    detail::write_text_file(path, dataset_to_csv(ds));
}

/// Reports every violated invariant without aborting. Error-severity entries
/// mean the dataset is unusable as-is; advisories flag downstream limitations
/// (a single observed year cannot feed trend prediction).
inline std::vector<ValidationIssue> validate(const Dataset& ds) {
    using Sev = ValidationIssue::Severity;
    std::vector<ValidationIssue> issues;

    if (ds.specs.empty()) issues.push_back({Sev::error, "no feature specs declared"});
    std::set<int> ids;
    for (const auto& s : ds.specs) {
        if (!ids.insert(s.id).second)
            issues.push_back({Sev::error, "duplicate feature id " + std::to_string(s.id)});
    }

    std::set<std::pair<std::string, int>> keys;
    std::set<int> seen_years;
    for (const auto& r : ds.records) {
        const std::string who = "record (" + r.da_id + ", " + std::to_string(r.year) + ")";
        if (r.raw.size() != ds.specs.size())
            issues.push_back({Sev::error, who + ": has " + std::to_string(r.raw.size()) +
                                              " raw slots, expected " +
                                              std::to_string(ds.specs.size())});
        if (r.district_id.empty())
            issues.push_back({Sev::error, who + ": district_id is empty"});
        if (!keys.insert({r.da_id, r.year}).second)
            issues.push_back({Sev::error, who + ": duplicate (da_id, year)"});
        seen_years.insert(r.year);
    }

    const std::vector<int> expect(seen_years.begin(), seen_years.end());
    if (ds.records.empty())
        issues.push_back({Sev::error, "dataset has no records"});
    else if (ds.years != expect)
        issues.push_back({Sev::error, "years field does not match the records' distinct years"});

    if (seen_years.size() == 1)
        issues.push_back({Sev::advisory,
                          "only one observed year; trend prediction needs at least 2 distinct years"});
    return issues;
}

inline bool has_errors(const std::vector<ValidationIssue>& issues) {
    return std::any_of(issues.begin(), issues.end(), [](const ValidationIssue& i) {
        return i.severity == ValidationIssue::Severity::error;
    });
}

} // namespace uvi
