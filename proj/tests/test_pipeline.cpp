#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "uvi/pipeline.hpp"

namespace {

namespace fs = std::filesystem;

const std::string kData = std::string(UVI_DATA_DIR) + "/synthetic_city.csv";
const std::string kFeatures = std::string(UVI_DATA_DIR) + "/features.json";

int run_cli(const std::string& args) {
    const std::string cmd = std::string(UVI_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

uvi::RunConfig fixture_config(const std::string& out) {
    uvi::RunConfig cfg;
    cfg.data_path = kData;
    cfg.features_path = kFeatures;
    cfg.out_dir = out;
    cfg.seed = 20260811;
    cfg.kmeans.n_init = 3; // keep the suite quick
    return cfg;
}

TEST(Pipeline, FixtureLoadsAndValidates) {
    const auto ds = uvi::load_dataset(kData, uvi::load_feature_specs(kFeatures));
    EXPECT_EQ(ds.specs.size(), 8u);
    EXPECT_EQ(ds.years, (std::vector<int>{2006, 2011, 2016}));
    int count_2016 = 0;
    for (const auto& r : ds.records) count_2016 += r.year == 2016 ? 1 : 0;
    EXPECT_EQ(count_2016, 135);
    EXPECT_TRUE(uvi::validate(ds).empty());
}

TEST(Pipeline, FixedModeRunAllProduceslettersAndTrends) {
    auto cfg = fixture_config("");
    cfg.mode = uvi::RunConfig::Mode::fixed;
    cfg.fixed_k = 10;
    const auto rep = uvi::pipeline::run_all(cfg);

    EXPECT_EQ(rep.mode, "fixed");
    EXPECT_EQ(rep.clustered_year, 2016);
    EXPECT_EQ(rep.letters.size(), 10u);
    std::set<std::string> letters(rep.letters.begin(), rep.letters.end());
    EXPECT_EQ(letters.size(), 10u);
    EXPECT_TRUE(letters.count("A"));
    EXPECT_TRUE(letters.count("J"));

    // default targets follow the last observed year
    EXPECT_EQ(rep.target_years, (std::vector<int>{2021, 2026}));
    EXPECT_FALSE(rep.trends.empty());
    for (const auto& t : rep.trends) {
        EXPECT_TRUE(t.error.empty());
        ASSERT_EQ(t.predicted.size(), 2u);
        EXPECT_EQ(t.predicted[0].year, 2021);
        EXPECT_EQ(t.predicted[1].year, 2026);
    }

    // 135 rows per year, letters only on the clustered year
    EXPECT_EQ(rep.vitality.size(), 3u * 135u);
    for (const auto& row : rep.vitality) {
        EXPECT_EQ(row.letter.empty(), row.year != 2016);
        EXPECT_GE(row.numeric, 0);
        EXPECT_LE(row.numeric, 100);
    }

    // subset enumeration covered all 247 masks of the 8 features
    EXPECT_EQ(rep.subset_runs.size(), 247u);
    ASSERT_TRUE(rep.weights.has_value());
    double sum = 0.0;
    for (double w : rep.weights->weights) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Pipeline, OptimizeModeRespectsLocksAndWritesGa) {
    auto cfg = fixture_config((fs::temp_directory_path() / "uvi_pipe_opt").string());
    fs::remove_all(cfg.out_dir);
    cfg.mode = uvi::RunConfig::Mode::optimize;
    cfg.ga.generations = 3;
    cfg.ga.population = 6;
    cfg.ga.ranges.n_init = {2, 3};
    cfg.ga.ranges.max_iter = {50, 60};
    cfg.fixed_k = 5;
    const auto rep = uvi::pipeline::run_all(cfg);
    ASSERT_TRUE(rep.ga.has_value());
    EXPECT_EQ(rep.ga->best.k, 5);
    EXPECT_EQ(rep.clustering_config.k, 5);
    EXPECT_EQ(rep.ga->generations.size(), 3u);
    fs::remove_all(cfg.out_dir);
}

TEST(Pipeline, OptimizeRecoversPlantedClusterCount) {
    // 3 tight, well-separated blobs in features 1 and 2; feature 3 is noise.
    const auto csv = fs::temp_directory_path() / "uvi_planted_blobs.csv";
    {
        uvi::Rng rng(606);
        std::ofstream out(csv, std::ios::trunc);
        out << "da_id,year,district_id,f1,f2,f3\n";
        const double cx[3] = {10.0, 90.0, 40.0};
        const double cy[3] = {10.0, 20.0, 85.0};
        for (int i = 0; i < 36; ++i) {
            const int blob = i % 3;
            out << "B" << i << ",2016,TR-1," << cx[blob] + rng.normal() << ","
                << cy[blob] + rng.normal() << "," << rng.uniform() * 100.0 << "\n";
        }
    }
    const std::string features = fs::temp_directory_path() / "uvi_planted_feat.json";
    std::ofstream(features, std::ios::trunc) << R"({"features":[
        {"id":1,"name":"a"},{"id":2,"name":"b"},{"id":3,"name":"c"}]})";

    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        uvi::RunConfig cfg;
        cfg.data_path = csv.string();
        cfg.features_path = features;
        cfg.seed = seed;
        cfg.ga.generations = 10;
        cfg.ga.population = 12;
        cfg.ga.ranges.k = {2, 6};
        cfg.ga.ranges.n_init = {2, 4};
        cfg.ga.ranges.max_iter = {50, 80};
        const auto ds = uvi::pipeline::load_inputs(cfg);
        const auto st = uvi::pipeline::optimize_stage(ds, cfg, 2016);
        hits += st.history.best.k == 3 ? 1 : 0;
    }
    EXPECT_GE(hits, 8);
}

TEST(Pipeline, TrendStageFlagsSingleYearDistricts) {
    // hand-built dataset: one district with one year only
    uvi::Dataset ds;
    ds.specs = {{1, "a", false, false, uvi::ImputeStrategy::mean_of_column()},
                {2, "b", false, false, uvi::ImputeStrategy::mean_of_column()}};
    ds.years = {2016};
    for (int i = 0; i < 4; ++i) {
        uvi::DARecord rec;
        rec.da_id = "A" + std::to_string(i);
        rec.year = 2016;
        rec.district_id = "TR-1";
        rec.raw = {static_cast<double>(i), static_cast<double>(10 - i)};
        ds.records.push_back(rec);
    }
    uvi::RunConfig cfg;
    cfg.target_years = {2021};
    const auto st = uvi::pipeline::trend_stage(ds, cfg);
    EXPECT_TRUE(st.any_error);
    ASSERT_EQ(st.trends.size(), 1u);
    EXPECT_FALSE(st.trends[0].error.empty());
}

TEST(Pipeline, TargetBeforeFirstObservedYearIsConfigError) {
    auto cfg = fixture_config("");
    cfg.target_years = {1999};
    const auto ds = uvi::pipeline::load_inputs(cfg);
    EXPECT_THROW(uvi::pipeline::resolve_targets(ds, cfg), uvi::ConfigError);
}

TEST(CliExit, ValidateCleanFileIsZero) {
    EXPECT_EQ(run_cli("validate --data " + kData + " --features " + kFeatures), 0);
}

TEST(CliExit, DuplicateKeyIsOne) {
    const auto path = fs::temp_directory_path() / "uvi_cli_dup.csv";
    std::ofstream(path, std::ios::trunc) << "da_id,year,district_id,f1,f2\n"
                                            "A1,2016,TR-1,1,2\n"
                                            "A1,2016,TR-1,3,4\n";
    const std::string features = fs::temp_directory_path() / "uvi_cli_feat.json";
    std::ofstream(features, std::ios::trunc)
        << R"({"features":[{"id":1,"name":"a"},{"id":2,"name":"b"}]})";
    EXPECT_EQ(run_cli("validate --data " + path.string() + " --features " + features), 1);
}

TEST(CliExit, MissingFileIsTwo) {
    EXPECT_EQ(run_cli("validate --data /nonexistent/x.csv"), 2);
}

TEST(CliExit, BadFlagIsTwo) {
    EXPECT_EQ(run_cli("validate --nope"), 2);
}

TEST(CliExit, ClusterWritesFragmentsAndFigures) {
    const auto out = fs::temp_directory_path() / "uvi_cli_cluster";
    fs::remove_all(out);
    const int code = run_cli("cluster --data " + kData + " --features " + kFeatures +
                             " --k 10 --n-init 3 --seed 1 --out " + out.string());
    EXPECT_EQ(code, 0);
    EXPECT_TRUE(fs::exists(out / "clustering.json"));
    EXPECT_TRUE(fs::exists(out / "cluster_histogram_2016.svg"));
    EXPECT_TRUE(fs::exists(out / "silhouette_2016.svg"));
    EXPECT_TRUE(fs::exists(out / "vitality_strip_2016.svg"));

    const auto frag = nlohmann::json::parse(std::ifstream(out / "clustering.json"));
    EXPECT_EQ(frag.at("letters").size(), 10u);
    EXPECT_EQ(frag.at("year").get<int>(), 2016);
    // formatted two-part notation, e.g. "C45"
    const auto vi = frag.at("vitality").at(0).at("vi").get<std::string>();
    EXPECT_GE(vi.size(), 2u);
    EXPECT_TRUE(vi[0] >= 'A' && vi[0] <= 'J');
    fs::remove_all(out);
}

TEST(CliExit, WeighReusesCachedGaBestK) {
    const auto out = fs::temp_directory_path() / "uvi_cli_weigh";
    fs::remove_all(out);
    const std::string common = " --data " + kData + " --features " + kFeatures + " --seed 3 " +
                               "--out " + out.string();
    EXPECT_EQ(run_cli("optimize" + common +
                      " --generations 2 --population 6 --n-init-min 2 --n-init-max 3 "
                      "--max-iter-min 50 --max-iter-max 60 --k-min 2 --k-max 6"),
              0);
    ASSERT_TRUE(fs::exists(out / "ga.json"));
    EXPECT_EQ(run_cli("weigh" + common + " --n-init 2 --trees 30"), 0);
    ASSERT_TRUE(fs::exists(out / "weights.json"));

    const auto ga = nlohmann::json::parse(std::ifstream(out / "ga.json"));
    const auto weights = nlohmann::json::parse(std::ifstream(out / "weights.json"));
    EXPECT_EQ(weights.at("k").get<int>(), ga.at("history").at("best").at("k").get<int>());
    EXPECT_EQ(weights.at("runs").size(), 247u);
    EXPECT_EQ(weights.at("table").size(), 8u);
    EXPECT_TRUE(weights.at("table").at(0).contains("rank"));
    EXPECT_TRUE(weights.at("table").at(0).contains("name"));
    EXPECT_TRUE(weights.at("table").at(0).contains("weight"));
    fs::remove_all(out);
}

TEST(CliExit, PredictSingleYearDatasetIsOne) {
    const auto path = fs::temp_directory_path() / "uvi_cli_oneyear.csv";
    std::ofstream(path, std::ios::trunc) << "da_id,year,district_id,f1,f2\n"
                                            "A1,2016,TR-1,1,2\n"
                                            "A2,2016,TR-1,3,4\n";
    const std::string features = fs::temp_directory_path() / "uvi_cli_feat2.json";
    std::ofstream(features, std::ios::trunc)
        << R"({"features":[{"id":1,"name":"a"},{"id":2,"name":"b"}]})";
    const auto out = fs::temp_directory_path() / "uvi_cli_pred1";
    EXPECT_EQ(run_cli("predict --data " + path.string() + " --features " + features +
                      " --targets 2026 --out " + out.string()),
              1);
    fs::remove_all(out);
}

TEST(CliExit, PredictHonorsTargets) {
    const auto out = fs::temp_directory_path() / "uvi_cli_pred2";
    fs::remove_all(out);
    EXPECT_EQ(run_cli("predict --data " + kData + " --features " + kFeatures +
                      " --targets 2021 2026 --out " + out.string()),
              0);
    ASSERT_TRUE(fs::exists(out / "trends.json"));
    const auto trends = nlohmann::json::parse(std::ifstream(out / "trends.json"));
    EXPECT_EQ(trends.at("targets"), nlohmann::json::array({2021, 2026}));
    ASSERT_TRUE(fs::exists(out / "trends.csv"));
    std::ifstream csv(out / "trends.csv");
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "district_id,slope,intercept,n_points,year,kind,numeric,clamped");
    fs::remove_all(out);
}

} // namespace
