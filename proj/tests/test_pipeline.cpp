#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "solarkm/pipeline.hpp"

using namespace solarkm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::mt19937_64 g_rng(31415);

MatrixXd random_matrix(Eigen::Index n, Eigen::Index d) {
    std::normal_distribution<double> dist(0.0, 1.0);
    MatrixXd X(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) X(i, j) = dist(g_rng);
    return X;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

pipeline::Dataset tiny_dataset(int n, int horizons, int sources) {
    pipeline::Dataset d;
    d.horizons = horizons;
    d.sources = sources;
    const int dim = 8 + 10 * sources;
    std::uniform_real_distribution<double> u(0.2, 1.0);
    for (int i = 0; i < n; ++i) {
        pipeline::Sample s;
        s.timestamp = 15.0 * i;
        s.condition = (i % 4 == 0) ? "clear" : (i % 4 == 1) ? "cumulus"
                                  : (i % 4 == 2)            ? "stratus"
                                                            : "nimbus";
        s.day = i / 10;
        s.features = VectorXd::NullaryExpr(dim, [&](Eigen::Index) { return u(g_rng); });
        s.targets = VectorXd::NullaryExpr(horizons, [&](Eigen::Index) { return u(g_rng); });
        d.samples.push_back(std::move(s));
    }
    return d;
}

}  // namespace

TEST_CASE("dataset csv round trip preserves every value") {
    const auto d = tiny_dataset(12, 3, 2);
    const auto path = temp_path("solarkm_ds.csv");
    pipeline::write_dataset_csv(d, path);
    const auto back = pipeline::read_dataset_csv(path);
    REQUIRE(back.samples.size() == d.samples.size());
    CHECK(back.horizons == 3);
    CHECK(back.sources == 2);
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
        CHECK(back.samples[i].condition == d.samples[i].condition);
        CHECK(back.samples[i].day == d.samples[i].day);
        CHECK((back.samples[i].features - d.samples[i].features).cwiseAbs().maxCoeff() == 0.0);
        CHECK((back.samples[i].targets - d.samples[i].targets).cwiseAbs().maxCoeff() == 0.0);
    }
    auto counts = d.condition_counts();
    int total = 0;
    for (const auto& [cond, cnt] : counts) total += cnt;
    CHECK(total == 12);
    std::remove(path.c_str());
    CHECK_THROWS(pipeline::read_dataset_csv(path));
}

TEST_CASE("standardization: moments, constant columns, round trip, exemptions") {
    MatrixXd X = random_matrix(40, 3);
    X.col(2).setConstant(7.0);
    const auto p = pipeline::standardize_fit(X);
    const MatrixXd Z = pipeline::standardize_apply(X, p);
    for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(Z.col(j).mean()) <= 1e-12);
        const double sd = std::sqrt((Z.col(j).array() - Z.col(j).mean()).square().mean());
        CHECK(std::abs(sd - 1.0) <= 1e-12);
    }
    CHECK(p.scaled[2] == 0);
    CHECK((Z.col(2) - X.col(2)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((pipeline::destandardize(Z, p) - X).cwiseAbs().maxCoeff() <= 1e-12);

    const auto off = pipeline::standardize_fit(X, false);
    CHECK((pipeline::standardize_apply(X, off) - X).cwiseAbs().maxCoeff() == 0.0);

    CHECK(pipeline::standardize_features_for(kernels::KernelFamily::RBF));
    CHECK(!pipeline::standardize_features_for(kernels::KernelFamily::Polynomial));
    CHECK(pipeline::standardize_targets_for(multitask::Family::KRR));
    CHECK(!pipeline::standardize_targets_for(multitask::Family::GPR));
    CHECK(!pipeline::standardize_targets_for(multitask::Family::RVM));
}

TEST_CASE("lof scores: lattice inliers, a far outlier, and the k guard") {
    MatrixXd lattice(25, 2);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            lattice(5 * i + j, 0) = i;
            lattice(5 * i + j, 1) = j;
        }
    const VectorXd s = pipeline::lof_scores(lattice, 3);
    CHECK(s.minCoeff() >= 0.9);
    CHECK(s.maxCoeff() <= 1.1);

    MatrixXd clustered = random_matrix(20, 2) * 0.1;
    MatrixXd with_outlier(21, 2);
    with_outlier.topRows(20) = clustered;
    with_outlier.row(20) << 40.0, 40.0;
    const VectorXd so = pipeline::lof_scores(with_outlier, 3);
    CHECK(so(20) > 1.5);

    const auto keep = pipeline::select_most_inlier(so, 20);
    CHECK(std::find(keep.begin(), keep.end(), 20) == keep.end());
    CHECK(std::is_sorted(keep.begin(), keep.end()));

    CHECK_THROWS(pipeline::lof_scores(lattice, 25));
    CHECK_THROWS(pipeline::lof_scores(lattice, 0));
}

TEST_CASE("grid search picks the better candidate deterministically") {
    const int N = 30;
    MatrixXd X(N, 1);
    MatrixXd Y(N, 1);
    for (int i = 0; i < N; ++i) {
        X(i, 0) = 0.2 * i;
        Y(i, 0) = std::sin(X(i, 0)) + 2.0;
    }
    multitask::FitOptions good;
    good.family = multitask::Family::KRR;
    good.spec = {kernels::KernelFamily::RBF, 1.0};
    good.ridge_gamma = 1e-3;
    multitask::FitOptions bad = good;
    bad.ridge_gamma = 1e3;  // crushes the fit toward zero

    const std::vector<pipeline::GridCandidate> grid = {{bad, "over-regularized"},
                                                       {good, "light-ridge"}};
    const auto r1 = pipeline::kfold_grid_search(multitask::Mode::Independent, grid, X, Y, 3, 7);
    const auto r2 = pipeline::kfold_grid_search(multitask::Mode::Independent, grid, X, Y, 3, 7);
    CHECK(r1.selected == 1);
    CHECK(r1.mean_mape(1) < r1.mean_mape(0));
    CHECK((r1.fold_mape - r2.fold_mape).cwiseAbs().maxCoeff() == 0.0);

    const std::vector<pipeline::GridCandidate> one = {{good, "only"}};
    CHECK(pipeline::kfold_grid_search(multitask::Mode::Independent, one, X, Y, 3, 7).selected ==
          0);
    CHECK_THROWS(pipeline::kfold_grid_search(multitask::Mode::Independent, {}, X, Y, 3, 7));
    CHECK_THROWS(pipeline::kfold_grid_search(multitask::Mode::Independent, one, X.topRows(4),
                                             Y.topRows(4), 3, 7));
}

TEST_CASE("metrics: hand mape, perfect forecast, persistence baseline") {
    MatrixXd y(2, 1), yhat(2, 1), pers(2, 1);
    y << 1.0, 2.0;
    yhat << 1.1, 1.8;
    pers << 1.5, 1.5;
    const auto r = pipeline::evaluate(yhat, y, pers);
    CHECK(r.mape(0) == doctest::Approx(10.0));

    const auto perfect = pipeline::evaluate(y, y, pers);
    CHECK(perfect.mape(0) == doctest::Approx(0.0));
    CHECK(perfect.fs(0) == doctest::Approx(100.0));

    const auto self = pipeline::evaluate(pers, y, pers);
    CHECK(self.fs(0) == doctest::Approx(0.0));

    MatrixXd yz(2, 1);
    yz << 1.0, 0.0;
    CHECK(pipeline::evaluate(yhat, yz, pers).excluded == 1);

    const VectorXd p = pipeline::persistence_forecast(0.97, 4);
    CHECK(p.size() == 4);
    CHECK(p.minCoeff() == 0.97);
    CHECK(p.maxCoeff() == 0.97);
}

TEST_CASE("per-condition mape decomposition is consistent") {
    const int N = 12;
    MatrixXd y = random_matrix(N, 2).array().abs() + 0.5;
    MatrixXd yhat = y.array() * 1.1;
    MatrixXd pers = y.array() * 0.9;
    std::vector<std::string> conds;
    for (int i = 0; i < N; ++i) conds.push_back(i < 7 ? "clear" : "cumulus");
    const auto r = pipeline::evaluate(yhat, y, pers, conds);
    int total = 0;
    for (const auto& [cond, cnt] : r.condition_counts) total += cnt;
    CHECK(total == N);
    // constant relative error: every condition's MAPE equals the overall one
    CHECK(r.condition_mape.at("clear")(0) == doctest::Approx(r.mape(0)).epsilon(1e-10));
}

TEST_CASE("synthetic scene: clear sky, transit timing, wind mirror") {
    pipeline::SceneConfig cfg;
    cfg.rows = cfg.cols = 30;
    cfg.frames = 60;
    cfg.blobs = 0;
    auto clear = pipeline::generate_synthetic_scene(cfg);
    CHECK(clear.csi.minCoeff() == 1.0);
    for (const auto& c : clear.condition) CHECK(c == "clear");

    cfg.blobs = 1;
    cfg.blob_spacing = 60.0;
    cfg.wind_u = 1.0;
    cfg.wind_v = 0.0;
    const auto one = pipeline::generate_synthetic_scene(cfg);
    REQUIRE(one.transit_frames.size() == 1);
    // deepest attenuation at the oracle transit frame
    Eigen::Index dip;
    one.csi.minCoeff(&dip);
    CHECK(std::abs(static_cast<double>(dip) - one.transit_frames[0]) <= 1.0);
    CHECK(one.csi.minCoeff() >= cfg.min_csi);

    pipeline::SceneConfig rev = cfg;
    rev.wind_u = -1.0;
    const auto mirrored = pipeline::generate_synthetic_scene(rev);
    Eigen::Index dip2;
    mirrored.csi.minCoeff(&dip2);
    CHECK(std::abs(static_cast<double>(dip2) - mirrored.transit_frames[0]) <= 1.0);

    pipeline::SceneConfig big = cfg;
    big.blob_sigma = 100.0;
    CHECK_THROWS(pipeline::generate_synthetic_scene(big));
}

TEST_CASE("feature extraction emits complete, deterministic samples") {
    pipeline::SceneConfig cfg;
    cfg.rows = cfg.cols = 24;
    cfg.frames = 50;
    cfg.blob_spacing = 25.0;
    cfg.blobs = 2;
    cfg.seed = 3;
    const auto scene = pipeline::generate_synthetic_scene(cfg);
    pipeline::FeatureConfig fc;
    fc.horizon_steps = {4, 8};
    fc.n_mc = 1000;
    fc.seed = 5;
    const auto d1 = pipeline::extract_features(scene, fc);
    const auto d2 = pipeline::extract_features(scene, fc);
    REQUIRE(!d1.samples.empty());
    CHECK(d1.horizons == 2);
    CHECK(d1.samples.front().features.size() == 8 + 10 * 2);
    CHECK((d1.feature_matrix() - d2.feature_matrix()).cwiseAbs().maxCoeff() == 0.0);
    for (const auto& s : d1.samples) {
        CHECK(s.features.allFinite());
        CHECK(s.targets.minCoeff() > 0.0);
    }
}

TEST_CASE("serialized models predict bit-identically after a round trip") {
    const MatrixXd X = random_matrix(15, 2);
    const MatrixXd Y = random_matrix(15, 2);
    const auto corr = kernels::correlation_matrix(2, 1.0);
    const auto path = temp_path("solarkm_model.json");

    for (auto fam : {multitask::Family::KRR, multitask::Family::GPR, multitask::Family::SVR,
                     multitask::Family::RVM}) {
        for (auto mode : {multitask::Mode::Independent, multitask::Mode::Chain,
                          multitask::Mode::Joint}) {
            multitask::FitOptions o;
            o.family = fam;
            o.spec = {kernels::KernelFamily::RBF, 0.9};
            o.ridge_gamma = 0.4;
            o.noise = 0.05;
            o.box = 1.0;
            o.epsilon = 0.05;
            const auto m = multitask::fit_multitask(
                mode, o, X, Y, mode == multitask::Mode::Joint ? &corr : nullptr);
            pipeline::save_model_json(m, path);
            const auto back = pipeline::load_model_json(path);
            for (int t = 0; t < 3; ++t) {
                const VectorXd xs = random_matrix(2, 1).col(0);
                const auto p0 = multitask::predict_multitask(m, xs);
                const auto p1 = multitask::predict_multitask(back, xs);
                CHECK((p0.mean - p1.mean).cwiseAbs().maxCoeff() == 0.0);
                CHECK((p0.variance - p1.variance).cwiseAbs().maxCoeff() == 0.0);
            }
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("grid files round trip in both formats") {
    const MatrixXd g = random_matrix(7, 5);
    const auto bpath = temp_path("solarkm_grid.bin");
    pipeline::write_grid(bpath, g);
    const MatrixXd gb = pipeline::read_grid(bpath);
    // binary payload is float32
    CHECK((gb - g).cwiseAbs().maxCoeff() <= 1e-6);
    std::ifstream f(bpath, std::ios::binary);
    char magic[4];
    f.read(magic, 4);
    CHECK(std::string(magic, 4) == "SKMG");
    f.close();
    std::remove(bpath.c_str());

    const auto tpath = temp_path("solarkm_grid.txt");
    pipeline::write_grid_text(tpath, g);
    CHECK((pipeline::read_grid_text(tpath) - g).cwiseAbs().maxCoeff() <= 1e-12);
    std::remove(tpath.c_str());
    CHECK_THROWS(pipeline::read_grid(bpath));
}

TEST_CASE("config parser handles sections, comments, and quotes") {
    const auto path = temp_path("solarkm_cfg.toml");
    {
        std::ofstream f(path);
        f << "# top comment\n"
          << "frames = 120\n"
          << "label = \"advecting blobs\"  # trailing\n"
          << "[scene]\n"
          << "rows = 40\n";
    }
    const auto cfg = pipeline::read_config(path);
    CHECK(pipeline::config_num(cfg, "frames", 0) == 120.0);
    CHECK(pipeline::config_str(cfg, "label", "") == "advecting blobs");
    CHECK(pipeline::config_num(cfg, "scene.rows", 0) == 40.0);
    CHECK(pipeline::config_num(cfg, "missing", 7.5) == 7.5);
    std::remove(path.c_str());
    CHECK_THROWS(pipeline::read_config(path));
}
