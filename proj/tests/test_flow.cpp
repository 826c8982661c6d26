#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "solarkm/flow.hpp"

using namespace solarkm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// low-frequency random field, smooth enough for the finite-difference solver
MatrixXd smooth_field(int m, int n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    MatrixXd f = MatrixXd::Zero(m, n);
    for (int h = 1; h <= 3; ++h) {
        const double a = amp(rng), b = amp(rng), pa = amp(rng) * 3, pb = amp(rng) * 3;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
                f(i, j) += a * std::sin(2 * M_PI * h * i / m + pa) +
                           b * std::cos(2 * M_PI * h * j / n + pb);
    }
    return f;
}

flow::FlowPotentials uniform_potentials(int m, int n, double U, double V) {
    flow::VectorField vf;
    vf.u = MatrixXd::Constant(m, n, U);
    vf.v = MatrixXd::Constant(m, n, V);
    return flow::helmholtz_decompose(vf);
}

}  // namespace

TEST_CASE("divergence and vorticity are exact on linear fields") {
    const int m = 12, n = 10;
    flow::VectorField vf;
    flow::ScalarField mag, div, vort;

    vf.u = MatrixXd::Constant(m, n, 3.0);
    vf.v = MatrixXd::Constant(m, n, -2.0);
    flow::cloud_dynamics(vf, mag, div, vort);
    CHECK(div.grid.cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(vort.grid.cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(mag.grid(3, 4) == doctest::Approx(std::sqrt(13.0)));

    // V = (x, y): divergence 2, vorticity 0
    vf.u.setZero();
    vf.v.setZero();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            vf.u(i, j) = j;
            vf.v(i, j) = i;
        }
    flow::cloud_dynamics(vf, mag, div, vort);
    for (int i = 1; i < m - 1; ++i)
        for (int j = 1; j < n - 1; ++j) {
            CHECK(div.grid(i, j) == doctest::Approx(2.0).epsilon(1e-13));
            CHECK(vort.grid(i, j) == doctest::Approx(0.0).epsilon(1e-13));
        }

    // V = (-y, x): vorticity 2, divergence 0
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            vf.u(i, j) = -i;
            vf.v(i, j) = j;
        }
    flow::cloud_dynamics(vf, mag, div, vort);
    for (int i = 1; i < m - 1; ++i)
        for (int j = 1; j < n - 1; ++j) CHECK(vort.grid(i, j) == doctest::Approx(2.0));
}

TEST_CASE("helmholtz potentials of a uniform flow are the linear ramps") {
    const int m = 16, n = 14;
    const double U = 1.7;
    const auto P = uniform_potentials(m, n, U, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            CHECK(P.psi(i, j) - P.psi(i, 0) == doctest::Approx(U * j).epsilon(1e-8));
            CHECK(P.phi(i, j) - P.phi(0, j) == doctest::Approx(U * i).epsilon(1e-8));
        }
    const auto R = flow::reconstruct(P);
    CHECK((R.u.array() - U).abs().maxCoeff() <= 1e-8);
    CHECK(R.v.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("helmholtz reconstruction residual is small on smooth random fields") {
    for (uint64_t seed : {1u, 2u, 3u}) {
        flow::VectorField vf;
        vf.u = smooth_field(20, 22, seed);
        vf.v = smooth_field(20, 22, seed + 100);
        const auto P = flow::helmholtz_decompose(vf);
        const auto R = flow::reconstruct(P);
        const double scale = std::max(vf.u.cwiseAbs().maxCoeff(), vf.v.cwiseAbs().maxCoeff());
        const double resid = std::max((R.u - vf.u).cwiseAbs().maxCoeff(),
                                      (R.v - vf.v).cwiseAbs().maxCoeff());
        CHECK(resid <= 1e-3 * scale);
    }
}

TEST_CASE("uniform-flow streamline is the horizontal ray to the downstream edge") {
    const int m = 11, n = 15, si = 5, sj = 7;
    const auto P = uniform_potentials(m, n, 2.0, 0.0);
    const auto line = flow::trace_streamline(P, si, sj);
    REQUIRE(static_cast<int>(line.pixels.size()) == n - sj);
    for (int l = 0; l < static_cast<int>(line.pixels.size()); ++l) {
        CHECK(line.pixels[static_cast<std::size_t>(l)].first == si);
        CHECK(line.pixels[static_cast<std::size_t>(l)].second == sj + l);
    }
    for (std::size_t l = 0; l < line.ax.size(); ++l) {
        CHECK(line.ax[l] == 1);
        CHECK(line.ay[l] == 0);
    }
}

TEST_CASE("zero flow yields the empty-streamline error") {
    flow::FlowPotentials P;
    P.phi = MatrixXd::Zero(8, 8);
    P.psi = MatrixXd::Zero(8, 8);
    CHECK_THROWS(flow::trace_streamline(P, 4, 4));
}

TEST_CASE("streamline structural invariants hold on smooth fields") {
    flow::VectorField vf;
    vf.u = smooth_field(18, 18, 7).array() + 1.5;
    vf.v = smooth_field(18, 18, 8);
    const auto P = flow::helmholtz_decompose(vf);
    try {
        const auto line = flow::trace_streamline(P, 9, 9);
        std::set<std::pair<int, int>> seen;
        for (std::size_t l = 0; l < line.pixels.size(); ++l) {
            CHECK(seen.insert(line.pixels[l]).second);
            if (l > 0) {
                CHECK(std::abs(line.pixels[l].first - line.pixels[l - 1].first) <= 1);
                CHECK(std::abs(line.pixels[l].second - line.pixels[l - 1].second) <= 1);
            }
        }
        const auto [li, lj] = line.pixels.back();
        CHECK((li == 0 || li == 17 || lj == 0 || lj == 17));
    } catch (const std::runtime_error&) {
        // a dead end is a legitimate outcome on curved fields
    }
}

TEST_CASE("deterministic traversal times have exact means and additive shapes") {
    flow::Streamline line;
    for (int l = 0; l < 6; ++l) {
        line.pixels.emplace_back(3, l);
        line.ax.push_back(1);
        line.ay.push_back(0);
    }
    const VectorXd ones = VectorXd::Ones(6), zeros = VectorXd::Zero(6);
    const auto T = flow::traversal_times(line, ones, zeros, ones, ones, 0.0, 0.0, 1000, 1);
    for (int l = 0; l < 6; ++l) {
        CHECK(T.shape(l) / T.rate(l) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(T.mean_arrival(l) == doctest::Approx(l + 1.0).epsilon(1e-9));
    }
    CHECK(T.cum_shape(2) == T.shape(0) + T.shape(1) + T.shape(2));
    CHECK_THROWS(flow::traversal_times(line, zeros, zeros, ones, ones, 0.0, 0.0, 1000, 1));
    CHECK_THROWS(flow::traversal_times(line, ones, zeros, ones, ones, 0.0, 0.0, 10, 1));
}

TEST_CASE("gamma-fit cumulative mean tracks a monte-carlo oracle") {
    const int L = 8, n_mc = 100000;
    flow::Streamline line;
    for (int l = 0; l < L; ++l) {
        line.pixels.emplace_back(0, l);
        line.ax.push_back(1);
        line.ay.push_back(0);
    }
    const VectorXd ones = VectorXd::Ones(L), zeros = VectorXd::Zero(L);
    const double e_u = 0.1;
    const auto T = flow::traversal_times(line, ones, zeros, ones, ones, e_u, 0.0, n_mc, 42);

    std::mt19937_64 rng(4242);
    std::normal_distribution<double> nd(0.0, e_u);
    double mc_total = 0.0;
    for (int l = 0; l < L; ++l) {
        double mean_t = 0.0;
        for (int k = 0; k < n_mc; ++k) mean_t += 1.0 / std::abs(1.0 + nd(rng));
        mc_total += mean_t / n_mc;
    }
    CHECK(std::abs(T.mean_arrival(L - 1) - mc_total) / mc_total <= 0.02);
}

TEST_CASE("intersection moments: point mass and advected peak") {
    Eigen::Vector2d mean;
    Eigen::Matrix2d cov;
    flow::moments_from_masses({Eigen::Vector2d(2.0, 3.0)}, VectorXd::Ones(1), mean, cov);
    CHECK(mean(0) == doctest::Approx(2.0));
    CHECK(mean(1) == doctest::Approx(3.0));
    CHECK(cov.cwiseAbs().maxCoeff() <= 1e-12);

    const int L = 20;
    flow::Streamline line;
    std::vector<Eigen::Vector2d> coords;
    for (int l = 0; l < L; ++l) {
        line.pixels.emplace_back(0, l);
        line.ax.push_back(1);
        line.ay.push_back(0);
        coords.emplace_back(static_cast<double>(l), 0.0);
    }
    const VectorXd ones = VectorXd::Ones(L), zeros = VectorXd::Zero(L);
    const auto T = flow::traversal_times(line, ones, zeros, ones, ones, 0.05, 0.0, 20000, 9);
    const auto M = flow::intersection_moments(T, coords, 5.0, 0.0, 0.0, 1000, 9);
    CHECK(M.displacement_var == 0.0);
    CHECK(std::abs(M.mean(0) - 4.0) <= 1.0);

    const auto Me = flow::intersection_moments(T, coords, 5.0, 0.1, 0.2, 100000, 9);
    CHECK(Me.displacement_var == doctest::Approx(25.0 * (0.01 + 0.04)).epsilon(0.05));
}

TEST_CASE("wave probability hand case and normalization") {
    flow::FlowPotentials P;
    P.phi.resize(2, 1);
    P.phi << 0.0, 1.0;
    P.psi = MatrixXd::Zero(2, 1);
    const auto p = flow::wave_probability(P, 0, 0);
    CHECK(p.grid(0, 0) == doctest::Approx(1.0));
    CHECK(p.grid(1, 0) == doctest::Approx(0.0));

    P.phi = smooth_field(9, 11, 3);
    P.psi = smooth_field(9, 11, 4);
    const auto pr = flow::wave_probability(P, 4, 5);
    CHECK(std::abs(pr.grid.sum() - 1.0) <= 1e-9);
    CHECK(pr.grid.minCoeff() >= 0.0);

    P.phi = MatrixXd::Constant(4, 4, 2.0);
    P.psi = MatrixXd::Zero(4, 4);
    CHECK_THROWS(flow::wave_probability(P, 1, 1));
}

TEST_CASE("interior gaussian weight maps integrate to one") {
    const int m = 41, n = 41;
    const auto reproj = flow::reproject_pixels(m, n, 90.0, 0.0, 1000.0, 30.0);
    flow::ScalarField wave;
    wave.grid = MatrixXd::Ones(m, n);
    Eigen::Vector2d mean(0.0, 0.0);
    Eigen::Matrix2d cov = Eigen::Matrix2d::Identity() * 900.0;  // 3 sigma = 90 m, interior
    const MatrixXd z = flow::sun_weight_grid(mean, cov, wave, reproj);
    CHECK(z.minCoeff() >= 0.0);
    double integral = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) integral += z(i, j) * reproj.dx(i, j) * reproj.dy(i, j);
    CHECK(std::abs(integral - 1.0) <= 0.05);

    CHECK_THROWS(flow::sun_weight_grid(mean, Eigen::Matrix2d::Zero(), wave, reproj));
}

TEST_CASE("cloud height and lapse-rate helpers") {
    flow::ScalarField temp;
    temp.grid = MatrixXd::Constant(3, 3, 293.5);
    const auto h = flow::cloud_height(temp, 300.0, -6.5e-3);
    CHECK(h.grid(1, 1) == doctest::Approx(1000.0));
    temp.grid.setConstant(300.0);
    CHECK(flow::cloud_height(temp, 300.0, -6.5e-3).grid.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS(flow::cloud_height(temp, 300.0, 0.0));

    const double g = flow::moist_adiabatic_lapse_rate(300.0, 290.0, 101325.0);
    CHECK(g < 0.0);
    CHECK(g > -0.0098);
    CHECK(g < -0.003);
}

TEST_CASE("pinhole reprojection geometry") {
    const int m = 21, n = 21;
    const auto r1 = flow::reproject_pixels(m, n, 90.0, 0.0, 1000.0, 30.0);
    CHECK(std::abs(r1.x(10, 10)) <= 1e-9);
    CHECK(std::abs(r1.y(10, 10)) <= 1e-9);
    const double pitch = (30.0 * M_PI / 180.0) / std::sqrt(2.0 * 21 * 21);
    CHECK(r1.dx(10, 10) == doctest::Approx(1000.0 * pitch).epsilon(1e-3));

    const auto r2 = flow::reproject_pixels(m, n, 90.0, 0.0, 2000.0, 30.0);
    CHECK(r2.x(3, 17) == doctest::Approx(2.0 * r1.x(3, 17)).epsilon(1e-9));
    CHECK(r2.dx(3, 17) == doctest::Approx(2.0 * r1.dx(3, 17)).epsilon(1e-9));

    CHECK_THROWS(flow::reproject_pixels(m, n, 0.0, 0.0, 1000.0, 30.0));
    CHECK_THROWS(flow::reproject_pixels(m, n, 45.0, 0.0, -5.0, 30.0));
    CHECK_THROWS(flow::reproject_pixels(m, n, 2.0, 0.0, 1000.0, 60.0));
}

TEST_CASE("weighted moments") {
    flow::ScalarField f;
    f.grid.resize(1, 3);
    f.grid << 1.0, 2.0, 3.0;
    MatrixXd z(1, 3);
    z << 1.0, 1.0, 2.0;
    double m = 0.0, s = 0.0;
    flow::weighted_moments(f, z, m, s);
    CHECK(m == doctest::Approx(2.25));
    CHECK(s == doctest::Approx(std::sqrt((1.5625 + 0.0625 + 2 * 0.5625) / 4.0)));

    const MatrixXd uz = MatrixXd::Ones(1, 3);
    flow::weighted_moments(f, uz, m, s);
    CHECK(m == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));

    MatrixXd point = MatrixXd::Zero(1, 3);
    point(0, 2) = 5.0;
    flow::weighted_moments(f, point, m, s);
    CHECK(m == doctest::Approx(3.0));
    CHECK(s == doctest::Approx(0.0));

    CHECK_THROWS(flow::weighted_moments(f, MatrixXd::Zero(1, 3), m, s));
}

TEST_CASE("feature vector assembly layout") {
    VectorXd lags(6);
    lags << 1, 2, 3, 4, 5, 6;
    std::array<flow::MomentBlock, flow::kFeatureCount> blocks;
    for (int f = 0; f < flow::kFeatureCount; ++f)
        for (int s = 0; s < 4; ++s) {
            blocks[static_cast<std::size_t>(f)].m.push_back(10.0 * f + s);
            blocks[static_cast<std::size_t>(f)].s.push_back(100.0 * f + s);
        }
    const auto x = flow::assemble_feature_vector(lags, 45.0, 180.0, blocks, {2, 0, 1});
    REQUIRE(x.size() == 38);
    CHECK(x(0) == 1.0);
    CHECK(x(6) == 45.0);
    CHECK(x(7) == 180.0);
    // first block, sources ascending: (m0, s0), (m1, s1), (m2, s2)
    CHECK(x(8) == 0.0);
    CHECK(x(9) == 0.0);
    CHECK(x(10) == 1.0);
    CHECK(x(12) == 2.0);
    // second block starts after the 3 (m, s) pairs of the first
    CHECK(x(14) == 10.0);
    CHECK(x(15) == 100.0);

    const auto x2 = flow::assemble_feature_vector(lags, 45.0, 180.0, blocks, {2, 0, 1});
    CHECK((x - x2).cwiseAbs().maxCoeff() == 0.0);

    CHECK(flow::assemble_feature_vector(lags, 45.0, 180.0, blocks, {}).size() == 8);
    CHECK_THROWS(flow::assemble_feature_vector(lags, 45.0, 180.0, blocks, {9}));
    CHECK_THROWS(flow::assemble_feature_vector(VectorXd::Ones(5), 45.0, 180.0, blocks, {0}));
}

TEST_CASE("two-frame gradient flow recovers a translating blob") {
    const int m = 30, n = 30;
    auto blob = [&](double ci, double cj) {
        MatrixXd f(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
                f(i, j) = std::exp(-((i - ci) * (i - ci) + (j - cj) * (j - cj)) / 18.0);
        return f;
    };
    const MatrixXd f0 = blob(15, 12), f1 = blob(15, 13);
    const auto V = flow::estimate_flow(f0, f1, 1.0, 1.0);
    CHECK(V.u(15, 12) == doctest::Approx(1.0).epsilon(0.25));
    CHECK(std::abs(V.v(15, 12)) <= 0.2);
    CHECK_THROWS(flow::estimate_flow(f0, MatrixXd::Zero(2, 2), 1.0, 1.0));
}
