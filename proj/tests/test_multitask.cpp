#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "solarkm/multitask.hpp"

using namespace solarkm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::mt19937_64 g_rng(2024);

MatrixXd random_matrix(Eigen::Index n, Eigen::Index d) {
    std::normal_distribution<double> dist(0.0, 1.0);
    MatrixXd X(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) X(i, j) = dist(g_rng);
    return X;
}

VectorXd random_vector(Eigen::Index n) {
    std::normal_distribution<double> dist(0.0, 1.0);
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(g_rng);
    return v;
}

multitask::FitOptions options_for(multitask::Family family) {
    multitask::FitOptions o;
    o.family = family;
    o.spec = {kernels::KernelFamily::RBF, 0.8};
    o.ridge_gamma = 0.5;
    o.noise = 0.05;
    o.box = 1.0;
    o.epsilon = 0.05;
    return o;
}

}  // namespace

TEST_CASE("single-horizon models agree across strategies") {
    const MatrixXd X = random_matrix(15, 2);
    const MatrixXd Y = random_matrix(15, 1);
    for (auto fam : {multitask::Family::KRR, multitask::Family::GPR, multitask::Family::SVR,
                     multitask::Family::RVM}) {
        const auto opts = options_for(fam);
        const auto ind = multitask::fit_multitask(multitask::Mode::Independent, opts, X, Y);
        const auto chain = multitask::fit_multitask(multitask::Mode::Chain, opts, X, Y);
        const VectorXd xs = random_vector(2);
        CHECK(std::abs(multitask::predict_multitask(ind, xs).mean(0) -
                       multitask::predict_multitask(chain, xs).mean(0)) <= 1e-12);
    }
}

TEST_CASE("identical target columns give identical per-horizon predictions") {
    const MatrixXd X = random_matrix(12, 2);
    MatrixXd Y(12, 3);
    const VectorXd col = random_vector(12);
    Y << col, col, col;
    const auto m = multitask::fit_multitask(multitask::Mode::Independent,
                                            options_for(multitask::Family::KRR), X, Y);
    const auto p = multitask::predict_multitask(m, random_vector(2));
    CHECK(p.mean(0) == doctest::Approx(p.mean(1)).epsilon(1e-14));
    CHECK(p.mean(1) == doctest::Approx(p.mean(2)).epsilon(1e-14));
}

TEST_CASE("chain feature dimension grows by one per step and chaining is live") {
    const MatrixXd X = random_matrix(20, 3);
    const MatrixXd Y = random_matrix(20, 3);
    const auto opts = options_for(multitask::Family::KRR);
    auto m = multitask::fit_multitask(multitask::Mode::Chain, opts, X, Y);
    REQUIRE(m.chain_X.size() == 3);
    for (int c = 0; c < 3; ++c) CHECK(m.chain_X[static_cast<std::size_t>(c)].cols() == 3 + c);

    // perturbing the step-1 model must move the step-2 prediction
    const VectorXd xs = random_vector(3);
    const auto before = multitask::predict_multitask(m, xs);
    m.krr_alpha[0] *= 1.5;
    const auto after = multitask::predict_multitask(m, xs);
    CHECK(std::abs(before.mean(1) - after.mean(1)) > 1e-10);
}

TEST_CASE("joint mode with identity correlation equals independent, all families") {
    const int C = 2, N = 14;
    const MatrixXd X = random_matrix(N, 2);
    const MatrixXd Y = random_matrix(N, C);
    kernels::CorrelationMatrix id;
    id.entries = MatrixXd::Identity(C, C);
    id.horizons = C;

    MatrixXd Yshared(N, C);
    Yshared << Y.col(0), Y.col(0);

    for (auto fam : {multitask::Family::KRR, multitask::Family::GPR, multitask::Family::SVR,
                     multitask::Family::RVM}) {
        auto ind_opts = options_for(fam);
        auto joint_opts = ind_opts;
        // the stacked ridge uses gamma/(C N); matching the independent
        // regularizer gamma'/N requires gamma' = gamma/C
        ind_opts.ridge_gamma = joint_opts.ridge_gamma / C;
        // the stacked RVM estimates one noise across tasks, so the
        // equivalence needs targets whose per-task fits share that noise
        const MatrixXd& Yf = fam == multitask::Family::RVM ? Yshared : Y;
        const auto joint =
            multitask::fit_multitask(multitask::Mode::Joint, joint_opts, X, Yf, &id);
        const auto ind = multitask::fit_multitask(multitask::Mode::Independent, ind_opts, X, Yf);
        for (int t = 0; t < 5; ++t) {
            const VectorXd xs = random_vector(2);
            const auto pj = multitask::predict_multitask(joint, xs);
            const auto pi = multitask::predict_multitask(ind, xs);
            for (int c = 0; c < C; ++c) CHECK(std::abs(pj.mean(c) - pi.mean(c)) <= 1e-6);
        }
    }
}

TEST_CASE("chain beats independent when later horizons depend on earlier targets") {
    // horizon 1 is learnable from x; horizon 2 is a sharp function of the
    // horizon-1 target with noise dimensions only
    const int N = 60;
    std::normal_distribution<double> dist(0.0, 1.0);
    MatrixXd X(N, 3);
    MatrixXd Y(N, 2);
    for (int i = 0; i < N; ++i) {
        X(i, 0) = dist(g_rng);
        X(i, 1) = dist(g_rng);
        X(i, 2) = dist(g_rng);
        Y(i, 0) = std::sin(1.5 * X(i, 0));
        Y(i, 1) = std::tanh(3.0 * Y(i, 0));
    }
    const MatrixXd Xtr = X.topRows(40), Xte = X.bottomRows(20);
    const MatrixXd Ytr = Y.topRows(40), Yte = Y.bottomRows(20);

    const auto opts = options_for(multitask::Family::KRR);
    const auto chain = multitask::fit_multitask(multitask::Mode::Chain, opts, Xtr, Ytr);
    const auto ind = multitask::fit_multitask(multitask::Mode::Independent, opts, Xtr, Ytr);
    double err_chain = 0.0, err_ind = 0.0;
    for (int i = 0; i < 20; ++i) {
        const VectorXd xs = Xte.row(i).transpose();
        err_chain += std::pow(multitask::predict_multitask(chain, xs).mean(1) - Yte(i, 1), 2);
        err_ind += std::pow(multitask::predict_multitask(ind, xs).mean(1) - Yte(i, 1), 2);
    }
    CHECK(err_chain < err_ind);
}

TEST_CASE("chained predictions are deterministic") {
    const MatrixXd X = random_matrix(18, 2);
    const MatrixXd Y = random_matrix(18, 3);
    const auto opts = options_for(multitask::Family::GPR);
    const auto m1 = multitask::fit_multitask(multitask::Mode::Chain, opts, X, Y);
    const auto m2 = multitask::fit_multitask(multitask::Mode::Chain, opts, X, Y);
    const VectorXd xs = random_vector(2);
    const auto p1 = multitask::predict_multitask(m1, xs);
    const auto p2 = multitask::predict_multitask(m2, xs);
    CHECK((p1.mean - p2.mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK(p1.has_variance);
}

TEST_CASE("joint mode requires a correlation matrix and output length is always C") {
    const MatrixXd X = random_matrix(10, 2);
    const MatrixXd Y = random_matrix(10, 4);
    const auto opts = options_for(multitask::Family::KRR);
    CHECK_THROWS(multitask::fit_multitask(multitask::Mode::Joint, opts, X, Y));
    const auto corr = kernels::correlation_matrix(4, 1.0);
    const auto m = multitask::fit_multitask(multitask::Mode::Joint, opts, X, Y, &corr);
    CHECK(multitask::predict_multitask(m, random_vector(2)).mean.size() == 4);
    CHECK_THROWS(multitask::predict_multitask(m, random_vector(3)));
}

TEST_CASE("expert dispatch routes purely by label") {
    const MatrixXd X = random_matrix(12, 2);
    const MatrixXd Y = random_matrix(12, 2);
    const auto opts = options_for(multitask::Family::KRR);

    multitask::ExpertBank bank;
    for (const auto& cond : multitask::sky_conditions()) {
        MatrixXd Yc = Y;
        if (cond == "nimbus") Yc *= 2.0;  // make one expert distinguishable
        bank.experts[cond] = multitask::fit_multitask(multitask::Mode::Independent, opts, X, Yc);
    }
    bank.validate();

    const VectorXd xs = random_vector(2);
    const auto clear = multitask::dispatch_expert(bank, "clear", xs);
    const auto direct = multitask::predict_multitask(bank.experts.at("clear"), xs);
    CHECK((clear.mean - direct.mean).cwiseAbs().maxCoeff() == 0.0);
    const auto nimbus = multitask::dispatch_expert(bank, "nimbus", xs);
    CHECK((nimbus.mean - 2.0 * clear.mean).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK_THROWS(multitask::dispatch_expert(bank, "fog", xs));

    multitask::ExpertBank partial;
    partial.experts["clear"] = bank.experts.at("clear");
    CHECK_THROWS(partial.validate());
}
