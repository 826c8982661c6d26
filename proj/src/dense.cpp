#include "solarkm/dense.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace solarkm::dense {

namespace {

Eigen::LLT<MatrixXd> factorize(const MatrixXd& A, const char* what) {
    Eigen::LLT<MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error(std::string(what) + ": Cholesky factorization failed (system "
                                                     "not positive definite)");
    return llt;
}

double log_det_from_llt(const Eigen::LLT<MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

VectorXd fit_krr(const GramMatrix& K, const VectorXd& y, double lambda) {
    if (K.entries.rows() != y.size()) throw std::invalid_argument("fit_krr: size mismatch");
    if (lambda < 0.0) throw std::invalid_argument("fit_krr: lambda must be >= 0");
    MatrixXd A = K.entries;
    A.diagonal().array() += lambda;
    auto llt = factorize(A, "fit_krr");
    VectorXd alpha = llt.solve(y);
    // One refinement step keeps the residual at solver precision.
    alpha += llt.solve(y - A * alpha);
    const double ynorm = y.lpNorm<Eigen::Infinity>();
    const double res = (A * alpha - y).lpNorm<Eigen::Infinity>();
    if (ynorm > 0.0 && res > 1e-8 * ynorm)
        throw std::runtime_error("fit_krr: ill-conditioned system, residual too large");
    return alpha;
}

double predict_dense(const VectorXd& alpha, const VectorXd& kvec) {
    if (alpha.size() != kvec.size()) throw std::invalid_argument("predict_dense: size mismatch");
    return alpha.dot(kvec);
}

VectorXd predict_dense_mt(const VectorXd& alpha_tilde, const CorrelationMatrix& corr,
                          const VectorXd& kvec) {
    const int C = corr.horizons;
    const Eigen::Index n = kvec.size();
    if (alpha_tilde.size() != C * n)
        throw std::invalid_argument("predict_dense_mt: size mismatch");
    VectorXd s(C);
    for (int c = 0; c < C; ++c) s(c) = alpha_tilde.segment(c * n, n).dot(kvec);
    return corr.entries * s;
}

GprPosterior gpr_posterior(const GramMatrix& K, const VectorXd& y, double noise_variance) {
    if (noise_variance <= 0.0)
        throw std::invalid_argument("gpr_posterior: noise variance must be > 0");
    if (K.entries.rows() != y.size()) throw std::invalid_argument("gpr_posterior: size mismatch");
    MatrixXd A = K.entries;
    A.diagonal().array() += noise_variance;
    auto llt = factorize(A, "gpr_posterior");
    GprPosterior post;
    post.alpha = llt.solve(y);
    post.chol_lower = llt.matrixL();
    post.noise = noise_variance;
    return post;
}

GaussianPrediction gpr_predict(const GprPosterior& post, const VectorXd& kvec, double kss) {
    GaussianPrediction out;
    out.mean = post.alpha.dot(kvec);
    const VectorXd v = post.chol_lower.triangularView<Eigen::Lower>().solve(kvec);
    double var = kss - v.squaredNorm();
    if (var < 0.0) {
        if (var < -1e-10) throw std::runtime_error("gpr_predict: variance clamp exceeded");
        var = 0.0;
    }
    out.variance = var;
    return out;
}

double gpr_mll(const GramMatrix& K, const VectorXd& y, double noise_variance) {
    if (noise_variance <= 0.0) throw std::invalid_argument("gpr_mll: noise variance must be > 0");
    MatrixXd A = K.entries;
    A.diagonal().array() += noise_variance;
    auto llt = factorize(A, "gpr_mll");
    const VectorXd alpha = llt.solve(y);
    const double n = static_cast<double>(y.size());
    return -0.5 * y.dot(alpha) - 0.5 * log_det_from_llt(llt) - 0.5 * n * std::log(2.0 * M_PI);
}

std::vector<const char*> hyper_names(const KernelSpec& spec) {
    std::vector<const char*> names{"gamma"};
    if (spec.family == kernels::KernelFamily::Polynomial) names.push_back("beta");
    if (spec.family == kernels::KernelFamily::RationalQuadratic) names.push_back("alpha");
    names.push_back("noise");
    return names;
}

VectorXd gpr_mll_grad(const KernelSpec& spec, const MatrixXd& X, const VectorXd& y,
                      double noise_variance, double jitter) {
    const Eigen::Index n = X.rows();
    GramMatrix K = kernels::gram(spec, X, jitter);
    MatrixXd A = K.entries;
    A.diagonal().array() += noise_variance;
    auto llt = factorize(A, "gpr_mll_grad");
    const VectorXd alpha = llt.solve(y);
    const MatrixXd Ainv = llt.solve(MatrixXd::Identity(n, n));
    const MatrixXd M = alpha * alpha.transpose() - Ainv;

    const auto names = hyper_names(spec);
    VectorXd grad(static_cast<Eigen::Index>(names.size()));
    // dMLL/dtheta = 1/2 tr(M dA/dtheta)
    auto trace_against = [&](double (*dk)(const KernelSpec&, const VectorXd&, const VectorXd&)) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                acc += M(i, j) * dk(spec, X.row(j), X.row(i));
        return 0.5 * acc;
    };
    Eigen::Index g = 0;
    grad(g++) = trace_against(&kernels::eval_kernel_dgamma);
    if (spec.family == kernels::KernelFamily::Polynomial)
        grad(g++) = trace_against(&kernels::eval_kernel_dbeta);
    if (spec.family == kernels::KernelFamily::RationalQuadratic)
        grad(g++) = trace_against(&kernels::eval_kernel_dalpha);
    grad(g) = 0.5 * M.trace();
    return grad;
}

namespace {

struct LogParams {
    KernelSpec spec;
    double noise;

    VectorXd pack() const {
        std::vector<double> v{std::log(spec.gamma)};
        if (spec.family == kernels::KernelFamily::Polynomial) v.push_back(std::log(spec.beta));
        if (spec.family == kernels::KernelFamily::RationalQuadratic)
            v.push_back(std::log(spec.alpha));
        v.push_back(std::log(noise));
        return Eigen::Map<VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }

    void unpack(const VectorXd& v) {
        Eigen::Index g = 0;
        spec.gamma = std::exp(v(g++));
        if (spec.family == kernels::KernelFamily::Polynomial) spec.beta = std::exp(v(g++));
        if (spec.family == kernels::KernelFamily::RationalQuadratic)
            spec.alpha = std::exp(v(g++));
        noise = std::exp(v(g));
    }
};

}  // namespace

GprHyperResult optimize_gpr_hypers(const KernelSpec& spec_template, const MatrixXd& X,
                                   const VectorXd& y,
                                   const std::vector<double>& gamma_seeds,
                                   const std::vector<double>& noise_seeds, double jitter) {
    if (X.rows() == 0) throw std::invalid_argument("optimize_gpr_hypers: empty data");
    if (gamma_seeds.empty() || noise_seeds.empty())
        throw std::invalid_argument("optimize_gpr_hypers: empty seed grid");

    auto mll_of = [&](const LogParams& p) -> double {
        try {
            return gpr_mll(kernels::gram(p.spec, X, jitter), y, p.noise);
        } catch (const std::runtime_error&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    double best_seed_mll = -std::numeric_limits<double>::infinity();
    LogParams best{spec_template, noise_seeds.front()};
    double best_mll = -std::numeric_limits<double>::infinity();

    for (double gs : gamma_seeds) {
        for (double ns : noise_seeds) {
            LogParams p{spec_template, ns};
            p.spec.gamma = gs;
            double f = mll_of(p);
            if (f > best_seed_mll) best_seed_mll = f;
            if (!std::isfinite(f)) continue;

            // Gradient ascent in log space with backtracking.
            VectorXd theta = p.pack();
            for (int it = 0; it < 200; ++it) {
                p.unpack(theta);
                VectorXd g;
                try {
                    g = gpr_mll_grad(p.spec, X, y, p.noise, jitter);
                } catch (const std::runtime_error&) {
                    break;
                }
                // chain rule for log-space parameters
                VectorXd glog = g.cwiseProduct(theta.array().exp().matrix());
                if (glog.lpNorm<Eigen::Infinity>() < 1e-7) break;
                double step = 0.5;
                bool moved = false;
                for (int bt = 0; bt < 25; ++bt) {
                    LogParams q = p;
                    VectorXd cand = theta + step * glog;
                    // keep hyperparameters in a sane range
                    cand = cand.cwiseMax(-25.0).cwiseMin(25.0);
                    q.unpack(cand);
                    const double fc = mll_of(q);
                    if (fc > f + 1e-12) {
                        theta = cand;
                        f = fc;
                        moved = true;
                        break;
                    }
                    step *= 0.5;
                }
                if (!moved) break;
            }
            p.unpack(theta);
            if (f > best_mll) {
                best_mll = f;
                best = p;
            }
        }
    }

    GprHyperResult out;
    out.spec = best.spec;
    out.noise = best.noise;
    out.mll = best_mll;
    out.improved_over_seeds = best_mll > best_seed_mll;
    if (best_mll < best_seed_mll)
        throw std::runtime_error("optimize_gpr_hypers: lost ground against seeds");
    return out;
}

MtGprPosterior fit_mt_gpr(const GramMatrix& K, const VectorXd& y_stacked,
                          const VectorXd& noise_variances, const CorrelationMatrix& corr) {
    const Eigen::Index n = K.entries.rows();
    const int C = corr.horizons;
    if (y_stacked.size() != C * n) throw std::invalid_argument("fit_mt_gpr: size mismatch");
    if (noise_variances.size() != C)
        throw std::invalid_argument("fit_mt_gpr: one noise variance per task required");
    if ((noise_variances.array() <= 0.0).any())
        throw std::invalid_argument("fit_mt_gpr: noise variances must be > 0");
    MatrixXd A = kernels::kron(corr.entries, K.entries);
    for (int c = 0; c < C; ++c)
        A.diagonal().segment(c * n, n).array() += noise_variances(c);
    auto llt = factorize(A, "fit_mt_gpr");
    MtGprPosterior post;
    post.alpha = llt.solve(y_stacked);
    post.chol_lower = llt.matrixL();
    post.corr = corr;
    post.noises = noise_variances;
    post.n = n;
    return post;
}

MultiTaskGaussianPrediction mt_gpr_predict(const MtGprPosterior& post, const VectorXd& kvec,
                                           double kss) {
    const int C = post.corr.horizons;
    const Eigen::Index n = post.n;
    if (kvec.size() != n) throw std::invalid_argument("mt_gpr_predict: size mismatch");
    // columns of Gamma (x) k(x*): block c' of column c is Gamma(c',c) * k
    MatrixXd Kstar(C * n, C);
    for (int c = 0; c < C; ++c)
        for (int cp = 0; cp < C; ++cp)
            Kstar.col(c).segment(cp * n, n) = post.corr.entries(cp, c) * kvec;

    MultiTaskGaussianPrediction out;
    out.mean = Kstar.transpose() * post.alpha;
    const MatrixXd V = post.chol_lower.triangularView<Eigen::Lower>().solve(Kstar);
    MatrixXd cov = post.corr.entries * kss - V.transpose() * V;
    out.covariance = 0.5 * (cov + cov.transpose());
    return out;
}

double mt_gpr_mll(const GramMatrix& K, const VectorXd& y_stacked,
                  const VectorXd& noise_variances, const CorrelationMatrix& corr) {
    const Eigen::Index n = K.entries.rows();
    const int C = corr.horizons;
    MatrixXd A = kernels::kron(corr.entries, K.entries);
    for (int c = 0; c < C; ++c)
        A.diagonal().segment(c * n, n).array() += noise_variances(c);
    auto llt = factorize(A, "mt_gpr_mll");
    const VectorXd alpha = llt.solve(y_stacked);
    const double cn = static_cast<double>(C * n);
    return -0.5 * y_stacked.dot(alpha) - 0.5 * log_det_from_llt(llt) -
           0.5 * cn * std::log(2.0 * M_PI);
}

MtGprHyperResult optimize_mt_gpr_hypers(const GramMatrix& K, const VectorXd& y_stacked,
                                        int horizons,
                                        const std::vector<double>& length_scale_seeds,
                                        const std::vector<double>& noise_seeds) {
    const int C = horizons;
    auto mll_of = [&](double ell, const VectorXd& noises) -> double {
        try {
            return mt_gpr_mll(K, y_stacked, noises, kernels::correlation_matrix(C, ell));
        } catch (const std::exception&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    MtGprHyperResult best;
    best.mll = -std::numeric_limits<double>::infinity();
    for (double ell : length_scale_seeds) {
        for (double ns : noise_seeds) {
            VectorXd theta(C + 1);
            theta(0) = std::log(ell);
            theta.tail(C).setConstant(std::log(ns));
            auto eval = [&](const VectorXd& t) {
                return mll_of(std::exp(t(0)), t.tail(C).array().exp().matrix());
            };
            double f = eval(theta);
            if (!std::isfinite(f)) continue;
            for (int it = 0; it < 80; ++it) {
                // numeric gradient in log space
                VectorXd g(theta.size());
                const double h = 1e-5;
                for (Eigen::Index k = 0; k < theta.size(); ++k) {
                    VectorXd tp = theta, tm = theta;
                    tp(k) += h;
                    tm(k) -= h;
                    g(k) = (eval(tp) - eval(tm)) / (2.0 * h);
                }
                if (g.lpNorm<Eigen::Infinity>() < 1e-6) break;
                double step = 0.5;
                bool moved = false;
                for (int bt = 0; bt < 20; ++bt) {
                    VectorXd cand = (theta + step * g).cwiseMax(-20.0).cwiseMin(20.0);
                    const double fc = eval(cand);
                    if (fc > f + 1e-12) {
                        theta = cand;
                        f = fc;
                        moved = true;
                        break;
                    }
                    step *= 0.5;
                }
                if (!moved) break;
            }
            if (f > best.mll) {
                best.mll = f;
                best.length_scale = std::exp(theta(0));
                best.noises = theta.tail(C).array().exp().matrix();
            }
        }
    }
    if (!std::isfinite(best.mll))
        throw std::runtime_error("optimize_mt_gpr_hypers: no feasible seed");
    return best;
}

}  // namespace solarkm::dense
