#include "solarkm/multitask.hpp"

#include <stdexcept>

namespace solarkm::multitask {

namespace {

struct BaseModel {
    VectorXd krr_alpha;
    dense::GprPosterior gpr;
    sparse::SvrModel svr;
    sparse::RvmModel rvm;
};

void fit_base(Family family, const FitOptions& opts, const MatrixXd& X, const VectorXd& y,
              VectorXd& krr_alpha, dense::GprPosterior& gpr, sparse::SvrModel& svr,
              sparse::RvmModel& rvm) {
    const auto K = kernels::gram(opts.spec, X);
    switch (family) {
        case Family::KRR:
            krr_alpha = dense::fit_krr(K, y, opts.ridge_gamma / static_cast<double>(X.rows()));
            break;
        case Family::GPR:
            gpr = dense::gpr_posterior(K, y, opts.noise);
            break;
        case Family::SVR:
            svr = sparse::fit_svr(K, y, opts.box, opts.epsilon, opts.svr);
            break;
        case Family::RVM:
            rvm = sparse::fit_rvm(K.entries, y, opts.rvm);
            break;
    }
}

void predict_base(const MultiTaskModel& m, std::size_t idx, const MatrixXd& Xtrain,
                  const VectorXd& x, double& mean, double& var, bool& has_var) {
    const VectorXd k = kernels::kernel_vector(m.options.spec, Xtrain, x);
    switch (m.options.family) {
        case Family::KRR:
            mean = dense::predict_dense(m.krr_alpha[idx], k);
            break;
        case Family::GPR: {
            const double kss = kernels::eval_kernel(m.options.spec, x, x);
            const auto p = dense::gpr_predict(m.gpr[idx], k, kss);
            mean = p.mean;
            var = p.variance;
            has_var = true;
            break;
        }
        case Family::SVR:
            mean = sparse::predict_svr(m.svr[idx], k);
            break;
        case Family::RVM: {
            const auto p = sparse::predict_rvm(m.rvm[idx], k);
            mean = p.mean;
            var = p.variance;
            has_var = true;
            break;
        }
    }
}

VectorXd stack_targets(const MatrixXd& Y) {
    const Eigen::Index n = Y.rows(), c = Y.cols();
    VectorXd y(n * c);
    for (Eigen::Index t = 0; t < c; ++t) y.segment(t * n, n) = Y.col(t);
    return y;
}

}  // namespace

MultiTaskModel fit_multitask(Mode mode, const FitOptions& options, const MatrixXd& X,
                             const MatrixXd& Y, const kernels::CorrelationMatrix* corr) {
    if (X.rows() != Y.rows()) throw std::invalid_argument("fit_multitask: X/Y row mismatch");
    if (Y.cols() < 1) throw std::invalid_argument("fit_multitask: at least one horizon required");
    options.spec.validate();

    MultiTaskModel m;
    m.mode = mode;
    m.horizons = static_cast<int>(Y.cols());
    m.options = options;
    const int C = m.horizons;

    if (mode == Mode::Joint) {
        if (corr == nullptr)
            throw std::invalid_argument("fit_multitask: Joint mode needs a correlation matrix");
        if (corr->horizons != C)
            throw std::invalid_argument("fit_multitask: correlation horizon count mismatch");
        m.corr = *corr;
        m.X = X;
        const auto K = kernels::gram(options.spec, X);
        const VectorXd y = stack_targets(Y);
        switch (options.family) {
            case Family::KRR: {
                const auto Kt = kernels::kron_expand(m.corr, K);
                m.krr_alpha.push_back(dense::fit_krr(
                    Kt, y, options.ridge_gamma / static_cast<double>(C * X.rows())));
                break;
            }
            case Family::GPR:
                m.mt_gpr = dense::fit_mt_gpr(K, y, VectorXd::Constant(C, options.noise), m.corr);
                break;
            case Family::SVR:
                m.svr.push_back(
                    sparse::fit_mt_svr(K, y, options.box, options.epsilon, m.corr, options.svr));
                break;
            case Family::RVM:
                m.rvm.push_back(sparse::fit_mt_rvm(K, y, m.corr, options.rvm));
                break;
        }
        return m;
    }

    if (mode == Mode::Independent) {
        m.X = X;
        for (int c = 0; c < C; ++c) {
            VectorXd alpha;
            dense::GprPosterior gpr;
            sparse::SvrModel svr;
            sparse::RvmModel rvm;
            fit_base(options.family, options, X, Y.col(c), alpha, gpr, svr, rvm);
            switch (options.family) {
                case Family::KRR: m.krr_alpha.push_back(std::move(alpha)); break;
                case Family::GPR: m.gpr.push_back(std::move(gpr)); break;
                case Family::SVR: m.svr.push_back(std::move(svr)); break;
                case Family::RVM: m.rvm.push_back(std::move(rvm)); break;
            }
        }
        return m;
    }

    // Chain: step c sees the true targets of horizons 0..c-1 as extra columns.
    for (int c = 0; c < C; ++c) {
        MatrixXd Xc(X.rows(), X.cols() + c);
        Xc.leftCols(X.cols()) = X;
        for (int p = 0; p < c; ++p) Xc.col(X.cols() + p) = Y.col(p);
        VectorXd alpha;
        dense::GprPosterior gpr;
        sparse::SvrModel svr;
        sparse::RvmModel rvm;
        fit_base(options.family, options, Xc, Y.col(c), alpha, gpr, svr, rvm);
        switch (options.family) {
            case Family::KRR: m.krr_alpha.push_back(std::move(alpha)); break;
            case Family::GPR: m.gpr.push_back(std::move(gpr)); break;
            case Family::SVR: m.svr.push_back(std::move(svr)); break;
            case Family::RVM: m.rvm.push_back(std::move(rvm)); break;
        }
        m.chain_X.push_back(std::move(Xc));
    }
    return m;
}

Prediction predict_multitask(const MultiTaskModel& m, const VectorXd& xstar) {
    const int C = m.horizons;
    Prediction out;
    out.mean = VectorXd::Zero(C);
    out.variance = VectorXd::Zero(C);

    if (m.mode == Mode::Joint) {
        if (xstar.size() != m.X.cols())
            throw std::invalid_argument("predict_multitask: feature dimension mismatch");
        const VectorXd k = kernels::kernel_vector(m.options.spec, m.X, xstar);
        switch (m.options.family) {
            case Family::KRR:
                out.mean = dense::predict_dense_mt(m.krr_alpha[0], m.corr, k);
                break;
            case Family::GPR: {
                const double kss = kernels::eval_kernel(m.options.spec, xstar, xstar);
                const auto p = dense::mt_gpr_predict(m.mt_gpr, k, kss);
                out.mean = p.mean;
                out.variance = p.covariance.diagonal();
                out.has_variance = true;
                break;
            }
            case Family::SVR:
                out.mean = sparse::predict_mt_svr(m.svr[0], m.corr, k);
                break;
            case Family::RVM: {
                const auto preds = sparse::predict_mt_rvm(m.rvm[0], m.corr, k, m.X.rows());
                for (int c = 0; c < C; ++c) {
                    out.mean(c) = preds[static_cast<std::size_t>(c)].mean;
                    out.variance(c) = preds[static_cast<std::size_t>(c)].variance;
                }
                out.has_variance = true;
                break;
            }
        }
        return out;
    }

    if (m.mode == Mode::Independent) {
        if (xstar.size() != m.X.cols())
            throw std::invalid_argument("predict_multitask: feature dimension mismatch");
        for (int c = 0; c < C; ++c) {
            double mean = 0.0, var = 0.0;
            bool hv = false;
            predict_base(m, static_cast<std::size_t>(c), m.X, xstar, mean, var, hv);
            out.mean(c) = mean;
            out.variance(c) = var;
            out.has_variance = hv;
        }
        return out;
    }

    // Chain: feed each step's prediction into the next one's feature vector.
    if (xstar.size() + 0 != m.chain_X[0].cols())
        throw std::invalid_argument("predict_multitask: feature dimension mismatch");
    VectorXd x = xstar;
    for (int c = 0; c < C; ++c) {
        double mean = 0.0, var = 0.0;
        bool hv = false;
        predict_base(m, static_cast<std::size_t>(c), m.chain_X[static_cast<std::size_t>(c)], x,
                     mean, var, hv);
        out.mean(c) = mean;
        out.variance(c) = var;
        out.has_variance = hv;
        if (c + 1 < C) {
            VectorXd grown(x.size() + 1);
            grown << x, mean;
            x = std::move(grown);
        }
    }
    return out;
}

MatrixXd predict_matrix(const MultiTaskModel& model, const MatrixXd& Xstar) {
    MatrixXd out(Xstar.rows(), model.horizons);
    for (Eigen::Index i = 0; i < Xstar.rows(); ++i)
        out.row(i) = predict_multitask(model, Xstar.row(i).transpose()).mean.transpose();
    return out;
}

const std::vector<std::string>& sky_conditions() {
    static const std::vector<std::string> kConditions = {"clear", "cumulus", "stratus", "nimbus"};
    return kConditions;
}

void ExpertBank::validate() const {
    int horizons = -1;
    for (const auto& cond : sky_conditions()) {
        const auto it = experts.find(cond);
        if (it == experts.end())
            throw std::runtime_error("ExpertBank: missing expert for condition " + cond);
        if (horizons < 0) horizons = it->second.horizons;
        if (it->second.horizons != horizons)
            throw std::runtime_error("ExpertBank: experts disagree on horizon count");
    }
}

Prediction dispatch_expert(const ExpertBank& bank, const std::string& condition,
                           const VectorXd& xstar) {
    const auto it = bank.experts.find(condition);
    if (it == bank.experts.end())
        throw std::invalid_argument("dispatch_expert: unknown sky condition " + condition);
    return predict_multitask(it->second, xstar);
}

}  // namespace solarkm::multitask
