#pragma once

#include <Eigen/Dense>
#include <vector>

#include "solarkm/dense.hpp"
#include "solarkm/kernels.hpp"

namespace solarkm::sparse {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;
using dense::GaussianPrediction;
using kernels::CorrelationMatrix;
using kernels::GramMatrix;

/// epsilon-insensitive SVR solved as a dual QP by SMO with max-violating-pair
/// selection. beta_i = alpha_i - alpha*_i; task_bias has one entry per task
/// (a single entry for the single-task problem).
struct SvrModel {
    VectorXd beta;
    VectorXd task_bias;
    double box = 1.0;
    double epsilon = 0.1;
    int tasks = 1;
    // diagnostics
    int iterations = 0;
    double duality_gap = 0.0;
    double dual_objective = 0.0;
    bool converged = true;
};

struct SvrOptions {
    double tol = 1e-8;       // max KKT violation at exit
    long max_iterations = 2'000'000;
};

SvrModel fit_svr(const GramMatrix& K, const VectorXd& y, double box, double epsilon,
                 const SvrOptions& opts = {});

/// Multi-task SVR on the stacked Gram matrix Gamma (x) K with one equality
/// constraint (and bias) per task. Shared box and epsilon across tasks.
SvrModel fit_mt_svr(const GramMatrix& K, const VectorXd& y_stacked, double box, double epsilon,
                    const CorrelationMatrix& corr, const SvrOptions& opts = {});

/// Single-task prediction sum_i beta_i k_i + b.
double predict_svr(const SvrModel& model, const VectorXd& kvec);

/// Multi-task prediction; kvec is the plain k(x*) against the N training
/// points, expanded internally through the correlation matrix.
VectorXd predict_mt_svr(const SvrModel& model, const CorrelationMatrix& corr,
                        const VectorXd& kvec);

/// Relevance vector machine fitted by iterating the evidence updates
/// (relevance gamma_i, precision lambda_i, noise) with pruning at
/// lambda_i > 1e12. Stops once 25 consecutive iterations bring neither a new
/// minimum of the sum of squared residuals nor a pruning event; the returned
/// iterate is the best one observed since the active set last changed, so it
/// always carries the converged (sparsest) active set.
struct RvmModel {
    std::vector<int> active;  // indices into the original design columns
    VectorXd mu;              // posterior mean, one entry per active column
    MatrixXd sigma;           // posterior covariance over active columns
    double noise = 0.0;
    double best_ssr = 0.0;
    int iterations = 0;
};

struct RvmOptions {
    double prune_threshold = 1e12;
    int patience = 25;
    int max_iterations = 1000;
    double init_lambda = 1.0;
};

RvmModel fit_rvm(const MatrixXd& design, const VectorXd& y, const RvmOptions& opts = {});

/// design_row is the full-length kernel vector against the original training
/// points; only active entries contribute.
GaussianPrediction predict_rvm(const RvmModel& model, const VectorXd& design_row);

/// Multi-task RVM over the stacked design Gamma (x) K; noise denominator
/// becomes CN - sum gamma_i through the generic fit.
RvmModel fit_mt_rvm(const GramMatrix& K, const VectorXd& y_stacked,
                    const CorrelationMatrix& corr, const RvmOptions& opts = {});

std::vector<GaussianPrediction> predict_mt_rvm(const RvmModel& model,
                                               const CorrelationMatrix& corr,
                                               const VectorXd& kvec, Eigen::Index n_train);

}  // namespace solarkm::sparse
