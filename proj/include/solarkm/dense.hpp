#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "solarkm/kernels.hpp"

namespace solarkm::dense {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using kernels::CorrelationMatrix;
using kernels::GramMatrix;
using kernels::KernelSpec;

struct GaussianPrediction {
    double mean = 0.0;
    double variance = 0.0;
};

struct MultiTaskGaussianPrediction {
    VectorXd mean;
    MatrixXd covariance;
};

/// Closed-form ridge solution alpha = (K + lambda I)^{-1} y via LLT.
/// lambda encodes gamma/N (single-task) or gamma/(CN) (multi-task).
VectorXd fit_krr(const GramMatrix& K, const VectorXd& y, double lambda);

/// Single-task prediction dot(alpha, k(x*)).
double predict_dense(const VectorXd& alpha, const VectorXd& kvec);

/// Multi-task prediction: task c gets sum_{c'} Gamma(c,c') * sum_i alpha[c'N+i] k_i.
VectorXd predict_dense_mt(const VectorXd& alpha_tilde, const CorrelationMatrix& corr,
                          const VectorXd& kvec);

/// GPR posterior over the dual weights; keeps the Cholesky factor of
/// (K + noise I) for predictive variances.
struct GprPosterior {
    VectorXd alpha;
    MatrixXd chol_lower;  // L with L L^T = K + noise I
    double noise = 0.0;
};

GprPosterior gpr_posterior(const GramMatrix& K, const VectorXd& y, double noise_variance);

/// Predictive mean/variance at a test point. Negative round-off variance is
/// clamped to zero (magnitude must stay below ~1e-10).
GaussianPrediction gpr_predict(const GprPosterior& post, const VectorXd& kvec, double kss);

/// Marginal log likelihood -1/2 y'a - 1/2 log|K + noise I| - N/2 log 2pi,
/// evaluated through the Cholesky factor.
double gpr_mll(const GramMatrix& K, const VectorXd& y, double noise_variance);

/// Analytic MLL gradient: one entry per free kernel hyperparameter of the
/// family (gamma, then beta or alpha if present), and the noise variance last.
/// Entry order matches hyper_names().
VectorXd gpr_mll_grad(const KernelSpec& spec, const MatrixXd& X, const VectorXd& y,
                      double noise_variance, double jitter = kernels::kDefaultJitter);

std::vector<const char*> hyper_names(const KernelSpec& spec);

struct GprHyperResult {
    KernelSpec spec;
    double noise = 0.0;
    double mll = 0.0;
    bool improved_over_seeds = true;
};

/// Multi-start gradient ascent on the MLL in log-hyperparameter space,
/// seeded from a small grid. The returned MLL is >= the MLL of every seed.
GprHyperResult optimize_gpr_hypers(const KernelSpec& spec_template, const MatrixXd& X,
                                   const VectorXd& y,
                                   const std::vector<double>& gamma_seeds,
                                   const std::vector<double>& noise_seeds,
                                   double jitter = kernels::kDefaultJitter);

/// Multi-task GPR over the stacked system (Gamma (x) K + Sigma_n (x) I).
struct MtGprPosterior {
    VectorXd alpha;        // length CN, stacked task-major
    MatrixXd chol_lower;   // factor of the stacked system
    CorrelationMatrix corr;
    VectorXd noises;       // per-task noise variances
    Eigen::Index n = 0;    // training-set size
};

MtGprPosterior fit_mt_gpr(const GramMatrix& K, const VectorXd& y_stacked,
                          const VectorXd& noise_variances, const CorrelationMatrix& corr);

MultiTaskGaussianPrediction mt_gpr_predict(const MtGprPosterior& post, const VectorXd& kvec,
                                           double kss);

double mt_gpr_mll(const GramMatrix& K, const VectorXd& y_stacked,
                  const VectorXd& noise_variances, const CorrelationMatrix& corr);

struct MtGprHyperResult {
    double length_scale = 1.0;
    VectorXd noises;
    double mll = 0.0;
};

/// Selects the correlation length scale and per-task noises by maximizing the
/// stacked MLL (numeric gradients in log space, grid-seeded).
MtGprHyperResult optimize_mt_gpr_hypers(const GramMatrix& K, const VectorXd& y_stacked,
                                        int horizons,
                                        const std::vector<double>& length_scale_seeds,
                                        const std::vector<double>& noise_seeds);

}  // namespace solarkm::dense
