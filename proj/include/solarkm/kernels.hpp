#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace solarkm::kernels {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class KernelFamily { Linear, Polynomial, RBF, RationalQuadratic, Matern };

enum class MaternNu { Half, ThreeHalves, FiveHalves };

/// Kernel family plus its hyperparameters. The RBF, RQ and Matern kernels
/// operate on the *squared* Euclidean distance gamma * ||x - x'||^2, which
/// differs from the textbook parametrization on plain distance; the whole
/// library follows that convention consistently.
struct KernelSpec {
    KernelFamily family = KernelFamily::RBF;
    double gamma = 1.0;
    double beta = 1.0;        // Polynomial offset
    double alpha = 1.0;       // RationalQuadratic shape
    MaternNu nu = MaternNu::Half;
    int degree = 2;           // fixed to 2 for Polynomial

    void validate() const;
};

struct GramMatrix {
    MatrixXd entries;
    double jitter = 0.0;
};

/// Inter-task correlation matrix with entries
/// gamma_{i,j} = exp((C - |i - j|) / (C * l)), symmetric and decaying in |i-j|.
struct CorrelationMatrix {
    MatrixXd entries;
    double length_scale = 1.0;
    int horizons = 1;
};

constexpr double kDefaultJitter = 1e-10;

double eval_kernel(const KernelSpec& spec, const VectorXd& x, const VectorXd& xp);

/// Derivatives of the kernel value with respect to each free hyperparameter,
/// used by the GPR evidence optimization.
double eval_kernel_dgamma(const KernelSpec& spec, const VectorXd& x, const VectorXd& xp);
double eval_kernel_dbeta(const KernelSpec& spec, const VectorXd& x, const VectorXd& xp);
double eval_kernel_dalpha(const KernelSpec& spec, const VectorXd& x, const VectorXd& xp);

GramMatrix gram(const KernelSpec& spec, const MatrixXd& X, double jitter = kDefaultJitter);

/// Cross-kernel column k(x*) against the rows of X.
VectorXd kernel_vector(const KernelSpec& spec, const MatrixXd& X, const VectorXd& xstar);

CorrelationMatrix correlation_matrix(int horizons, double length_scale);

/// Kronecker product Gamma (C x C) with K (N x N); block (c, c') is
/// gamma_{c,c'} * K. Stacking convention throughout: index = c * N + i.
GramMatrix kron_expand(const CorrelationMatrix& corr, const GramMatrix& K);

MatrixXd kron(const MatrixXd& A, const MatrixXd& B);

}  // namespace solarkm::kernels
