#include "solarkm/kernels.hpp"

#include <cmath>

#include "solarkm/simd/ops.hpp"

namespace solarkm::kernels {

void KernelSpec::validate() const {
    if (gamma <= 0.0) throw std::invalid_argument("kernel gamma must be > 0");
    switch (family) {
        case KernelFamily::Polynomial:
            if (beta <= 0.0) throw std::invalid_argument("polynomial beta must be > 0");
            if (degree != 2) throw std::invalid_argument("polynomial degree is fixed to 2");
            break;
        case KernelFamily::RationalQuadratic:
            if (alpha <= 0.0) throw std::invalid_argument("rational quadratic alpha must be > 0");
            break;
        default:
            break;
    }
}

namespace {

inline void check_dims(const VectorXd& x, const VectorXd& xp) {
    if (x.size() != xp.size()) throw std::invalid_argument("kernel input dimension mismatch");
}

// Matern on z = sqrt(2 nu) * gamma * ||x - x'||^2 using the half-integer
// closed forms; the nu = 1/2 case reduces to exp(-gamma ||x - x'||^2).
inline double matern_value(MaternNu nu, double g_sq_dist) {
    switch (nu) {
        case MaternNu::Half:
            return std::exp(-g_sq_dist);
        case MaternNu::ThreeHalves: {
            const double z = std::sqrt(3.0) * g_sq_dist;
            return (1.0 + z) * std::exp(-z);
        }
        case MaternNu::FiveHalves: {
            const double z = std::sqrt(5.0) * g_sq_dist;
            return (1.0 + z + z * z / 3.0) * std::exp(-z);
        }
    }
    return 0.0;
}

// d/dz of the closed forms above.
inline double matern_dvalue_dz(MaternNu nu, double z) {
    switch (nu) {
        case MaternNu::Half:
            return -std::exp(-z);
        case MaternNu::ThreeHalves:
            return -z * std::exp(-z);
        case MaternNu::FiveHalves:
            return -(z / 3.0) * (1.0 + z) * std::exp(-z);
    }
    return 0.0;
}

}  // namespace

double eval_kernel(const KernelSpec& spec, const VectorXd& x, const VectorXd& xp) {
    spec.validate();
    check_dims(x, xp);
    const auto n = static_cast<std::size_t>(x.size());
    switch (spec.family) {
        case KernelFamily::Linear:
            return spec.gamma * simd::dot(x.data(), xp.data(), n);
        case KernelFamily::Polynomial: {
            const double u = spec.gamma * simd::dot(x.data(), xp.data(), n) + spec.beta;
            return u * u;
        }
        case KernelFamily::RBF:
            return std::exp(-spec.gamma * simd::squared_distance(x.data(), xp.data(), n));
        case KernelFamily::RationalQuadratic: {
            const double u =
                spec.gamma * simd::squared_distance(x.data(), xp.data(), n) / (2.0 * spec.alpha);
            return std::pow(1.0 + u, -spec.alpha);
        }
        case KernelFamily::Matern:
            return matern_value(spec.nu, spec.gamma * simd::squared_distance(x.data(), xp.data(), n));
    }
    return 0.0;
}

double eval_kernel_dgamma(const KernelSpec& spec, const VectorXd& x, const VectorXd& xp) {
    spec.validate();
    check_dims(x, xp);
    const auto n = static_cast<std::size_t>(x.size());
    switch (spec.family) {
        case KernelFamily::Linear:
            return simd::dot(x.data(), xp.data(), n);
        case KernelFamily::Polynomial: {
            const double d = simd::dot(x.data(), xp.data(), n);
            return 2.0 * (spec.gamma * d + spec.beta) * d;
        }
        case KernelFamily::RBF: {
            const double d2 = simd::squared_distance(x.data(), xp.data(), n);
            return -d2 * std::exp(-spec.gamma * d2);
        }
        case KernelFamily::RationalQuadratic: {
            const double d2 = simd::squared_distance(x.data(), xp.data(), n);
            const double u = spec.gamma * d2 / (2.0 * spec.alpha);
            return -0.5 * d2 * std::pow(1.0 + u, -spec.alpha - 1.0);
        }
        case KernelFamily::Matern: {
            const double d2 = simd::squared_distance(x.data(), xp.data(), n);
            double scale = 1.0;
            if (spec.nu == MaternNu::ThreeHalves) scale = std::sqrt(3.0);
            if (spec.nu == MaternNu::FiveHalves) scale = std::sqrt(5.0);
            const double z = scale * spec.gamma * d2;
            return matern_dvalue_dz(spec.nu, z) * scale * d2;
        }
    }
    return 0.0;
}

double eval_kernel_dbeta(const KernelSpec& spec, const VectorXd& x, const VectorXd& xp) {
    spec.validate();
    check_dims(x, xp);
    if (spec.family != KernelFamily::Polynomial) return 0.0;
    const auto n = static_cast<std::size_t>(x.size());
    return 2.0 * (spec.gamma * simd::dot(x.data(), xp.data(), n) + spec.beta);
}

double eval_kernel_dalpha(const KernelSpec& spec, const VectorXd& x, const VectorXd& xp) {
    spec.validate();
    check_dims(x, xp);
    if (spec.family != KernelFamily::RationalQuadratic) return 0.0;
    const auto n = static_cast<std::size_t>(x.size());
    const double d2 = simd::squared_distance(x.data(), xp.data(), n);
    const double u = spec.gamma * d2 / (2.0 * spec.alpha);
    const double k = std::pow(1.0 + u, -spec.alpha);
    return k * (-std::log1p(u) + u / (1.0 + u));
}

GramMatrix gram(const KernelSpec& spec, const MatrixXd& X, double jitter) {
    spec.validate();
    if (X.rows() < 1) throw std::invalid_argument("gram: empty input matrix");
    if (jitter < 0.0) throw std::invalid_argument("gram: jitter must be >= 0");
    const Eigen::Index n = X.rows();
    GramMatrix out;
    out.jitter = jitter;
    out.entries.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const VectorXd xi = X.row(i);
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = eval_kernel(spec, xi, X.row(j));
            out.entries(i, j) = v;
            out.entries(j, i) = v;
        }
        out.entries(i, i) += jitter;
    }
    return out;
}

VectorXd kernel_vector(const KernelSpec& spec, const MatrixXd& X, const VectorXd& xstar) {
    const Eigen::Index n = X.rows();
    VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) k(i) = eval_kernel(spec, X.row(i), xstar);
    return k;
}

CorrelationMatrix correlation_matrix(int horizons, double length_scale) {
    if (horizons < 1) throw std::invalid_argument("correlation_matrix: horizons must be >= 1");
    if (length_scale <= 0.0)
        throw std::invalid_argument("correlation_matrix: length scale must be > 0");
    CorrelationMatrix out;
    out.horizons = horizons;
    out.length_scale = length_scale;
    out.entries.resize(horizons, horizons);
    const double c = static_cast<double>(horizons);
    for (int i = 0; i < horizons; ++i)
        for (int j = 0; j < horizons; ++j)
            out.entries(i, j) = std::exp((c - std::abs(i - j)) / (c * length_scale));
    return out;
}

MatrixXd kron(const MatrixXd& A, const MatrixXd& B) {
    MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

GramMatrix kron_expand(const CorrelationMatrix& corr, const GramMatrix& K) {
    GramMatrix out;
    out.jitter = K.jitter;
    out.entries = kron(corr.entries, K.entries);
    return out;
}

}  // namespace solarkm::kernels
