#include "solarkm/flow.hpp"

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "solarkm/simd/ops.hpp"

namespace solarkm::flow {

namespace {

// d/dx along columns: central interior, one-sided borders (exact on linear).
MatrixXd grad_x(const MatrixXd& f, double dx = 1.0) {
    const Eigen::Index m = f.rows(), n = f.cols();
    MatrixXd g(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        g(i, 0) = (f(i, 1) - f(i, 0)) / dx;
        for (Eigen::Index j = 1; j + 1 < n; ++j) g(i, j) = (f(i, j + 1) - f(i, j - 1)) / (2 * dx);
        g(i, n - 1) = (f(i, n - 1) - f(i, n - 2)) / dx;
    }
    return g;
}

MatrixXd grad_y(const MatrixXd& f, double dy = 1.0) {
    const Eigen::Index m = f.rows(), n = f.cols();
    MatrixXd g(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        g(0, j) = (f(1, j) - f(0, j)) / dy;
        for (Eigen::Index i = 1; i + 1 < m; ++i) g(i, j) = (f(i + 1, j) - f(i - 1, j)) / (2 * dy);
        g(m - 1, j) = (f(m - 1, j) - f(m - 2, j)) / dy;
    }
    return g;
}

// Adjoints of the difference operators above (unit spacing).
MatrixXd grad_x_adj(const MatrixXd& g) {
    const Eigen::Index m = g.rows(), n = g.cols();
    MatrixXd h = MatrixXd::Zero(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        h(i, 0) -= g(i, 0);
        h(i, 1) += g(i, 0);
        for (Eigen::Index j = 1; j + 1 < n; ++j) {
            h(i, j - 1) -= 0.5 * g(i, j);
            h(i, j + 1) += 0.5 * g(i, j);
        }
        h(i, n - 2) -= g(i, n - 1);
        h(i, n - 1) += g(i, n - 1);
    }
    return h;
}

MatrixXd grad_y_adj(const MatrixXd& g) {
    const Eigen::Index m = g.rows(), n = g.cols();
    MatrixXd h = MatrixXd::Zero(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        h(0, j) -= g(0, j);
        h(1, j) += g(0, j);
        for (Eigen::Index i = 1; i + 1 < m; ++i) {
            h(i - 1, j) -= 0.5 * g(i, j);
            h(i + 1, j) += 0.5 * g(i, j);
        }
        h(m - 2, j) -= g(m - 1, j);
        h(m - 1, j) += g(m - 1, j);
    }
    return h;
}

void check_field(const MatrixXd& f, const char* what) {
    if (f.rows() < 2 || f.cols() < 2)
        throw std::invalid_argument(std::string(what) + ": grid must be at least 2x2");
    if (!f.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

}  // namespace

void cloud_dynamics(const VectorField& V, ScalarField& magnitude, ScalarField& divergence,
                    ScalarField& vorticity, double dx, double dy) {
    check_field(V.u, "cloud_dynamics");
    check_field(V.v, "cloud_dynamics");
    magnitude.grid = (V.u.array().square() + V.v.array().square()).sqrt();
    magnitude.unit = Unit::MetersPerSecond;
    divergence.grid = grad_x(V.u, dx) + grad_y(V.v, dy);
    divergence.unit = Unit::PerSecond;
    vorticity.grid = grad_x(V.v, dx) - grad_y(V.u, dy);
    vorticity.unit = Unit::PerSecond;
}

FlowPotentials helmholtz_decompose(const VectorField& V, double tol, int max_iterations) {
    check_field(V.u, "helmholtz_decompose");
    const Eigen::Index m = V.u.rows(), n = V.u.cols();
    const double mu = V.u.mean(), mv = V.v.mean();
    const MatrixXd up = V.u.array() - mu;
    const MatrixXd vp = V.v.array() - mv;

    // u = Gx psi + Gy phi, v = Gy psi - Gx phi; least squares via CG on the
    // normal equations (discrete Poisson systems with natural boundaries).
    auto forward = [&](const MatrixXd& psi, const MatrixXd& phi, MatrixXd& ru, MatrixXd& rv) {
        ru = grad_x(psi) + grad_y(phi);
        rv = grad_y(psi) - grad_x(phi);
    };
    auto adjoint = [&](const MatrixXd& ru, const MatrixXd& rv, MatrixXd& apsi, MatrixXd& aphi) {
        apsi = grad_x_adj(ru) + grad_y_adj(rv);
        aphi = grad_y_adj(ru) - grad_x_adj(rv);
    };

    MatrixXd psi = MatrixXd::Zero(m, n), phi = MatrixXd::Zero(m, n);
    MatrixXd bpsi, bphi;
    adjoint(up, vp, bpsi, bphi);
    MatrixXd rpsi = bpsi, rphi = bphi;
    MatrixXd ppsi = rpsi, pphi = rphi;
    const double bnorm = std::sqrt(bpsi.squaredNorm() + bphi.squaredNorm());
    double rr = rpsi.squaredNorm() + rphi.squaredNorm();
    if (bnorm > 0.0) {
        for (int it = 0; it < max_iterations; ++it) {
            if (std::sqrt(rr) <= tol * bnorm) break;
            MatrixXd fu, fv, qpsi, qphi;
            forward(ppsi, pphi, fu, fv);
            adjoint(fu, fv, qpsi, qphi);
            const double pq = (ppsi.cwiseProduct(qpsi)).sum() + (pphi.cwiseProduct(qphi)).sum();
            if (pq <= 0.0) break;
            const double a = rr / pq;
            psi += a * ppsi;
            phi += a * pphi;
            rpsi -= a * qpsi;
            rphi -= a * qphi;
            const double rr_new = rpsi.squaredNorm() + rphi.squaredNorm();
            const double beta = rr_new / rr;
            rr = rr_new;
            ppsi = rpsi + beta * ppsi;
            pphi = rphi + beta * pphi;
        }
        if (std::sqrt(rr) > 1e-3 * bnorm)
            throw std::runtime_error("helmholtz_decompose: solver did not converge");
    }

    FlowPotentials out;
    out.mean_u = mu;
    out.mean_v = mv;
    out.psi = psi;
    out.phi = phi;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double x = static_cast<double>(j), y = static_cast<double>(i);
            out.psi(i, j) += mu * x + mv * y;
            out.phi(i, j) += mu * y - mv * x;
        }
    }
    return out;
}

VectorField reconstruct(const FlowPotentials& P) {
    VectorField V;
    V.u = grad_x(P.psi) + grad_y(P.phi);
    V.u.array() -= P.mean_u;  // the ramps carry the mean on both potentials
    V.v = grad_y(P.psi) - grad_x(P.phi);
    V.v.array() -= P.mean_v;
    return V;
}

Streamline trace_streamline(const FlowPotentials& P, int sun_i, int sun_j) {
    const Eigen::Index m = P.phi.rows(), n = P.phi.cols();
    if (sun_i < 0 || sun_i >= m || sun_j < 0 || sun_j >= n)
        throw std::invalid_argument("trace_streamline: sun position outside the grid");
    const double psi_sun = P.psi(sun_i, sun_j);

    Streamline s;
    std::set<std::pair<int, int>> visited;
    int ci = sun_i, cj = sun_j;
    s.pixels.emplace_back(ci, cj);
    s.ax.push_back(0);
    s.ay.push_back(0);
    visited.insert({ci, cj});

    while (ci > 0 && ci < m - 1 && cj > 0 && cj < n - 1) {
        const double phi_cur = P.phi(ci, cj);
        int best_i = -1, best_j = -1;
        double best_obj = 0.0;
        for (int di = -1; di <= 1; ++di) {
            for (int dj = -1; dj <= 1; ++dj) {
                if (di == 0 && dj == 0) continue;
                const int ni = ci + di, nj = cj + dj;
                if (ni < 0 || ni >= m || nj < 0 || nj >= n) continue;
                if (visited.count({ni, nj})) continue;
                if (P.psi(ni, nj) <= psi_sun) continue;
                const double d = P.phi(ni, nj) - phi_cur;
                const double obj = d * d;
                // lexicographic (i, j) tie break
                if (best_i < 0 || obj < best_obj ||
                    (obj == best_obj && std::make_pair(ni, nj) < std::make_pair(best_i, best_j))) {
                    best_obj = obj;
                    best_i = ni;
                    best_j = nj;
                }
            }
        }
        if (best_i < 0) {
            if (s.pixels.size() == 1)
                throw std::runtime_error("trace_streamline: no feasible first step (stagnant flow "
                                         "at the Sun)");
            throw std::runtime_error("trace_streamline: dead end before reaching the image edge");
        }
        s.ax.push_back(best_j != cj ? 1 : 0);
        s.ay.push_back(best_i != ci ? 1 : 0);
        ci = best_i;
        cj = best_j;
        s.pixels.emplace_back(ci, cj);
        visited.insert({ci, cj});
    }
    // The Sun pixel has no incoming move; reuse the outgoing one so its
    // traversal distance is defined.
    if (s.pixels.size() > 1) {
        s.ax[0] = s.ax[1];
        s.ay[0] = s.ay[1];
    }
    return s;
}

TraversalTimes traversal_times(const Streamline& S, const VectorXd& u, const VectorXd& v,
                               const VectorXd& dx, const VectorXd& dy, double e_u, double e_v,
                               int n_mc, uint64_t seed) {
    const auto L = static_cast<Eigen::Index>(S.pixels.size());
    if (L == 0) throw std::invalid_argument("traversal_times: empty streamline");
    if (u.size() != L || v.size() != L || dx.size() != L || dy.size() != L)
        throw std::invalid_argument("traversal_times: per-pixel array size mismatch");
    if (n_mc < 1000) throw std::invalid_argument("traversal_times: n_mc must be >= 1000");
    if (e_u < 0.0 || e_v < 0.0) throw std::invalid_argument("traversal_times: negative errors");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nu(0.0, e_u > 0.0 ? e_u : 1.0);
    std::normal_distribution<double> nv(0.0, e_v > 0.0 ? e_v : 1.0);

    TraversalTimes out;
    out.shape.resize(L);
    out.rate.resize(L);
    out.cum_shape.resize(L);
    for (Eigen::Index l = 0; l < L; ++l) {
        const double d2 = S.ax[static_cast<std::size_t>(l)] * dx(l) * dx(l) +
                          S.ay[static_cast<std::size_t>(l)] * dy(l) * dy(l);
        const double dist = std::sqrt(d2);
        double mean_t = 0.0, mean_log_t = 0.0;
        for (int k = 0; k < n_mc; ++k) {
            const double du = e_u > 0.0 ? nu(rng) : 0.0;
            const double dv = e_v > 0.0 ? nv(rng) : 0.0;
            const double speed = std::hypot(u(l) + du, v(l) + dv);
            if (speed <= 0.0 && e_u == 0.0 && e_v == 0.0)
                throw std::runtime_error("traversal_times: zero velocity with zero uncertainty "
                                         "gives infinite traversal time");
            const double t = dist / std::max(speed, 1e-12);
            mean_t += t;
            mean_log_t += std::log(std::max(t, 1e-300));
        }
        mean_t /= n_mc;
        mean_log_t /= n_mc;
        if (mean_t <= 0.0)
            throw std::runtime_error("traversal_times: degenerate zero traversal time");
        // Minka's difference-form shape estimate; the deterministic limit
        // collapses to a point mass with very large shape and exact mean.
        const double denom = std::max(std::log(mean_t) - mean_log_t, 1e-12);
        out.shape(l) = 0.5 / denom;
        out.rate(l) = out.shape(l) / mean_t;
    }
    double acc = 0.0;
    for (Eigen::Index l = 0; l < L; ++l) {
        acc += out.shape(l);
        out.cum_shape(l) = acc;
    }
    out.avg_rate = out.rate.mean();
    out.mean_arrival = out.cum_shape / out.avg_rate;
    return out;
}

VectorXd intersection_weights(const TraversalTimes& T, double t_c) {
    if (t_c <= 0.0) throw std::invalid_argument("intersection_weights: horizon must be > 0");
    const Eigen::Index L = T.cum_shape.size();
    VectorXd w(L);
    const double r = T.avg_rate;
    for (Eigen::Index l = 0; l < L; ++l) {
        const double a = T.cum_shape(l);
        const double logw = a * std::log(r) + (a - 1.0) * std::log(t_c) - r * t_c - std::lgamma(a);
        w(l) = std::exp(logw);
    }
    return w;
}

void moments_from_masses(const std::vector<Vector2d>& coords, const VectorXd& mass,
                         Vector2d& mean, Matrix2d& cov) {
    const auto L = static_cast<Eigen::Index>(coords.size());
    if (L == 0) throw std::invalid_argument("moments_from_masses: empty streamline");
    if (mass.size() != L) throw std::invalid_argument("moments_from_masses: size mismatch");
    const double total = mass.sum();
    if (!(total > 0.0))
        throw std::runtime_error("moments_from_masses: total mass must be positive");
    mean.setZero();
    Matrix2d second = Matrix2d::Zero();
    for (Eigen::Index l = 0; l < L; ++l) {
        const double p = mass(l) / total;
        const Vector2d& x = coords[static_cast<std::size_t>(l)];
        mean += p * x;
        second += p * x * x.transpose();
    }
    cov = second - mean * mean.transpose();
}

HorizonMoments intersection_moments(const TraversalTimes& T, const std::vector<Vector2d>& coords,
                                    double t_c, double e_u, double e_v, int n_mc, uint64_t seed) {
    const auto L = static_cast<Eigen::Index>(coords.size());
    if (L == 0) throw std::invalid_argument("intersection_moments: empty streamline");
    if (T.cum_shape.size() != L)
        throw std::invalid_argument("intersection_moments: streamline size mismatch");

    HorizonMoments out;
    out.weights = intersection_weights(T, t_c);
    // mass of pixel l = w_c^(l) * (tbar^(l+1) - tbar^(l)); the last pixel
    // uses its own expected duration.
    VectorXd mass(L);
    for (Eigen::Index l = 0; l < L; ++l) {
        const double dt = (l + 1 < L) ? T.mean_arrival(l + 1) - T.mean_arrival(l)
                                      : T.shape(l) / T.avg_rate;
        mass(l) = out.weights(l) * dt;
    }
    moments_from_masses(coords, mass, out.mean, out.cov);

    if (e_u > 0.0 || e_v > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nu(0.0, e_u > 0.0 ? e_u : 1e-300);
        std::normal_distribution<double> nv(0.0, e_v > 0.0 ? e_v : 1e-300);
        double acc = 0.0;
        for (int k = 0; k < n_mc; ++k) {
            const double du = e_u > 0.0 ? nu(rng) : 0.0;
            const double dv = e_v > 0.0 ? nv(rng) : 0.0;
            acc += du * du + dv * dv;
        }
        out.displacement_var = t_c * t_c * acc / n_mc;
    }
    return out;
}

ScalarField wave_probability(const FlowPotentials& P, int sun_i, int sun_j) {
    if (P.phi.size() < 2 || !P.phi.allFinite() || !P.psi.allFinite())
        throw std::invalid_argument("wave_probability: need at least two finite pixels");
    const MatrixXd phi_p = (P.phi.array() - P.phi(sun_i, sun_j)).abs();
    const MatrixXd phi_pp = phi_p.maxCoeff() - phi_p.array();
    const MatrixXd sq = phi_pp.array().square() + P.psi.array().square();
    const double total = sq.sum();
    if (total <= 0.0)
        throw std::runtime_error("wave_probability: degenerate all-zero complex field");
    ScalarField out;
    out.grid = sq / total;
    out.unit = Unit::Dimensionless;
    return out;
}

MatrixXd sun_weight_grid(const Vector2d& mean, const Matrix2d& cov, const ScalarField& wave,
                         const Reprojection& coords) {
    const double det = cov.determinant();
    if (!(cov(0, 0) > 0.0) || !(det > 0.0))
        throw std::runtime_error("sun_weight_grid: singular position covariance");
    const Matrix2d prec = cov.inverse();
    const double norm = 1.0 / (2.0 * M_PI * std::sqrt(det));
    const Eigen::Index m = wave.grid.rows(), n = wave.grid.cols();
    MatrixXd z(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            Vector2d d(coords.x(i, j) - mean(0), coords.y(i, j) - mean(1));
            z(i, j) = norm * std::exp(-0.5 * d.dot(prec * d)) * wave.grid(i, j);
        }
    }
    return z;
}

ScalarField cloud_height(const ScalarField& temperature, double t_air, double lapse_rate) {
    if (lapse_rate == 0.0) throw std::invalid_argument("cloud_height: zero lapse rate");
    ScalarField out;
    out.grid = (temperature.grid.array() - t_air) / lapse_rate;
    out.unit = Unit::Meters;
    return out;
}

double moist_adiabatic_lapse_rate(double t_air_k, double t_dew_k, double p_atm_pa) {
    constexpr double g = 9.80665;        // m/s^2
    constexpr double hv = 2.501e6;       // J/kg latent heat of vaporization
    constexpr double r_sd = 287.0;       // J/(kg K) dry air
    constexpr double cp = 1003.5;        // J/(kg K) dry air
    constexpr double eps = 0.622;
    // Magnus vapor pressure from the dew point (Pa)
    const double td_c = t_dew_k - 273.15;
    const double e = 611.2 * std::exp(17.62 * td_c / (td_c + 243.12));
    const double r = eps * e / std::max(p_atm_pa - e, 1.0);
    const double num = 1.0 + hv * r / (r_sd * t_air_k);
    const double den = cp + hv * hv * r * eps / (r_sd * t_air_k * t_air_k);
    return -g * num / den;  // dT/dz, negative
}

Reprojection reproject_pixels(int rows, int cols, double sun_elevation_deg,
                              double sun_azimuth_deg, double layer_height_m,
                              double diagonal_fov_deg) {
    if (sun_elevation_deg <= 0.0 || sun_elevation_deg > 90.0)
        throw std::invalid_argument("reproject_pixels: elevation must be in (0, 90]");
    if (layer_height_m <= 0.0)
        throw std::invalid_argument("reproject_pixels: layer height must be > 0");
    const double elev = sun_elevation_deg * M_PI / 180.0;
    const double azim = sun_azimuth_deg * M_PI / 180.0;
    const double pitch = (diagonal_fov_deg * M_PI / 180.0) /
                         std::sqrt(static_cast<double>(rows) * rows +
                                   static_cast<double>(cols) * cols);

    // world frame: x east, y north, z up; the optical axis points at the Sun
    const Eigen::Vector3d fwd(std::cos(elev) * std::sin(azim), std::cos(elev) * std::cos(azim),
                              std::sin(elev));
    Eigen::Vector3d right = fwd.cross(Eigen::Vector3d::UnitZ());
    if (right.norm() < 1e-9) right = Eigen::Vector3d::UnitX();  // zenith
    right.normalize();
    const Eigen::Vector3d up = right.cross(fwd).normalized();

    const double ci = (rows - 1) / 2.0, cj = (cols - 1) / 2.0;
    Reprojection out;
    out.x.resize(rows, cols);
    out.y.resize(rows, cols);
    out.dx.resize(rows, cols);
    out.dy.resize(rows, cols);
    auto plane_hit = [&](double i, double j, double& px, double& py) {
        const double tx = std::tan((j - cj) * pitch);
        const double ty = std::tan((i - ci) * pitch);
        const Eigen::Vector3d ray = fwd + tx * right + ty * up;
        if (ray.z() <= 1e-9)
            throw std::runtime_error("reproject_pixels: ray parallel to the cloud layer");
        const double t = layer_height_m / ray.z();
        px = t * ray.x();
        py = t * ray.y();
    };
    double cx, cy;
    plane_hit(ci, cj, cx, cy);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            double px, py;
            plane_hit(i, j, px, py);
            out.x(i, j) = px - cx;
            out.y(i, j) = py - cy;
        }
    // cell extents from the coordinate steps along each image axis
    const MatrixXd xdj = grad_x(out.x), ydj = grad_x(out.y);
    const MatrixXd xdi = grad_y(out.x), ydi = grad_y(out.y);
    out.dx = (xdj.array().square() + ydj.array().square()).sqrt();
    out.dy = (xdi.array().square() + ydi.array().square()).sqrt();
    return out;
}

void weighted_moments(const ScalarField& field, const MatrixXd& weights, double& mean,
                      double& stddev) {
    if (field.grid.rows() != weights.rows() || field.grid.cols() != weights.cols())
        throw std::invalid_argument("weighted_moments: shape mismatch");
    const auto n = static_cast<std::size_t>(field.grid.size());
    const double wsum = simd::sum(weights.data(), n);
    if (!(wsum > 0.0)) throw std::invalid_argument("weighted_moments: zero total weight");
    mean = simd::weighted_sum(weights.data(), field.grid.data(), n) / wsum;
    stddev = std::sqrt(simd::weighted_sq_dev(weights.data(), field.grid.data(), mean, n) / wsum);
}

VectorXd assemble_feature_vector(const VectorXd& lags, double elevation_deg, double azimuth_deg,
                                 const std::array<MomentBlock, kFeatureCount>& blocks,
                                 const std::vector<int>& source_indices) {
    if (lags.size() != kLagCount)
        throw std::invalid_argument("assemble_feature_vector: exactly 6 lags required");
    std::vector<int> sources = source_indices;
    std::sort(sources.begin(), sources.end());

    const auto d = static_cast<Eigen::Index>(kLagCount + 2 +
                                             kFeatureCount * 2 * sources.size());
    VectorXd x(d);
    Eigen::Index k = 0;
    x.segment(0, kLagCount) = lags;
    k += kLagCount;
    x(k++) = elevation_deg;
    x(k++) = azimuth_deg;
    for (const auto& block : blocks) {
        for (int s : sources) {
            const auto idx = static_cast<std::size_t>(s);
            if (s < 0 || idx >= block.m.size() || idx >= block.s.size())
                throw std::invalid_argument("assemble_feature_vector: missing source block");
            x(k++) = block.m[idx];
            x(k++) = block.s[idx];
        }
    }
    return x;
}

VectorField estimate_flow(const MatrixXd& frame0, const MatrixXd& frame1, double dt_s,
                          double cell_size_m) {
    check_field(frame0, "estimate_flow");
    if (frame0.rows() != frame1.rows() || frame0.cols() != frame1.cols())
        throw std::invalid_argument("estimate_flow: frame shape mismatch");
    if (dt_s <= 0.0) throw std::invalid_argument("estimate_flow: dt must be > 0");
    const Eigen::Index m = frame0.rows(), n = frame0.cols();
    const MatrixXd avg = 0.5 * (frame0 + frame1);
    const MatrixXd ix = grad_x(avg), iy = grad_y(avg);
    const MatrixXd it = frame1 - frame0;

    VectorField V;
    V.u = MatrixXd::Zero(m, n);
    V.v = MatrixXd::Zero(m, n);
    constexpr int R = 2;  // 5x5 windows
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double sxx = 0, sxy = 0, syy = 0, sxt = 0, syt = 0;
            for (Eigen::Index wi = std::max<Eigen::Index>(0, i - R);
                 wi <= std::min(m - 1, i + R); ++wi)
                for (Eigen::Index wj = std::max<Eigen::Index>(0, j - R);
                     wj <= std::min(n - 1, j + R); ++wj) {
                    sxx += ix(wi, wj) * ix(wi, wj);
                    sxy += ix(wi, wj) * iy(wi, wj);
                    syy += iy(wi, wj) * iy(wi, wj);
                    sxt += ix(wi, wj) * it(wi, wj);
                    syt += iy(wi, wj) * it(wi, wj);
                }
            const double det = sxx * syy - sxy * sxy;
            if (det > 1e-9) {
                // pixels per frame, converted to m/s
                const double upix = (-syy * sxt + sxy * syt) / det;
                const double vpix = (sxy * sxt - sxx * syt) / det;
                V.u(i, j) = upix * cell_size_m / dt_s;
                V.v(i, j) = vpix * cell_size_m / dt_s;
            }
        }
    }
    return V;
}

}  // namespace solarkm::flow
