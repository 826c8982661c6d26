#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

namespace solarkm::flow {

using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

enum class Unit { Centikelvin, Meters, MetersPerSecond, PerSecond, Dimensionless };

struct ScalarField {
    MatrixXd grid;  // M x N, row i = image row (y), column j = image column (x)
    Unit unit = Unit::Dimensionless;
};

struct VectorField {
    MatrixXd u, v;      // m/s
    double e_u = 0.0;   // per-component RMS velocity errors
    double e_v = 0.0;
};

/// Streamfunction phi / velocity potential psi on the velocity grid. Both
/// carry the mean-flow ramp so that streamline tracing and the wave
/// probability see the full flow; reconstruct() counts the mean once.
struct FlowPotentials {
    MatrixXd phi;   // streamfunction
    MatrixXd psi;   // velocity potential
    double mean_u = 0.0;
    double mean_v = 0.0;
};

struct Streamline {
    std::vector<std::pair<int, int>> pixels;  // (i, j), starts at the Sun
    std::vector<uint8_t> ax, ay;              // axis flags of the incoming move
};

/// Per-pixel gamma traversal-time parameters along a streamline, in
/// shape-rate convention (mean = shape / rate). Cumulative arrival at pixel l
/// is Gamma(sum of shapes up to l, rate) with the streamline-average rate.
struct TraversalTimes {
    VectorXd shape;         // alpha^(l)
    VectorXd rate;          // beta^(l), per-pixel fit
    VectorXd cum_shape;     // running sum of shapes
    double avg_rate = 0.0;  // shared rate for the cumulative distribution
    VectorXd mean_arrival;  // cum_shape / avg_rate
};

struct HorizonMoments {
    VectorXd weights;       // w_c^(l) along the streamline
    Vector2d mean;          // intersecting-position mean (m)
    Matrix2d cov;           // intersecting-position covariance (m^2)
    double displacement_var = 0.0;  // e_{dx', c}
};

struct SunWeightMap {
    std::vector<MatrixXd> z;          // one grid per horizon
    std::vector<double> horizons_s;   // t_c
    std::vector<Vector2d> mean;
    std::vector<Matrix2d> cov;        // S_c + e I actually used
};

struct Reprojection {
    MatrixXd x, y;    // plane coordinates (m), relative to the Sun pixel
    MatrixXd dx, dy;  // per-pixel cell extents (m)
};

// --- cloud dynamics -------------------------------------------------------

/// Magnitude, divergence and vorticity of a velocity field. Central
/// differences in the interior, one-sided on the borders; exact on fields
/// that are linear in the coordinates.
void cloud_dynamics(const VectorField& V, ScalarField& magnitude, ScalarField& divergence,
                    ScalarField& vorticity, double dx = 1.0, double dy = 1.0);

/// Splits V into potential/streamfunction parts by minimizing the discrete
/// reconstruction residual (conjugate gradient on the Poisson-type normal
/// equations, homogeneous Neumann), with the mean flow carried as linear
/// ramps on both potentials.
FlowPotentials helmholtz_decompose(const VectorField& V, double tol = 1e-8,
                                   int max_iterations = 20000);

/// grad(psi) + rot(phi) with the mean flow counted once.
VectorField reconstruct(const FlowPotentials& P);

/// Greedy 8-neighbour walk from the Sun to the image edge: match the
/// streamfunction, require downstream potential, never revisit a pixel.
/// Ties break on smallest (i, j).
Streamline trace_streamline(const FlowPotentials& P, int sun_i, int sun_j);

// --- traversal times and intersection probability -------------------------

/// Monte-Carlo gamma fit of the per-pixel traversal times. u/v/dx/dy run
/// along the streamline; e_u, e_v are the velocity RMS errors.
TraversalTimes traversal_times(const Streamline& S, const VectorXd& u, const VectorXd& v,
                               const VectorXd& dx, const VectorXd& dy, double e_u, double e_v,
                               int n_mc, uint64_t seed);

/// Gamma density of the cumulative arrival time, evaluated at horizon t_c.
VectorXd intersection_weights(const TraversalTimes& T, double t_c);

/// First/second moments of the intersecting position from precomputed
/// weight-times-dt masses; exposed separately so point-mass cases can be
/// checked directly.
void moments_from_masses(const std::vector<Vector2d>& coords, const VectorXd& mass,
                         Vector2d& mean, Matrix2d& cov);

HorizonMoments intersection_moments(const TraversalTimes& T, const std::vector<Vector2d>& coords,
                                    double t_c, double e_u, double e_v, int n_mc, uint64_t seed);

/// Appendix-style wave probability: phi'' = max|phi - phi_sun| - |phi - phi_sun|,
/// p = |phi'' + i psi|^2 normalized by the squared Frobenius norm.
ScalarField wave_probability(const FlowPotentials& P, int sun_i, int sun_j);

/// z[i,j] = N(x_ij; mean, cov) * wave[i,j], standard 2-D Gaussian
/// normalization 1 / (2 pi |cov|^(1/2)).
MatrixXd sun_weight_grid(const Vector2d& mean, const Matrix2d& cov, const ScalarField& wave,
                         const Reprojection& coords);

// --- physical helpers ------------------------------------------------------

/// H = (T'' - T_air) / lapse_rate; lapse_rate in K/m (negative for a
/// decreasing profile), temperatures in K.
ScalarField cloud_height(const ScalarField& temperature, double t_air, double lapse_rate);

/// Saturated-adiabat lapse rate dT/dz (K/m, negative) from ground
/// measurements. Convenience plumbing with fixed physical constants.
double moist_adiabatic_lapse_rate(double t_air_k, double t_dew_k, double p_atm_pa);

/// Pinhole reprojection of the pixel grid onto the cloud layer plane at
/// height h, optical axis pointing at the Sun.
Reprojection reproject_pixels(int rows, int cols, double sun_elevation_deg,
                              double sun_azimuth_deg, double layer_height_m,
                              double diagonal_fov_deg);

// --- statistics and feature assembly ---------------------------------------

/// Weighted mean and weighted population standard deviation.
void weighted_moments(const ScalarField& field, const MatrixXd& weights, double& mean,
                      double& stddev);

/// (m, s) pairs per source, one block per feature, in the order
/// T, H, M, D, C.
struct MomentBlock {
    std::vector<double> m, s;  // indexed by source id
};

constexpr int kLagCount = 6;
constexpr int kFeatureCount = 5;

/// [lags | elevation azimuth | T | H | M | D | C], sources ascending within
/// each feature block.
VectorXd assemble_feature_vector(const VectorXd& lags, double elevation_deg, double azimuth_deg,
                                 const std::array<MomentBlock, kFeatureCount>& blocks,
                                 const std::vector<int>& source_indices);

/// Two-frame least-squares gradient flow on 5x5 windows. Plumbing stand-in
/// for an externally supplied velocity field; cell_size converts
/// pixels/frame to m/s.
VectorField estimate_flow(const MatrixXd& frame0, const MatrixXd& frame1, double dt_s,
                          double cell_size_m = 1.0);

}  // namespace solarkm::flow
