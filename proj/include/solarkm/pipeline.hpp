#pragma once

#include <map>
#include <string>
#include <vector>

#include "solarkm/flow.hpp"
#include "solarkm/multitask.hpp"

namespace solarkm::pipeline {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// --- dataset ---------------------------------------------------------------

struct Sample {
    double timestamp = 0.0;
    std::string condition;  // clear | cumulus | stratus | nimbus
    int day = 0;
    VectorXd features;
    VectorXd targets;  // CSI per horizon, ascending
};

struct Dataset {
    std::vector<Sample> samples;
    int horizons = 0;
    int sources = 0;  // moment-block sources stored per feature

    MatrixXd feature_matrix() const;
    MatrixXd target_matrix() const;
    std::vector<std::string> condition_labels() const;
    std::map<std::string, int> condition_counts() const;
};

/// Header row, then one row per sample: timestamp, condition, day, lag_1..lag_6,
/// elevation, azimuth, <feat>_<stat>_h<c> blocks, csi_h1..csi_hC.
void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

// --- standardization -------------------------------------------------------

struct StandardizationParams {
    VectorXd mean, stddev;
    std::vector<uint8_t> scaled;  // zero-variance columns pass through
    bool enabled = true;
};

StandardizationParams standardize_fit(const MatrixXd& X, bool enabled = true);
MatrixXd standardize_apply(const MatrixXd& X, const StandardizationParams& p);
MatrixXd destandardize(const MatrixXd& Z, const StandardizationParams& p);

/// Polynomial-kernel features skip standardization; Bayesian-model targets do.
bool standardize_features_for(kernels::KernelFamily family);
bool standardize_targets_for(multitask::Family family);

// --- outlier selection -----------------------------------------------------

/// Standard local outlier factor with k nearest neighbours; ~1 for inliers.
VectorXd lof_scores(const MatrixXd& X, int k);

/// Indices of the n most-inlier samples (lowest LOF), original order kept.
std::vector<Eigen::Index> select_most_inlier(const VectorXd& scores, Eigen::Index n);

// --- cross-validation ------------------------------------------------------

struct GridCandidate {
    multitask::FitOptions options;
    std::string label;
};

struct CvReport {
    std::vector<std::string> labels;
    MatrixXd fold_mape;  // candidates x folds
    VectorXd mean_mape;
    int selected = -1;   // minimum mean MAPE, first-in-grid tie break
    int folds = 3;
    uint64_t seed = 0;
};

/// Contiguous-block folds in sample order; validation MAPE averaged over
/// horizons and folds.
CvReport kfold_grid_search(multitask::Mode mode, const std::vector<GridCandidate>& grid,
                           const MatrixXd& X, const MatrixXd& Y, int folds, uint64_t seed,
                           const kernels::CorrelationMatrix* corr = nullptr);

// --- metrics ---------------------------------------------------------------

struct MetricsReport {
    VectorXd mape, rmse, fs;          // per horizon; FS in percent
    VectorXd persistence_mape, persistence_rmse;
    std::map<std::string, VectorXd> condition_mape;
    std::map<std::string, int> condition_counts;
    int excluded = 0;  // zero-target samples skipped in MAPE
};

MetricsReport evaluate(const MatrixXd& predictions, const MatrixXd& targets,
                       const MatrixXd& persistence,
                       const std::vector<std::string>& conditions = {});

VectorXd persistence_forecast(double current_csi, int horizons);

// --- synthetic scene -------------------------------------------------------

struct SceneConfig {
    int rows = 40, cols = 40;
    double wind_u = 1.0, wind_v = 0.0;  // cells per frame
    int blobs = 1;
    double blob_sigma = 4.0;            // cells
    double blob_spacing = 100.0;        // frames between transits
    double ambient_temp = 210.0;        // K, clear-sky brightness temperature
    double cloud_temp = 278.0;          // K at blob core
    int frames = 300;
    double frame_dt_s = 15.0;
    double min_csi = 0.2;
    double attenuation = 0.8;
    double noise_sigma = 0.0;
    uint64_t seed = 0;
};

struct Scene {
    SceneConfig config;
    std::vector<MatrixXd> temperature;  // K
    std::vector<MatrixXd> opacity;      // [0, 1]
    MatrixXd true_u, true_v;            // cells per frame, constant in time
    VectorXd csi;
    std::vector<std::string> condition;
    std::vector<double> transit_frames;  // oracle: blob-centre Sun crossings
    int sun_i = 0, sun_j = 0;
};

Scene generate_synthetic_scene(const SceneConfig& config);

// --- feature extraction ----------------------------------------------------

struct FeatureConfig {
    std::vector<int> horizon_steps = {12, 16, 20, 24, 28, 32};
    double sun_elevation_deg = 65.0;
    double sun_azimuth_deg = 180.0;
    double diagonal_fov_deg = 40.0;
    double t_air_k = 300.0;
    double t_dew_k = 290.0;
    double p_atm_pa = 101325.0;
    double e_u = 0.05, e_v = 0.05;  // velocity RMS errors, m/s
    int n_mc = 2000;
    uint64_t seed = 0;
    bool use_true_flow = true;
};

/// Runs the full per-frame chain (flow, potentials, streamline, traversal
/// gammas, weight maps, weighted moments) and emits one sample per frame with
/// complete lag history and targets. Frames whose streamline cannot be traced
/// fall back to uniform weight maps.
Dataset extract_features(const Scene& scene, const FeatureConfig& config);

// --- persistence of models and grids ---------------------------------------

void save_model_json(const multitask::MultiTaskModel& model, const std::string& path);
multitask::MultiTaskModel load_model_json(const std::string& path);

/// Flat binary grid: 16-byte header (magic "SKMG", uint32 rows, uint32 cols,
/// uint32 dtype code 0 = float32, little endian) + row-major float32 payload.
void write_grid(const std::string& path, const MatrixXd& grid);
MatrixXd read_grid(const std::string& path);

/// Plain-text alternative: "rows cols" line, then one whitespace-separated
/// row per line.
void write_grid_text(const std::string& path, const MatrixXd& grid);
MatrixXd read_grid_text(const std::string& path);

// --- configuration ---------------------------------------------------------

/// key = value lines, '#' comments, optional [section] headers flattened to
/// section.key.
std::map<std::string, std::string> read_config(const std::string& path);
double config_num(const std::map<std::string, std::string>& cfg, const std::string& key,
                  double fallback);
std::string config_str(const std::map<std::string, std::string>& cfg, const std::string& key,
                       const std::string& fallback);

}  // namespace solarkm::pipeline
