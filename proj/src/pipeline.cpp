#include "solarkm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace solarkm::pipeline {

namespace {

constexpr const char* kFeatNames[flow::kFeatureCount] = {"T", "H", "M", "D", "C"};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

MatrixXd Dataset::feature_matrix() const {
    if (samples.empty()) return {};
    MatrixXd X(static_cast<Eigen::Index>(samples.size()), samples.front().features.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        X.row(static_cast<Eigen::Index>(i)) = samples[i].features.transpose();
    return X;
}

MatrixXd Dataset::target_matrix() const {
    if (samples.empty()) return {};
    MatrixXd Y(static_cast<Eigen::Index>(samples.size()), samples.front().targets.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        Y.row(static_cast<Eigen::Index>(i)) = samples[i].targets.transpose();
    return Y;
}

std::vector<std::string> Dataset::condition_labels() const {
    std::vector<std::string> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.condition);
    return out;
}

std::map<std::string, int> Dataset::condition_counts() const {
    std::map<std::string, int> out;
    for (const auto& s : samples) ++out[s.condition];
    return out;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_dataset_csv: cannot open " + path);
    f << "timestamp,condition,day";
    for (int l = 1; l <= flow::kLagCount; ++l) f << ",lag_" << l;
    f << ",elevation,azimuth";
    for (const char* feat : kFeatNames)
        for (int s = 1; s <= data.sources; ++s)
            f << ',' << feat << "_m_h" << s << ',' << feat << "_s_h" << s;
    for (int c = 1; c <= data.horizons; ++c) f << ",csi_h" << c;
    f << '\n';
    for (const auto& s : data.samples) {
        f << fmt_double(s.timestamp) << ',' << s.condition << ',' << s.day;
        for (Eigen::Index i = 0; i < s.features.size(); ++i) f << ',' << fmt_double(s.features(i));
        for (Eigen::Index i = 0; i < s.targets.size(); ++i) f << ',' << fmt_double(s.targets(i));
        f << '\n';
    }
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_dataset_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("read_dataset_csv: empty file " + path);
    const auto header = split_csv_line(line);
    int horizons = 0;
    for (const auto& h : header)
        if (h.rfind("csi_h", 0) == 0) ++horizons;
    const int meta = 3, fixed = flow::kLagCount + 2;
    const int moment_cols = static_cast<int>(header.size()) - meta - fixed - horizons;
    if (moment_cols < 0 || moment_cols % (2 * flow::kFeatureCount) != 0)
        throw std::runtime_error("read_dataset_csv: unexpected column layout in " + path);

    Dataset data;
    data.horizons = horizons;
    data.sources = moment_cols / (2 * flow::kFeatureCount);
    const int feat_dim = fixed + moment_cols;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != meta + feat_dim + horizons)
            throw std::runtime_error("read_dataset_csv: ragged row in " + path);
        Sample s;
        s.timestamp = std::stod(cells[0]);
        s.condition = cells[1];
        s.day = std::stoi(cells[2]);
        s.features.resize(feat_dim);
        for (int i = 0; i < feat_dim; ++i) s.features(i) = std::stod(cells[meta + i]);
        s.targets.resize(horizons);
        for (int c = 0; c < horizons; ++c) s.targets(c) = std::stod(cells[meta + feat_dim + c]);
        data.samples.push_back(std::move(s));
    }
    return data;
}

// --- standardization -------------------------------------------------------

StandardizationParams standardize_fit(const MatrixXd& X, bool enabled) {
    StandardizationParams p;
    p.enabled = enabled;
    const Eigen::Index d = X.cols();
    p.mean = VectorXd::Zero(d);
    p.stddev = VectorXd::Ones(d);
    p.scaled.assign(static_cast<std::size_t>(d), 0);
    if (!enabled || X.rows() == 0) return p;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double m = X.col(j).mean();
        const double var = (X.col(j).array() - m).square().mean();
        const double sd = std::sqrt(var);
        if (sd > 1e-12) {
            p.mean(j) = m;
            p.stddev(j) = sd;
            p.scaled[static_cast<std::size_t>(j)] = 1;
        }
    }
    return p;
}

MatrixXd standardize_apply(const MatrixXd& X, const StandardizationParams& p) {
    if (X.cols() != p.mean.size())
        throw std::invalid_argument("standardize_apply: dimension mismatch");
    MatrixXd Z = X;
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        if (p.scaled[static_cast<std::size_t>(j)])
            Z.col(j) = (X.col(j).array() - p.mean(j)) / p.stddev(j);
    return Z;
}

MatrixXd destandardize(const MatrixXd& Z, const StandardizationParams& p) {
    if (Z.cols() != p.mean.size())
        throw std::invalid_argument("destandardize: dimension mismatch");
    MatrixXd X = Z;
    for (Eigen::Index j = 0; j < Z.cols(); ++j)
        if (p.scaled[static_cast<std::size_t>(j)])
            X.col(j) = Z.col(j).array() * p.stddev(j) + p.mean(j);
    return X;
}

bool standardize_features_for(kernels::KernelFamily family) {
    return family != kernels::KernelFamily::Polynomial;
}

bool standardize_targets_for(multitask::Family family) {
    return family == multitask::Family::KRR || family == multitask::Family::SVR;
}

// --- outlier selection -----------------------------------------------------

VectorXd lof_scores(const MatrixXd& X, int k) {
    const Eigen::Index n = X.rows();
    if (k < 1 || k >= n) throw std::invalid_argument("lof_scores: need 1 <= k < N");

    MatrixXd dist(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (X.row(i) - X.row(j)).norm();
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }
    std::vector<std::vector<Eigen::Index>> nb(static_cast<std::size_t>(n));
    VectorXd kdist(n);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n - 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index m = 0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) order[static_cast<std::size_t>(m++)] = j;
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return dist(i, a) != dist(i, b) ? dist(i, a) < dist(i, b) : a < b;
        });
        nb[static_cast<std::size_t>(i)].assign(order.begin(), order.begin() + k);
        kdist(i) = dist(i, nb[static_cast<std::size_t>(i)].back());
    }
    VectorXd lrd(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double reach = 0.0;
        for (Eigen::Index j : nb[static_cast<std::size_t>(i)])
            reach += std::max(kdist(j), dist(i, j));
        lrd(i) = reach > 0.0 ? k / reach : 1e12;
    }
    VectorXd lof(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Eigen::Index j : nb[static_cast<std::size_t>(i)]) s += lrd(j);
        lof(i) = s / (k * lrd(i));
    }
    return lof;
}

std::vector<Eigen::Index> select_most_inlier(const VectorXd& scores, Eigen::Index n) {
    const Eigen::Index total = scores.size();
    if (n > total) n = total;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(total));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return scores(a) < scores(b); });
    idx.resize(static_cast<std::size_t>(n));
    std::sort(idx.begin(), idx.end());
    return idx;
}

// --- metrics ---------------------------------------------------------------

namespace {

struct PairedErrors {
    double mape = 0.0;
    double rmse = 0.0;
    int excluded = 0;
};

PairedErrors column_errors(const VectorXd& pred, const VectorXd& y) {
    PairedErrors e;
    double ape = 0.0, se = 0.0;
    int used = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        se += (pred(i) - y(i)) * (pred(i) - y(i));
        if (y(i) > 0.0) {
            ape += std::abs(y(i) - pred(i)) / y(i);
            ++used;
        } else {
            ++e.excluded;
        }
    }
    e.mape = used > 0 ? 100.0 * ape / used : 0.0;
    e.rmse = std::sqrt(se / static_cast<double>(y.size()));
    return e;
}

}  // namespace

MetricsReport evaluate(const MatrixXd& predictions, const MatrixXd& targets,
                       const MatrixXd& persistence, const std::vector<std::string>& conditions) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols() ||
        persistence.rows() != targets.rows() || persistence.cols() != targets.cols())
        throw std::invalid_argument("evaluate: shape mismatch");
    if (!conditions.empty() && static_cast<Eigen::Index>(conditions.size()) != targets.rows())
        throw std::invalid_argument("evaluate: condition label count mismatch");

    const Eigen::Index C = targets.cols();
    MetricsReport r;
    r.mape.resize(C);
    r.rmse.resize(C);
    r.fs.resize(C);
    r.persistence_mape.resize(C);
    r.persistence_rmse.resize(C);
    for (Eigen::Index c = 0; c < C; ++c) {
        const auto em = column_errors(predictions.col(c), targets.col(c));
        const auto ep = column_errors(persistence.col(c), targets.col(c));
        r.mape(c) = em.mape;
        r.rmse(c) = em.rmse;
        r.persistence_mape(c) = ep.mape;
        r.persistence_rmse(c) = ep.rmse;
        r.fs(c) = ep.rmse > 0.0 ? 100.0 * (1.0 - em.rmse / ep.rmse) : 0.0;
        r.excluded += em.excluded;
    }
    if (!conditions.empty()) {
        std::map<std::string, std::vector<Eigen::Index>> groups;
        for (Eigen::Index i = 0; i < targets.rows(); ++i)
            groups[conditions[static_cast<std::size_t>(i)]].push_back(i);
        for (const auto& [cond, rows] : groups) {
            r.condition_counts[cond] = static_cast<int>(rows.size());
            VectorXd m(C);
            for (Eigen::Index c = 0; c < C; ++c) {
                VectorXd p(static_cast<Eigen::Index>(rows.size())),
                    y(static_cast<Eigen::Index>(rows.size()));
                for (std::size_t j = 0; j < rows.size(); ++j) {
                    p(static_cast<Eigen::Index>(j)) = predictions(rows[j], c);
                    y(static_cast<Eigen::Index>(j)) = targets(rows[j], c);
                }
                m(c) = column_errors(p, y).mape;
            }
            r.condition_mape[cond] = std::move(m);
        }
    }
    return r;
}

VectorXd persistence_forecast(double current_csi, int horizons) {
    return VectorXd::Constant(horizons, current_csi);
}

// --- cross-validation ------------------------------------------------------

CvReport kfold_grid_search(multitask::Mode mode, const std::vector<GridCandidate>& grid,
                           const MatrixXd& X, const MatrixXd& Y, int folds, uint64_t seed,
                           const kernels::CorrelationMatrix* corr) {
    if (grid.empty()) throw std::invalid_argument("kfold_grid_search: empty grid");
    const Eigen::Index n = X.rows();
    if (folds < 2 || n < folds) throw std::invalid_argument("kfold_grid_search: too few samples");

    std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;  // [begin, end)
    for (int f = 0; f < folds; ++f) {
        const Eigen::Index b = n * f / folds, e = n * (f + 1) / folds;
        if (e - b < 2) throw std::invalid_argument("kfold_grid_search: fold with < 2 samples");
        blocks.emplace_back(b, e);
    }

    CvReport report;
    report.folds = folds;
    report.seed = seed;
    report.fold_mape.resize(static_cast<Eigen::Index>(grid.size()), folds);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        report.labels.push_back(grid[g].label);
        const auto& opt = grid[g].options;
        for (int f = 0; f < folds; ++f) {
            const auto [vb, ve] = blocks[static_cast<std::size_t>(f)];
            const Eigen::Index nv = ve - vb, nt = n - nv;
            MatrixXd Xt(nt, X.cols()), Yt(nt, Y.cols());
            Xt << X.topRows(vb), X.bottomRows(n - ve);
            Yt << Y.topRows(vb), Y.bottomRows(n - ve);
            const MatrixXd Xv = X.middleRows(vb, nv);
            const MatrixXd Yv = Y.middleRows(vb, nv);

            const auto fp =
                standardize_fit(Xt, standardize_features_for(opt.spec.family));
            const auto tp = standardize_fit(Yt, standardize_targets_for(opt.family));
            const auto model = multitask::fit_multitask(mode, opt, standardize_apply(Xt, fp),
                                                        standardize_apply(Yt, tp), corr);
            const MatrixXd pred =
                destandardize(multitask::predict_matrix(model, standardize_apply(Xv, fp)), tp);

            double ape = 0.0;
            int used = 0;
            for (Eigen::Index i = 0; i < nv; ++i)
                for (Eigen::Index c = 0; c < Y.cols(); ++c)
                    if (Yv(i, c) > 0.0) {
                        ape += std::abs(Yv(i, c) - pred(i, c)) / Yv(i, c);
                        ++used;
                    }
            report.fold_mape(static_cast<Eigen::Index>(g), f) =
                used > 0 ? 100.0 * ape / used : 0.0;
        }
    }
    report.mean_mape = report.fold_mape.rowwise().mean();
    report.selected = 0;
    for (Eigen::Index g = 1; g < report.mean_mape.size(); ++g)
        if (report.mean_mape(g) < report.mean_mape(report.selected)) report.selected = static_cast<int>(g);
    return report;
}

// --- synthetic scene -------------------------------------------------------

Scene generate_synthetic_scene(const SceneConfig& cfg) {
    if (cfg.rows < 4 || cfg.cols < 4)
        throw std::invalid_argument("generate_synthetic_scene: grid too small");
    if (cfg.blob_sigma * 2.0 > std::min(cfg.rows, cfg.cols))
        throw std::invalid_argument("generate_synthetic_scene: blob larger than grid");
    if (cfg.frames < 1) throw std::invalid_argument("generate_synthetic_scene: no frames");

    Scene scene;
    scene.config = cfg;
    scene.sun_i = cfg.rows / 2;
    scene.sun_j = cfg.cols / 2;
    scene.true_u = MatrixXd::Constant(cfg.rows, cfg.cols, cfg.wind_u);
    scene.true_v = MatrixXd::Constant(cfg.rows, cfg.cols, cfg.wind_v);
    scene.csi.resize(cfg.frames);

    // Blob b crosses the Sun pixel at frame (b + 0.5) * spacing.
    std::vector<std::pair<double, double>> start;
    for (int b = 0; b < cfg.blobs; ++b) {
        const double transit = (b + 0.5) * cfg.blob_spacing;
        if (transit < cfg.frames) scene.transit_frames.push_back(transit);
        start.emplace_back(scene.sun_i - cfg.wind_v * transit,
                           scene.sun_j - cfg.wind_u * transit);
    }

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    const double two_sigma2 = 2.0 * cfg.blob_sigma * cfg.blob_sigma;
    for (int t = 0; t < cfg.frames; ++t) {
        MatrixXd opacity = MatrixXd::Zero(cfg.rows, cfg.cols);
        for (int b = 0; b < cfg.blobs; ++b) {
            const double ci = start[static_cast<std::size_t>(b)].first + cfg.wind_v * t;
            const double cj = start[static_cast<std::size_t>(b)].second + cfg.wind_u * t;
            for (int i = 0; i < cfg.rows; ++i)
                for (int j = 0; j < cfg.cols; ++j) {
                    const double d2 = (i - ci) * (i - ci) + (j - cj) * (j - cj);
                    opacity(i, j) += std::exp(-d2 / two_sigma2);
                }
        }
        opacity = opacity.cwiseMin(1.0);
        MatrixXd temp =
            (cfg.ambient_temp + (cfg.cloud_temp - cfg.ambient_temp) * opacity.array()).matrix();
        if (cfg.noise_sigma > 0.0)
            for (int i = 0; i < cfg.rows; ++i)
                for (int j = 0; j < cfg.cols; ++j) temp(i, j) += noise(rng);

        const double o_sun = opacity(scene.sun_i, scene.sun_j);
        scene.csi(t) = std::clamp(1.0 - cfg.attenuation * o_sun, cfg.min_csi, 1.0);

        const double omax = opacity.maxCoeff(), omean = opacity.mean();
        std::string cond = "cumulus";
        if (omax < 0.05) cond = "clear";
        else if (o_sun > 0.9) cond = "nimbus";
        else if (omean > 0.15) cond = "stratus";
        scene.condition.push_back(cond);
        scene.opacity.push_back(std::move(opacity));
        scene.temperature.push_back(std::move(temp));
    }
    return scene;
}

// --- feature extraction ----------------------------------------------------

Dataset extract_features(const Scene& scene, const FeatureConfig& cfg) {
    const int frames = static_cast<int>(scene.temperature.size());
    const int rows = scene.config.rows, cols = scene.config.cols;
    const int C = static_cast<int>(cfg.horizon_steps.size());
    const int max_step = *std::max_element(cfg.horizon_steps.begin(), cfg.horizon_steps.end());
    const double dt = scene.config.frame_dt_s;

    Dataset data;
    data.horizons = C;
    data.sources = C;
    std::vector<int> all_sources(static_cast<std::size_t>(C));
    std::iota(all_sources.begin(), all_sources.end(), 0);

    const double lapse = flow::moist_adiabatic_lapse_rate(cfg.t_air_k, cfg.t_dew_k, cfg.p_atm_pa);

    for (int t = flow::kLagCount - 1; t + max_step < frames; ++t) {
        if (t < 1) continue;
        const MatrixXd& temp = scene.temperature[static_cast<std::size_t>(t)];

        flow::ScalarField tfield{temp, flow::Unit::Centikelvin};
        flow::ScalarField height = flow::cloud_height(tfield, cfg.t_air_k, lapse);

        // layer height for the reprojection: opacity-weighted cloud height
        double h_layer = 1000.0;
        const MatrixXd& op = scene.opacity[static_cast<std::size_t>(t)];
        const double wsum = op.sum();
        if (wsum > 1e-6) h_layer = std::max(100.0, (op.array() * height.grid.array()).sum() / wsum);
        const auto reproj = flow::reproject_pixels(rows, cols, cfg.sun_elevation_deg,
                                                   cfg.sun_azimuth_deg, h_layer,
                                                   cfg.diagonal_fov_deg);
        const double cell = 0.5 * (reproj.dx.mean() + reproj.dy.mean());

        flow::VectorField V;
        if (cfg.use_true_flow) {
            V.u = scene.true_u.cwiseProduct(reproj.dx) / dt;
            V.v = scene.true_v.cwiseProduct(reproj.dy) / dt;
        } else {
            V = flow::estimate_flow(scene.temperature[static_cast<std::size_t>(t - 1)], temp, dt,
                                    cell);
        }
        V.e_u = cfg.e_u;
        V.e_v = cfg.e_v;

        flow::ScalarField mag, div, vort;
        flow::cloud_dynamics(V, mag, div, vort, cell, cell);
        const auto pot = flow::helmholtz_decompose(V);
        const auto wave = flow::wave_probability(pot, scene.sun_i, scene.sun_j);

        // per-horizon Sun-intersection weight maps; uniform fallback if the
        // flow around the Sun pixel is degenerate
        std::vector<MatrixXd> zmaps(static_cast<std::size_t>(C),
                                    MatrixXd::Ones(rows, cols));
        try {
            const auto line = flow::trace_streamline(pot, scene.sun_i, scene.sun_j);
            const auto L = static_cast<Eigen::Index>(line.pixels.size());
            VectorXd lu(L), lv(L), ldx(L), ldy(L);
            std::vector<Eigen::Vector2d> coords(static_cast<std::size_t>(L));
            for (Eigen::Index l = 0; l < L; ++l) {
                const auto [pi, pj] = line.pixels[static_cast<std::size_t>(l)];
                lu(l) = V.u(pi, pj);
                lv(l) = V.v(pi, pj);
                ldx(l) = reproj.dx(pi, pj);
                ldy(l) = reproj.dy(pi, pj);
                coords[static_cast<std::size_t>(l)] =
                    Eigen::Vector2d(reproj.x(pi, pj), reproj.y(pi, pj));
            }
            const uint64_t seed_t = cfg.seed * 1000003ULL + static_cast<uint64_t>(t);
            const auto times =
                flow::traversal_times(line, lu, lv, ldx, ldy, cfg.e_u, cfg.e_v, cfg.n_mc, seed_t);
            for (int c = 0; c < C; ++c) {
                const double t_c = cfg.horizon_steps[static_cast<std::size_t>(c)] * dt;
                const auto mom = flow::intersection_moments(times, coords, t_c, cfg.e_u, cfg.e_v,
                                                            cfg.n_mc, seed_t + 17u * (c + 1));
                Eigen::Matrix2d S = mom.cov;
                S(0, 0) += mom.displacement_var + 1e-4 * cell * cell;
                S(1, 1) += mom.displacement_var + 1e-4 * cell * cell;
                const MatrixXd z = flow::sun_weight_grid(mom.mean, S, wave, reproj);
                if (z.sum() > 1e-300) zmaps[static_cast<std::size_t>(c)] = z;
            }
        } catch (const std::runtime_error&) {
            // keep uniform maps
        }

        const flow::ScalarField* fields[flow::kFeatureCount] = {&tfield, &height, &mag, &div,
                                                                &vort};
        std::array<flow::MomentBlock, flow::kFeatureCount> blocks;
        for (int fidx = 0; fidx < flow::kFeatureCount; ++fidx) {
            auto& blk = blocks[static_cast<std::size_t>(fidx)];
            blk.m.resize(static_cast<std::size_t>(C));
            blk.s.resize(static_cast<std::size_t>(C));
            for (int c = 0; c < C; ++c) {
                double m = 0.0, s = 0.0;
                flow::weighted_moments(*fields[fidx], zmaps[static_cast<std::size_t>(c)], m, s);
                blk.m[static_cast<std::size_t>(c)] = m;
                blk.s[static_cast<std::size_t>(c)] = s;
            }
        }

        VectorXd lags(flow::kLagCount);
        for (int l = 0; l < flow::kLagCount; ++l)
            lags(l) = scene.csi(t - flow::kLagCount + 1 + l);

        Sample sample;
        sample.timestamp = t * dt;
        sample.condition = scene.condition[static_cast<std::size_t>(t)];
        sample.day = 0;
        sample.features = flow::assemble_feature_vector(lags, cfg.sun_elevation_deg,
                                                        cfg.sun_azimuth_deg, blocks, all_sources);
        sample.targets.resize(C);
        for (int c = 0; c < C; ++c)
            sample.targets(c) = scene.csi(t + cfg.horizon_steps[static_cast<std::size_t>(c)]);
        data.samples.push_back(std::move(sample));
    }
    return data;
}

}  // namespace solarkm::pipeline
