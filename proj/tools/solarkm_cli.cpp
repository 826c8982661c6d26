// Command-line front end: synthetic scenes, feature extraction, training-set
// selection, cross-validation, fitting, prediction, metrics, and reports.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "solarkm/pipeline.hpp"

namespace fs = std::filesystem;
using namespace solarkm;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::json;

namespace {

[[noreturn]] void missing_input(const std::string& path) {
    std::fprintf(stderr, "error: input file not found: %s\n", path.c_str());
    std::exit(2);
}

void require_file(const std::string& path) {
    if (!fs::exists(path)) missing_input(path);
}

std::map<std::string, std::string> load_config(const std::string& path) {
    require_file(path);
    return pipeline::read_config(path);
}

pipeline::SceneConfig scene_config(const std::map<std::string, std::string>& cfg,
                                   uint64_t seed_override, bool has_seed) {
    pipeline::SceneConfig sc;
    sc.rows = static_cast<int>(pipeline::config_num(cfg, "scene.rows", sc.rows));
    sc.cols = static_cast<int>(pipeline::config_num(cfg, "scene.cols", sc.cols));
    sc.wind_u = pipeline::config_num(cfg, "scene.wind_u", sc.wind_u);
    sc.wind_v = pipeline::config_num(cfg, "scene.wind_v", sc.wind_v);
    sc.blobs = static_cast<int>(pipeline::config_num(cfg, "scene.blobs", sc.blobs));
    sc.blob_sigma = pipeline::config_num(cfg, "scene.blob_sigma", sc.blob_sigma);
    sc.blob_spacing = pipeline::config_num(cfg, "scene.blob_spacing", sc.blob_spacing);
    sc.ambient_temp = pipeline::config_num(cfg, "scene.ambient_temp", sc.ambient_temp);
    sc.cloud_temp = pipeline::config_num(cfg, "scene.cloud_temp", sc.cloud_temp);
    sc.frames = static_cast<int>(pipeline::config_num(cfg, "scene.frames", sc.frames));
    sc.frame_dt_s = pipeline::config_num(cfg, "scene.frame_dt_s", sc.frame_dt_s);
    sc.min_csi = pipeline::config_num(cfg, "scene.min_csi", sc.min_csi);
    sc.attenuation = pipeline::config_num(cfg, "scene.attenuation", sc.attenuation);
    sc.noise_sigma = pipeline::config_num(cfg, "scene.noise_sigma", sc.noise_sigma);
    sc.seed = static_cast<uint64_t>(pipeline::config_num(cfg, "scene.seed", 0.0));
    if (has_seed) sc.seed = seed_override;
    return sc;
}

pipeline::FeatureConfig feature_config(const std::map<std::string, std::string>& cfg,
                                       uint64_t seed_override, bool has_seed) {
    pipeline::FeatureConfig fc;
    const std::string steps = pipeline::config_str(cfg, "features.horizon_steps", "");
    if (!steps.empty()) {
        fc.horizon_steps.clear();
        std::istringstream in(steps);
        for (int s; in >> s;) fc.horizon_steps.push_back(s);
    }
    fc.sun_elevation_deg =
        pipeline::config_num(cfg, "features.sun_elevation_deg", fc.sun_elevation_deg);
    fc.sun_azimuth_deg =
        pipeline::config_num(cfg, "features.sun_azimuth_deg", fc.sun_azimuth_deg);
    fc.diagonal_fov_deg =
        pipeline::config_num(cfg, "features.diagonal_fov_deg", fc.diagonal_fov_deg);
    fc.t_air_k = pipeline::config_num(cfg, "features.t_air_k", fc.t_air_k);
    fc.t_dew_k = pipeline::config_num(cfg, "features.t_dew_k", fc.t_dew_k);
    fc.p_atm_pa = pipeline::config_num(cfg, "features.p_atm_pa", fc.p_atm_pa);
    fc.e_u = pipeline::config_num(cfg, "features.e_u", fc.e_u);
    fc.e_v = pipeline::config_num(cfg, "features.e_v", fc.e_v);
    fc.n_mc = static_cast<int>(pipeline::config_num(cfg, "features.n_mc", fc.n_mc));
    fc.seed = static_cast<uint64_t>(pipeline::config_num(cfg, "features.seed", 0.0));
    fc.use_true_flow = pipeline::config_num(cfg, "features.use_true_flow", 1.0) != 0.0;
    if (has_seed) fc.seed = seed_override;
    return fc;
}

kernels::KernelFamily parse_kernel(const std::string& name) {
    if (name == "linear") return kernels::KernelFamily::Linear;
    if (name == "polynomial") return kernels::KernelFamily::Polynomial;
    if (name == "rbf") return kernels::KernelFamily::RBF;
    if (name == "rq") return kernels::KernelFamily::RationalQuadratic;
    if (name == "matern") return kernels::KernelFamily::Matern;
    throw CLI::ValidationError("unknown kernel family: " + name);
}

multitask::Family parse_family(const std::string& name) {
    if (name == "krr") return multitask::Family::KRR;
    if (name == "gpr") return multitask::Family::GPR;
    if (name == "svr") return multitask::Family::SVR;
    if (name == "rvm") return multitask::Family::RVM;
    throw CLI::ValidationError("unknown model family: " + name);
}

multitask::Mode parse_mode(const std::string& name) {
    if (name == "independent") return multitask::Mode::Independent;
    if (name == "chain") return multitask::Mode::Chain;
    if (name == "joint") return multitask::Mode::Joint;
    throw CLI::ValidationError("unknown strategy: " + name);
}

multitask::FitOptions model_options(const std::map<std::string, std::string>& cfg) {
    multitask::FitOptions o;
    o.family = parse_family(pipeline::config_str(cfg, "model.family", "krr"));
    o.spec.family = parse_kernel(pipeline::config_str(cfg, "model.kernel", "rbf"));
    o.spec.gamma = pipeline::config_num(cfg, "model.gamma", 0.5);
    o.spec.beta = pipeline::config_num(cfg, "model.beta", 1.0);
    o.spec.alpha = pipeline::config_num(cfg, "model.alpha", 1.0);
    const double nu = pipeline::config_num(cfg, "model.nu", 1.5);
    o.spec.nu = nu <= 0.5   ? kernels::MaternNu::Half
                : nu <= 1.5 ? kernels::MaternNu::ThreeHalves
                            : kernels::MaternNu::FiveHalves;
    o.ridge_gamma = pipeline::config_num(cfg, "model.ridge_gamma", 0.5);
    o.noise = pipeline::config_num(cfg, "model.noise", 0.1);
    o.box = pipeline::config_num(cfg, "model.box", 1.0);
    o.epsilon = pipeline::config_num(cfg, "model.epsilon", 0.1);
    return o;
}

json params_json(const pipeline::StandardizationParams& p) {
    json j;
    j["enabled"] = p.enabled;
    j["mean"] = std::vector<double>(p.mean.data(), p.mean.data() + p.mean.size());
    j["stddev"] = std::vector<double>(p.stddev.data(), p.stddev.data() + p.stddev.size());
    j["scaled"] = p.scaled;
    return j;
}

pipeline::StandardizationParams params_from_json(const json& j) {
    pipeline::StandardizationParams p;
    p.enabled = j.at("enabled").get<bool>();
    const auto m = j.at("mean").get<std::vector<double>>();
    const auto s = j.at("stddev").get<std::vector<double>>();
    p.mean = Eigen::Map<const VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    p.stddev = Eigen::Map<const VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
    p.scaled = j.at("scaled").get<std::vector<uint8_t>>();
    return p;
}

std::string scaler_path(const std::string& model_path) { return model_path + ".scaler"; }

void write_predictions_csv(const std::string& path, const pipeline::Dataset& data,
                           const MatrixXd& pred) {
    std::ofstream out(path);
    out << "timestamp";
    for (Eigen::Index c = 0; c < pred.cols(); ++c) out << ",pred_h" << c + 1;
    out << "\n";
    char buf[64];
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", data.samples[static_cast<std::size_t>(i)].timestamp);
        out << buf;
        for (Eigen::Index c = 0; c < pred.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", pred(i, c));
            out << "," << buf;
        }
        out << "\n";
    }
}

MatrixXd read_predictions_csv(const std::string& path) {
    require_file(path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty predictions file: " + path);
    MatrixXd P(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(rows[0].size()) - 1);
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        for (Eigen::Index c = 0; c < P.cols(); ++c)
            P(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c) + 1];
    return P;
}

MatrixXd persistence_matrix(const pipeline::Dataset& data) {
    const Eigen::Index n = static_cast<Eigen::Index>(data.samples.size());
    MatrixXd P(n, data.horizons);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double current =
            data.samples[static_cast<std::size_t>(i)].features(flow::kLagCount - 1);
        P.row(i) = pipeline::persistence_forecast(current, data.horizons).transpose();
    }
    return P;
}

void write_metrics_csv(const std::string& path, const pipeline::MetricsReport& r) {
    std::ofstream out(path);
    out << "horizon,mape,rmse,fs,persistence_mape,persistence_rmse\n";
    for (Eigen::Index c = 0; c < r.mape.size(); ++c)
        out << c + 1 << "," << r.mape(c) << "," << r.rmse(c) << "," << r.fs(c) << ","
            << r.persistence_mape(c) << "," << r.persistence_rmse(c) << "\n";
}

struct MetricsTable {
    std::vector<double> mape, fs, persistence_mape;
};

MetricsTable read_metrics_csv(const std::string& path) {
    require_file(path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    MetricsTable t;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() < 6) throw std::runtime_error("malformed metrics row in " + path);
        t.mape.push_back(row[1]);
        t.fs.push_back(row[3]);
        t.persistence_mape.push_back(row[4]);
    }
    return t;
}

/// Minimal line plot: one polyline per series over horizon index.
void write_line_plot_svg(const std::string& path, const std::string& title,
                         const std::string& y_label,
                         const std::vector<std::pair<std::string, std::vector<double>>>& series) {
    const double W = 640, H = 400, ml = 70, mr = 140, mt = 50, mb = 50;
    double lo = 0.0, hi = 1.0;
    bool first = true;
    for (const auto& [name, ys] : series)
        for (double y : ys) {
            if (first) lo = hi = y, first = false;
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const double pad = 0.08 * (hi - lo);
    lo -= pad;
    hi += pad;
    const std::size_t npts = series.empty() ? 0 : series[0].second.size();
    auto px = [&](std::size_t i) {
        return ml + (W - ml - mr) * (npts > 1 ? double(i) / double(npts - 1) : 0.5);
    };
    auto py = [&](double y) { return H - mb - (H - mt - mb) * (y - lo) / (hi - lo); };
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    std::ofstream out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
        << "' font-family='sans-serif' font-size='12'>\n"
        << "<rect width='" << W << "' height='" << H << "' fill='white'/>\n"
        << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='15'>" << title
        << "</text>\n"
        << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
        << "' stroke='black'/>\n"
        << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
        << "' stroke='black'/>\n"
        << "<text x='" << (ml + W - mr) / 2 << "' y='" << H - 12
        << "' text-anchor='middle'>horizon</text>\n"
        << "<text x='18' y='" << (mt + H - mb) / 2 << "' text-anchor='middle' transform='rotate(-90 18 "
        << (mt + H - mb) / 2 << ")'>" << y_label << "</text>\n";
    for (int g = 0; g <= 4; ++g) {
        const double y = lo + (hi - lo) * g / 4.0;
        out << "<line x1='" << ml << "' y1='" << py(y) << "' x2='" << W - mr << "' y2='" << py(y)
            << "' stroke='#dddddd'/>\n"
            << "<text x='" << ml - 8 << "' y='" << py(y) + 4 << "' text-anchor='end'>"
            << std::round(y * 100) / 100 << "</text>\n";
    }
    for (std::size_t i = 0; i < npts; ++i)
        out << "<text x='" << px(i) << "' y='" << H - mb + 18 << "' text-anchor='middle'>"
            << i + 1 << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& [name, ys] = series[s];
        out << "<polyline fill='none' stroke='" << colors[s % 5] << "' stroke-width='2' points='";
        for (std::size_t i = 0; i < ys.size(); ++i) out << px(i) << "," << py(ys[i]) << " ";
        out << "'/>\n";
        for (std::size_t i = 0; i < ys.size(); ++i)
            out << "<circle cx='" << px(i) << "' cy='" << py(ys[i]) << "' r='3' fill='"
                << colors[s % 5] << "'/>\n";
        out << "<text x='" << W - mr + 12 << "' y='" << mt + 16 * double(s) + 12 << "' fill='"
            << colors[s % 5] << "'>" << name << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel-method intra-hour solar forecasting toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", data_path, model_path, pred_path, metrics_path;
    uint64_t seed = 0;
    bool has_seed = false;
    app.add_option("--config", config_path, "TOML-style configuration file");
    app.add_option("--seed", seed, "seed override for scene and feature extraction")
        ->each([&](const std::string&) { has_seed = true; });
    app.add_option("--out", out_dir, "output directory");

    auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic advecting-blob scene");
    auto* cmd_features =
        app.add_subcommand("features", "regenerate the scene and extract a feature dataset");
    auto* cmd_select =
        app.add_subcommand("select", "keep the most-inlier samples by local outlier factor");
    auto* cmd_cv = app.add_subcommand("cv", "grid-search cross-validation over kernel widths");
    auto* cmd_fit = app.add_subcommand("fit", "fit a multi-horizon model on a dataset");
    auto* cmd_predict = app.add_subcommand("predict", "predict every horizon for a dataset");
    auto* cmd_evaluate =
        app.add_subcommand("evaluate", "score predictions against targets and persistence");
    auto* cmd_report = app.add_subcommand("report", "emit CSV table and SVG plots from metrics");

    for (auto* c : {cmd_select, cmd_cv, cmd_fit, cmd_predict, cmd_evaluate})
        c->add_option("--data", data_path, "dataset CSV");
    for (auto* c : {cmd_fit, cmd_predict}) c->add_option("--model", model_path, "model JSON path");
    cmd_evaluate->add_option("--pred", pred_path, "predictions CSV");
    cmd_report->add_option("--metrics", metrics_path, "metrics CSV from evaluate");

    CLI11_PARSE(app, argc, argv);
    fs::create_directories(out_dir);

    try {
        const auto cfg = config_path.empty() ? std::map<std::string, std::string>{}
                                             : load_config(config_path);

        if (cmd_synth->parsed()) {
            const auto scene = pipeline::generate_synthetic_scene(scene_config(cfg, seed, has_seed));
            std::ofstream csi(out_dir + "/csi.csv");
            csi << "frame,time_s,csi,condition\n";
            for (int t = 0; t < scene.config.frames; ++t)
                csi << t << "," << t * scene.config.frame_dt_s << "," << scene.csi(t) << ","
                    << scene.condition[static_cast<std::size_t>(t)] << "\n";
            std::ofstream tr(out_dir + "/transits.csv");
            tr << "transit_frame\n";
            for (double f : scene.transit_frames) tr << f << "\n";
            pipeline::write_grid(out_dir + "/true_u.bin", scene.true_u);
            pipeline::write_grid(out_dir + "/true_v.bin", scene.true_v);
            pipeline::write_grid(out_dir + "/temperature_first.bin", scene.temperature.front());
            pipeline::write_grid(out_dir + "/temperature_mid.bin",
                                 scene.temperature[static_cast<std::size_t>(scene.config.frames / 2)]);
            std::printf("scene: %d frames, %zu transits, sun at (%d, %d)\n", scene.config.frames,
                        scene.transit_frames.size(), scene.sun_i, scene.sun_j);
        } else if (cmd_features->parsed()) {
            const auto scene = pipeline::generate_synthetic_scene(scene_config(cfg, seed, has_seed));
            const auto data = pipeline::extract_features(scene, feature_config(cfg, seed, has_seed));
            pipeline::write_dataset_csv(data, out_dir + "/dataset.csv");
            std::printf("dataset: %zu samples, %d horizons, %zu features\n", data.samples.size(),
                        data.horizons,
                        data.samples.empty() ? 0 : static_cast<std::size_t>(data.samples[0].features.size()));
        } else if (cmd_select->parsed()) {
            require_file(data_path);
            const auto data = pipeline::read_dataset_csv(data_path);
            const int k = static_cast<int>(pipeline::config_num(cfg, "select.k", 3));
            const auto n = static_cast<Eigen::Index>(pipeline::config_num(
                cfg, "select.n", std::floor(0.8 * static_cast<double>(data.samples.size()))));
            const VectorXd scores = pipeline::lof_scores(data.feature_matrix(), k);
            const auto keep = pipeline::select_most_inlier(scores, n);
            pipeline::Dataset subset;
            subset.horizons = data.horizons;
            subset.sources = data.sources;
            for (auto i : keep) subset.samples.push_back(data.samples[static_cast<std::size_t>(i)]);
            pipeline::write_dataset_csv(subset, out_dir + "/selected.csv");
            std::printf("kept %zu of %zu samples (k=%d)\n", subset.samples.size(),
                        data.samples.size(), k);
        } else if (cmd_cv->parsed()) {
            require_file(data_path);
            const auto data = pipeline::read_dataset_csv(data_path);
            const auto base = model_options(cfg);
            const auto mode = parse_mode(pipeline::config_str(cfg, "model.strategy", "independent"));
            std::vector<pipeline::GridCandidate> grid;
            std::istringstream gs(pipeline::config_str(cfg, "cv.gammas", "0.1 0.5 1.0 2.0"));
            for (double g; gs >> g;) {
                auto o = base;
                o.spec.gamma = g;
                grid.push_back({o, "gamma=" + std::to_string(g)});
            }
            const int folds = static_cast<int>(pipeline::config_num(cfg, "cv.folds", 3));
            kernels::CorrelationMatrix corr;
            const kernels::CorrelationMatrix* corr_p = nullptr;
            if (mode == multitask::Mode::Joint) {
                corr = kernels::correlation_matrix(
                    data.horizons, pipeline::config_num(cfg, "model.corr_length", 1.0));
                corr_p = &corr;
            }
            const auto report = pipeline::kfold_grid_search(mode, grid, data.feature_matrix(),
                                                            data.target_matrix(), folds, seed, corr_p);
            std::ofstream out(out_dir + "/cv.csv");
            out << "candidate,mean_mape";
            for (int f = 0; f < folds; ++f) out << ",fold_" << f + 1;
            out << ",selected\n";
            for (std::size_t i = 0; i < report.labels.size(); ++i) {
                out << report.labels[i] << "," << report.mean_mape(static_cast<Eigen::Index>(i));
                for (int f = 0; f < folds; ++f)
                    out << "," << report.fold_mape(static_cast<Eigen::Index>(i), f);
                out << "," << (static_cast<int>(i) == report.selected ? 1 : 0) << "\n";
            }
            std::printf("selected %s (mean validation MAPE %.3f%%)\n",
                        report.labels[static_cast<std::size_t>(report.selected)].c_str(),
                        report.mean_mape(report.selected));
        } else if (cmd_fit->parsed()) {
            require_file(data_path);
            const auto data = pipeline::read_dataset_csv(data_path);
            const auto opts = model_options(cfg);
            const auto mode = parse_mode(pipeline::config_str(cfg, "model.strategy", "independent"));
            const MatrixXd X = data.feature_matrix(), Y = data.target_matrix();
            const auto fp =
                pipeline::standardize_fit(X, pipeline::standardize_features_for(opts.spec.family));
            const auto tp =
                pipeline::standardize_fit(Y, pipeline::standardize_targets_for(opts.family));
            kernels::CorrelationMatrix corr;
            const kernels::CorrelationMatrix* corr_p = nullptr;
            if (mode == multitask::Mode::Joint) {
                corr = kernels::correlation_matrix(
                    data.horizons, pipeline::config_num(cfg, "model.corr_length", 1.0));
                corr_p = &corr;
            }
            const auto model =
                multitask::fit_multitask(mode, opts, pipeline::standardize_apply(X, fp),
                                         pipeline::standardize_apply(Y, tp), corr_p);
            const std::string path = model_path.empty() ? out_dir + "/model.json" : model_path;
            pipeline::save_model_json(model, path);
            json scaler;
            scaler["features"] = params_json(fp);
            scaler["targets"] = params_json(tp);
            std::ofstream(scaler_path(path)) << scaler.dump(2) << "\n";
            std::printf("model written to %s\n", path.c_str());
        } else if (cmd_predict->parsed()) {
            require_file(data_path);
            require_file(model_path);
            require_file(scaler_path(model_path));
            const auto data = pipeline::read_dataset_csv(data_path);
            const auto model = pipeline::load_model_json(model_path);
            json scaler;
            std::ifstream(scaler_path(model_path)) >> scaler;
            const auto fp = params_from_json(scaler.at("features"));
            const auto tp = params_from_json(scaler.at("targets"));
            const MatrixXd pred = pipeline::destandardize(
                multitask::predict_matrix(model,
                                          pipeline::standardize_apply(data.feature_matrix(), fp)),
                tp);
            write_predictions_csv(out_dir + "/predictions.csv", data, pred);
            std::printf("wrote %lld predictions x %lld horizons\n",
                        static_cast<long long>(pred.rows()), static_cast<long long>(pred.cols()));
        } else if (cmd_evaluate->parsed()) {
            require_file(data_path);
            const auto data = pipeline::read_dataset_csv(data_path);
            const MatrixXd targets = data.target_matrix();
            const MatrixXd pers = persistence_matrix(data);
            const MatrixXd pred = pred_path.empty() ? pers : read_predictions_csv(pred_path);
            const auto r = pipeline::evaluate(pred, targets, pers, data.condition_labels());
            write_metrics_csv(out_dir + "/metrics.csv", r);
            std::printf("horizon  MAPE%%    RMSE     FS%%\n");
            for (Eigen::Index c = 0; c < r.mape.size(); ++c)
                std::printf("%7lld  %7.3f  %7.4f  %7.3f\n", static_cast<long long>(c + 1),
                            r.mape(c), r.rmse(c), r.fs(c));
            if (r.excluded > 0) std::printf("excluded %d zero-target samples\n", r.excluded);
        } else if (cmd_report->parsed()) {
            const auto t = read_metrics_csv(metrics_path);
            std::ofstream table(out_dir + "/report.csv");
            table << "horizon,model_mape,persistence_mape,fs\n";
            for (std::size_t c = 0; c < t.mape.size(); ++c)
                table << c + 1 << "," << t.mape[c] << "," << t.persistence_mape[c] << ","
                      << t.fs[c] << "\n";
            write_line_plot_svg(out_dir + "/mape.svg", "MAPE by horizon", "MAPE (%)",
                                {{"model", t.mape}, {"persistence", t.persistence_mape}});
            write_line_plot_svg(out_dir + "/fs.svg", "Forecasting skill by horizon", "FS (%)",
                                {{"model", t.fs}});
            std::printf("report written to %s\n", out_dir.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
