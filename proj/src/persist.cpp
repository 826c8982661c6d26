#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "solarkm/pipeline.hpp"

namespace solarkm::pipeline {

namespace {

using nlohmann::json;

json to_json(const VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json to_json(const MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

VectorXd vec_from(const json& a) {
    VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    return v;
}

MatrixXd mat_from(const json& a) {
    if (a.empty()) return {};
    MatrixXd m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(a[0].size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i][j].get<double>();
    return m;
}

const char* mode_name(multitask::Mode m) {
    switch (m) {
        case multitask::Mode::Independent: return "independent";
        case multitask::Mode::Chain: return "chain";
        case multitask::Mode::Joint: return "joint";
    }
    return "independent";
}

multitask::Mode mode_from(const std::string& s) {
    if (s == "independent") return multitask::Mode::Independent;
    if (s == "chain") return multitask::Mode::Chain;
    if (s == "joint") return multitask::Mode::Joint;
    throw std::runtime_error("load_model_json: unknown mode " + s);
}

const char* family_name(multitask::Family f) {
    switch (f) {
        case multitask::Family::KRR: return "krr";
        case multitask::Family::GPR: return "gpr";
        case multitask::Family::SVR: return "svr";
        case multitask::Family::RVM: return "rvm";
    }
    return "krr";
}

multitask::Family family_from(const std::string& s) {
    if (s == "krr") return multitask::Family::KRR;
    if (s == "gpr") return multitask::Family::GPR;
    if (s == "svr") return multitask::Family::SVR;
    if (s == "rvm") return multitask::Family::RVM;
    throw std::runtime_error("load_model_json: unknown family " + s);
}

const char* kernel_name(kernels::KernelFamily f) {
    switch (f) {
        case kernels::KernelFamily::Linear: return "linear";
        case kernels::KernelFamily::Polynomial: return "polynomial";
        case kernels::KernelFamily::RBF: return "rbf";
        case kernels::KernelFamily::RationalQuadratic: return "rq";
        case kernels::KernelFamily::Matern: return "matern";
    }
    return "rbf";
}

kernels::KernelFamily kernel_from(const std::string& s) {
    if (s == "linear") return kernels::KernelFamily::Linear;
    if (s == "polynomial") return kernels::KernelFamily::Polynomial;
    if (s == "rbf") return kernels::KernelFamily::RBF;
    if (s == "rq") return kernels::KernelFamily::RationalQuadratic;
    if (s == "matern") return kernels::KernelFamily::Matern;
    throw std::runtime_error("load_model_json: unknown kernel " + s);
}

json spec_to_json(const kernels::KernelSpec& s) {
    return {{"family", kernel_name(s.family)}, {"gamma", s.gamma},   {"beta", s.beta},
            {"alpha", s.alpha},               {"nu", static_cast<int>(s.nu)},
            {"degree", s.degree}};
}

kernels::KernelSpec spec_from(const json& j) {
    kernels::KernelSpec s;
    s.family = kernel_from(j.at("family").get<std::string>());
    s.gamma = j.at("gamma").get<double>();
    s.beta = j.at("beta").get<double>();
    s.alpha = j.at("alpha").get<double>();
    s.nu = static_cast<kernels::MaternNu>(j.at("nu").get<int>());
    s.degree = j.at("degree").get<int>();
    return s;
}

}  // namespace

void save_model_json(const multitask::MultiTaskModel& m, const std::string& path) {
    json j;
    j["format"] = "solarkm-model-v1";
    j["mode"] = mode_name(m.mode);
    j["horizons"] = m.horizons;
    j["options"] = {{"family", family_name(m.options.family)},
                    {"spec", spec_to_json(m.options.spec)},
                    {"ridge_gamma", m.options.ridge_gamma},
                    {"noise", m.options.noise},
                    {"box", m.options.box},
                    {"epsilon", m.options.epsilon}};
    j["X"] = to_json(m.X);
    json cx = json::array();
    for (const auto& x : m.chain_X) cx.push_back(to_json(x));
    j["chain_X"] = std::move(cx);

    json krr = json::array();
    for (const auto& a : m.krr_alpha) krr.push_back(to_json(a));
    j["krr_alpha"] = std::move(krr);

    json gpr = json::array();
    for (const auto& g : m.gpr)
        gpr.push_back({{"alpha", to_json(g.alpha)}, {"chol", to_json(g.chol_lower)},
                       {"noise", g.noise}});
    j["gpr"] = std::move(gpr);

    json svr = json::array();
    for (const auto& s : m.svr)
        svr.push_back({{"beta", to_json(s.beta)},
                       {"task_bias", to_json(s.task_bias)},
                       {"box", s.box},
                       {"epsilon", s.epsilon},
                       {"tasks", s.tasks},
                       {"iterations", s.iterations},
                       {"duality_gap", s.duality_gap},
                       {"dual_objective", s.dual_objective},
                       {"converged", s.converged}});
    j["svr"] = std::move(svr);

    json rvm = json::array();
    for (const auto& r : m.rvm)
        rvm.push_back({{"active", r.active},
                       {"mu", to_json(r.mu)},
                       {"sigma", to_json(r.sigma)},
                       {"noise", r.noise},
                       {"best_ssr", r.best_ssr},
                       {"iterations", r.iterations}});
    j["rvm"] = std::move(rvm);

    if (m.mode == multitask::Mode::Joint) {
        j["corr"] = {{"length_scale", m.corr.length_scale}, {"horizons", m.corr.horizons}};
        if (m.options.family == multitask::Family::GPR)
            j["mt_gpr"] = {{"alpha", to_json(m.mt_gpr.alpha)},
                           {"chol", to_json(m.mt_gpr.chol_lower)},
                           {"noises", to_json(m.mt_gpr.noises)},
                           {"n", m.mt_gpr.n}};
    }

    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_model_json: cannot open " + path);
    f << j.dump(1) << '\n';
}

multitask::MultiTaskModel load_model_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_model_json: cannot open " + path);
    json j;
    f >> j;
    if (j.value("format", "") != std::string("solarkm-model-v1"))
        throw std::runtime_error("load_model_json: unrecognized format in " + path);

    multitask::MultiTaskModel m;
    m.mode = mode_from(j.at("mode").get<std::string>());
    m.horizons = j.at("horizons").get<int>();
    const auto& jo = j.at("options");
    m.options.family = family_from(jo.at("family").get<std::string>());
    m.options.spec = spec_from(jo.at("spec"));
    m.options.ridge_gamma = jo.at("ridge_gamma").get<double>();
    m.options.noise = jo.at("noise").get<double>();
    m.options.box = jo.at("box").get<double>();
    m.options.epsilon = jo.at("epsilon").get<double>();
    m.X = mat_from(j.at("X"));
    for (const auto& x : j.at("chain_X")) m.chain_X.push_back(mat_from(x));
    for (const auto& a : j.at("krr_alpha")) m.krr_alpha.push_back(vec_from(a));
    for (const auto& g : j.at("gpr")) {
        dense::GprPosterior p;
        p.alpha = vec_from(g.at("alpha"));
        p.chol_lower = mat_from(g.at("chol"));
        p.noise = g.at("noise").get<double>();
        m.gpr.push_back(std::move(p));
    }
    for (const auto& s : j.at("svr")) {
        sparse::SvrModel v;
        v.beta = vec_from(s.at("beta"));
        v.task_bias = vec_from(s.at("task_bias"));
        v.box = s.at("box").get<double>();
        v.epsilon = s.at("epsilon").get<double>();
        v.tasks = s.at("tasks").get<int>();
        v.iterations = s.at("iterations").get<int>();
        v.duality_gap = s.at("duality_gap").get<double>();
        v.dual_objective = s.at("dual_objective").get<double>();
        v.converged = s.at("converged").get<bool>();
        m.svr.push_back(std::move(v));
    }
    for (const auto& r : j.at("rvm")) {
        sparse::RvmModel v;
        v.active = r.at("active").get<std::vector<int>>();
        v.mu = vec_from(r.at("mu"));
        v.sigma = mat_from(r.at("sigma"));
        v.noise = r.at("noise").get<double>();
        v.best_ssr = r.at("best_ssr").get<double>();
        v.iterations = r.at("iterations").get<int>();
        m.rvm.push_back(std::move(v));
    }
    if (m.mode == multitask::Mode::Joint) {
        m.corr = kernels::correlation_matrix(j.at("corr").at("horizons").get<int>(),
                                             j.at("corr").at("length_scale").get<double>());
        if (m.options.family == multitask::Family::GPR) {
            m.mt_gpr.alpha = vec_from(j.at("mt_gpr").at("alpha"));
            m.mt_gpr.chol_lower = mat_from(j.at("mt_gpr").at("chol"));
            m.mt_gpr.noises = vec_from(j.at("mt_gpr").at("noises"));
            m.mt_gpr.n = j.at("mt_gpr").at("n").get<Eigen::Index>();
            m.mt_gpr.corr = m.corr;
        }
    }
    return m;
}

// --- grid I/O --------------------------------------------------------------

namespace {
constexpr char kGridMagic[4] = {'S', 'K', 'M', 'G'};
}

void write_grid(const std::string& path, const MatrixXd& grid) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_grid: cannot open " + path);
    const uint32_t rows = static_cast<uint32_t>(grid.rows());
    const uint32_t cols = static_cast<uint32_t>(grid.cols());
    const uint32_t dtype = 0;  // float32
    f.write(kGridMagic, 4);
    f.write(reinterpret_cast<const char*>(&rows), 4);
    f.write(reinterpret_cast<const char*>(&cols), 4);
    f.write(reinterpret_cast<const char*>(&dtype), 4);
    for (Eigen::Index i = 0; i < grid.rows(); ++i)
        for (Eigen::Index j = 0; j < grid.cols(); ++j) {
            const float v = static_cast<float>(grid(i, j));
            f.write(reinterpret_cast<const char*>(&v), 4);
        }
}

MatrixXd read_grid(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_grid: cannot open " + path);
    char magic[4];
    uint32_t rows = 0, cols = 0, dtype = 0;
    f.read(magic, 4);
    f.read(reinterpret_cast<char*>(&rows), 4);
    f.read(reinterpret_cast<char*>(&cols), 4);
    f.read(reinterpret_cast<char*>(&dtype), 4);
    if (!f || std::memcmp(magic, kGridMagic, 4) != 0 || dtype != 0)
        throw std::runtime_error("read_grid: bad header in " + path);
    MatrixXd grid(rows, cols);
    for (uint32_t i = 0; i < rows; ++i)
        for (uint32_t j = 0; j < cols; ++j) {
            float v;
            f.read(reinterpret_cast<char*>(&v), 4);
            grid(i, j) = v;
        }
    if (!f) throw std::runtime_error("read_grid: truncated payload in " + path);
    return grid;
}

void write_grid_text(const std::string& path, const MatrixXd& grid) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_grid_text: cannot open " + path);
    f << grid.rows() << ' ' << grid.cols() << '\n';
    f.precision(17);
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
        for (Eigen::Index j = 0; j < grid.cols(); ++j) f << (j ? " " : "") << grid(i, j);
        f << '\n';
    }
}

MatrixXd read_grid_text(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_grid_text: cannot open " + path);
    Eigen::Index rows = 0, cols = 0;
    f >> rows >> cols;
    if (!f || rows < 1 || cols < 1)
        throw std::runtime_error("read_grid_text: bad dimensions in " + path);
    MatrixXd grid(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) f >> grid(i, j);
    if (!f) throw std::runtime_error("read_grid_text: truncated matrix in " + path);
    return grid;
}

// --- configuration ---------------------------------------------------------

std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_config: cannot open " + path);
    std::map<std::string, std::string> cfg;
    std::string line, section;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(f, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("read_config: malformed line in " + path + ": " + line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        cfg[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
}

double config_num(const std::map<std::string, std::string>& cfg, const std::string& key,
                  double fallback) {
    const auto it = cfg.find(key);
    return it == cfg.end() ? fallback : std::stod(it->second);
}

std::string config_str(const std::map<std::string, std::string>& cfg, const std::string& key,
                       const std::string& fallback) {
    const auto it = cfg.find(key);
    return it == cfg.end() ? fallback : it->second;
}

}  // namespace solarkm::pipeline
