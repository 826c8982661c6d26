#include "solarkm/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace solarkm::sparse {

namespace {

// Generic SMO over 2L variables z = [alpha; alpha*] with per-task equality
// constraints sum_{i in task} (alpha_i - alpha*_i) = 0. Variable v < L is
// alpha_{v} (sign +1), v >= L is alpha*_{v-L} (sign -1).
struct SmoProblem {
    const MatrixXd& K;       // L x L
    const VectorXd& y;       // L
    const std::vector<int>& task;  // task id per sample
    int n_tasks;
    double box;
    double epsilon;
};

struct SmoResult {
    VectorXd beta;
    VectorXd bias;
    long iterations = 0;
    bool converged = true;
    double dual_objective = 0.0;
    double max_violation = 0.0;
};

SmoResult solve_smo(const SmoProblem& p, const SvrOptions& opts) {
    const Eigen::Index L = p.y.size();
    VectorXd z = VectorXd::Zero(2 * L);
    // gradient of 1/2 z'Qz + p'z at z = 0
    VectorXd grad(2 * L);
    for (Eigen::Index i = 0; i < L; ++i) {
        grad(i) = p.epsilon - p.y(i);
        grad(L + i) = p.epsilon + p.y(i);
    }
    auto sign_of = [&](Eigen::Index v) { return v < L ? 1.0 : -1.0; };
    auto sample_of = [&](Eigen::Index v) { return v < L ? v : v - L; };

    long it = 0;
    double violation = 0.0;
    for (; it < opts.max_iterations; ++it) {
        // Max-violating pair within a single task block.
        double best_viol = 0.0;
        Eigen::Index best_i = -1, best_j = -1;
        std::vector<double> up_val(p.n_tasks, -std::numeric_limits<double>::infinity());
        std::vector<double> low_val(p.n_tasks, std::numeric_limits<double>::infinity());
        std::vector<Eigen::Index> up_idx(p.n_tasks, -1), low_idx(p.n_tasks, -1);
        for (Eigen::Index v = 0; v < 2 * L; ++v) {
            const double s = sign_of(v);
            const int t = p.task[static_cast<std::size_t>(sample_of(v))];
            const double score = -s * grad(v);
            // can move z_v by +s * t, t > 0
            const bool can_up = (s > 0.0) ? (z(v) < p.box) : (z(v) > 0.0);
            // can move z_v by -s * t, t > 0
            const bool can_low = (s > 0.0) ? (z(v) > 0.0) : (z(v) < p.box);
            if (can_up && score > up_val[t]) {
                up_val[t] = score;
                up_idx[t] = v;
            }
            if (can_low && score < low_val[t]) {
                low_val[t] = score;
                low_idx[t] = v;
            }
        }
        for (int t = 0; t < p.n_tasks; ++t) {
            if (up_idx[t] < 0 || low_idx[t] < 0) continue;
            const double viol = up_val[t] - low_val[t];
            if (viol > best_viol) {
                best_viol = viol;
                best_i = up_idx[t];
                best_j = low_idx[t];
            }
        }
        violation = best_viol;
        if (best_i < 0 || best_viol <= opts.tol) break;

        const Eigen::Index si = sample_of(best_i), sj = sample_of(best_j);
        const double yi = sign_of(best_i), yj = sign_of(best_j);
        double quad = p.K(si, si) + p.K(sj, sj) - 2.0 * p.K(si, sj);
        if (quad <= 1e-12) quad = 1e-12;
        double step = best_viol / quad;
        // box limits along the feasible direction z_i += yi*t, z_j -= yj*t
        const double lim_i = (yi > 0.0) ? (p.box - z(best_i)) : z(best_i);
        const double lim_j = (yj > 0.0) ? z(best_j) : (p.box - z(best_j));
        step = std::min({step, lim_i, lim_j});
        if (step <= 0.0) break;
        z(best_i) += yi * step;
        z(best_j) -= yj * step;
        for (Eigen::Index v = 0; v < 2 * L; ++v)
            grad(v) += sign_of(v) * step * (p.K(sample_of(v), si) - p.K(sample_of(v), sj));
    }

    // alpha_i * alpha*_i = 0: shrink the common part (never increases the
    // objective for epsilon >= 0 and preserves beta).
    for (Eigen::Index i = 0; i < L; ++i) {
        const double m = std::min(z(i), z(L + i));
        if (m > 0.0) {
            z(i) -= m;
            z(L + i) -= m;
        }
    }

    SmoResult out;
    out.iterations = it;
    out.converged = violation <= opts.tol;
    out.max_violation = violation;
    out.beta = z.head(L) - z.tail(L);

    const VectorXd kb = p.K * out.beta;
    // dual objective (maximization form)
    out.dual_objective = -0.5 * out.beta.dot(kb) + p.y.dot(out.beta) -
                         p.epsilon * (z.head(L).sum() + z.tail(L).sum());

    // Per-task bias from the KKT interval; midpoint when no free vector.
    out.bias.resize(p.n_tasks);
    std::vector<double> lo(p.n_tasks, -std::numeric_limits<double>::infinity());
    std::vector<double> hi(p.n_tasks, std::numeric_limits<double>::infinity());
    for (Eigen::Index i = 0; i < L; ++i) {
        const int t = p.task[static_cast<std::size_t>(i)];
        const double ga = kb(i) + p.epsilon - p.y(i);    // grad wrt alpha_i
        const double gs = -kb(i) + p.epsilon + p.y(i);   // grad wrt alpha*_i
        if (z(i) < p.box) lo[t] = std::max(lo[t], -ga);
        if (z(i) > 0.0) hi[t] = std::min(hi[t], -ga);
        if (z(L + i) > 0.0) lo[t] = std::max(lo[t], gs);
        if (z(L + i) < p.box) hi[t] = std::min(hi[t], gs);
    }
    for (int t = 0; t < p.n_tasks; ++t) {
        if (!std::isfinite(lo[t]) && !std::isfinite(hi[t])) {
            out.bias(t) = 0.0;
        } else if (!std::isfinite(lo[t])) {
            out.bias(t) = hi[t];
        } else if (!std::isfinite(hi[t])) {
            out.bias(t) = lo[t];
        } else {
            out.bias(t) = 0.5 * (lo[t] + hi[t]);
        }
    }
    // Degenerate tube: nothing active, predict the per-task median.
    if (out.beta.lpNorm<Eigen::Infinity>() == 0.0) {
        for (int t = 0; t < p.n_tasks; ++t) {
            std::vector<double> ys;
            for (Eigen::Index i = 0; i < L; ++i)
                if (p.task[static_cast<std::size_t>(i)] == t) ys.push_back(p.y(i));
            std::sort(ys.begin(), ys.end());
            const std::size_t m = ys.size();
            out.bias(t) = (m % 2 == 1) ? ys[m / 2] : 0.5 * (ys[m / 2 - 1] + ys[m / 2]);
        }
    }
    return out;
}

double primal_objective(const MatrixXd& K, const VectorXd& y, const std::vector<int>& task,
                        const VectorXd& beta, const VectorXd& bias, double box, double epsilon) {
    const VectorXd f = K * beta;
    double hinge = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double r = std::abs(y(i) - f(i) - bias(task[static_cast<std::size_t>(i)]));
        hinge += std::max(0.0, r - epsilon);
    }
    return 0.5 * beta.dot(f) + box * hinge;
}

SvrModel fit_svr_impl(const MatrixXd& K, const VectorXd& y, const std::vector<int>& task,
                      int n_tasks, double box, double epsilon, const SvrOptions& opts) {
    if (box <= 0.0) throw std::invalid_argument("fit_svr: box bound must be > 0");
    if (epsilon < 0.0) throw std::invalid_argument("fit_svr: epsilon must be >= 0");
    if (K.rows() != y.size()) throw std::invalid_argument("fit_svr: size mismatch");

    SmoProblem p{K, y, task, n_tasks, box, epsilon};
    SmoResult r = solve_smo(p, opts);

    SvrModel model;
    model.beta = r.beta;
    model.task_bias = r.bias;
    model.box = box;
    model.epsilon = epsilon;
    model.tasks = n_tasks;
    model.iterations = static_cast<int>(r.iterations);
    model.dual_objective = r.dual_objective;
    model.duality_gap =
        primal_objective(K, y, task, r.beta, r.bias, box, epsilon) - r.dual_objective;
    model.converged = r.converged;
    if (!r.converged)
        throw std::runtime_error("fit_svr: SMO did not converge (max violation " +
                                 std::to_string(r.max_violation) + ")");
    return model;
}

}  // namespace

SvrModel fit_svr(const GramMatrix& K, const VectorXd& y, double box, double epsilon,
                 const SvrOptions& opts) {
    std::vector<int> task(static_cast<std::size_t>(y.size()), 0);
    return fit_svr_impl(K.entries, y, task, 1, box, epsilon, opts);
}

SvrModel fit_mt_svr(const GramMatrix& K, const VectorXd& y_stacked, double box, double epsilon,
                    const CorrelationMatrix& corr, const SvrOptions& opts) {
    const Eigen::Index n = K.entries.rows();
    const int C = corr.horizons;
    if (y_stacked.size() != C * n) throw std::invalid_argument("fit_mt_svr: size mismatch");
    const MatrixXd Kt = kernels::kron(corr.entries, K.entries);
    std::vector<int> task(static_cast<std::size_t>(C * n));
    for (int c = 0; c < C; ++c)
        for (Eigen::Index i = 0; i < n; ++i) task[static_cast<std::size_t>(c * n + i)] = c;
    return fit_svr_impl(Kt, y_stacked, task, C, box, epsilon, opts);
}

double predict_svr(const SvrModel& model, const VectorXd& kvec) {
    if (model.beta.size() != kvec.size()) throw std::invalid_argument("predict_svr: size mismatch");
    return model.beta.dot(kvec) + model.task_bias(0);
}

VectorXd predict_mt_svr(const SvrModel& model, const CorrelationMatrix& corr,
                        const VectorXd& kvec) {
    const int C = corr.horizons;
    const Eigen::Index n = kvec.size();
    if (model.beta.size() != C * n)
        throw std::invalid_argument("predict_mt_svr: size mismatch");
    VectorXd s(C);
    for (int c = 0; c < C; ++c) s(c) = model.beta.segment(c * n, n).dot(kvec);
    return corr.entries * s + model.task_bias;
}

RvmModel fit_rvm(const MatrixXd& design, const VectorXd& y, const RvmOptions& opts) {
    const Eigen::Index n = design.rows();
    if (n < 2) throw std::invalid_argument("fit_rvm: need at least 2 samples");
    if (design.cols() != n || y.size() != n)
        throw std::invalid_argument("fit_rvm: design must be square and match y");

    std::vector<int> active(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) active[static_cast<std::size_t>(i)] = static_cast<int>(i);
    VectorXd lambda = VectorXd::Constant(n, opts.init_lambda);
    const double yvar = (y.array() - y.mean()).square().mean();
    double noise = std::max(0.1 * yvar, 1e-10);

    RvmModel best;  // best iterate within the current active-set stretch
    double global_best = std::numeric_limits<double>::infinity();
    double stretch_best = std::numeric_limits<double>::infinity();
    int since_progress = 0;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        const auto m = static_cast<Eigen::Index>(active.size());
        MatrixXd Phi(n, m);
        for (Eigen::Index a = 0; a < m; ++a)
            Phi.col(a) = design.col(active[static_cast<std::size_t>(a)]);
        MatrixXd H = Phi.transpose() * Phi / noise;
        H.diagonal() += lambda;
        Eigen::LDLT<MatrixXd> ldlt(H);
        if (ldlt.info() != Eigen::Success)
            throw std::runtime_error("fit_rvm: posterior factorization failed");
        const MatrixXd Sigma = ldlt.solve(MatrixXd::Identity(m, m));
        const VectorXd mu = Sigma * (Phi.transpose() * y) / noise;

        const VectorXd resid = y - Phi * mu;
        const double ssr = resid.squaredNorm();
        bool progressed = false;
        if (ssr < global_best - 1e-12) {
            global_best = ssr;
            progressed = true;
        }
        if (ssr < stretch_best) {
            stretch_best = ssr;
            best.active = active;
            best.mu = mu;
            best.sigma = Sigma;
            best.noise = noise;
            best.best_ssr = ssr;
        }

        // evidence updates: relevance, precision, noise
        VectorXd rel(m), new_lambda(m);
        double rel_sum = 0.0;
        for (Eigen::Index a = 0; a < m; ++a) {
            rel(a) = 1.0 - lambda(a) * Sigma(a, a);
            rel_sum += rel(a);
            const double mu2 = mu(a) * mu(a);
            new_lambda(a) = (mu2 > 0.0) ? std::max(rel(a), 1e-12) / mu2
                                        : std::numeric_limits<double>::infinity();
        }
        const double denom = static_cast<double>(n) - rel_sum;
        if (denom > 0.0 && ssr > 0.0) noise = ssr / denom;

        // prune columns whose precision diverged
        std::vector<int> keep_active;
        std::vector<double> keep_lambda;
        for (Eigen::Index a = 0; a < m; ++a) {
            if (new_lambda(a) < opts.prune_threshold) {
                keep_active.push_back(active[static_cast<std::size_t>(a)]);
                keep_lambda.push_back(new_lambda(a));
            }
        }
        if (keep_active.empty())
            throw std::runtime_error("fit_rvm: all basis functions pruned (degenerate fit)");
        if (static_cast<Eigen::Index>(keep_active.size()) < m) {
            // structural progress: restart the stretch under the smaller set
            progressed = true;
            stretch_best = std::numeric_limits<double>::infinity();
        }
        active = std::move(keep_active);
        lambda = Eigen::Map<VectorXd>(keep_lambda.data(),
                                      static_cast<Eigen::Index>(keep_lambda.size()));

        if (progressed) since_progress = 0;
        else if (++since_progress >= opts.patience) break;
    }
    if (!std::isfinite(global_best)) throw std::runtime_error("fit_rvm: no valid iterate");
    best.iterations = it;
    return best;
}

GaussianPrediction predict_rvm(const RvmModel& model, const VectorXd& design_row) {
    const auto m = static_cast<Eigen::Index>(model.active.size());
    VectorXd k(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        const int idx = model.active[static_cast<std::size_t>(a)];
        if (idx >= design_row.size()) throw std::invalid_argument("predict_rvm: size mismatch");
        k(a) = design_row(idx);
    }
    GaussianPrediction out;
    out.mean = model.mu.dot(k);
    out.variance = model.noise + k.dot(model.sigma * k);
    return out;
}

RvmModel fit_mt_rvm(const GramMatrix& K, const VectorXd& y_stacked,
                    const CorrelationMatrix& corr, const RvmOptions& opts) {
    const Eigen::Index n = K.entries.rows();
    if (y_stacked.size() != corr.horizons * n)
        throw std::invalid_argument("fit_mt_rvm: size mismatch");
    return fit_rvm(kernels::kron(corr.entries, K.entries), y_stacked, opts);
}

std::vector<GaussianPrediction> predict_mt_rvm(const RvmModel& model,
                                               const CorrelationMatrix& corr,
                                               const VectorXd& kvec, Eigen::Index n_train) {
    const int C = corr.horizons;
    if (kvec.size() != n_train) throw std::invalid_argument("predict_mt_rvm: size mismatch");
    std::vector<GaussianPrediction> out;
    out.reserve(static_cast<std::size_t>(C));
    for (int c = 0; c < C; ++c) {
        // column c of Gamma (x) k(x*)
        VectorXd col(C * n_train);
        for (int cp = 0; cp < C; ++cp)
            col.segment(cp * n_train, n_train) = corr.entries(cp, c) * kvec;
        out.push_back(predict_rvm(model, col));
    }
    return out;
}

}  // namespace solarkm::sparse
