#pragma once

#include <map>
#include <string>
#include <vector>

#include "solarkm/dense.hpp"
#include "solarkm/kernels.hpp"
#include "solarkm/sparse.hpp"

namespace solarkm::multitask {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Mode { Independent, Chain, Joint };
enum class Family { KRR, GPR, SVR, RVM };

struct FitOptions {
    Family family = Family::KRR;
    kernels::KernelSpec spec;
    double ridge_gamma = 1.0;  // KRR: lambda = gamma / N (Joint: gamma / (C N))
    double noise = 0.1;        // GPR noise variance
    double box = 1.0;
    double epsilon = 0.1;
    sparse::SvrOptions svr;
    sparse::RvmOptions rvm;
};

struct Prediction {
    VectorXd mean;      // ascending horizons
    VectorXd variance;  // zero unless has_variance
    bool has_variance = false;
};

/// One fitted multi-horizon forecaster. Independent keeps one base model per
/// horizon, Chain augments each step with the earlier horizons' targets
/// (teacher forcing at fit time, own predictions at predict time), Joint
/// solves the stacked Kronecker system once.
struct MultiTaskModel {
    Mode mode = Mode::Independent;
    int horizons = 1;
    FitOptions options;

    MatrixXd X;                    // training inputs (Independent / Joint)
    std::vector<MatrixXd> chain_X; // per-step augmented inputs (Chain)

    // Independent / Chain: one entry per horizon. Joint KRR keeps the stacked
    // alpha in krr_alpha[0].
    std::vector<VectorXd> krr_alpha;
    std::vector<dense::GprPosterior> gpr;
    std::vector<sparse::SvrModel> svr;
    std::vector<sparse::RvmModel> rvm;

    kernels::CorrelationMatrix corr;  // Joint only
    dense::MtGprPosterior mt_gpr;     // Joint GPR only
};

/// Y is N x C with ascending horizons in the columns. Joint mode requires a
/// correlation matrix with matching horizon count.
MultiTaskModel fit_multitask(Mode mode, const FitOptions& options, const MatrixXd& X,
                             const MatrixXd& Y,
                             const kernels::CorrelationMatrix* corr = nullptr);

Prediction predict_multitask(const MultiTaskModel& model, const VectorXd& xstar);

/// Row-wise predictions, N* x C.
MatrixXd predict_matrix(const MultiTaskModel& model, const MatrixXd& Xstar);

// --- sky-condition experts -------------------------------------------------

const std::vector<std::string>& sky_conditions();  // clear cumulus stratus nimbus

struct ExpertBank {
    std::map<std::string, MultiTaskModel> experts;

    /// All four conditions present and sharing the horizon count.
    void validate() const;
};

Prediction dispatch_expert(const ExpertBank& bank, const std::string& condition,
                           const VectorXd& xstar);

}  // namespace solarkm::multitask
