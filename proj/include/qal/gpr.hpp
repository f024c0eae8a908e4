// Gaussian-process regression over any Gram-matrix source, classical or
// quantum. Targets are centered by their training mean before the solve and
// the mean is added back at prediction, which keeps kernels without a
// constant component well behaved. The regularizer diag_reg is added to the
// Gram diagonal and never tuned.
//
// Classical kernel hyperparameters are tuned by maximizing the log marginal
// likelihood with a derivative-free multi-start coordinate descent in log10
// space; the kernel tree stays opaque to the optimizer.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qal/classical_kernel.hpp"
#include "qal/errors.hpp"
#include "qal/quantum_kernel.hpp"

namespace qal {

using KernelSpec = std::variant<ClassicalKernel, QuantumKernelSpec>;

inline Eigen::MatrixXd gram(const KernelSpec& kernel, const Eigen::MatrixXd& xa,
                            const Eigen::MatrixXd& xb, bool same_set) {
    if (std::holds_alternative<ClassicalKernel>(kernel)) {
        return classical_gram(std::get<ClassicalKernel>(kernel), xa, xb, same_set);
    }
    return quantum_gram(std::get<QuantumKernelSpec>(kernel), xa, xb, same_set);
}

// k(x, x) per row. Quantum kernels are unit on the diagonal by construction;
// for classical kernels a point evaluated against itself counts as the same
// index, so White contributes its noise level here.
inline Eigen::VectorXd prior_diagonal(const KernelSpec& kernel, const Eigen::MatrixXd& x) {
    Eigen::VectorXd diag(x.rows());
    if (std::holds_alternative<ClassicalKernel>(kernel)) {
        const ClassicalKernel& k = std::get<ClassicalKernel>(kernel);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            diag(i) = k.eval_scalar(x.row(i).squaredNorm(), 0.0, true);
        }
    } else {
        diag.setOnes();
    }
    return diag;
}

namespace detail {

inline Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    // Rerun an unblocked factorization to name the offending pivot.
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double d = a(i, i) - l.row(i).head(i).squaredNorm();
        if (d <= 0.0 || !std::isfinite(d)) {
            throw ConditioningError("Cholesky factorization failed: pivot " + std::to_string(d) +
                                        " at index " + std::to_string(i) +
                                        "; matrix is not positive definite at this diag_reg",
                                    d);
        }
        l(i, i) = std::sqrt(d);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            l(j, i) = (a(j, i) - l.row(j).head(i).dot(l.row(i).head(i))) / l(i, i);
        }
    }
    return l; // blocked path failed but the scan passed; use the scan result
}

} // namespace detail

// Factorized state from an explicit Gram matrix. The driver slices
// precomputed full-space quantum Grams through this entry point.
struct GramFit {
    double target_mean = 0.0;
    Eigen::MatrixXd factor;  // lower triangular L, L L^T = K + diag_reg I
    Eigen::VectorXd weights; // (K + diag_reg I)^{-1} (y - target_mean)
};

inline GramFit fit_gram(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double diag_reg) {
    if (k.rows() != k.cols()) {
        throw std::invalid_argument("fit_gram: Gram matrix must be square");
    }
    if (k.rows() != y.size() || y.size() < 1) {
        throw std::invalid_argument("fit_gram: need as many targets as Gram rows, at least 1");
    }
    GramFit fit;
    fit.target_mean = y.mean();
    Eigen::MatrixXd a = k;
    a.diagonal().array() += diag_reg;
    fit.factor = detail::cholesky_lower(a);
    const Eigen::VectorXd centered = y.array() - fit.target_mean;
    fit.weights = fit.factor.transpose().triangularView<Eigen::Upper>().solve(
        fit.factor.triangularView<Eigen::Lower>().solve(centered));
    return fit;
}

struct Prediction {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

inline Prediction predict_gram(const GramFit& fit, const Eigen::MatrixXd& k_star,
                               const Eigen::VectorXd& prior_diag) {
    if (k_star.cols() != fit.weights.size() || k_star.rows() != prior_diag.size()) {
        throw std::invalid_argument("predict_gram: cross-Gram shape mismatch");
    }
    Prediction out;
    out.mean = (k_star * fit.weights).array() + fit.target_mean;
    const Eigen::MatrixXd v =
        fit.factor.triangularView<Eigen::Lower>().solve(k_star.transpose());
    out.variance.resize(k_star.rows());
    for (Eigen::Index i = 0; i < k_star.rows(); ++i) {
        double var = prior_diag(i) - v.col(i).squaredNorm();
        if (var < 0.0) {
            if (var < -1e-10) {
                throw NumericalError("predict: variance " + std::to_string(var) +
                                     " below the rounding floor");
            }
            var = 0.0;
        }
        out.variance(i) = var;
    }
    return out;
}

struct GprModel {
    KernelSpec kernel;
    double diag_reg = 0.0;
    Eigen::MatrixXd training_inputs; // rows are points
    GramFit fit;
};

inline GprModel fit(KernelSpec kernel, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    double diag_reg) {
    if (x.rows() != y.size() || y.size() < 1) {
        throw std::invalid_argument("fit: need one target per training input, at least 1");
    }
    GprModel model{std::move(kernel), diag_reg, x, {}};
    model.fit = fit_gram(gram(model.kernel, x, x, true), y, diag_reg);
    return model;
}

inline Prediction predict(const GprModel& model, const Eigen::MatrixXd& x_star) {
    if (x_star.cols() != model.training_inputs.cols()) {
        throw std::invalid_argument("predict: query dimension " + std::to_string(x_star.cols()) +
                                    " does not match training dimension " +
                                    std::to_string(model.training_inputs.cols()));
    }
    const Eigen::MatrixXd k_star = gram(model.kernel, x_star, model.training_inputs, false);
    return predict_gram(model.fit, k_star, prior_diagonal(model.kernel, x_star));
}

inline double log_marginal_likelihood(const KernelSpec& kernel, const Eigen::MatrixXd& x,
                                      const Eigen::VectorXd& y, double diag_reg) {
    const GramFit fit = fit_gram(gram(kernel, x, x, true), y, diag_reg);
    const Eigen::VectorXd centered = y.array() - fit.target_mean;
    const double quad = centered.dot(fit.weights);
    const double log_det_half = fit.factor.diagonal().array().log().sum();
    return -0.5 * quad - log_det_half -
           0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

// Per-leaf-parameter search box, aligned with ClassicalKernel::parameters().
struct HyperBounds {
    std::vector<std::pair<double, double>> ranges;

    void validate(int n_parameters) const {
        if (static_cast<int>(ranges.size()) != n_parameters) {
            throw std::invalid_argument("HyperBounds: expected " + std::to_string(n_parameters) +
                                        " ranges, got " + std::to_string(ranges.size()));
        }
        for (const auto& [lo, hi] : ranges) {
            if (!(lo > 0.0) || !(lo < hi)) {
                throw std::invalid_argument("HyperBounds: each range needs 0 < lower < upper");
            }
        }
    }
};

// Maximizes the log marginal likelihood over the kernel's leaf parameters.
// Search runs in log10 space: coordinate descent with step halving, started
// from the kernel's current parameters plus n_restarts random draws inside
// the box. Returns the best evaluated candidate, so the result is never
// worse than the starting point.
inline ClassicalKernel optimize_hyperparameters(ClassicalKernel kernel, const HyperBounds& bounds,
                                                const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                                double diag_reg, int n_restarts,
                                                std::mt19937_64& rng) {
    const int np = kernel.n_parameters();
    bounds.validate(np);

    std::vector<double> lo(np), hi(np);
    for (int d = 0; d < np; ++d) {
        lo[d] = std::log10(bounds.ranges[static_cast<std::size_t>(d)].first);
        hi[d] = std::log10(bounds.ranges[static_cast<std::size_t>(d)].second);
    }

    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    std::vector<double> best_logp;
    double best_value = kNegInf;

    auto evaluate = [&](const std::vector<double>& logp) {
        std::vector<double> p(logp.size());
        for (std::size_t d = 0; d < logp.size(); ++d) p[d] = std::pow(10.0, logp[d]);
        ClassicalKernel trial = kernel;
        trial.set_parameters(p);
        double value = kNegInf;
        try {
            value = log_marginal_likelihood(trial, x, y, diag_reg);
        } catch (const ConditioningError&) {
            // unusable parameter point, keep -inf
        }
        if (value > best_value) {
            best_value = value;
            best_logp = logp;
        }
        return value;
    };

    std::vector<std::vector<double>> starts;
    {
        std::vector<double> initial(static_cast<std::size_t>(np));
        const std::vector<double> p0 = kernel.parameters();
        for (int d = 0; d < np; ++d) {
            initial[static_cast<std::size_t>(d)] =
                std::clamp(std::log10(std::max(p0[static_cast<std::size_t>(d)],
                                               std::numeric_limits<double>::min())),
                           lo[d], hi[d]);
        }
        starts.push_back(std::move(initial));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int r = 0; r < n_restarts; ++r) {
            std::vector<double> draw(static_cast<std::size_t>(np));
            for (int d = 0; d < np; ++d) {
                draw[static_cast<std::size_t>(d)] = lo[d] + (hi[d] - lo[d]) * unit(rng);
            }
            starts.push_back(std::move(draw));
        }
    }

    constexpr double kInitialStep = 1.0; // one decade
    constexpr double kMinStep = 1e-2;
    for (const auto& start : starts) {
        std::vector<double> cur = start;
        double cur_value = evaluate(cur);
        double step = kInitialStep;
        while (step >= kMinStep) {
            bool improved = false;
            for (int d = 0; d < np; ++d) {
                for (double direction : {step, -step}) {
                    std::vector<double> cand = cur;
                    cand[static_cast<std::size_t>(d)] =
                        std::clamp(cur[static_cast<std::size_t>(d)] + direction, lo[d], hi[d]);
                    if (cand[static_cast<std::size_t>(d)] == cur[static_cast<std::size_t>(d)]) {
                        continue;
                    }
                    const double value = evaluate(cand);
                    if (value > cur_value) {
                        cur = std::move(cand);
                        cur_value = value;
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
    }

    if (best_value == kNegInf) {
        throw ConditioningError(
            "optimize_hyperparameters: every evaluated candidate failed to factorize", 0.0);
    }
    std::vector<double> best(best_logp.size());
    for (std::size_t d = 0; d < best.size(); ++d) best[d] = std::pow(10.0, best_logp[d]);
    kernel.set_parameters(best);
    return kernel;
}

inline double mae(const Eigen::VectorXd& predictions, const Eigen::VectorXd& truth) {
    if (predictions.size() != truth.size() || predictions.size() < 1) {
        throw std::invalid_argument("mae: need equal-length non-empty vectors");
    }
    return (predictions - truth).cwiseAbs().mean();
}

} // namespace qal
