// Structure descriptors: the 2-body MBTR term (Gaussian-broadened inverse
// pairwise distances per element-pair class, exponentially distance-weighted),
// PCA for dimensionality reduction, and min-max scaling of the projected
// features into rotation-angle range for the encoding circuits.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qal/errors.hpp"
#include "qal/geometry.hpp"

namespace qal {

struct MbtrParams {
    double grid_min = 0.0; // Å^-1
    double grid_max = 1.0; // Å^-1
    int grid_points = 50;
    double sigma = 0.02; // Å^-1 broadening
    double decay = 0.5;  // Å^-1 weighting rate
    std::vector<std::pair<std::string, std::string>> element_pairs = {
        {"Si", "Si"}, {"Si", "Al"}, {"Al", "Al"}};

    void validate() const {
        if (!(grid_min < grid_max)) {
            throw std::invalid_argument("mbtr: grid_min must be below grid_max");
        }
        if (grid_points < 2) {
            throw std::invalid_argument("mbtr: grid_points must be at least 2");
        }
        if (!(sigma > 0.0)) {
            throw std::invalid_argument("mbtr: sigma must be positive");
        }
        if (decay < 0.0) {
            throw std::invalid_argument("mbtr: decay must be nonnegative");
        }
        if (element_pairs.empty()) {
            throw std::invalid_argument("mbtr: element_pairs must not be empty");
        }
    }

    int length() const { return static_cast<int>(element_pairs.size()) * grid_points; }
};

// Descriptor vector of length |element_pairs| * grid_points: for each pair
// class, a grid over inverse distance g where every matching atom pair (i,j)
// contributes exp(-decay*r_ij) * N(g; 1/r_ij, sigma).
inline Eigen::VectorXd mbtr2(const Geometry& geometry, const MbtrParams& params) {
    params.validate();
    geometry.validate();
    const int n = geometry.n_atoms();
    if (n < 2) {
        throw std::invalid_argument("mbtr: need at least 2 atoms for pairwise terms");
    }

    // unordered pair class lookup; -1 marks "not listed"
    const auto pair_class = [&](const std::string& a, const std::string& b) {
        for (std::size_t c = 0; c < params.element_pairs.size(); ++c) {
            const auto& [p, q] = params.element_pairs[c];
            if ((a == p && b == q) || (a == q && b == p)) return static_cast<int>(c);
        }
        return -1;
    };
    for (const auto& element : geometry.elements) {
        const bool listed =
            std::any_of(params.element_pairs.begin(), params.element_pairs.end(),
                        [&](const auto& pq) { return pq.first == element || pq.second == element; });
        if (!listed) {
            throw std::invalid_argument("mbtr: element '" + element +
                                        "' appears in no pair class");
        }
    }

    const double step = (params.grid_max - params.grid_min) / (params.grid_points - 1);
    const double norm = 1.0 / (params.sigma * std::sqrt(2.0 * std::numbers::pi));
    Eigen::VectorXd descriptor = Eigen::VectorXd::Zero(params.length());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double r = (geometry.positions.row(i) - geometry.positions.row(j)).norm();
            if (r == 0.0) {
                throw DegenerateGeometryError("mbtr: atoms " + std::to_string(i) + " and " +
                                              std::to_string(j) + " coincide");
            }
            const int c = pair_class(geometry.elements[static_cast<std::size_t>(i)],
                                     geometry.elements[static_cast<std::size_t>(j)]);
            if (c < 0) continue; // pair of listed elements but unlisted combination
            const double weight = std::exp(-params.decay * r);
            const double center = 1.0 / r;
            const int base = c * params.grid_points;
            for (int t = 0; t < params.grid_points; ++t) {
                const double g = params.grid_min + step * t;
                const double z = (g - center) / params.sigma;
                descriptor(base + t) += weight * norm * std::exp(-0.5 * z * z);
            }
        }
    }
    return descriptor;
}

struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;         // m x dim, orthonormal rows
    Eigen::VectorXd explained_variance; // m, non-increasing

    int n_components() const { return static_cast<int>(components.rows()); }
    int input_dim() const { return static_cast<int>(mean.size()); }
};

// Principal axes of mean-centered descriptor rows via thin SVD. Sign
// convention: each component's largest-magnitude entry is positive, so the
// basis is reproducible across runs and platforms.
inline PcaModel fit_pca(const Eigen::MatrixXd& descriptors, int m) {
    const Eigen::Index rows = descriptors.rows();
    const Eigen::Index cols = descriptors.cols();
    if (rows < 2) {
        throw std::invalid_argument("fit_pca: need at least 2 rows");
    }
    if (m < 1 || m > std::min(rows, cols)) {
        throw std::invalid_argument("fit_pca: m must be in [1, min(rows, cols)], got " +
                                    std::to_string(m));
    }

    PcaModel model;
    model.mean = descriptors.colwise().mean();
    const Eigen::MatrixXd centered = descriptors.rowwise() - model.mean.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);

    model.components = svd.matrixV().leftCols(m).transpose();
    model.explained_variance.resize(m);
    for (int k = 0; k < m; ++k) {
        const double s = svd.singularValues()(k);
        model.explained_variance(k) = s * s / static_cast<double>(rows - 1);
        Eigen::Index max_idx = 0;
        model.components.row(k).cwiseAbs().maxCoeff(&max_idx);
        if (model.components(k, max_idx) < 0.0) {
            model.components.row(k) = -model.components.row(k);
        }
    }
    return model;
}

inline Eigen::VectorXd pca_project(const PcaModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.mean.size()) {
        throw std::invalid_argument("pca_project: input dimension " + std::to_string(x.size()) +
                                    " does not match model dimension " +
                                    std::to_string(model.mean.size()));
    }
    return model.components * (x - model.mean);
}

inline Eigen::MatrixXd pca_project(const PcaModel& model, const Eigen::MatrixXd& rows) {
    if (rows.cols() != model.mean.size()) {
        throw std::invalid_argument("pca_project: input dimension " + std::to_string(rows.cols()) +
                                    " does not match model dimension " +
                                    std::to_string(model.mean.size()));
    }
    return (rows.rowwise() - model.mean.transpose()) * model.components.transpose();
}

// Per-column affine map sending the observed [min, max] to [lo, hi]. The
// fitted parameters are reused on later (virtual) points, which may land
// outside [lo, hi]; no clamping. Constant columns map to the midpoint and
// are flagged.
struct MinMaxScaler {
    double lo = 0.0;
    double hi = std::numbers::pi;
    Eigen::VectorXd col_min;
    Eigen::VectorXd col_max;
    std::vector<bool> constant_column;

    static MinMaxScaler fit(const Eigen::MatrixXd& columns, double lo, double hi) {
        if (!(hi > lo)) {
            throw std::invalid_argument("minmax_scale: need hi > lo");
        }
        if (columns.rows() < 1) {
            throw std::invalid_argument("minmax_scale: need at least one row");
        }
        MinMaxScaler scaler;
        scaler.lo = lo;
        scaler.hi = hi;
        scaler.col_min = columns.colwise().minCoeff();
        scaler.col_max = columns.colwise().maxCoeff();
        scaler.constant_column.resize(static_cast<std::size_t>(columns.cols()));
        for (Eigen::Index c = 0; c < columns.cols(); ++c) {
            scaler.constant_column[static_cast<std::size_t>(c)] =
                scaler.col_min(c) == scaler.col_max(c);
        }
        return scaler;
    }

    bool any_constant() const {
        return std::find(constant_column.begin(), constant_column.end(), true) !=
               constant_column.end();
    }

    Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const {
        if (x.cols() != col_min.size()) {
            throw std::invalid_argument("minmax_scale: column count mismatch");
        }
        Eigen::MatrixXd out(x.rows(), x.cols());
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            if (constant_column[static_cast<std::size_t>(c)]) {
                out.col(c).setConstant(0.5 * (lo + hi));
            } else {
                const double scale = (hi - lo) / (col_max(c) - col_min(c));
                out.col(c) = lo + (x.col(c).array() - col_min(c)) * scale;
            }
        }
        return out;
    }
};

inline std::pair<Eigen::MatrixXd, MinMaxScaler> minmax_scale(const Eigen::MatrixXd& columns,
                                                             double lo, double hi) {
    MinMaxScaler scaler = MinMaxScaler::fit(columns, lo, hi);
    return {scaler.transform(columns), std::move(scaler)};
}

} // namespace qal
