// Classical covariance functions as a small composition tree. Leaves are
// DotProduct(sigma0_sq), White(noise_level), RBF(length_scale) and
// Constant(value); internal nodes are sums and products, built with
// operator+ / operator*. The tunable leaf parameters are exposed in
// pre-order for the hyperparameter search.
//
//   dot_product: k(xi, xj) = sigma0_sq + xi . xj
//   white:       k(xi, xj) = noise_level if i == j else 0
//   rbf:         k(xi, xj) = exp(-|xi - xj|^2 / (2 l^2))
//   constant:    k(xi, xj) = c

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qal/errors.hpp"

namespace qal {

class ClassicalKernel {
public:
    enum class NodeKind { DotProduct, White, Rbf, Constant, Sum, Product };

    struct Node {
        NodeKind kind;
        double param = 0.0; // leaves only
        int left = -1;      // Sum/Product only
        int right = -1;
    };

    static ClassicalKernel dot_product(double sigma0_sq) {
        if (!(sigma0_sq >= 0.0) || !std::isfinite(sigma0_sq)) {
            throw std::invalid_argument("dot_product: sigma0_sq must be finite and >= 0");
        }
        return leaf(NodeKind::DotProduct, sigma0_sq);
    }
    static ClassicalKernel white(double noise_level) {
        if (!(noise_level >= 0.0) || !std::isfinite(noise_level)) {
            throw std::invalid_argument("white: noise_level must be finite and >= 0");
        }
        return leaf(NodeKind::White, noise_level);
    }
    static ClassicalKernel rbf(double length_scale) {
        if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
            throw std::invalid_argument("rbf: length_scale must be finite and > 0");
        }
        return leaf(NodeKind::Rbf, length_scale);
    }
    static ClassicalKernel constant(double value) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw std::invalid_argument("constant: value must be finite and > 0");
        }
        return leaf(NodeKind::Constant, value);
    }

    friend ClassicalKernel operator+(const ClassicalKernel& a, const ClassicalKernel& b) {
        return combine(NodeKind::Sum, a, b);
    }
    friend ClassicalKernel operator*(const ClassicalKernel& a, const ClassicalKernel& b) {
        return combine(NodeKind::Product, a, b);
    }

    // Evaluation in terms of the two pairwise scalars every leaf needs.
    double eval_scalar(double dot, double sq_dist, bool same_index) const {
        const double v = eval_node(root_, dot, sq_dist, same_index);
        if (!std::isfinite(v)) {
            throw NumericalError("classical kernel produced a non-finite value");
        }
        return v;
    }

    double eval(Eigen::Ref<const Eigen::VectorXd> xi, Eigen::Ref<const Eigen::VectorXd> xj,
                bool same_index) const {
        if (xi.size() != xj.size()) {
            throw std::invalid_argument("kernel eval: vector dimensions differ (" +
                                        std::to_string(xi.size()) + " vs " +
                                        std::to_string(xj.size()) + ")");
        }
        return eval_scalar(xi.dot(xj), (xi - xj).squaredNorm(), same_index);
    }

    // Leaf parameters in pre-order; the order is stable, so bounds vectors
    // and optimizer moves align with it.
    std::vector<double> parameters() const {
        std::vector<double> p;
        collect_params(root_, p);
        return p;
    }

    void set_parameters(std::span<const double> params) {
        std::size_t next = 0;
        assign_params(root_, params, next);
        if (next != params.size()) {
            throw std::invalid_argument("set_parameters: expected " + std::to_string(next) +
                                        " parameters, got " + std::to_string(params.size()));
        }
    }

    int n_parameters() const { return static_cast<int>(parameters().size()); }

    std::string describe() const { return describe_node(root_); }

private:
    static ClassicalKernel leaf(NodeKind kind, double param) {
        ClassicalKernel k;
        k.nodes_.push_back({kind, param, -1, -1});
        k.root_ = 0;
        return k;
    }

    static ClassicalKernel combine(NodeKind kind, const ClassicalKernel& a, const ClassicalKernel& b) {
        ClassicalKernel k;
        k.nodes_ = a.nodes_;
        const int offset = static_cast<int>(k.nodes_.size());
        for (Node n : b.nodes_) {
            if (n.left >= 0) n.left += offset;
            if (n.right >= 0) n.right += offset;
            k.nodes_.push_back(n);
        }
        k.nodes_.push_back({kind, 0.0, a.root_, b.root_ + offset});
        k.root_ = static_cast<int>(k.nodes_.size()) - 1;
        return k;
    }

    double eval_node(int idx, double dot, double sq_dist, bool same_index) const {
        const Node& n = nodes_[static_cast<std::size_t>(idx)];
        switch (n.kind) {
        case NodeKind::DotProduct: return n.param + dot;
        case NodeKind::White: return same_index ? n.param : 0.0;
        case NodeKind::Rbf: return std::exp(-sq_dist / (2.0 * n.param * n.param));
        case NodeKind::Constant: return n.param;
        case NodeKind::Sum:
            return eval_node(n.left, dot, sq_dist, same_index) +
                   eval_node(n.right, dot, sq_dist, same_index);
        case NodeKind::Product:
            return eval_node(n.left, dot, sq_dist, same_index) *
                   eval_node(n.right, dot, sq_dist, same_index);
        }
        throw std::logic_error("unreachable kernel node kind");
    }

    void collect_params(int idx, std::vector<double>& out) const {
        const Node& n = nodes_[static_cast<std::size_t>(idx)];
        if (n.kind == NodeKind::Sum || n.kind == NodeKind::Product) {
            collect_params(n.left, out);
            collect_params(n.right, out);
        } else {
            out.push_back(n.param);
        }
    }

    void assign_params(int idx, std::span<const double> params, std::size_t& next) {
        Node& n = nodes_[static_cast<std::size_t>(idx)];
        if (n.kind == NodeKind::Sum || n.kind == NodeKind::Product) {
            assign_params(n.left, params, next);
            assign_params(n.right, params, next);
            return;
        }
        if (next >= params.size()) {
            throw std::invalid_argument("set_parameters: too few parameters");
        }
        n.param = params[next++];
    }

    std::string describe_node(int idx) const {
        const Node& n = nodes_[static_cast<std::size_t>(idx)];
        switch (n.kind) {
        case NodeKind::DotProduct: return "DotProduct(" + std::to_string(n.param) + ")";
        case NodeKind::White: return "White(" + std::to_string(n.param) + ")";
        case NodeKind::Rbf: return "RBF(" + std::to_string(n.param) + ")";
        case NodeKind::Constant: return "Constant(" + std::to_string(n.param) + ")";
        case NodeKind::Sum:
            return "(" + describe_node(n.left) + " + " + describe_node(n.right) + ")";
        case NodeKind::Product:
            return "(" + describe_node(n.left) + " * " + describe_node(n.right) + ")";
        }
        return "?";
    }

    std::vector<Node> nodes_;
    int root_ = -1;
};

// Gram matrix of a classical kernel. With same_set the two lists must be the
// identical set; only then does the White delta fire on the diagonal. Cross
// covariances carry no noise term.
inline Eigen::MatrixXd classical_gram(const ClassicalKernel& kernel, const Eigen::MatrixXd& xa,
                                      const Eigen::MatrixXd& xb, bool same_set) {
    if (xa.cols() != xb.cols()) {
        throw std::invalid_argument("classical_gram: point dimensions differ");
    }
    if (same_set && xa.rows() != xb.rows()) {
        throw std::invalid_argument("classical_gram: same_set with different row counts");
    }
    const Eigen::MatrixXd dots = xa * xb.transpose();
    const Eigen::VectorXd na = xa.rowwise().squaredNorm();
    const Eigen::VectorXd nb = xb.rowwise().squaredNorm();
    Eigen::MatrixXd gram(xa.rows(), xb.rows());
    for (Eigen::Index i = 0; i < xa.rows(); ++i) {
        for (Eigen::Index j = 0; j < xb.rows(); ++j) {
            double sq = na(i) + nb(j) - 2.0 * dots(i, j);
            if (sq < 0.0) sq = 0.0; // rounding
            gram(i, j) = kernel.eval_scalar(dots(i, j), sq, same_set && i == j);
        }
    }
    return gram;
}

} // namespace qal
