// Quantum kernels over encoded states.
//
//   FQK  entry (i, j) is the state fidelity |<phi(x_i)|phi(x_j)>|^2 of the
//        two encoded states. The squared modulus keeps the Gram matrix
//        real, symmetric and positive semidefinite.
//   PQK  each input is mapped to the 3 n_qubits vector of per-qubit Pauli
//        expectations (X, Y, Z) taken from the 1-RDMs of the encoded state,
//        and the kernel is a Gaussian exp(-gamma |f_i - f_j|^2) in that
//        projected space.
//
// Encoded states and projected feature vectors are prepared once per input
// row, so an N x N Gram costs N circuit simulations, not N^2.

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qal/encoding.hpp"
#include "qal/statevector.hpp"

namespace qal {

enum class QuantumKernelKind { FQK, PQK };

struct QuantumKernelSpec {
    QuantumKernelKind kind = QuantumKernelKind::FQK;
    EncodingSpec encoding;
    double gamma = 1.0; // PQK only

    void validate() const {
        if (kind == QuantumKernelKind::PQK && !(gamma > 0.0)) {
            throw std::invalid_argument("quantum kernel: PQK gamma must be > 0");
        }
    }
};

namespace detail {

inline void check_feature_rows(const EncodingSpec& encoding, const Eigen::MatrixXd& x) {
    if (x.cols() != encoding.n_qubits) {
        throw std::invalid_argument("quantum kernel: feature dimension " +
                                    std::to_string(x.cols()) + " does not match " +
                                    std::to_string(encoding.n_qubits) + " qubits");
    }
}

inline std::vector<Statevector> encode_rows(const EncodingSpec& encoding, const Eigen::MatrixXd& x) {
    std::vector<Statevector> states;
    states.reserve(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Eigen::RowVectorXd row = x.row(i);
        states.push_back(encode(encoding, std::span<const double>(row.data(),
                                                                  static_cast<std::size_t>(row.size()))));
    }
    return states;
}

} // namespace detail

// Per-qubit (X, Y, Z) Pauli expectations of the encoded state, concatenated
// qubit by qubit: length 3 * n_qubits.
inline Eigen::VectorXd pqk_feature_vector(const QuantumKernelSpec& spec,
                                          Eigen::Ref<const Eigen::VectorXd> x) {
    spec.validate();
    const Eigen::VectorXd xv = x;
    const Statevector state =
        encode(spec.encoding, std::span<const double>(xv.data(), static_cast<std::size_t>(xv.size())));
    Eigen::VectorXd features(3 * spec.encoding.n_qubits);
    for (int q = 0; q < spec.encoding.n_qubits; ++q) {
        const OneRdm rho = reduced_density_matrix(state, q);
        features(3 * q + 0) = pauli_expectation(rho, Pauli::X);
        features(3 * q + 1) = pauli_expectation(rho, Pauli::Y);
        features(3 * q + 2) = pauli_expectation(rho, Pauli::Z);
    }
    return features;
}

inline Eigen::MatrixXd pqk_feature_matrix(const QuantumKernelSpec& spec, const Eigen::MatrixXd& x) {
    detail::check_feature_rows(spec.encoding, x);
    Eigen::MatrixXd features(x.rows(), 3 * spec.encoding.n_qubits);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        features.row(i) = pqk_feature_vector(spec, x.row(i).transpose()).transpose();
    }
    return features;
}

inline Eigen::MatrixXd fqk_gram(const QuantumKernelSpec& spec, const Eigen::MatrixXd& xa,
                                const Eigen::MatrixXd& xb, bool same_set) {
    if (spec.kind != QuantumKernelKind::FQK) {
        throw std::invalid_argument("fqk_gram: spec kind is not FQK");
    }
    detail::check_feature_rows(spec.encoding, xa);
    detail::check_feature_rows(spec.encoding, xb);
    const std::vector<Statevector> sa = detail::encode_rows(spec.encoding, xa);
    const std::vector<Statevector> sb = same_set ? sa : detail::encode_rows(spec.encoding, xb);
    if (same_set && xa.rows() != xb.rows()) {
        throw std::invalid_argument("fqk_gram: same_set with different row counts");
    }
    Eigen::MatrixXd gram(xa.rows(), xb.rows());
    if (same_set) {
        for (Eigen::Index i = 0; i < xa.rows(); ++i) {
            for (Eigen::Index j = i; j < xb.rows(); ++j) {
                const double f = state_fidelity(sa[static_cast<std::size_t>(i)],
                                                sb[static_cast<std::size_t>(j)]);
                gram(i, j) = f;
                gram(j, i) = f;
            }
        }
    } else {
        for (Eigen::Index i = 0; i < xa.rows(); ++i) {
            for (Eigen::Index j = 0; j < xb.rows(); ++j) {
                gram(i, j) = state_fidelity(sa[static_cast<std::size_t>(i)],
                                            sb[static_cast<std::size_t>(j)]);
            }
        }
    }
    return gram;
}

inline Eigen::MatrixXd pqk_gram(const QuantumKernelSpec& spec, const Eigen::MatrixXd& xa,
                                const Eigen::MatrixXd& xb, bool same_set) {
    if (spec.kind != QuantumKernelKind::PQK) {
        throw std::invalid_argument("pqk_gram: spec kind is not PQK");
    }
    spec.validate();
    const Eigen::MatrixXd fa = pqk_feature_matrix(spec, xa);
    const Eigen::MatrixXd fb = same_set ? fa : pqk_feature_matrix(spec, xb);
    if (same_set && xa.rows() != xb.rows()) {
        throw std::invalid_argument("pqk_gram: same_set with different row counts");
    }
    Eigen::MatrixXd gram(fa.rows(), fb.rows());
    for (Eigen::Index i = 0; i < fa.rows(); ++i) {
        for (Eigen::Index j = 0; j < fb.rows(); ++j) {
            gram(i, j) = std::exp(-spec.gamma * (fa.row(i) - fb.row(j)).squaredNorm());
        }
    }
    return gram;
}

inline Eigen::MatrixXd quantum_gram(const QuantumKernelSpec& spec, const Eigen::MatrixXd& xa,
                                    const Eigen::MatrixXd& xb, bool same_set) {
    return spec.kind == QuantumKernelKind::FQK ? fqk_gram(spec, xa, xb, same_set)
                                               : pqk_gram(spec, xa, xb, same_set);
}

} // namespace qal
