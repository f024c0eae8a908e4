// Data-encoding circuits (feature maps): each component of the input vector
// drives the rotation angles of one qubit, so n_qubits equals the feature
// dimension. Inputs are expected pre-scaled into [0, pi] by the descriptor
// pipeline; no rescaling happens here.
//
//   YZ_CX   per repetition: RY(x_q) on every qubit, RZ(x_q) on every qubit,
//           then a linear CX chain q -> q+1.
//   HighDim one Hadamard layer, then per repetition r: RZ(x_q) on every
//           qubit, RY(x_{(q+r) mod n}) on every qubit, then a CX ring
//           q -> (q+1) mod n (skipped for a single qubit, where the ring
//           would be a self-target).

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qal/statevector.hpp"

namespace qal {

enum class EncodingKind { YZ_CX, HighDim };

struct EncodingSpec {
    EncodingKind kind = EncodingKind::YZ_CX;
    int n_qubits = 4;
    int reps = 4;
};

namespace detail {

inline void check_encoding_input(const EncodingSpec& spec, std::span<const double> x) {
    if (spec.n_qubits < 1 || spec.n_qubits > kMaxQubits) {
        throw std::invalid_argument("encoding: n_qubits must be in [1, " +
                                    std::to_string(kMaxQubits) + "]");
    }
    if (spec.reps < 1) {
        throw std::invalid_argument("encoding: reps must be >= 1");
    }
    if (static_cast<int>(x.size()) != spec.n_qubits) {
        throw std::invalid_argument("encoding: feature dimension " +
                                    std::to_string(x.size()) + " does not match " +
                                    std::to_string(spec.n_qubits) + " qubits");
    }
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("encoding: non-finite feature component");
        }
    }
}

} // namespace detail

inline std::vector<Gate> build_circuit(const EncodingSpec& spec, std::span<const double> x) {
    detail::check_encoding_input(spec, x);
    const int n = spec.n_qubits;
    std::vector<Gate> gates;

    switch (spec.kind) {
    case EncodingKind::YZ_CX:
        gates.reserve(static_cast<std::size_t>(spec.reps) * (3 * n - 1));
        for (int r = 1; r <= spec.reps; ++r) {
            for (int q = 0; q < n; ++q) gates.push_back(Gate::ry(x[q], q));
            for (int q = 0; q < n; ++q) gates.push_back(Gate::rz(x[q], q));
            for (int q = 0; q + 1 < n; ++q) gates.push_back(Gate::cx(q, q + 1));
        }
        break;
    case EncodingKind::HighDim:
        gates.reserve(static_cast<std::size_t>(n) + static_cast<std::size_t>(spec.reps) * 3 * n);
        for (int q = 0; q < n; ++q) gates.push_back(Gate::h(q));
        for (int r = 1; r <= spec.reps; ++r) {
            for (int q = 0; q < n; ++q) gates.push_back(Gate::rz(x[q], q));
            for (int q = 0; q < n; ++q) gates.push_back(Gate::ry(x[(q + r) % n], q));
            if (n > 1) {
                for (int q = 0; q < n; ++q) gates.push_back(Gate::cx(q, (q + 1) % n));
            }
        }
        break;
    }
    return gates;
}

inline Statevector encode(const EncodingSpec& spec, std::span<const double> x) {
    return apply_circuit(init_state(spec.n_qubits), build_circuit(spec, x));
}

inline std::string to_string(EncodingKind kind) {
    return kind == EncodingKind::YZ_CX ? "yz_cx" : "highdim";
}

} // namespace qal
