// Noise-free statevector simulation of few-qubit circuits: gate application,
// state overlaps, single-qubit reduced density matrices and Pauli
// expectations. Qubit 0 is the least significant bit of the amplitude index,
// so |q1 q0> = |10> lives at index 2.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qal/errors.hpp"

namespace qal {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 16;

enum class GateKind { H, RY, RZ, CX };

struct Gate {
    GateKind kind;
    double angle = 0.0; // RY/RZ only
    int target = 0;
    int control = -1; // CX only

    static Gate h(int qubit) { return {GateKind::H, 0.0, qubit, -1}; }
    static Gate ry(double angle, int qubit) { return {GateKind::RY, angle, qubit, -1}; }
    static Gate rz(double angle, int qubit) { return {GateKind::RZ, angle, qubit, -1}; }
    static Gate cx(int control, int target) { return {GateKind::CX, 0.0, target, control}; }

    bool operator==(const Gate&) const = default;
};

class Statevector {
public:
    // |0...0> on n_qubits wires.
    explicit Statevector(int n_qubits)
        : n_qubits_(n_qubits) {
        if (n_qubits < 1 || n_qubits > kMaxQubits) {
            throw std::invalid_argument("Statevector: n_qubits must be in [1, " +
                                        std::to_string(kMaxQubits) + "], got " +
                                        std::to_string(n_qubits));
        }
        amplitudes_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
        amplitudes_[0] = Complex{1.0, 0.0};
    }

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amplitudes_.size(); }
    const std::vector<Complex>& amplitudes() const { return amplitudes_; }
    Complex amplitude(std::size_t index) const { return amplitudes_.at(index); }

    double norm() const {
        double s = 0.0;
        for (const Complex& a : amplitudes_) s += std::norm(a);
        return std::sqrt(s);
    }

    // In-place unitary update. The free apply_gate() below is the
    // value-semantics wrapper.
    void apply(const Gate& gate) {
        check_qubit(gate.target);
        switch (gate.kind) {
        case GateKind::H: {
            const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
            for_each_pair(gate.target, [&](Complex& a0, Complex& a1) {
                const Complex t0 = a0;
                a0 = inv_sqrt2 * (t0 + a1);
                a1 = inv_sqrt2 * (t0 - a1);
            });
            break;
        }
        case GateKind::RY: {
            const double c = std::cos(gate.angle / 2.0);
            const double s = std::sin(gate.angle / 2.0);
            for_each_pair(gate.target, [&](Complex& a0, Complex& a1) {
                const Complex t0 = a0;
                a0 = c * t0 - s * a1;
                a1 = s * t0 + c * a1;
            });
            break;
        }
        case GateKind::RZ: {
            const Complex p0 = std::polar(1.0, -gate.angle / 2.0);
            const Complex p1 = std::polar(1.0, gate.angle / 2.0);
            for_each_pair(gate.target, [&](Complex& a0, Complex& a1) {
                a0 *= p0;
                a1 *= p1;
            });
            break;
        }
        case GateKind::CX: {
            check_qubit(gate.control);
            if (gate.control == gate.target) {
                throw std::out_of_range("apply: CX control equals target (" +
                                        std::to_string(gate.target) + ")");
            }
            const std::size_t cmask = std::size_t{1} << gate.control;
            const std::size_t tmask = std::size_t{1} << gate.target;
            for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
                if ((i & cmask) && !(i & tmask)) {
                    std::swap(amplitudes_[i], amplitudes_[i | tmask]);
                }
            }
            break;
        }
        }
    }

private:
    void check_qubit(int qubit) const {
        if (qubit < 0 || qubit >= n_qubits_) {
            throw std::out_of_range("apply: qubit index " + std::to_string(qubit) +
                                    " out of range for " + std::to_string(n_qubits_) +
                                    " qubits");
        }
    }

    // Visit (a0, a1) amplitude pairs that differ only in the target bit.
    template <typename F>
    void for_each_pair(int target, F&& f) {
        const std::size_t tmask = std::size_t{1} << target;
        for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
            if (!(i & tmask)) f(amplitudes_[i], amplitudes_[i | tmask]);
        }
    }

    int n_qubits_;
    std::vector<Complex> amplitudes_;
};

inline Statevector init_state(int n_qubits) { return Statevector(n_qubits); }

inline Statevector apply_gate(Statevector state, const Gate& gate) {
    state.apply(gate);
    return state;
}

inline Statevector apply_circuit(Statevector state, std::span<const Gate> circuit) {
    for (const Gate& g : circuit) state.apply(g);
    return state;
}

// |<a|b>|^2. Symmetric, in [0, 1] up to rounding.
inline double state_fidelity(const Statevector& a, const Statevector& b) {
    if (a.n_qubits() != b.n_qubits()) {
        throw std::invalid_argument("state_fidelity: qubit counts differ (" +
                                    std::to_string(a.n_qubits()) + " vs " +
                                    std::to_string(b.n_qubits()) + ")");
    }
    Complex overlap{0.0, 0.0};
    const auto& av = a.amplitudes();
    const auto& bv = b.amplitudes();
    for (std::size_t i = 0; i < av.size(); ++i) {
        overlap += std::conj(av[i]) * bv[i];
    }
    return std::norm(overlap);
}

// 2x2 reduced density matrix of one qubit (partial trace over the rest).
using OneRdm = Eigen::Matrix2cd;

inline OneRdm reduced_density_matrix(const Statevector& state, int qubit) {
    if (qubit < 0 || qubit >= state.n_qubits()) {
        throw std::out_of_range("reduced_density_matrix: qubit index " +
                                std::to_string(qubit) + " out of range");
    }
    const std::size_t qmask = std::size_t{1} << qubit;
    const auto& amps = state.amplitudes();
    OneRdm rho = OneRdm::Zero();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (i & qmask) continue;
        const Complex a0 = amps[i];
        const Complex a1 = amps[i | qmask];
        rho(0, 0) += a0 * std::conj(a0);
        rho(0, 1) += a0 * std::conj(a1);
        rho(1, 0) += a1 * std::conj(a0);
        rho(1, 1) += a1 * std::conj(a1);
    }
    return rho;
}

enum class Pauli { X, Y, Z };

// tr(P rho). The trace of a Pauli against a physical 1-RDM is real; a large
// imaginary residue means the input was not a valid density matrix.
inline double pauli_expectation(const OneRdm& rdm, Pauli pauli) {
    Complex value{0.0, 0.0};
    switch (pauli) {
    case Pauli::X: value = rdm(0, 1) + rdm(1, 0); break;
    case Pauli::Y: value = Complex{0.0, 1.0} * (rdm(0, 1) - rdm(1, 0)); break;
    case Pauli::Z: value = rdm(0, 0) - rdm(1, 1); break;
    }
    if (std::abs(value.imag()) >= 1e-10) {
        throw NumericalError("pauli_expectation: imaginary residue " +
                             std::to_string(value.imag()));
    }
    return value.real();
}

} // namespace qal
