// Encoding circuits: exact gate layouts for YZ_CX and HighDim, encoded-state
// examples, gate-count bookkeeping, determinism and injectivity on
// non-degenerate inputs.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "qal/encoding.hpp"
#include "qal/statevector.hpp"

using Catch::Matchers::WithinAbs;
using qal::EncodingKind;
using qal::EncodingSpec;
using qal::Gate;

TEST_CASE("build_circuit emits the documented YZ_CX layout") {
    SECTION("single qubit has no CX") {
        const double theta = 0.37;
        const std::array<double, 1> x{theta};
        const auto gates = qal::build_circuit({EncodingKind::YZ_CX, 1, 1}, x);
        const std::vector<Gate> expected{Gate::ry(theta, 0), Gate::rz(theta, 0)};
        REQUIRE(gates == expected);
    }

    SECTION("two qubits, one rep") {
        const std::array<double, 2> x{0.4, 1.1};
        const auto gates = qal::build_circuit({EncodingKind::YZ_CX, 2, 1}, x);
        const std::vector<Gate> expected{Gate::ry(0.4, 0), Gate::ry(1.1, 1), Gate::rz(0.4, 0),
                                         Gate::rz(1.1, 1), Gate::cx(0, 1)};
        REQUIRE(gates == expected);
    }

    SECTION("repetitions tile the block") {
        const std::array<double, 2> x{0.4, 1.1};
        const auto once = qal::build_circuit({EncodingKind::YZ_CX, 2, 1}, x);
        const auto thrice = qal::build_circuit({EncodingKind::YZ_CX, 2, 3}, x);
        REQUIRE(thrice.size() == 3 * once.size());
        for (std::size_t r = 0; r < 3; ++r) {
            for (std::size_t g = 0; g < once.size(); ++g) {
                REQUIRE(thrice[r * once.size() + g] == once[g]);
            }
        }
    }
}

TEST_CASE("build_circuit emits the documented HighDim layout") {
    const std::array<double, 2> x{0.4, 1.1};
    const auto gates = qal::build_circuit({EncodingKind::HighDim, 2, 1}, x);
    // H layer once, then RZ(x_q), RY(x_{(q+r) mod n}) with r = 1, CX ring
    const std::vector<Gate> expected{Gate::h(0),        Gate::h(1),        Gate::rz(0.4, 0),
                                     Gate::rz(1.1, 1),  Gate::ry(1.1, 0),  Gate::ry(0.4, 1),
                                     Gate::cx(0, 1),    Gate::cx(1, 0)};
    REQUIRE(gates == expected);

    // the cyclic shift advances with the repetition index
    const auto two_reps = qal::build_circuit({EncodingKind::HighDim, 3, 2}, std::array{0.1, 0.2, 0.3});
    // rep 2 rotates RY by x_{(q+2) mod 3}: q=0 -> x2, q=1 -> x0, q=2 -> x1.
    // Layout: H(0-2), rep 1 RZ(3-5) RY(6-8) CX(9-11), rep 2 RZ(12-14) RY(15-17).
    REQUIRE(two_reps[15] == Gate::ry(0.3, 0));
    REQUIRE(two_reps[16] == Gate::ry(0.1, 1));
    REQUIRE(two_reps[17] == Gate::ry(0.2, 2));
}

TEST_CASE("gate counts match the layout formulas") {
    const std::array<double, 5> x{0.1, 0.2, 0.3, 0.4, 0.5};
    for (int n = 2; n <= 5; ++n) {
        for (int reps = 1; reps <= 4; ++reps) {
            const std::span<const double> features(x.data(), static_cast<std::size_t>(n));
            REQUIRE(qal::build_circuit({EncodingKind::YZ_CX, n, reps}, features).size() ==
                    static_cast<std::size_t>(reps * (2 * n + (n - 1))));
            REQUIRE(qal::build_circuit({EncodingKind::HighDim, n, reps}, features).size() ==
                    static_cast<std::size_t>(n + reps * 3 * n));
        }
    }
    // single-qubit HighDim skips the ring (a CX needs two distinct wires)
    REQUIRE(qal::build_circuit({EncodingKind::HighDim, 1, 2}, std::array{0.5}).size() ==
            static_cast<std::size_t>(1 + 2 * 2));
}

TEST_CASE("encode produces the expected states in degenerate cases") {
    SECTION("zero angles leave |0> untouched under YZ_CX") {
        const auto s = qal::encode({EncodingKind::YZ_CX, 1, 1}, std::array{0.0});
        REQUIRE_THAT(std::abs(s.amplitude(0)), WithinAbs(1.0, 1e-12));
        REQUIRE_THAT(std::abs(s.amplitude(1)), WithinAbs(0.0, 1e-12));
    }

    SECTION("angle pi flips to |1> up to global phase") {
        const auto s = qal::encode({EncodingKind::YZ_CX, 1, 1}, std::array{std::numbers::pi});
        REQUIRE_THAT(std::abs(s.amplitude(0)), WithinAbs(0.0, 1e-12));
        REQUIRE_THAT(std::abs(s.amplitude(1)), WithinAbs(1.0, 1e-12));
    }

    SECTION("HighDim at zero angles is a bare Hadamard") {
        const auto s = qal::encode({EncodingKind::HighDim, 1, 1}, std::array{0.0});
        REQUIRE_THAT(std::abs(s.amplitude(0)), WithinAbs(1.0 / std::numbers::sqrt2, 1e-12));
        REQUIRE_THAT(std::abs(s.amplitude(1)), WithinAbs(1.0 / std::numbers::sqrt2, 1e-12));
    }
}

TEST_CASE("encode is deterministic") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unit(0.0, std::numbers::pi);
    for (const auto kind : {EncodingKind::YZ_CX, EncodingKind::HighDim}) {
        std::array<double, 4> x{};
        for (auto& v : x) v = unit(rng);
        const auto a = qal::encode({kind, 4, 4}, x);
        const auto b = qal::encode({kind, 4, 4}, x);
        for (std::size_t i = 0; i < a.dim(); ++i) {
            REQUIRE(a.amplitude(i) == b.amplitude(i));
        }
    }
}

TEST_CASE("distinct non-degenerate inputs encode to distinct states") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> open(1e-3, std::numbers::pi - 1e-3);
    for (const auto kind : {EncodingKind::YZ_CX, EncodingKind::HighDim}) {
        const EncodingSpec spec{kind, 4, 4};
        for (int pair = 0; pair < 100; ++pair) {
            std::array<double, 4> x{}, y{};
            for (auto& v : x) v = open(rng);
            for (auto& v : y) v = open(rng);
            if (x == y) continue; // measure-zero, but keep the check honest
            const double fidelity = qal::state_fidelity(qal::encode(spec, x), qal::encode(spec, y));
            INFO("encoding " << qal::to_string(kind) << " pair " << pair);
            REQUIRE(fidelity < 1.0 - 1e-9);
        }
    }
}

TEST_CASE("encoding inputs are validated") {
    REQUIRE_THROWS_AS(qal::build_circuit({EncodingKind::YZ_CX, 2, 1}, std::array{0.1}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(qal::build_circuit({EncodingKind::YZ_CX, 2, 0}, std::array{0.1, 0.2}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(qal::build_circuit({EncodingKind::YZ_CX, 0, 1}, std::span<const double>{}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(
        qal::build_circuit({EncodingKind::HighDim, 1, 1},
                           std::array{std::numeric_limits<double>::quiet_NaN()}),
        std::invalid_argument);
}
