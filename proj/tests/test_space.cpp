// Homotop enumeration and identifiers, dopant substitution, the three
// energy oracles, and the shared file formats (energy table CSV, XYZ).

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <catch2/catch_amalgamated.hpp>

#include "qal/geometry.hpp"
#include "qal/oracle.hpp"
#include "qal/space.hpp"

#include "test_oracles.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using qal::Geometry;
using qal::Homotop;

namespace {

Geometry pair_host(double r) {
    Geometry g;
    g.elements = {"Si", "Si"};
    g.positions.resize(2, 3);
    g.positions << 0.0, 0.0, 0.0, r, 0.0, 0.0;
    return g;
}

// unit square in the xy plane: edges at r = 1, diagonals at r = sqrt(2)
Geometry square_host() {
    Geometry g;
    g.elements = {"Si", "Si", "Si", "Si"};
    g.positions.resize(4, 3);
    g.positions << 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0;
    return g;
}

std::filesystem::path unique_temp(const std::string& stem) {
    return std::filesystem::temp_directory_path() /
           (stem + "-" + std::to_string(::getpid()) + ".tmp");
}

} // namespace

TEST_CASE("enumerate_homotops produces lexicographic combinations") {
    SECTION("4 choose 2, exact list") {
        const std::vector<Homotop> homotops = qal::enumerate_homotops(4, 2);
        std::vector<std::string> ids;
        for (const auto& h : homotops) ids.push_back(h.id());
        REQUIRE(ids == std::vector<std::string>{"0-1", "0-2", "0-3", "1-2", "1-3", "2-3"});
    }

    SECTION("zero dopants yield the single empty homotop") {
        const std::vector<Homotop> homotops = qal::enumerate_homotops(4, 0);
        REQUIRE(homotops.size() == 1);
        REQUIRE(homotops[0].id().empty());
    }

    SECTION("11 sites with 4 dopants is the 330-point search space") {
        const std::vector<Homotop> homotops = qal::enumerate_homotops(11, 4);
        REQUIRE(homotops.size() == 330);
        REQUIRE(homotops.front().id() == "0-1-2-3");
        REQUIRE(homotops.back().id() == "7-8-9-10");
    }

    SECTION("counts match the binomial coefficient") {
        for (const auto [n, d] : {std::pair{5, 3}, {9, 0}, {9, 9}, {16, 8}, {20, 3}, {20, 17}}) {
            REQUIRE(qal::enumerate_homotops(n, d).size() == testing_oracles::binomial(n, d));
        }
    }

    SECTION("invalid shapes are rejected") {
        REQUIRE_THROWS_AS(qal::enumerate_homotops(4, 5), std::domain_error);
        REQUIRE_THROWS_AS(qal::enumerate_homotops(-1, 0), std::domain_error);
        REQUIRE_THROWS_AS(qal::enumerate_homotops(3, -1), std::domain_error);
    }
}

TEST_CASE("homotop ids round-trip and reject non-canonical strings") {
    const std::vector<Homotop> homotops = qal::enumerate_homotops(11, 4);
    std::set<std::string> ids;
    for (const auto& h : homotops) {
        const std::string id = h.id();
        ids.insert(id);
        REQUIRE(Homotop::from_id(id) == h);
    }
    REQUIRE(ids.size() == homotops.size()); // ids are unique

    REQUIRE(Homotop::from_id("").dopant_sites.empty());
    REQUIRE(Homotop::from_id("7").dopant_sites == std::vector<int>{7});

    REQUIRE_THROWS_AS(Homotop::from_id("3-1"), qal::ParseError);   // unsorted
    REQUIRE_THROWS_AS(Homotop::from_id("1-1"), qal::ParseError);   // duplicate
    REQUIRE_THROWS_AS(Homotop::from_id("a-2"), qal::ParseError);   // non-numeric
    REQUIRE_THROWS_AS(Homotop::from_id("1--2"), qal::ParseError);  // empty token
    REQUIRE_THROWS_AS(Homotop::from_id("-1"), qal::ParseError);    // leading dash
    REQUIRE_THROWS_AS(Homotop::from_id("1-"), qal::ParseError);    // trailing dash
    REQUIRE_THROWS_AS(Homotop::from_id(" 1"), qal::ParseError);    // stray space
}

TEST_CASE("homotop_geometry substitutes the dopant element in place") {
    const qal::CandidateSpace space = qal::CandidateSpace::build(pair_host(2.0), 1, "Al");

    SECTION("single substitution") {
        const Geometry g = qal::homotop_geometry(space, Homotop::from_id("0"));
        REQUIRE(g.elements == std::vector<std::string>{"Al", "Si"});
        REQUIRE(g.positions == space.host.positions);
    }

    SECTION("empty homotop leaves the host untouched") {
        const Geometry g = qal::homotop_geometry(space, Homotop{});
        REQUIRE(g.elements == space.host.elements);
        REQUIRE(g.positions == space.host.positions);
    }

    SECTION("site indices outside the host are rejected") {
        REQUIRE_THROWS_AS(qal::homotop_geometry(space, Homotop::from_id("2")),
                          std::out_of_range);
    }

    SECTION("every homotop of the 330-point space gets exactly 4 dopants") {
        const qal::CandidateSpace big = qal::CandidateSpace::build(
            qal::read_xyz(std::string(QAL_DATA_DIR) + "/si11.xyz"), 4, "Al");
        for (const auto& h : big.homotops) {
            const Geometry g = qal::homotop_geometry(big, h);
            const auto n_al = std::count(g.elements.begin(), g.elements.end(), "Al");
            const auto n_si = std::count(g.elements.begin(), g.elements.end(), "Si");
            REQUIRE(n_al == 4);
            REQUIRE(n_si == 7);
        }
    }
}

TEST_CASE("toy oracle evaluates the exponential pair potential") {
    SECTION("two dopants at unit distance, single coupling") {
        const qal::CandidateSpace space = qal::CandidateSpace::build(pair_host(1.0), 2, "Al");
        const qal::ToyOracle oracle(qal::ToyParams{0.0, 0.0, -1.0, 1.0});
        REQUIRE_THAT(oracle.evaluate(space, Homotop::from_id("0-1")),
                     WithinAbs(-std::exp(-1.0), 1e-12));
    }

    SECTION("one dopant picks up the host-dopant coupling") {
        const qal::CandidateSpace space = qal::CandidateSpace::build(pair_host(1.0), 1, "Al");
        const qal::ToyOracle oracle(qal::ToyParams{0.0, 0.25, 0.0, 2.0});
        REQUIRE_THAT(oracle.evaluate(space, Homotop::from_id("0")),
                     WithinAbs(0.25 * std::exp(-0.5), 1e-12));
    }

    SECTION("square symmetry: equivalent placements get equal energies") {
        const qal::CandidateSpace space = qal::CandidateSpace::build(square_host(), 1, "Al");
        const qal::ToyOracle oracle; // defaults
        const double expected =
            oracle.params().j_sial *
            (2.0 * std::exp(-1.0 / oracle.params().rho) +
             std::exp(-std::sqrt(2.0) / oracle.params().rho));
        for (const auto& h : space.homotops) {
            REQUIRE_THAT(oracle.evaluate(space, h), WithinAbs(expected, 1e-12));
        }
    }

    SECTION("square d=2: edge and diagonal placements form two energy classes") {
        const qal::CandidateSpace space = qal::CandidateSpace::build(square_host(), 2, "Al");
        const qal::ToyOracle oracle;
        const double edge = oracle.evaluate(space, Homotop::from_id("0-1"));
        const double diagonal = oracle.evaluate(space, Homotop::from_id("0-2"));
        for (const auto& id : {"1-2", "2-3", "0-3"}) {
            REQUIRE_THAT(oracle.evaluate(space, Homotop::from_id(id)), WithinAbs(edge, 1e-12));
        }
        REQUIRE_THAT(oracle.evaluate(space, Homotop::from_id("1-3")),
                     WithinAbs(diagonal, 1e-12));
        REQUIRE(std::abs(edge - diagonal) > 1e-6);
    }

    SECTION("equal couplings make the energy label-blind") {
        const qal::CandidateSpace space = qal::CandidateSpace::build(square_host(), 2, "Al");
        const qal::ToyOracle oracle(qal::ToyParams{-0.7, -0.7, -0.7, 1.3});
        const double reference = oracle.evaluate(space, space.homotops.front());
        for (const auto& h : space.homotops) {
            REQUIRE_THAT(oracle.evaluate(space, h), WithinAbs(reference, 1e-12));
        }
    }

    SECTION("coincident atoms and bad parameters are rejected") {
        const qal::CandidateSpace space = qal::CandidateSpace::build(pair_host(0.0), 1, "Al");
        const qal::ToyOracle oracle;
        REQUIRE_THROWS_AS(oracle.evaluate(space, Homotop::from_id("0")),
                          qal::DegenerateGeometryError);
        REQUIRE_THROWS_AS(qal::ToyOracle(qal::ToyParams{0.0, 0.0, 0.0, 0.0}),
                          std::invalid_argument);
    }
}

TEST_CASE("table oracle looks up stored energies by id") {
    const std::vector<qal::EnergyRecord> records = {{"0-1", -1.5}, {"2-3", 2.0}};
    const qal::TableOracle oracle(records);
    REQUIRE(oracle.size() == 2);

    const qal::CandidateSpace space = qal::CandidateSpace::build(square_host(), 2, "Al");
    REQUIRE(oracle.evaluate(space, Homotop::from_id("0-1")) == -1.5);
    REQUIRE(oracle.evaluate(space, Homotop::from_id("2-3")) == 2.0);
    REQUIRE_THROWS_AS(oracle.evaluate(space, Homotop::from_id("0-2")), qal::MissingRecordError);

    const std::vector<qal::EnergyRecord> duplicated = {{"0-1", -1.5}, {"0-1", 0.0}};
    REQUIRE_THROWS_AS(qal::TableOracle(duplicated), qal::DuplicateRecordError);
}

TEST_CASE("energy tables round-trip exactly through CSV") {
    const std::vector<qal::EnergyRecord> records = {
        {"", -0.5}, {"0-1", -0.1}, {"2-5-7", 1.0 / 3.0}, {"9", 6.02e23}, {"10", -1e-17}};
    std::stringstream stream;
    qal::write_energy_table(stream, records);

    const std::string text = stream.str();
    REQUIRE(text.starts_with("homotop_id,energy_hartree\n"));

    const std::vector<qal::EnergyRecord> parsed = qal::read_energy_table(stream);
    REQUIRE(parsed == records); // shortest round-trip formatting is lossless

    SECTION("the path-based overloads agree") {
        const std::filesystem::path path = unique_temp("qal-test-table");
        qal::write_energy_table(path.string(), records);
        REQUIRE(qal::read_energy_table(path.string()) == records);
        std::filesystem::remove(path);
    }
}

TEST_CASE("energy table parsing reports offending line numbers") {
    const auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return qal::read_energy_table(in);
    };

    SECTION("header only yields no records; blank lines are skipped") {
        REQUIRE(parse("homotop_id,energy_hartree\n").empty());
        REQUIRE(parse("homotop_id,energy_hartree\n\n0,1.5\n\n").size() == 1);
    }

    SECTION("wrong header") {
        try {
            parse("id,energy\n0,1.5\n");
            FAIL("expected ParseError");
        } catch (const qal::ParseError& e) {
            CHECK(e.line() == 1);
        }
    }

    SECTION("unparseable energy") {
        try {
            parse("homotop_id,energy_hartree\n0-1-2-3,abc\n");
            FAIL("expected ParseError");
        } catch (const qal::ParseError& e) {
            CHECK(e.line() == 2);
            CHECK_THAT(e.what(), ContainsSubstring("abc"));
        }
    }

    SECTION("non-canonical id") {
        try {
            parse("homotop_id,energy_hartree\n3-1,1.0\n");
            FAIL("expected ParseError");
        } catch (const qal::ParseError& e) {
            CHECK(e.line() == 2);
        }
    }

    SECTION("wrong field count") {
        REQUIRE_THROWS_AS(parse("homotop_id,energy_hartree\n0;1.5\n"), qal::ParseError);
        REQUIRE_THROWS_AS(parse("homotop_id,energy_hartree\n0,1.5,9\n"), qal::ParseError);
    }

    SECTION("duplicate ids name both lines") {
        try {
            parse("homotop_id,energy_hartree\n0-2,1.0\n0-2,2.0\n");
            FAIL("expected DuplicateRecordError");
        } catch (const qal::DuplicateRecordError& e) {
            CHECK(e.line() == 3);
            CHECK_THAT(e.what(), ContainsSubstring("line 2"));
        }
    }

    SECTION("missing file") {
        REQUIRE_THROWS_AS(qal::read_energy_table("/nonexistent/qal-no-such-table.csv"),
                          qal::ParseError);
    }
}

TEST_CASE("command oracle shells out and parses the reported energy") {
    namespace fs = std::filesystem;
    const qal::CandidateSpace space = qal::CandidateSpace::build(pair_host(1.0), 1, "Al");
    const Homotop h = Homotop::from_id("0");

    const auto write_script = [](const fs::path& path, const std::string& body) {
        std::ofstream out(path);
        out << "#!/bin/sh\n" << body;
    };

    SECTION("last token of the last non-empty stdout line wins") {
        const fs::path script = unique_temp("qal-test-cmd-ok");
        write_script(script,
                     "test -f \"$1\" || exit 3\n"
                     "echo 'step 1 converged'\n"
                     "echo 'total energy (hartree)  -2.25'\n"
                     "echo ''\n"
                     "echo '   '\n");
        const qal::CommandOracle oracle("/bin/sh " + script.string());
        REQUIRE(oracle.evaluate(space, h) == -2.25);
        fs::remove(script);
    }

    SECTION("the handed-off file is a readable XYZ of the doped geometry") {
        const fs::path script = unique_temp("qal-test-cmd-copy");
        const fs::path copy = unique_temp("qal-test-cmd-copy-out");
        write_script(script, "cp \"$1\" '" + copy.string() + "'\necho 0.5\n");
        const qal::CommandOracle oracle("/bin/sh " + script.string());
        REQUIRE(oracle.evaluate(space, h) == 0.5);
        const Geometry seen = qal::read_xyz(copy.string());
        REQUIRE(seen.elements == std::vector<std::string>{"Al", "Si"});
        fs::remove(script);
        fs::remove(copy);
    }

    SECTION("nonzero exit surfaces the captured stderr") {
        const fs::path script = unique_temp("qal-test-cmd-fail");
        write_script(script, "echo 'boom: SCF did not converge' >&2\nexit 7\n");
        const qal::CommandOracle oracle("/bin/sh " + script.string());
        try {
            oracle.evaluate(space, h);
            FAIL("expected OracleError");
        } catch (const qal::OracleError& e) {
            CHECK_THAT(e.stderr_text(), ContainsSubstring("boom"));
        }
        fs::remove(script);
    }

    SECTION("unparseable or empty output is an oracle error") {
        const fs::path script = unique_temp("qal-test-cmd-words");
        write_script(script, "echo 'no numbers here'\n");
        const qal::CommandOracle words("/bin/sh " + script.string());
        REQUIRE_THROWS_MATCHES(words.evaluate(space, h), qal::OracleError,
                               Catch::Matchers::MessageMatches(ContainsSubstring("'here'")));
        write_script(script, "true\n");
        const qal::CommandOracle silent("/bin/sh " + script.string());
        REQUIRE_THROWS_AS(silent.evaluate(space, h), qal::OracleError);
        fs::remove(script);
    }

    SECTION("empty command string is rejected up front") {
        REQUIRE_THROWS_AS(qal::CommandOracle(""), std::invalid_argument);
    }
}

TEST_CASE("XYZ files round-trip and parse strictly") {
    Geometry g;
    g.elements = {"Si", "Al", "Si"};
    g.positions.resize(3, 3);
    g.positions << 0.0, 0.125, -1.75, 2.0 / 3.0, 1e-12, 3.25, -0.5, 4.0, 1e6;

    SECTION("round trip is bitwise exact") {
        std::stringstream stream;
        qal::write_xyz(stream, g, "a comment with spaces");
        const Geometry back = qal::read_xyz(stream);
        REQUIRE(back.elements == g.elements);
        REQUIRE(back.positions == g.positions);
    }

    SECTION("content after the declared atom lines is ignored") {
        std::istringstream in("1\ncomment\nSi 0 0 0\ntrailing junk\nmore\n");
        REQUIRE(qal::read_xyz(in).n_atoms() == 1);
    }

    SECTION("CRLF input parses like LF input") {
        std::istringstream in("1\r\ncomment\r\nSi 0.5 1 -2\r\n");
        const Geometry back = qal::read_xyz(in);
        REQUIRE(back.elements == std::vector<std::string>{"Si"});
        REQUIRE(back.positions(0, 0) == 0.5);
    }

    SECTION("parse failures carry the offending line") {
        const auto line_of = [](const std::string& text) {
            std::istringstream in(text);
            try {
                qal::read_xyz(in);
            } catch (const qal::ParseError& e) {
                return e.line();
            }
            return std::size_t{0};
        };
        REQUIRE(line_of("") == 1);                                  // empty input
        REQUIRE(line_of("abc\ncomment\n") == 1);                    // non-numeric count
        REQUIRE(line_of("-3\ncomment\n") == 1);                     // non-positive count
        REQUIRE(line_of("2\ncomment\nSi 0 0 0\n") == 4);            // truncated
        REQUIRE(line_of("1\ncomment\nSi 0 0\n") == 3);              // missing coordinate
        REQUIRE(line_of("1\ncomment\nSi a 0 0\n") == 3);            // bad coordinate
        REQUIRE(line_of("1\ncomment\nSi 0 0 0 extra\n") == 3);      // extra token
    }

    SECTION("missing file") {
        REQUIRE_THROWS_AS(qal::read_xyz("/nonexistent/qal-no-such.xyz"), qal::ParseError);
    }
}
