#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qfc/synth.hpp"

#include "support.hpp"

using namespace qfc;
using qfc_test::oracle_kron;

namespace {

// ---------------------------------------------------------------------------
// Brute-force enumeration oracle for one-line synthesis, independent of
// synthesize(): explicit product loops in sorted gate order, phase-minimized
// distance recomputed from the definition.
// ---------------------------------------------------------------------------

double oracle_phase_distance(const ComplexMatrix& s, const ComplexMatrix& t) {
    Complex z{0, 0};
    for (std::size_t r = 0; r < s.dim(); ++r)
        for (std::size_t c = 0; c < s.dim(); ++c) z += std::conj(t(r, c)) * s(r, c);
    const Complex lambda = std::abs(z) > 0 ? z / std::abs(z) : Complex{1, 0};
    double acc = 0;
    for (std::size_t r = 0; r < s.dim(); ++r)
        for (std::size_t c = 0; c < s.dim(); ++c) acc += std::norm(s(r, c) - lambda * t(r, c));
    return std::sqrt(acc);
}

// The synthesis alphabet: catalog gates minus the derived flips N and Nc.
const std::vector<std::string> kUnaryNamesSorted{"H", "V", "W"};

bool oracle_dfs(const ComplexMatrix& target, const ComplexMatrix& acc, int remaining,
                double eps, std::vector<std::string>& seq) {
    if (remaining == 0) return oracle_phase_distance(target, acc) < eps;
    for (const auto& name : kUnaryNamesSorted) {
        seq.push_back(name);
        if (oracle_dfs(target, builtin(name).matrix * acc, remaining - 1, eps, seq)) return true;
        seq.pop_back();
    }
    return false;
}

/// First (minimum depth, then lexicographic) unary-gate sequence within eps.
std::optional<std::vector<std::string>> oracle_synth_1line(const ComplexMatrix& target,
                                                           double eps, int max_depth) {
    for (int depth = 0; depth <= max_depth; ++depth) {
        std::vector<std::string> seq;
        if (oracle_dfs(target, ComplexMatrix::identity(2), depth, eps, seq)) return seq;
    }
    return std::nullopt;
}

std::vector<std::string> step_gate_names(const GateSequence& seq) {
    std::vector<std::string> names;
    for (const auto& s : seq.steps) names.push_back(s.gate);
    return names;
}

ComplexMatrix diag_z() {
    return ComplexMatrix::from_rows(
        {{Complex{1, 0}, Complex{0, 0}}, {Complex{0, 0}, Complex{-1, 0}}});
}

} // namespace

TEST_CASE("embed_unitary places gates on the requested lines") {
    const ComplexMatrix& n = builtin("N").matrix;
    const ComplexMatrix i2 = ComplexMatrix::identity(2);
    CHECK(embed_unitary(n, {0}, 2).max_abs_diff(oracle_kron(n, i2)) <= 1e-15);
    CHECK(embed_unitary(n, {1}, 2).max_abs_diff(oracle_kron(i2, n)) <= 1e-15);
    CHECK(embed_unitary(n, {0}, 1).max_abs_diff(n) == 0.0);

    // Nc with control on line 1: swap lines around the plain embedding.
    const ComplexMatrix& nc = builtin("Nc").matrix;
    const ComplexMatrix swapped = embed_unitary(nc, {1, 0}, 2);
    ComplexMatrix expected(4); // |b c> with control c: flips b when c = 1
    expected(0, 0) = expected(2, 2) = Complex{1, 0};
    expected(1, 3) = expected(3, 1) = Complex{1, 0};
    CHECK(swapped.max_abs_diff(expected) <= 1e-15);
}

TEST_CASE("sequence_product multiplies later steps on the left") {
    GateSequence seq;
    seq.num_lines = 1;
    seq.steps = {{"H", {0}}, {"V", {0}}};
    // product = V * H
    const ComplexMatrix expected = builtin("V").matrix * builtin("H").matrix;
    CHECK(sequence_product(seq).max_abs_diff(expected) <= 1e-15);
}

TEST_CASE("synthesize finds diag(1,-1) as [V, V] at depth 2") {
    const SynthResult r = synthesize(diag_z(), 1, 1e-12, 8);
    REQUIRE(r.sequence.has_value());
    CHECK(step_gate_names(*r.sequence) == std::vector<std::string>{"V", "V"});
    CHECK(r.best.distance < 1e-12);

    const auto oracle = oracle_synth_1line(diag_z(), 1e-12, 2);
    REQUIRE(oracle.has_value());
    CHECK(*oracle == step_gate_names(*r.sequence));
}

TEST_CASE("synthesize finds N as [H, V, V, H] at depth 4") {
    const SynthResult r = synthesize(builtin("N").matrix, 1, 1e-12, 8);
    REQUIRE(r.sequence.has_value());
    CHECK(step_gate_names(*r.sequence) == std::vector<std::string>{"H", "V", "V", "H"});
    CHECK(r.best.distance < 1e-12);

    const auto oracle = oracle_synth_1line(builtin("N").matrix, 1e-12, 4);
    REQUIRE(oracle.has_value());
    CHECK(*oracle == step_gate_names(*r.sequence));
}

TEST_CASE("synthesize agrees with the enumeration oracle on random phase targets") {
    SplitMix64 rng(301);
    for (int i = 0; i < 8; ++i) {
        // Random short products are guaranteed-reachable targets.
        ComplexMatrix target = ComplexMatrix::identity(2);
        const int len = 1 + static_cast<int>(rng.next() % 3);
        for (int k = 0; k < len; ++k) {
            const auto& name = kUnaryNamesSorted[rng.next() % kUnaryNamesSorted.size()];
            target = builtin(name).matrix * target;
        }
        const SynthResult got = synthesize(target, 1, 1e-12, 4);
        const auto expected = oracle_synth_1line(target, 1e-12, 4);
        REQUIRE(got.sequence.has_value());
        REQUIRE(expected.has_value());
        CHECK(step_gate_names(*got.sequence) == *expected);
    }
}

TEST_CASE("synthesize at depth zero succeeds only on phase multiples of I") {
    const SynthResult miss = synthesize(builtin("H").matrix, 1, 1e-12, 0);
    CHECK(!miss.sequence.has_value());
    CHECK(miss.best.distance ==
          Catch::Approx(oracle_phase_distance(builtin("H").matrix, ComplexMatrix::identity(2)))
              .margin(1e-12));

    const ComplexMatrix phase_id = Complex{0, 1} * ComplexMatrix::identity(2);
    const SynthResult hit = synthesize(phase_id, 1, 1e-12, 0);
    REQUIRE(hit.sequence.has_value());
    CHECK(hit.sequence->steps.empty());
}

TEST_CASE("synthesized sequences re-multiply to within eps") {
    SplitMix64 rng(302);
    for (const char* name : {"N", "H", "V", "W"}) {
        const SynthResult r = synthesize(builtin(name).matrix, 1, 1e-12, 4);
        REQUIRE(r.sequence.has_value());
        const ComplexMatrix product = sequence_product(*r.sequence);
        CHECK(distance_up_to_phase(builtin(name).matrix, product).distance < 1e-12);
    }
}

TEST_CASE("synthesize works on two lines") {
    // Hc itself is a depth-1 hit, and control placement matters.
    const SynthResult hc = synthesize(builtin("Hc").matrix, 2, 1e-12, 2);
    REQUIRE(hc.sequence.has_value());
    REQUIRE(hc.sequence->steps.size() == 1);
    CHECK(hc.sequence->steps[0].gate == "Hc");
    CHECK(hc.sequence->steps[0].targets == std::vector<QubitIndex>{0, 1});

    const ComplexMatrix rev = embed_unitary(builtin("Hc").matrix, {1, 0}, 2);
    const SynthResult hcr = synthesize(rev, 2, 1e-12, 2);
    REQUIRE(hcr.sequence.has_value());
    REQUIRE(hcr.sequence->steps.size() == 1);
    CHECK(hcr.sequence->steps[0].gate == "Hc");
    CHECK(hcr.sequence->steps[0].targets == std::vector<QubitIndex>{1, 0});

    // H acting on line 1 only.
    const ComplexMatrix target = embed_unitary(builtin("H").matrix, {1}, 2);
    const SynthResult h1 = synthesize(target, 2, 1e-12, 2);
    REQUIRE(h1.sequence.has_value());
    REQUIRE(h1.sequence->steps.size() == 1);
    CHECK(h1.sequence->steps[0].gate == "H");
    CHECK(h1.sequence->steps[0].targets == std::vector<QubitIndex>{1});

    // Nc is not searched directly; its shortest product has depth 4
    // (H on the target line around Vc Vc).
    const SynthResult nc = synthesize(builtin("Nc").matrix, 2, 1e-12, 5);
    REQUIRE(nc.sequence.has_value());
    CHECK(nc.sequence->steps.size() == 4);
    CHECK(distance_up_to_phase(builtin("Nc").matrix, sequence_product(*nc.sequence)).distance <
          1e-12);
}

TEST_CASE("synthesize is deterministic") {
    const SynthResult a = synthesize(builtin("N").matrix, 1, 1e-12, 6);
    const SynthResult b = synthesize(builtin("N").matrix, 1, 1e-12, 6);
    REQUIRE(a.sequence.has_value());
    REQUIRE(b.sequence.has_value());
    CHECK(step_gate_names(*a.sequence) == step_gate_names(*b.sequence));
    CHECK(a.best.distance == b.best.distance);
}

TEST_CASE("synthesize validates its inputs") {
    ComplexMatrix not_unitary(2);
    not_unitary(0, 0) = Complex{2, 0};
    CHECK_THROWS_AS(synthesize(not_unitary, 1, 1e-12, 2), ValidationError);
    CHECK_THROWS_AS(synthesize(diag_z(), 3, 1e-12, 2), ConfigError);
    CHECK_THROWS_AS(synthesize(diag_z(), 2, 1e-12, 2), DimensionError);
    CHECK_THROWS_AS(synthesize(diag_z(), 1, 0.0, 2), ConfigError);
    CHECK_THROWS_AS(synthesize(diag_z(), 1, 1e-12, -1), ConfigError);
}
