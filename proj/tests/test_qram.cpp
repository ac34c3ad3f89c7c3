#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "qfc/interp.hpp"
#include "qfc/parser.hpp"
#include "qfc/qram.hpp"
#include "qfc/rng.hpp"
#include "qfc/typecheck.hpp"

using namespace qfc;

namespace {

TypedProgram compile(const std::string& src) {
    auto parsed = parse(src);
    REQUIRE(parsed.has_value());
    auto typed = typecheck(std::move(parsed.value()));
    REQUIRE(typed.has_value());
    return std::move(typed.value());
}

const char* kBellMeasured =
    "proc main(){ new qbit p; new qbit q; p *= H; p, q *= Nc;"
    " measure p { 0: {} 1: {} } measure q { 0: {} 1: {} } }";

} // namespace

TEST_CASE("splitmix64 stream is pinned to the reference sequence") {
    // Frozen vectors: the replay and per-shot derivation contracts depend
    // on this exact stream.
    SplitMix64 r(42);
    CHECK(r.next() == 13679457532755275413ULL);
    CHECK(r.next() == 2949826092126892291ULL);
    CHECK(r.next() == 5139283748462763858ULL);

    SplitMix64 d(42);
    CHECK(d.next_double() == 0.74156487877182331);
    CHECK(d.next_double() == 0.1599103928769201);

    CHECK(mix64(0) == 0ULL);
    CHECK(shot_seed(0, 0) == 16294208416658607535ULL);
    CHECK(shot_seed(42, 7) == 14769051326987775908ULL);
}

TEST_CASE("fresh allocations read as 0") {
    QramDevice dev(4, 1);
    const DeviceReply a = dev.step(Instruction::alloc());
    REQUIRE(a.kind == DeviceReply::Kind::Allocated);
    CHECK(a.value == 0);
    const DeviceReply m = dev.step(Instruction::measure(0));
    REQUIRE(m.kind == DeviceReply::Kind::Bit);
    CHECK(m.value == 0);
}

TEST_CASE("free resets a flipped qubit before reuse") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        QramDevice dev(4, seed);
        dev.step(Instruction::alloc());
        dev.step(Instruction::apply_unary("N", 0));
        CHECK(dev.step(Instruction::free(0)).kind == DeviceReply::Kind::Ack);
        CHECK(dev.step(Instruction::alloc()).value == 0);
        CHECK(dev.step(Instruction::measure(0)).value == 0);
    }
}

TEST_CASE("faults are replies, not exceptions") {
    QramDevice dev(2, 7);
    CHECK(dev.step(Instruction::apply_unary("H", 7)) ==
          DeviceReply::fault("UnknownAddress"));
    dev.step(Instruction::alloc());
    dev.step(Instruction::alloc());
    CHECK(dev.step(Instruction::alloc()) == DeviceReply::fault("PoolExhausted"));
    CHECK(dev.step(Instruction::apply_binary("Nc", 0, 0)) ==
          DeviceReply::fault("DuplicateAddress"));
    CHECK(dev.step(Instruction::apply_unary("T", 0)) == DeviceReply::fault("UnknownGate"));
    CHECK(dev.step(Instruction::apply_unary("Nc", 0)) == DeviceReply::fault("ArityMismatch"));
    CHECK(dev.step(Instruction::measure(1)).kind == DeviceReply::Kind::Bit);
    CHECK(dev.step(Instruction::free(1)).kind == DeviceReply::Kind::Ack);
    CHECK(dev.step(Instruction::free(1)) == DeviceReply::fault("UnknownAddress"));
}

TEST_CASE("allocation picks the lowest unused address") {
    QramDevice dev(4, 3);
    CHECK(dev.step(Instruction::alloc()).value == 0);
    CHECK(dev.step(Instruction::alloc()).value == 1);
    CHECK(dev.step(Instruction::alloc()).value == 2);
    dev.step(Instruction::free(1));
    CHECK(dev.step(Instruction::alloc()).value == 1);
}

TEST_CASE("bit replies occur only for measure instructions") {
    QramDevice dev(4, 11);
    dev.step(Instruction::alloc());
    dev.step(Instruction::alloc());
    dev.step(Instruction::apply_unary("H", 0));
    dev.step(Instruction::apply_binary("Nc", 0, 1));
    dev.step(Instruction::measure(0));
    dev.step(Instruction::free(1));
    dev.step(Instruction::free(0));
    dev.step(Instruction::apply_unary("H", 0)); // fault
    for (const auto& [ins, reply] : dev.log()) {
        if (reply.kind == DeviceReply::Kind::Bit)
            CHECK(ins.kind == Instruction::Kind::Measure);
        if (ins.kind == Instruction::Kind::Measure)
            CHECK(reply.kind == DeviceReply::Kind::Bit);
    }
}

TEST_CASE("free collapses entangled qubits and detaches them cleanly") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        QramDevice dev(4, seed);
        dev.step(Instruction::alloc());
        dev.step(Instruction::alloc());
        dev.step(Instruction::apply_unary("H", 0));
        dev.step(Instruction::apply_binary("Nc", 0, 1));
        dev.step(Instruction::free(1));
        CHECK(dev.num_in_use() == 1);

        double norm = 0;
        for (const auto& a : dev.amplitudes()) norm += std::norm(a);
        CHECK(norm == Catch::Approx(1.0).margin(1e-10));

        // The partner collapsed to a definite value; both measures agree.
        const int b1 = dev.step(Instruction::measure(0)).value;
        const int b2 = dev.step(Instruction::measure(0)).value;
        CHECK(b1 == b2);

        // Reused address reads 0 with certainty.
        CHECK(dev.step(Instruction::alloc()).value == 1);
        CHECK(dev.step(Instruction::measure(1)).value == 0);
    }
}

TEST_CASE("instruction logs serialize, parse and replay bit-exactly") {
    QramDevice dev(4, 99);
    dev.step(Instruction::alloc());
    dev.step(Instruction::alloc());
    dev.step(Instruction::apply_unary("H", 0));
    dev.step(Instruction::apply_binary("Nc", 0, 1));
    dev.step(Instruction::measure(0));
    dev.step(Instruction::measure(1));
    dev.step(Instruction::free(1));
    dev.step(Instruction::free(0));
    dev.step(Instruction::apply_unary("H", 9)); // logged fault

    const std::string text = serialize_log(dev.log());
    CHECK(text.find("APPLY H 0 -> ACK") != std::string::npos);
    CHECK(text.find("APPLY Nc 0 1 -> ACK") != std::string::npos);
    CHECK(text.find("ALLOC -> 0") != std::string::npos);
    CHECK(text.find("APPLY H 9 -> FAULT UnknownAddress") != std::string::npos);
    CHECK(text.find("MEASURE 0 -> ") != std::string::npos);

    std::vector<Instruction> instructions;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) instructions.push_back(parse_log_line(line));
    REQUIRE(instructions.size() == dev.log().size());

    const std::vector<DeviceReply> replies = replay(instructions, 4, 99);
    REQUIRE(replies.size() == dev.log().size());
    for (std::size_t i = 0; i < replies.size(); ++i)
        CHECK(replies[i] == dev.log()[i].second);
}

TEST_CASE("deterministic programs sample deterministically") {
    const TypedProgram flip = compile(
        "proc main(){ new qbit q; q *= N; measure q { 0: {} 1: {} } }");
    const ShotReport report = run_shots(flip, 500, 123);
    REQUIRE(report.counts.size() == 1);
    CHECK(report.counts.at("q=1") == 500);
    CHECK(report.loop_overruns == 0);
}

TEST_CASE("identical (program, shots, seed) give identical reports") {
    const TypedProgram bell = compile(kBellMeasured);
    const ShotReport a = run_shots(bell, 2000, 42);
    const ShotReport b = run_shots(bell, 2000, 42);
    CHECK(a.counts == b.counts);
    const ShotReport c = run_shots(bell, 2000, 43);
    CHECK(a.counts != c.counts); // different stream, different trajectory set
}

TEST_CASE("Bell shots stay within binomial bounds and never mix") {
    const TypedProgram bell = compile(kBellMeasured);
    const ShotReport report = run_shots(bell, 10000, 7);
    const double sigma = std::sqrt(10000 * 0.25);
    CHECK(std::abs(double(report.counts.at("p=0,q=0")) - 5000.0) <= 3 * sigma);
    CHECK(std::abs(double(report.counts.at("p=1,q=1")) - 5000.0) <= 3 * sigma);
    CHECK(report.counts.count("p=0,q=1") == 0);
    CHECK(report.counts.count("p=1,q=0") == 0);
}

TEST_CASE("sampled frequencies track the exact distribution") {
    const TypedProgram prog = compile(
        "proc main(){ new qbit a; new qbit b; a *= H; b *= H;"
        " measure a { 0: {} 1: {} } measure b { 0: {} 1: {} } }");
    const RunResult exact = run_exact(prog);
    const std::uint64_t shots = 20000;
    const ShotReport report = run_shots(prog, shots, 5);
    for (const auto& [key, p] : exact.outcome_distribution) {
        const double expected = p * double(shots);
        const double sigma = std::sqrt(double(shots) * p * (1 - p));
        const double got = report.counts.count(key) ? double(report.counts.at(key)) : 0.0;
        CHECK(std::abs(got - expected) <= 4 * sigma);
    }
}

TEST_CASE("sampled loops use iteration-tagged histories") {
    const TypedProgram rus = compile("proc main(){ new qbit q; q *= H; while q { q *= H; } }");
    const ShotReport report = run_shots(rus, 4000, 11);
    CHECK(report.loop_overruns == 0);
    CHECK(report.counts.count("q@0=0") == 1);
    CHECK(report.counts.count("q@0=1,q@1=0") == 1);
    std::uint64_t total = 0;
    for (const auto& [key, n] : report.counts) total += n;
    CHECK(total == 4000);
}

TEST_CASE("run_shots rejects input states and surfaces capacity faults") {
    const TypedProgram three = compile("proc main(){ new qbit a; new qbit b; new qbit c; }");
    InterpConfig with_input;
    with_input.input_state = ComplexMatrix::identity(2);
    CHECK_THROWS_AS(run_shots(three, 10, 0, with_input), ConfigError);

    InterpConfig small;
    small.max_qubits = 2;
    CHECK_THROWS_AS(run_shots(three, 10, 0, small), QubitCapExceeded);
}

TEST_CASE("sampled overruns are reported, not mislabeled") {
    const TypedProgram stuck = compile("proc main(){ new qbit q; q *= N; while q { } }");
    InterpConfig cfg;
    cfg.max_iters = 20;
    const ShotReport report = run_shots(stuck, 50, 9, cfg);
    CHECK(report.loop_overruns == 50);
    CHECK(report.counts.empty());
}
