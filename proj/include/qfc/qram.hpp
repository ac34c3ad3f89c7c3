#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qfc/complex_matrix.hpp"
#include "qfc/errors.hpp"
#include "qfc/gates.hpp"
#include "qfc/interp.hpp"
#include "qfc/rng.hpp"
#include "qfc/typecheck.hpp"

namespace qfc {

/// One controller-to-device instruction.
struct Instruction {
    enum class Kind { Alloc, ApplyUnary, ApplyBinary, Measure, Free };
    Kind kind = Kind::Alloc;
    std::string gate; // Apply* only
    int addr0 = -1;
    int addr1 = -1;

    static Instruction alloc() { return {Kind::Alloc, "", -1, -1}; }
    static Instruction apply_unary(std::string gate, int a) {
        return {Kind::ApplyUnary, std::move(gate), a, -1};
    }
    static Instruction apply_binary(std::string gate, int a, int b) {
        return {Kind::ApplyBinary, std::move(gate), a, b};
    }
    static Instruction measure(int a) { return {Kind::Measure, "", a, -1}; }
    static Instruction free(int a) { return {Kind::Free, "", a, -1}; }
};

/// Device-to-controller reply. Measurement bits are the only quantum
/// output; everything else is an acknowledgement or a fault.
struct DeviceReply {
    enum class Kind { Allocated, Bit, Ack, Fault };
    Kind kind = Kind::Ack;
    int value = 0;          // Allocated address or measured bit
    std::string fault_code; // Fault only

    static DeviceReply allocated(int addr) { return {Kind::Allocated, addr, ""}; }
    static DeviceReply bit(int b) { return {Kind::Bit, b, ""}; }
    static DeviceReply ack() { return {Kind::Ack, 0, ""}; }
    static DeviceReply fault(std::string code) { return {Kind::Fault, 0, std::move(code)}; }

    bool operator==(const DeviceReply& o) const {
        return kind == o.kind && value == o.value && fault_code == o.fault_code;
    }
};

/// Single-trajectory simulated quantum device. Holds a pure state vector
/// over the in-use addresses; the controller drives it one instruction at a
/// time and receives only measurement bits back. Faults are replies, not
/// exceptions.
class QramDevice {
public:
    QramDevice(int pool_size, std::uint64_t seed)
        : pool_size_(pool_size), in_use_(static_cast<std::size_t>(pool_size), false),
          amps_{Complex{1.0, 0.0}}, rng_(seed) {}

    DeviceReply step(const Instruction& ins) {
        DeviceReply reply = dispatch(ins);
        log_.emplace_back(ins, reply);
        return reply;
    }

    const std::vector<std::pair<Instruction, DeviceReply>>& log() const { return log_; }
    int num_in_use() const { return static_cast<int>(addr_at_pos_.size()); }
    const std::vector<Complex>& amplitudes() const { return amps_; }

    /// Register position of an address, -1 when not allocated.
    int position_of(int addr) const {
        const auto it = std::find(addr_at_pos_.begin(), addr_at_pos_.end(), addr);
        return it == addr_at_pos_.end() ? -1
                                        : static_cast<int>(it - addr_at_pos_.begin());
    }

private:
    DeviceReply dispatch(const Instruction& ins) {
        switch (ins.kind) {
            case Instruction::Kind::Alloc: return do_alloc();
            case Instruction::Kind::ApplyUnary: return do_apply(ins.gate, {ins.addr0});
            case Instruction::Kind::ApplyBinary: {
                if (ins.addr0 == ins.addr1) return DeviceReply::fault("DuplicateAddress");
                return do_apply(ins.gate, {ins.addr0, ins.addr1});
            }
            case Instruction::Kind::Measure: {
                const int pos = position_of(ins.addr0);
                if (pos < 0) return DeviceReply::fault("UnknownAddress");
                return DeviceReply::bit(measure_at(pos));
            }
            case Instruction::Kind::Free: return do_free(ins.addr0);
        }
        return DeviceReply::fault("UnknownInstruction");
    }

    DeviceReply do_alloc() {
        int addr = -1;
        for (int a = 0; a < pool_size_; ++a) {
            if (!in_use_[static_cast<std::size_t>(a)]) {
                addr = a;
                break;
            }
        }
        if (addr < 0) return DeviceReply::fault("PoolExhausted");
        in_use_[static_cast<std::size_t>(addr)] = true;
        // contents initialized to 0: append |0> as the least significant factor
        std::vector<Complex> grown(amps_.size() * 2, Complex{0.0, 0.0});
        for (std::size_t i = 0; i < amps_.size(); ++i) grown[2 * i] = amps_[i];
        amps_ = std::move(grown);
        addr_at_pos_.push_back(addr);
        return DeviceReply::allocated(addr);
    }

    DeviceReply do_apply(const std::string& gate_name, std::vector<int> addrs) {
        if (!is_builtin_gate(gate_name)) return DeviceReply::fault("UnknownGate");
        const GateDef& gate = builtin(gate_name);
        if (gate.arity != static_cast<int>(addrs.size()))
            return DeviceReply::fault("ArityMismatch");
        std::vector<int> pos;
        for (int a : addrs) {
            const int p = position_of(a);
            if (p < 0) return DeviceReply::fault("UnknownAddress");
            pos.push_back(p);
        }
        if (gate.arity == 1)
            apply_unary(gate.matrix, pos[0]);
        else
            apply_binary(gate.matrix, pos[0], pos[1]);
        return DeviceReply::ack();
    }

    /// Reset-to-0 deallocation: measure, flip with N on outcome 1, detach.
    DeviceReply do_free(int addr) {
        const int pos = position_of(addr);
        if (pos < 0) return DeviceReply::fault("UnknownAddress");
        const int bit = measure_at(pos);
        if (bit == 1) apply_unary(builtin("N").matrix, pos);
        detach_at(pos);
        in_use_[static_cast<std::size_t>(addr)] = false;
        addr_at_pos_.erase(addr_at_pos_.begin() + pos);
        return DeviceReply::ack();
    }

    int num_qubits() const { return static_cast<int>(addr_at_pos_.size()); }

    std::size_t mask_of(int pos) const {
        return std::size_t{1} << (num_qubits() - 1 - pos);
    }

    void apply_unary(const ComplexMatrix& g, int pos) {
        const std::size_t m = mask_of(pos);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (i & m) continue;
            const Complex a0 = amps_[i], a1 = amps_[i | m];
            amps_[i] = g(0, 0) * a0 + g(0, 1) * a1;
            amps_[i | m] = g(1, 0) * a0 + g(1, 1) * a1;
        }
    }

    void apply_binary(const ComplexMatrix& g, int pos0, int pos1) {
        const std::size_t m0 = mask_of(pos0), m1 = mask_of(pos1);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & m0) || (i & m1)) continue;
            const std::size_t idx[4] = {i, i | m1, i | m0, i | m0 | m1};
            Complex in[4], outv[4];
            for (int k = 0; k < 4; ++k) in[k] = amps_[idx[k]];
            for (int r = 0; r < 4; ++r) {
                outv[r] = Complex{0.0, 0.0};
                for (int c = 0; c < 4; ++c)
                    outv[r] += g(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) * in[c];
            }
            for (int k = 0; k < 4; ++k) amps_[idx[k]] = outv[k];
        }
    }

    int measure_at(int pos) {
        const std::size_t m = mask_of(pos);
        double p1 = 0.0;
        for (std::size_t i = 0; i < amps_.size(); ++i)
            if (i & m) p1 += std::norm(amps_[i]);
        const double u = rng_.next_double();
        const int bit = u < p1 ? 1 : 0;
        const double p = bit ? p1 : 1.0 - p1;
        const double scale = 1.0 / std::sqrt(p);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (static_cast<int>((i & m) != 0) == bit)
                amps_[i] *= scale;
            else
                amps_[i] = Complex{0.0, 0.0};
        }
        return bit;
    }

    /// Removes a qubit known to be in state |0> from the register.
    void detach_at(int pos) {
        const int shift = num_qubits() - 1 - pos;
        const std::size_t low_mask = (std::size_t{1} << shift) - 1;
        std::vector<Complex> shrunk(amps_.size() / 2);
        for (std::size_t i = 0; i < shrunk.size(); ++i)
            shrunk[i] = amps_[((i & ~low_mask) << 1) | (i & low_mask)];
        amps_ = std::move(shrunk);
    }

    int pool_size_;
    std::vector<bool> in_use_;
    std::vector<int> addr_at_pos_; // allocation order; position 0 most significant
    std::vector<Complex> amps_;
    SplitMix64 rng_;
    std::vector<std::pair<Instruction, DeviceReply>> log_;
};

// ---------------------------------------------------------------------------
// Instruction log serialization: one instruction per line, the reply after
// "->", e.g. "MEASURE 0 -> 1".
// ---------------------------------------------------------------------------

inline std::string to_log_line(const Instruction& ins, const DeviceReply& reply) {
    std::ostringstream out;
    switch (ins.kind) {
        case Instruction::Kind::Alloc: out << "ALLOC"; break;
        case Instruction::Kind::ApplyUnary: out << "APPLY " << ins.gate << ' ' << ins.addr0; break;
        case Instruction::Kind::ApplyBinary:
            out << "APPLY " << ins.gate << ' ' << ins.addr0 << ' ' << ins.addr1;
            break;
        case Instruction::Kind::Measure: out << "MEASURE " << ins.addr0; break;
        case Instruction::Kind::Free: out << "FREE " << ins.addr0; break;
    }
    out << " -> ";
    switch (reply.kind) {
        case DeviceReply::Kind::Allocated: out << reply.value; break;
        case DeviceReply::Kind::Bit: out << reply.value; break;
        case DeviceReply::Kind::Ack: out << "ACK"; break;
        case DeviceReply::Kind::Fault: out << "FAULT " << reply.fault_code; break;
    }
    return out.str();
}

inline std::string serialize_log(
    const std::vector<std::pair<Instruction, DeviceReply>>& log) {
    std::string out;
    for (const auto& [ins, reply] : log) {
        out += to_log_line(ins, reply);
        out += '\n';
    }
    return out;
}

/// Parses the instruction part of a log line; the reply after "->" is
/// ignored, so serialized logs replay directly.
inline Instruction parse_log_line(const std::string& line) {
    std::istringstream in(line);
    std::string op;
    in >> op;
    auto read_addr = [&]() {
        int a = -1;
        if (!(in >> a)) throw Error("bad instruction line: '" + line + "'");
        return a;
    };
    if (op == "ALLOC") return Instruction::alloc();
    if (op == "MEASURE") return Instruction::measure(read_addr());
    if (op == "FREE") return Instruction::free(read_addr());
    if (op == "APPLY") {
        std::string gate;
        if (!(in >> gate)) throw Error("bad instruction line: '" + line + "'");
        const int a = read_addr();
        int b = -1;
        std::string next;
        if (in >> next && next != "->") {
            try {
                b = std::stoi(next);
            } catch (...) {
                throw Error("bad instruction line: '" + line + "'");
            }
            return Instruction::apply_binary(gate, a, b);
        }
        return Instruction::apply_unary(gate, a);
    }
    throw Error("bad instruction line: '" + line + "'");
}

/// Re-executes instructions on a fresh device with the given seed.
inline std::vector<DeviceReply> replay(const std::vector<Instruction>& instructions,
                                       int pool_size, std::uint64_t seed) {
    QramDevice dev(pool_size, seed);
    std::vector<DeviceReply> replies;
    replies.reserve(instructions.size());
    for (const auto& ins : instructions) replies.push_back(dev.step(ins));
    return replies;
}

// ---------------------------------------------------------------------------
// Sampled program execution: the classical controller walks the program
// once per shot, driving a fresh device each time.
// ---------------------------------------------------------------------------

struct ShotReport {
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    std::map<std::string, std::uint64_t> counts;
    /// Shots whose loop hit max_iters; counted here, not in `counts`.
    std::uint64_t loop_overruns = 0;
};

namespace detail {

class ShotRunner {
public:
    ShotRunner(const TypedProgram& typed, const InterpConfig& cfg, QramDevice& dev,
               std::uint64_t shot_index)
        : typed_(typed), cfg_(cfg), dev_(dev), shot_index_(shot_index) {}

    /// Returns false when a loop overran max_iters (shot abandoned).
    bool run(std::vector<std::pair<std::string, int>>& history) {
        const Proc* main = typed_.program.find_proc("main");
        Frame frame{main, 0, {}};
        run_block(main->body, frame);
        history = std::move(history_);
        return !overrun_;
    }

private:
    struct Frame {
        const Proc* proc;
        int depth;
        std::map<std::string, int> addr;
    };

    [[noreturn]] void device_fault(const DeviceReply& reply) {
        const std::string what =
            "shot " + std::to_string(shot_index_) + ": device fault " + reply.fault_code;
        if (reply.fault_code == "PoolExhausted") throw QubitCapExceeded(what);
        throw Error(what);
    }

    DeviceReply step_checked(const Instruction& ins) {
        DeviceReply reply = dev_.step(ins);
        if (reply.kind == DeviceReply::Kind::Fault) device_fault(reply);
        return reply;
    }

    int measure_bit(int addr) {
        return step_checked(Instruction::measure(addr)).value;
    }

    void run_block(const Block& block, Frame& frame) {
        for (const auto& stmt : block.stmts) {
            if (overrun_) return;
            run_stmt(stmt, frame);
        }
    }

    void run_stmt(const Stmt& stmt, Frame& frame) {
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, NewQbitStmt>) {
                    const DeviceReply r = step_checked(Instruction::alloc());
                    frame.addr[node.name] = r.value;
                } else if constexpr (std::is_same_v<T, UnaryGateStmt>) {
                    step_checked(Instruction::apply_unary(node.gate, frame.addr.at(node.qubit)));
                } else if constexpr (std::is_same_v<T, BinaryGateStmt>) {
                    step_checked(Instruction::apply_binary(node.gate, frame.addr.at(node.qubit0),
                                                           frame.addr.at(node.qubit1)));
                } else if constexpr (std::is_same_v<T, MeasureStmt>) {
                    const int bit = measure_bit(frame.addr.at(node.qubit));
                    history_.emplace_back(node.qubit, bit);
                    run_block(bit == 0 ? node.branch0 : node.branch1, frame);
                } else if constexpr (std::is_same_v<T, WhileStmt>) {
                    for (int iter = 0;; ++iter) {
                        const int bit = measure_bit(frame.addr.at(node.qubit));
                        history_.emplace_back(node.qubit + "@" + std::to_string(iter), bit);
                        if (bit == 0) break;
                        if (iter >= cfg_.max_iters) {
                            overrun_ = true;
                            break;
                        }
                        run_block(node.body, frame);
                        if (overrun_) break;
                    }
                } else if constexpr (std::is_same_v<T, DiscardStmt>) {
                    step_checked(Instruction::free(frame.addr.at(node.name)));
                } else if constexpr (std::is_same_v<T, CallStmt>) {
                    const Proc* callee = typed_.program.find_proc(node.proc);
                    Frame inner{callee, frame.depth + 1, {}};
                    for (std::size_t i = 0; i < node.args.size(); ++i)
                        inner.addr[callee->params[i]] = frame.addr.at(node.args[i]);
                    run_block(callee->body, inner);
                }
            },
            stmt.node);
    }

    const TypedProgram& typed_;
    const InterpConfig& cfg_;
    QramDevice& dev_;
    std::uint64_t shot_index_;
    std::vector<std::pair<std::string, int>> history_;
    bool overrun_ = false;
};

} // namespace detail

/// Runs the program `shots` times on fresh devices. Shot i draws from the
/// stream seeded by shot_seed(seed, i), so the report is reproducible and
/// independent of execution order.
inline ShotReport run_shots(const TypedProgram& p, std::uint64_t shots, std::uint64_t seed,
                            const InterpConfig& cfg = {}) {
    if (cfg.input_state.has_value())
        throw ConfigError("input states require the exact backend");
    ShotReport report;
    report.shots = shots;
    report.seed = seed;
    for (std::uint64_t i = 0; i < shots; ++i) {
        QramDevice dev(cfg.max_qubits, shot_seed(seed, i));
        detail::ShotRunner runner(p, cfg, dev, i);
        std::vector<std::pair<std::string, int>> history;
        if (runner.run(history))
            ++report.counts[history_key(history)];
        else
            ++report.loop_overruns;
    }
    return report;
}

} // namespace qfc
