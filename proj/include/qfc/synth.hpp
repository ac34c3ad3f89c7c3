#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "qfc/complex_matrix.hpp"
#include "qfc/densmat.hpp"
#include "qfc/errors.hpp"
#include "qfc/gates.hpp"

namespace qfc {

/// Distance between two unitaries minimized over a global phase, together
/// with the optimizing unit scalar.
struct PhaseDistance {
    double distance = 0.0;
    Complex phase{1.0, 0.0};
};

/// min over unit lambda of ||s - lambda t||_F. The closed-form optimizer is
/// lambda = Tr(t^dagger s) / |Tr(t^dagger s)|, lambda = 1 when the trace
/// vanishes.
inline PhaseDistance distance_up_to_phase(const ComplexMatrix& s, const ComplexMatrix& t) {
    s.require_same_dim(t, "distance_up_to_phase");
    Complex z{0.0, 0.0};
    const std::size_t dim = s.dim();
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) z += std::conj(t(r, c)) * s(r, c);
    PhaseDistance out;
    out.phase = (std::abs(z) > 0.0) ? z / std::abs(z) : Complex{1.0, 0.0};
    out.distance = (s - out.phase * t).frobenius_norm();
    return out;
}

/// One synthesis step: a catalog gate bound to register lines.
struct GateStep {
    std::string gate;
    std::vector<QubitIndex> targets;
};

/// An ordered gate program on `num_lines` lines. Steps apply in order, so
/// the realized unitary multiplies later steps on the left.
struct GateSequence {
    int num_lines = 1;
    std::vector<GateStep> steps;
};

/// Embeds a 2^k x 2^k unitary acting on the given lines into the full
/// 2^num_lines space. targets[0] is the more significant gate factor.
inline ComplexMatrix embed_unitary(const ComplexMatrix& gate,
                                   const std::vector<QubitIndex>& targets, int num_lines) {
    const int k = gate.num_qubits();
    if (gate.dim() != (std::size_t{1} << k) || targets.size() != static_cast<std::size_t>(k))
        throw DimensionError("embed_unitary: gate dim does not match target count");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        detail::require_qubit_in_range(targets[i], num_lines, "embed_unitary");
        for (std::size_t j = i + 1; j < targets.size(); ++j)
            if (targets[i] == targets[j]) throw TargetError("embed_unitary: duplicate line");
    }
    const std::size_t dim = std::size_t{1} << num_lines;
    std::size_t target_mask = 0;
    for (QubitIndex t : targets) target_mask |= std::size_t{1} << (num_lines - 1 - static_cast<int>(t));
    auto sub_index = [&](std::size_t full) {
        std::size_t sub = 0;
        for (std::size_t j = 0; j < targets.size(); ++j)
            sub |= static_cast<std::size_t>(detail::bit_at(full, targets[j], num_lines))
                   << (k - 1 - static_cast<int>(j));
        return sub;
    };
    ComplexMatrix out(dim);
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
            if ((r & ~target_mask) == (c & ~target_mask))
                out(r, c) = gate(sub_index(r), sub_index(c));
    return out;
}

/// Re-multiplies a sequence into the unitary it realizes.
inline ComplexMatrix sequence_product(const GateSequence& seq) {
    ComplexMatrix acc = ComplexMatrix::identity(std::size_t{1} << seq.num_lines);
    for (const auto& step : seq.steps)
        acc = embed_unitary(builtin(step.gate).matrix, step.targets, seq.num_lines) * acc;
    return acc;
}

struct SynthResult {
    std::optional<GateSequence> sequence;
    /// On success, the achieved distance/phase; on failure, the best seen.
    PhaseDistance best;
};

namespace detail {

struct SynthStep {
    GateStep step;
    ComplexMatrix matrix;
};

/// The searched alphabet omits N and Nc: both are exact products of the
/// remaining seven gates (N = H V V H, Nc its controlled form), so the
/// generated group is unchanged while flip targets decompose nontrivially.
inline std::vector<SynthStep> synth_alphabet(int num_lines) {
    std::vector<SynthStep> steps;
    for (const auto& g : gate_catalog()) {
        if (g.name == "N" || g.name == "Nc") continue;
        if (g.arity == 1) {
            for (int l = 0; l < num_lines; ++l)
                steps.push_back({{g.name, {static_cast<QubitIndex>(l)}},
                                 embed_unitary(g.matrix, {static_cast<QubitIndex>(l)}, num_lines)});
        } else if (g.arity == 2 && num_lines >= 2) {
            for (int a = 0; a < num_lines; ++a)
                for (int b = 0; b < num_lines; ++b) {
                    if (a == b) continue;
                    std::vector<QubitIndex> t{static_cast<QubitIndex>(a),
                                              static_cast<QubitIndex>(b)};
                    steps.push_back({{g.name, t}, embed_unitary(g.matrix, t, num_lines)});
                }
        }
    }
    std::sort(steps.begin(), steps.end(), [](const SynthStep& x, const SynthStep& y) {
        if (x.step.gate != y.step.gate) return x.step.gate < y.step.gate;
        return x.step.targets < y.step.targets;
    });
    return steps;
}

/// 128-bit digest of a product, quantized at 1e-10 and canonicalized over
/// global phase, so phase-equal products collide on purpose.
struct ProductKey {
    std::uint64_t lo = 0, hi = 0;
    int depth = 0;
    bool operator==(const ProductKey& o) const {
        return lo == o.lo && hi == o.hi && depth == o.depth;
    }
};

struct ProductKeyHash {
    std::size_t operator()(const ProductKey& k) const {
        return static_cast<std::size_t>(k.lo ^ (k.hi * 0x9E3779B97F4A7C15ULL) ^
                                        (static_cast<std::uint64_t>(k.depth) << 1));
    }
};

inline ProductKey product_key(const ComplexMatrix& m, int depth) {
    Complex canon{1.0, 0.0};
    for (const auto& z : m.data()) {
        if (std::abs(z) > 1e-6) {
            canon = std::conj(z) / std::abs(z);
            break;
        }
    }
    std::uint64_t a = 1469598103934665603ULL, b = 14695981039346656037ULL;
    auto mix = [](std::uint64_t h, std::uint64_t x, std::uint64_t prime) {
        h ^= x;
        h *= prime;
        return h;
    };
    for (const auto& z : m.data()) {
        const Complex v = canon * z;
        const auto qr = static_cast<std::int64_t>(std::llround(v.real() * 1e10));
        const auto qi = static_cast<std::int64_t>(std::llround(v.imag() * 1e10));
        a = mix(a, static_cast<std::uint64_t>(qr), 1099511628211ULL);
        a = mix(a, static_cast<std::uint64_t>(qi), 1099511628211ULL);
        b = mix(b, static_cast<std::uint64_t>(qi), 0x100000001B3ULL);
        b = mix(b, static_cast<std::uint64_t>(qr) * 0x9E3779B97F4A7C15ULL, 0x100000001B3ULL);
    }
    return {a, b, depth};
}

} // namespace detail

/// Exhaustive minimum-depth search for a catalog-gate sequence realizing
/// `target` up to phase within `eps`. Iterative deepening over all line
/// assignments; ties at the winning depth break toward the lexicographically
/// smallest (gate name, targets) sequence. Supports 1 or 2 lines.
inline SynthResult synthesize(const ComplexMatrix& target, int num_lines, double eps,
                              int max_depth) {
    if (num_lines < 1 || num_lines > 2)
        throw ConfigError("synthesize supports 1 or 2 lines, got " + std::to_string(num_lines));
    if (target.dim() != (std::size_t{1} << num_lines))
        throw DimensionError("synthesize: target dim " + std::to_string(target.dim()) +
                             " does not match " + std::to_string(num_lines) + " lines");
    if (!target.all_finite() || !is_unitary(target))
        throw ValidationError("synthesize: target is not unitary");
    if (eps <= 0.0) throw ConfigError("synthesize: eps must be positive");
    if (max_depth < 0) throw ConfigError("synthesize: max_depth must be nonnegative");

    const auto alphabet = detail::synth_alphabet(num_lines);
    constexpr std::size_t kVisitedCap = 4'000'000;

    SynthResult result;
    result.best.distance = std::numeric_limits<double>::infinity();

    std::vector<int> path;
    std::unordered_set<detail::ProductKey, detail::ProductKeyHash> visited;

    // Depth-first over sequences of length exactly `depth`, in sorted step
    // order so the first hit is the lexicographic minimum.
    auto dfs = [&](auto&& self, const ComplexMatrix& product, int used, int depth) -> bool {
        if (used == depth) {
            const PhaseDistance d = distance_up_to_phase(target, product);
            if (d.distance < result.best.distance) result.best = d;
            return d.distance < eps;
        }
        for (std::size_t i = 0; i < alphabet.size(); ++i) {
            ComplexMatrix next = alphabet[i].matrix * product;
            if (visited.size() < kVisitedCap &&
                !visited.insert(detail::product_key(next, used + 1)).second)
                continue;
            path.push_back(static_cast<int>(i));
            if (self(self, next, used + 1, depth)) return true;
            path.pop_back();
        }
        return false;
    };

    const ComplexMatrix start = ComplexMatrix::identity(target.dim());
    for (int depth = 0; depth <= max_depth; ++depth) {
        visited.clear();
        path.clear();
        if (dfs(dfs, start, 0, depth)) {
            GateSequence seq;
            seq.num_lines = num_lines;
            for (int idx : path) seq.steps.push_back(alphabet[static_cast<std::size_t>(idx)].step);
            result.sequence = std::move(seq);
            return result;
        }
    }
    return result;
}

} // namespace qfc
