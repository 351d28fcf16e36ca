#include "qpath/qsim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qpath/error.hpp"
#include "qpath/rng.hpp"

namespace qpath::qsim {
namespace {

void check_wire(int wire) {
    if (wire < 0 || wire >= kNumQubits)
        throw Error(ErrorCode::ValidationError, "wire " + std::to_string(wire) + " out of range");
}

Gate2 multiply(const Gate2& a, const Gate2& b) noexcept {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

}  // namespace

double StateVector::norm_squared() const noexcept {
    double s = 0.0;
    for (const Amplitude& a : amps_) s += std::norm(a);
    return s;
}

Gate2 ry_matrix(double angle) noexcept {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    return {Amplitude{c, 0.0}, Amplitude{-s, 0.0}, Amplitude{s, 0.0}, Amplitude{c, 0.0}};
}

Gate2 rz_matrix(double angle) noexcept {
    const Amplitude lo = std::polar(1.0, -angle / 2.0);
    const Amplitude hi = std::polar(1.0, angle / 2.0);
    return {lo, Amplitude{}, Amplitude{}, hi};
}

Gate2 rot_matrix(double phi, double theta, double omega) noexcept {
    return multiply(rz_matrix(omega), multiply(ry_matrix(theta), rz_matrix(phi)));
}

void apply_gate(StateVector& state, int wire, const Gate2& g) {
    check_wire(wire);
    const std::size_t m = wire_mask(wire);
    auto& amps = state.amplitudes();
    for (std::size_t i = 0; i < kDim; ++i) {
        if (i & m) continue;
        const Amplitude a0 = amps[i];
        const Amplitude a1 = amps[i | m];
        amps[i] = g[0] * a0 + g[1] * a1;
        amps[i | m] = g[2] * a0 + g[3] * a1;
    }
}

void apply_ry(StateVector& state, int wire, double angle) { apply_gate(state, wire, ry_matrix(angle)); }

void apply_rz(StateVector& state, int wire, double angle) { apply_gate(state, wire, rz_matrix(angle)); }

void apply_rot(StateVector& state, int wire, double phi, double theta, double omega) {
    apply_gate(state, wire, rot_matrix(phi, theta, omega));
}

void apply_cnot(StateVector& state, int control, int target) {
    check_wire(control);
    check_wire(target);
    if (control == target)
        throw Error(ErrorCode::SameWire, "CNOT control and target are both wire " + std::to_string(control));
    const std::size_t cm = wire_mask(control);
    const std::size_t tm = wire_mask(target);
    auto& amps = state.amplitudes();
    for (std::size_t i = 0; i < kDim; ++i)
        if ((i & cm) && !(i & tm)) std::swap(amps[i], amps[i | tm]);
}

double expect_z(const StateVector& state, int wire) {
    check_wire(wire);
    const std::size_t m = wire_mask(wire);
    double e = 0.0;
    for (std::size_t i = 0; i < kDim; ++i) {
        const double p = std::norm(state[i]);
        e += (i & m) ? -p : p;
    }
    return e;
}

void amplitude_encode(std::span<const double> values, std::span<const int> wires, StateVector& state) {
    if (wires.empty()) throw Error(ErrorCode::ValidationError, "amplitude_encode needs at least one wire");
    std::size_t target_mask = 0;
    for (int w : wires) {
        check_wire(w);
        if (target_mask & wire_mask(w))
            throw Error(ErrorCode::ValidationError, "duplicate wire " + std::to_string(w));
        target_mask |= wire_mask(w);
    }
    const std::size_t span = std::size_t{1} << wires.size();
    if (values.size() > span)
        throw Error(ErrorCode::ValidationError, std::to_string(values.size()) + " values do not fit on " +
                                                    std::to_string(wires.size()) + " wires");
    double norm2 = 0.0;
    for (double v : values) norm2 += v * v;
    if (!(norm2 > 0.0)) throw Error(ErrorCode::ZeroVector, "cannot amplitude-encode an all-zero vector");
    const double inv = 1.0 / std::sqrt(norm2);

    auto& amps = state.amplitudes();
    for (std::size_t i = 0; i < kDim; ++i)
        if ((i & target_mask) && std::abs(amps[i]) > 1e-12)
            throw Error(ErrorCode::ValidationError, "amplitude_encode target wires are not in |0>");

    // Offset of value index k inside the full basis index.
    std::vector<std::size_t> offset(span, 0);
    for (std::size_t k = 0; k < span; ++k)
        for (std::size_t b = 0; b < wires.size(); ++b)
            if (k & (std::size_t{1} << (wires.size() - 1 - b))) offset[k] |= wire_mask(wires[b]);

    std::array<Amplitude, kDim> out{};
    for (std::size_t i = 0; i < kDim; ++i) {
        if (i & target_mask) continue;
        for (std::size_t k = 0; k < values.size(); ++k) out[i | offset[k]] = amps[i] * (values[k] * inv);
    }
    amps = out;
}

CircuitParams CircuitParams::random(int layers, std::uint64_t seed) {
    CircuitParams p;
    p.seed = seed;
    p.thetas.resize(static_cast<std::size_t>(std::max(layers, 0)));
    Rng rng(seed);
    for (auto& layer : p.thetas)
        for (auto& angles : layer)
            for (double& a : angles) a = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return p;
}

CircuitParams CircuitParams::zeros(int layers) {
    CircuitParams p;
    p.thetas.resize(static_cast<std::size_t>(std::max(layers, 0)));
    for (auto& layer : p.thetas)
        for (auto& angles : layer) angles = {0.0, 0.0, 0.0};
    return p;
}

StateVector turn_critic_state(std::span<const double, 8> q_row, std::span<const double, 2> d_row,
                              double turn_feat, const CircuitParams& params) {
    StateVector state;
    amplitude_encode(q_row, kActionWires, state);
    const std::array<double, 4> padded{d_row[0], d_row[1], 0.0, 0.0};
    amplitude_encode(padded, kDensityWires, state);
    const double angle = std::numbers::pi * turn_feat;
    apply_ry(state, 3, angle);
    apply_ry(state, 4, angle);
    for (const auto& layer : params.thetas) {
        for (int w = 0; w < kNumQubits; ++w) {
            const auto& [phi, theta, omega] = layer[static_cast<std::size_t>(w)];
            apply_rot(state, w, phi, theta, omega);
        }
        for (int w = 0; w + 1 < kNumQubits; ++w) apply_cnot(state, w, w + 1);
    }
    return state;
}

Measurements run_turn_critic(std::span<const double, 8> q_row, std::span<const double, 2> d_row,
                             double turn_feat, const CircuitParams& params) {
    const StateVector state = turn_critic_state(q_row, d_row, turn_feat, params);
    Measurements m{};
    for (int w = 0; w < kNumQubits; ++w) m[static_cast<std::size_t>(w)] = expect_z(state, w);
    return m;
}

}  // namespace qpath::qsim
