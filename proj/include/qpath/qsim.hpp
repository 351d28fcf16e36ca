#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace qpath::qsim {

inline constexpr int kNumQubits = 5;
inline constexpr std::size_t kDim = 1u << kNumQubits;

using Amplitude = std::complex<double>;

/// Basis-index bit holding `wire`. Qubit 0 is the most significant bit, so
/// |q0 q1 q2 q3 q4> has index q0*16 + q1*8 + q2*4 + q3*2 + q4.
constexpr std::size_t wire_mask(int wire) noexcept {
    return std::size_t{1} << (kNumQubits - 1 - wire);
}

/// Full statevector of the 5-qubit register.
class StateVector {
public:
    /// |00000>
    StateVector() { amps_[0] = 1.0; }
    explicit StateVector(const std::array<Amplitude, kDim>& amps) : amps_(amps) {}

    const std::array<Amplitude, kDim>& amplitudes() const noexcept { return amps_; }
    std::array<Amplitude, kDim>& amplitudes() noexcept { return amps_; }
    Amplitude operator[](std::size_t i) const noexcept { return amps_[i]; }
    Amplitude& operator[](std::size_t i) noexcept { return amps_[i]; }

    double norm_squared() const noexcept;

private:
    std::array<Amplitude, kDim> amps_{};
};

/// Row-major 2x2 complex matrix.
using Gate2 = std::array<Amplitude, 4>;

Gate2 ry_matrix(double angle) noexcept;
Gate2 rz_matrix(double angle) noexcept;
/// RZ(omega) * RY(theta) * RZ(phi): phi is applied first.
Gate2 rot_matrix(double phi, double theta, double omega) noexcept;

void apply_gate(StateVector& state, int wire, const Gate2& gate);
void apply_ry(StateVector& state, int wire, double angle);
void apply_rz(StateVector& state, int wire, double angle);
void apply_rot(StateVector& state, int wire, double phi, double theta, double omega);
/// Throws Error(SameWire) when control == target.
void apply_cnot(StateVector& state, int control, int target);

/// <Z> on `wire`: probability mass with the wire's bit at 0 minus mass at 1.
double expect_z(const StateVector& state, int wire);

/// Zero-pads `values` to 2^|wires|, L2-normalises, and writes them as the
/// amplitudes of the `wires` subspace (wires[0] is the most significant bit
/// of the value index). The target wires must currently be |0>.
/// Throws Error(ZeroVector) for an all-zero input.
void amplitude_encode(std::span<const double> values, std::span<const int> wires, StateVector& state);

/// Per-layer, per-wire (phi, theta, omega) rotation angles.
struct CircuitParams {
    using Angles = std::array<double, 3>;
    using Layer = std::array<Angles, kNumQubits>;

    std::vector<Layer> thetas;
    std::uint64_t seed = 0;

    int layers() const noexcept { return static_cast<int>(thetas.size()); }

    /// All angles drawn from Uniform[0, 2*pi) with the given seed.
    static CircuitParams random(int layers, std::uint64_t seed);
    static CircuitParams zeros(int layers);

    friend bool operator==(const CircuitParams&, const CircuitParams&) = default;
};

using Measurements = std::array<double, kNumQubits>;

inline constexpr std::array<int, 3> kActionWires{0, 1, 2};
inline constexpr std::array<int, 2> kDensityWires{3, 4};

/// Prepares the turn-critic state: q_row encoded on wires {0,1,2}, d_row
/// (zero-padded to 4) on wires {3,4}, RY(pi * turn_feat) on wires 3 and 4,
/// then per layer a rotation on every wire followed by the CNOT chain
/// 0->1, 1->2, 2->3, 3->4.
StateVector turn_critic_state(std::span<const double, 8> q_row, std::span<const double, 2> d_row,
                              double turn_feat, const CircuitParams& params);

/// <Z_0> ... <Z_4> of turn_critic_state.
Measurements run_turn_critic(std::span<const double, 8> q_row, std::span<const double, 2> d_row,
                             double turn_feat, const CircuitParams& params);

}  // namespace qpath::qsim
