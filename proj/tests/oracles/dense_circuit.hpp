#pragma once

// Dense 32x32 matrix-product model of the 5-qubit turn-critic circuit.
// Built from Kronecker products and permutation matrices only, sharing no
// code with the statevector simulator.

#include <array>
#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

using cd = std::complex<double>;
inline constexpr int kQubits = 5;
inline constexpr int kN = 32;

struct Matrix {
    std::vector<cd> m = std::vector<cd>(kN * kN, 0.0);
    cd& operator()(int r, int c) { return m[r * kN + c]; }
    cd operator()(int r, int c) const { return m[r * kN + c]; }

    static Matrix identity() {
        Matrix I;
        for (int i = 0; i < kN; ++i) I(i, i) = 1.0;
        return I;
    }
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix out;
    for (int r = 0; r < kN; ++r)
        for (int k = 0; k < kN; ++k) {
            const cd v = a(r, k);
            if (v == cd{}) continue;
            for (int c = 0; c < kN; ++c) out(r, c) += v * b(k, c);
        }
    return out;
}

inline std::vector<cd> operator*(const Matrix& a, const std::vector<cd>& v) {
    std::vector<cd> out(kN, 0.0);
    for (int r = 0; r < kN; ++r)
        for (int c = 0; c < kN; ++c) out[r] += a(r, c) * v[c];
    return out;
}

using M2 = std::array<std::array<cd, 2>, 2>;

inline M2 ry(double t) {
    return {{{std::cos(t / 2), -std::sin(t / 2)}, {std::sin(t / 2), std::cos(t / 2)}}};
}
inline M2 rz(double t) {
    return {{{std::polar(1.0, -t / 2), 0.0}, {0.0, std::polar(1.0, t / 2)}}};
}

// I (x) ... (x) g (x) ... (x) I with wire 0 as the leftmost factor.
inline Matrix lift(const M2& g, int wire) {
    std::vector<cd> acc{1.0};
    int dim = 1;
    for (int w = 0; w < kQubits; ++w) {
        const M2 f = w == wire ? g : M2{{{1.0, 0.0}, {0.0, 1.0}}};
        std::vector<cd> next(static_cast<std::size_t>(dim * 2 * dim * 2), 0.0);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c)
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        next[(r * 2 + i) * dim * 2 + (c * 2 + j)] = acc[r * dim + c] * f[i][j];
        acc = std::move(next);
        dim *= 2;
    }
    Matrix out;
    out.m = acc;
    return out;
}

inline int bit_of(int index, int wire) { return (index >> (kQubits - 1 - wire)) & 1; }

inline Matrix cnot(int control, int target) {
    Matrix P;
    for (int i = 0; i < kN; ++i) {
        const int j = bit_of(i, control) ? i ^ (1 << (kQubits - 1 - target)) : i;
        P(j, i) = 1.0;
    }
    return P;
}

// RZ(omega) RY(theta) RZ(phi) as three lifted matrices.
inline Matrix rot(int wire, double phi, double theta, double omega) {
    return lift(rz(omega), wire) * (lift(ry(theta), wire) * lift(rz(phi), wire));
}

// |q> (x) |d> with q on wires 0-2 and d on wires 3-4, each L2-normalised.
inline std::vector<cd> product_state(const std::array<double, 8>& q, const std::array<double, 4>& d) {
    double nq = 0, nd = 0;
    for (double v : q) nq += v * v;
    for (double v : d) nd += v * v;
    std::vector<cd> s(kN);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 4; ++j) s[i * 4 + j] = q[i] / std::sqrt(nq) * d[j] / std::sqrt(nd);
    return s;
}

using Layer = std::array<std::array<double, 3>, kQubits>;

// Full circuit unitary after encoding: feature RY on wires 3 and 4, then per
// layer rotations on every wire and the chain 0->1->2->3->4.
inline Matrix circuit_unitary(double turn_feat, const std::vector<Layer>& layers) {
    const double pi = std::acos(-1.0);
    Matrix U = lift(ry(pi * turn_feat), 4) * lift(ry(pi * turn_feat), 3);
    for (const Layer& L : layers) {
        for (int w = 0; w < kQubits; ++w) U = rot(w, L[w][0], L[w][1], L[w][2]) * U;
        for (int w = 0; w + 1 < kQubits; ++w) U = cnot(w, w + 1) * U;
    }
    return U;
}

inline double z_expectation(const std::vector<cd>& s, int wire) {
    double e = 0;
    for (int i = 0; i < kN; ++i) e += std::norm(s[i]) * (bit_of(i, wire) ? -1.0 : 1.0);
    return e;
}

}  // namespace oracle
