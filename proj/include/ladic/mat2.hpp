#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>

#include "padic.hpp"

namespace ladic {

/// Largest modulus for which four entries pack into one 64-bit word.
inline constexpr u64 max_group_modulus = u64{1} << 16;

/// 2x2 matrix over Z/l^N, entries row-major (m11, m12, m21, m22).
class Mat2 {
public:
    Mat2(const PadicContext& ctx, i64 a, i64 b, i64 c, i64 d)
        : ctx_(ctx), e_{ctx.reduce(a), ctx.reduce(b), ctx.reduce(c), ctx.reduce(d)} {}

    static Mat2 identity(const PadicContext& ctx) { return Mat2(ctx, 1, 0, 0, 1); }
    static Mat2 zero(const PadicContext& ctx) { return Mat2(ctx, 0, 0, 0, 0); }
    static Mat2 scalar(const PadicContext& ctx, u64 lambda) {
        return from_residues(ctx, {lambda, 0, 0, lambda});
    }

    static Mat2 from_residues(const PadicContext& ctx, std::array<u64, 4> r) {
        Mat2 m(ctx, 0, 0, 0, 0);
        for (int i = 0; i < 4; ++i) m.e_[i] = r[i] % ctx.modulus();
        return m;
    }

    /// Internal 16-bit-field packing; sorts exactly like the canonical key.
    static Mat2 from_code(const PadicContext& ctx, u64 code) {
        return from_residues(ctx, {code >> 48, (code >> 32) & 0xffff, (code >> 16) & 0xffff, code & 0xffff});
    }

    /// Canonical key ((m11*M + m12)*M + m21)*M + m22 with M = l^N.
    static Mat2 from_key(const PadicContext& ctx, u64 key) {
        const u64 m = ctx.modulus();
        u64 d = key % m;
        key /= m;
        u64 c = key % m;
        key /= m;
        u64 b = key % m;
        key /= m;
        return from_residues(ctx, {key % m, b, c, d});
    }

    const PadicContext& context() const { return ctx_; }
    u64 operator[](int i) const { return e_[i]; }
    u64 a() const { return e_[0]; }
    u64 b() const { return e_[1]; }
    u64 c() const { return e_[2]; }
    u64 d() const { return e_[3]; }
    const std::array<u64, 4>& residues() const { return e_; }

    u64 code() const { return (e_[0] << 48) | (e_[1] << 32) | (e_[2] << 16) | e_[3]; }
    u64 key() const {
        const u64 m = ctx_.modulus();
        return ((e_[0] * m + e_[1]) * m + e_[2]) * m + e_[3];
    }

    PadicInt entry(int i) const { return PadicInt::from_residue(ctx_, e_[i]); }
    PadicInt trace() const { return PadicInt::from_residue(ctx_, (e_[0] + e_[3]) % ctx_.modulus()); }
    PadicInt det() const { return entry(0) * entry(3) - entry(1) * entry(2); }
    bool invertible() const { return valuation(det()) == 0; }

    Mat2 operator*(const Mat2& o) const {
        check(o);
        const u64 m = ctx_.modulus();
        auto mm = [m](u64 x, u64 y) { return mul_mod(x, y, m); };
        return from_residues(ctx_, {(mm(e_[0], o.e_[0]) + mm(e_[1], o.e_[2])) % m,
                                    (mm(e_[0], o.e_[1]) + mm(e_[1], o.e_[3])) % m,
                                    (mm(e_[2], o.e_[0]) + mm(e_[3], o.e_[2])) % m,
                                    (mm(e_[2], o.e_[1]) + mm(e_[3], o.e_[3])) % m});
    }
    Mat2 operator+(const Mat2& o) const {
        check(o);
        const u64 m = ctx_.modulus();
        return from_residues(ctx_, {(e_[0] + o.e_[0]) % m, (e_[1] + o.e_[1]) % m,
                                    (e_[2] + o.e_[2]) % m, (e_[3] + o.e_[3]) % m});
    }
    Mat2 operator-() const {
        const u64 m = ctx_.modulus();
        return from_residues(ctx_, {m - e_[0], m - e_[1], m - e_[2], m - e_[3]});
    }
    Mat2 operator-(const Mat2& o) const { return *this + (-o); }
    Mat2 scaled(const PadicInt& k) const {
        const u64 m = ctx_.modulus();
        const u64 s = k.residue();
        return from_residues(ctx_, {mul_mod(e_[0], s, m), mul_mod(e_[1], s, m),
                                    mul_mod(e_[2], s, m), mul_mod(e_[3], s, m)});
    }
    Mat2 scaled(u64 s) const { return scaled(PadicInt::from_residue(ctx_, s)); }

    Mat2 inverse() const {
        PadicInt inv = unit_inverse(det());
        const u64 m = ctx_.modulus();
        return Mat2::from_residues(ctx_, {e_[3], m - e_[1], m - e_[2], e_[0]}).scaled(inv);
    }

    /// Entry-wise reduction to precision n <= N.
    Mat2 reduced(int n) const {
        PadicContext c = ctx_.with_precision(n);
        return from_residues(c, e_);
    }

    bool is_zero() const { return e_[0] == 0 && e_[1] == 0 && e_[2] == 0 && e_[3] == 0; }
    bool is_scalar() const { return e_[1] == 0 && e_[2] == 0 && e_[0] == e_[3]; }

    /// Smallest valuation over the entries; bottom for the zero matrix.
    Valuation min_valuation() const {
        Valuation best;
        for (u64 x : e_) {
            Valuation v = valuation_of(x, ctx_.prime());
            if (v && (!best || *v < *best)) best = v;
        }
        return best;
    }

    bool operator==(const Mat2& o) const { return ctx_ == o.ctx_ && e_ == o.e_; }
    bool operator<(const Mat2& o) const { return code() < o.code(); }

    /// Row-major entries as signed representatives in (-M/2, M/2].
    std::string to_string() const {
        const i64 m = static_cast<i64>(ctx_.modulus());
        auto s = [m](u64 x) {
            i64 v = static_cast<i64>(x);
            return std::to_string(v > m / 2 ? v - m : v);
        };
        return "[[" + s(e_[0]) + "," + s(e_[1]) + "],[" + s(e_[2]) + "," + s(e_[3]) + "]]";
    }

private:
    void check(const Mat2& o) const {
        if (!(ctx_ == o.ctx_)) throw PreconditionViolated("mixed contexts");
    }

    PadicContext ctx_;
    std::array<u64, 4> e_;
};

inline std::ostream& operator<<(std::ostream& os, const Mat2& m) { return os << m.to_string(); }

inline Mat2 commutator(const Mat2& g, const Mat2& h) { return g * h * g.inverse() * h.inverse(); }
inline Mat2 bracket(const Mat2& x, const Mat2& y) { return x * y - y * x; }

// Generators of the congruence subgroups.
inline Mat2 lower_unipotent(const PadicContext& ctx, i64 a) { return Mat2(ctx, 1, 0, a, 1); }
inline Mat2 upper_unipotent(const PadicContext& ctx, i64 b) { return Mat2(ctx, 1, b, 0, 1); }
inline Mat2 diagonal_unit(const PadicContext& ctx, i64 c) {
    PadicInt u(ctx, 1 + c);
    return Mat2::from_residues(ctx, {u.residue(), 0, 0, unit_inverse(u).residue()});
}

/// Theta(g) = g - tr(g)/2 * Id.
///
/// For l = 2 the trace must be even; tr/2 is taken as (canonical trace)/2,
/// so the diagonal is only meaningful modulo 2^(N-1).
inline Mat2 theta(const Mat2& g) {
    const PadicContext& ctx = g.context();
    const u64 m = ctx.modulus();
    u64 tr = g.trace().residue();
    u64 half;
    if (ctx.prime() == 2) {
        if (tr % 2 != 0) throw OddTrace();
        half = tr / 2;
    } else {
        half = mul_mod(tr, inverse_mod(2, m), m);
    }
    return Mat2::from_residues(ctx, {(g.a() + m - half) % m, g.b(), g.c(), (g.d() + m - half) % m});
}

/// Theta^{-1}(x) = x + sqrt(1 + tr(x^2)/2) * Id for traceless x.
inline Mat2 theta_inverse(const Mat2& x) {
    const PadicContext& ctx = x.context();
    const u64 m = ctx.modulus();
    if (x.trace().residue() != 0) throw PreconditionViolated("theta_inverse: x is not traceless");
    const Valuation vx = x.min_valuation();
    if (ctx.prime() == 2 && vx && *vx < 2)
        throw PreconditionViolated("theta_inverse: x must be 0 mod 4");
    // tr(x^2)/2 = a^2 + bc for x = [[a, b], [c, -a]].
    PadicInt half_tr = x.entry(0) * x.entry(0) + x.entry(1) * x.entry(2);
    const Valuation vh = valuation(half_tr);
    if (vh && *vh < 1)
        throw PreconditionViolated("theta_inverse: tr(x^2)/2 is a unit");
    u64 lam = sqrt_one_plus(half_tr).residue();
    return Mat2::from_residues(ctx, {(x.a() + lam) % m, x.b(), x.c(), (x.d() + lam) % m});
}

} // namespace ladic
