#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "errors.hpp"

namespace ladic {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

/// Valuation of an element of Z/l^N. An empty value is "bottom": the element
/// is zero at this precision. It is never folded into the integer N.
using Valuation = std::optional<int>;

inline bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline u64 mul_mod(u64 a, u64 b, u64 m) {
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

inline u64 pow_mod(u64 base, u64 e, u64 m) {
    u64 r = 1 % m;
    base %= m;
    while (e) {
        if (e & 1) r = mul_mod(r, base, m);
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    return r;
}

/// Precision data shared by every residue: the prime l, the precision N and
/// the number of guard digits available to iterative routines.
class PadicContext {
public:
    static constexpr int default_guard = 8;

    PadicContext(u64 prime, int precision, int guard = default_guard)
        : prime_(prime), precision_(precision), guard_(guard) {
        if (!is_prime(prime)) throw InvalidParams("l = " + std::to_string(prime) + " is not prime");
        if (precision < 1) throw InvalidParams("precision must be >= 1");
        if (guard < 0) throw InvalidParams("guard must be >= 0");
        // l^(N+guard) must stay below 2^62 when l = 2 (the only case that
        // lifts beyond N); odd primes only ever need l^N.
        int needed = prime == 2 ? precision + guard : precision;
        u128 m = 1;
        for (int i = 0; i < needed; ++i) {
            m *= prime;
            if (m > (static_cast<u128>(1) << 62))
                throw InvalidParams("l^N too large for 64-bit residues");
        }
        modulus_ = 1;
        for (int i = 0; i < precision; ++i) modulus_ *= prime;
    }

    u64 prime() const { return prime_; }
    int precision() const { return precision_; }
    int guard() const { return guard_; }
    u64 modulus() const { return modulus_; }
    /// v_l(2): 1 for l = 2, else 0.
    int v2() const { return prime_ == 2 ? 1 : 0; }

    /// l^k for 0 <= k <= N.
    u64 power(int k) const {
        u64 r = 1;
        for (int i = 0; i < k; ++i) r *= prime_;
        return r;
    }

    PadicContext with_precision(int n) const { return PadicContext(prime_, n, guard_); }

    u64 reduce(i64 value) const {
        i64 m = static_cast<i64>(modulus_);
        i64 r = value % m;
        return static_cast<u64>(r < 0 ? r + m : r);
    }

    bool operator==(const PadicContext& o) const {
        return prime_ == o.prime_ && precision_ == o.precision_;
    }

private:
    u64 prime_;
    int precision_;
    int guard_;
    u64 modulus_;
};

/// Element of Z/l^N held by its canonical residue in [0, l^N).
class PadicInt {
public:
    PadicInt(const PadicContext& ctx, i64 value) : ctx_(ctx), r_(ctx.reduce(value)) {}

    static PadicInt from_residue(const PadicContext& ctx, u64 residue) {
        PadicInt x(ctx, 0);
        x.r_ = residue % ctx.modulus();
        return x;
    }

    const PadicContext& context() const { return ctx_; }
    u64 residue() const { return r_; }

    PadicInt operator+(const PadicInt& o) const {
        check(o);
        return from_residue(ctx_, (r_ + o.r_) % ctx_.modulus());
    }
    PadicInt operator-(const PadicInt& o) const {
        check(o);
        return from_residue(ctx_, (r_ + ctx_.modulus() - o.r_) % ctx_.modulus());
    }
    PadicInt operator-() const { return from_residue(ctx_, (ctx_.modulus() - r_) % ctx_.modulus()); }
    PadicInt operator*(const PadicInt& o) const {
        check(o);
        return from_residue(ctx_, mul_mod(r_, o.r_, ctx_.modulus()));
    }

    bool operator==(const PadicInt& o) const { return ctx_ == o.ctx_ && r_ == o.r_; }
    bool is_zero() const { return r_ == 0; }

private:
    void check(const PadicInt& o) const {
        if (!(ctx_ == o.ctx_)) throw PreconditionViolated("mixed contexts");
    }

    PadicContext ctx_;
    u64 r_;
};

inline Valuation valuation_of(u64 residue, u64 prime) {
    if (residue == 0) return std::nullopt;
    int v = 0;
    while (residue % prime == 0) {
        residue /= prime;
        ++v;
    }
    return v;
}

inline Valuation valuation(const PadicInt& x) {
    return valuation_of(x.residue(), x.context().prime());
}

/// Valuation with bottom read as +infinity, handy for ">= k" tests.
inline int valuation_or(const Valuation& v, int bottom) { return v ? *v : bottom; }

/// Inverse of a residue coprime to m, via the extended Euclidean algorithm.
inline u64 inverse_mod(u64 a, u64 m) {
    i64 t = 0, new_t = 1;
    i64 r = static_cast<i64>(m), new_r = static_cast<i64>(a % m);
    while (new_r != 0) {
        i64 q = r / new_r;
        i64 tmp = t - q * new_t;
        t = new_t;
        new_t = tmp;
        tmp = r - q * new_r;
        r = new_r;
        new_r = tmp;
    }
    if (r != 1) throw NotAUnit();
    if (t < 0) t += static_cast<i64>(m);
    return static_cast<u64>(t);
}

inline PadicInt unit_inverse(const PadicInt& x) {
    if (valuation(x) != 0) throw NotAUnit();
    return PadicInt::from_residue(x.context(), inverse_mod(x.residue(), x.context().modulus()));
}

/// The root of lambda^2 = 1 + x with lambda = 1 mod l (odd l) or 1 mod 4 (l = 2).
///
/// The residue of x is read as an exact l-adic integer; the result is that
/// integer's root reduced mod l^N. For l = 2 only the class mod 2^(N-1) is
/// independent of the lift of x.
inline PadicInt sqrt_one_plus(const PadicInt& x) {
    const PadicContext& ctx = x.context();
    const u64 p = ctx.prime();
    const u64 m = ctx.modulus();
    int need = p == 2 ? 3 : 1;
    // Bottom means x = 0 at this precision, which satisfies any valuation bound.
    const Valuation vx = valuation(x);
    if (vx && *vx < need) throw PreconditionViolated("sqrt_one_plus: valuation of x too small");

    if (p != 2) {
        // Newton: lambda <- (lambda + y / lambda) / 2.
        const u64 y = (1 + x.residue()) % m;
        const u64 half = inverse_mod(2, m);
        u64 lam = 1;
        for (;;) {
            u64 next = mul_mod((lam + mul_mod(y, inverse_mod(lam, m), m)) % m, half, m);
            if (next == lam) break;
            lam = next;
        }
        return PadicInt::from_residue(ctx, lam);
    }

    // l = 2: lift bit by bit modulo 2^W with W = N + guard (at least N + 1),
    // then reduce. Both roots of a pair differ by 2^(W-1), so the class mod
    // 2^N is the limit of the binomial series.
    const int w = ctx.precision() + (ctx.guard() > 0 ? ctx.guard() : 1);
    const u64 big = u64{1} << w;
    const u64 y = (1 + x.residue()) & (big - 1);
    u64 lam = 1;
    for (int k = 3; k < w; ++k) {
        u64 mod_next = u64{1} << (k + 1);
        if ((mul_mod(lam, lam, big) - y) % mod_next != 0) lam += u64{1} << (k - 1);
    }
    if (lam % 4 != 1) lam = big - lam;
    return PadicInt::from_residue(ctx, lam % m);
}

namespace detail {

/// Largest k with l^k dividing n (n > 0), plus the cofactor.
inline std::pair<int, u64> split_power(u64 n, u64 p) {
    int k = 0;
    while (n % p == 0) {
        n /= p;
        ++k;
    }
    return {k, n};
}

inline int floor_log(u64 n, u64 p) {
    int k = 0;
    while (n >= p) {
        n /= p;
        ++k;
    }
    return k;
}

} // namespace detail

/// log(1 + x) by its alternating series, each term computed exactly as
/// l^e times a unit so no guard digits are lost.
inline PadicInt log_one_plus(const PadicInt& x) {
    const PadicContext& ctx = x.context();
    const u64 p = ctx.prime();
    const u64 m = ctx.modulus();
    const int n = ctx.precision();
    Valuation vx = valuation(x);
    int need = p == 2 ? 2 : 1;
    if (vx && *vx < need) throw PreconditionViolated("log_one_plus: valuation too small");
    if (!vx) return PadicInt(ctx, 0);

    const int v = *vx;
    const u64 w = x.residue() / ctx.power(v);
    u64 sum = 0;
    u64 wpow = 1;
    for (u64 j = 1;; ++j) {
        wpow = mul_mod(wpow, w, m);
        if (static_cast<i64>(j) * v - detail::floor_log(j, p) >= n) break;
        auto [a, unit] = detail::split_power(j, p);
        i64 e = static_cast<i64>(j) * v - a;
        if (e >= n) continue;
        u64 term = mul_mod(mul_mod(ctx.power(static_cast<int>(e)), wpow, m), inverse_mod(unit % m, m), m);
        sum = (j % 2 == 1) ? (sum + term) % m : (sum + m - term) % m;
    }
    return PadicInt::from_residue(ctx, sum);
}

/// exp(y) by its power series; terms y^k/k! are tracked as l^e times a unit.
inline PadicInt exp(const PadicInt& y) {
    const PadicContext& ctx = y.context();
    const u64 p = ctx.prime();
    const u64 m = ctx.modulus();
    const int n = ctx.precision();
    Valuation vy = valuation(y);
    int need = p == 2 ? 2 : 1;
    if (vy && *vy < need) throw PreconditionViolated("exp: valuation too small");
    if (!vy) return PadicInt(ctx, 1);

    const int v = *vy;
    const u64 w = y.residue() / ctx.power(v);
    u64 sum = 1;
    u64 unit = 1;  // unit part of y^k / k!
    i64 e = 0;     // its valuation
    for (u64 k = 1;; ++k) {
        auto [a, cof] = detail::split_power(k, p);
        unit = mul_mod(mul_mod(unit, w, m), inverse_mod(cof % m, m), m);
        e += v - a;
        if (e < n) sum = (sum + mul_mod(ctx.power(static_cast<int>(e)), unit, m)) % m;
        // v(k!) <= (k - 1) / (l - 1), so later terms all vanish once this bound passes N.
        i64 lower = static_cast<i64>(k + 1) * v - static_cast<i64>(k) / static_cast<i64>(p - 1);
        if (lower >= n && e >= n) break;
    }
    return PadicInt::from_residue(ctx, sum);
}

/// u^w = exp(w log u) for u = 1 mod l (odd l) or 1 mod 4 (l = 2).
inline PadicInt pow_padic(const PadicInt& u, const PadicInt& w) {
    const PadicContext& ctx = u.context();
    PadicInt c = u - PadicInt(ctx, 1);
    int need = ctx.prime() == 2 ? 2 : 1;
    const Valuation vc = valuation(c);
    if (vc && *vc < need)
        throw PreconditionViolated("pow_padic: base not congruent to 1");
    return exp(w * log_one_plus(c));
}

} // namespace ladic
