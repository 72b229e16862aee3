#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <string>

#include "errors.hpp"

namespace ladic {

enum class Rounding { Up, Down, Nearest };

inline constexpr int default_digits = 64;

namespace detail {

inline mpz_class pow10(long e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), 10, static_cast<unsigned long>(e));
    return r;
}

/// 10^e as a rational, e of any sign.
inline mpq_class pow10q(long e) {
    if (e >= 0) return mpq_class(pow10(e));
    mpq_class q(mpz_class(1), pow10(-e));
    return q;
}

/// floor(log10 |q|) for q != 0.
inline long decimal_exponent(const mpq_class& q) {
    mpq_class a = abs(q);
    long e = static_cast<long>(mpz_sizeinbase(a.get_num_mpz_t(), 10)) -
             static_cast<long>(mpz_sizeinbase(a.get_den_mpz_t(), 10));
    while (a >= pow10q(e + 1)) ++e;
    while (a < pow10q(e)) --e;
    return e;
}

/// q rounded to `digits` significant decimal digits in the given direction.
inline mpq_class round_sig(const mpq_class& q, int digits, Rounding r) {
    if (q == 0) return q;
    const long e = decimal_exponent(q);
    const mpq_class scale = pow10q(e - digits + 1);
    mpq_class t = q / scale;
    mpz_class n;
    if (r == Rounding::Up) mpz_cdiv_q(n.get_mpz_t(), t.get_num_mpz_t(), t.get_den_mpz_t());
    else if (r == Rounding::Down) mpz_fdiv_q(n.get_mpz_t(), t.get_num_mpz_t(), t.get_den_mpz_t());
    else {
        t += mpq_class(1, 2);
        mpz_fdiv_q(n.get_mpz_t(), t.get_num_mpz_t(), t.get_den_mpz_t());
    }
    mpq_class out = mpq_class(n) * scale;
    out.canonicalize();
    return out;
}

inline mpfr_rnd_t mode(Rounding r) {
    switch (r) {
    case Rounding::Up: return MPFR_RNDU;
    case Rounding::Down: return MPFR_RNDD;
    default: return MPFR_RNDN;
    }
}

inline mpfr_prec_t bits_for(int digits) { return static_cast<mpfr_prec_t>(digits * 3.33) + 32; }

/// RAII MPFR scalar.
class Real {
public:
    explicit Real(int digits) { mpfr_init2(v_, bits_for(digits)); }
    ~Real() { mpfr_clear(v_); }
    Real(const Real&) = delete;
    Real& operator=(const Real&) = delete;
    mpfr_ptr get() { return v_; }

    mpq_class to_q() const {
        if (!mpfr_number_p(v_)) throw MagnitudeOverflow("floating-point overflow in bound evaluation");
        mpq_class q;
        mpfr_get_q(q.get_mpq_t(), v_);
        return q;
    }

private:
    mpfr_t v_;
};

/// Applies an increasing MPFR function to a rational with outward rounding,
/// then rounds the result to `digits` significant digits.
template <class F>
inline mpq_class monotone(const mpq_class& x, int digits, Rounding r, F f) {
    Real a(digits), b(digits);
    mpfr_set_q(a.get(), x.get_mpq_t(), mode(r));
    mpfr_clear_flags();
    f(b.get(), a.get(), mode(r));
    if (mpfr_overflow_p()) throw MagnitudeOverflow("exponent range exceeded");
    return round_sig(b.to_q(), digits, r);
}

inline bool is_power_of_ten(const mpq_class& x, long& e) {
    if (x <= 0) return false;
    e = decimal_exponent(x);
    return x == pow10q(e);
}

} // namespace detail

/// Outward-rounded elementary functions on rationals.
namespace directed {

inline mpq_class log10(const mpq_class& x, int digits, Rounding r) {
    if (x <= 0) throw PreconditionViolated("log10 of a non-positive number");
    long e;
    if (detail::is_power_of_ten(x, e)) return mpq_class(e);
    return detail::monotone(x, digits, r, [](mpfr_ptr o, mpfr_srcptr i, mpfr_rnd_t m) { mpfr_log10(o, i, m); });
}

inline mpq_class ln(const mpq_class& x, int digits, Rounding r) {
    if (x <= 0) throw PreconditionViolated("ln of a non-positive number");
    if (x == 1) return 0;
    return detail::monotone(x, digits, r, [](mpfr_ptr o, mpfr_srcptr i, mpfr_rnd_t m) { mpfr_log(o, i, m); });
}

/// 10^x.
inline mpq_class exp10(const mpq_class& x, int digits, Rounding r) {
    if (x.get_den() == 1 && x >= 0 && x < 100000) return mpq_class(detail::pow10(x.get_num().get_si()));
    return detail::monotone(x, digits, r, [](mpfr_ptr o, mpfr_srcptr i, mpfr_rnd_t m) { mpfr_exp10(o, i, m); });
}

inline mpq_class e(int digits, Rounding r) {
    detail::Real one(digits), out(digits);
    mpfr_set_ui(one.get(), 1, MPFR_RNDN);
    mpfr_exp(out.get(), one.get(), detail::mode(r));
    return detail::round_sig(out.to_q(), digits, r);
}

inline mpq_class pi(int digits, Rounding r) {
    detail::Real out(digits);
    mpfr_const_pi(out.get(), detail::mode(r));
    return detail::round_sig(out.to_q(), digits, r);
}

inline mpq_class ln10(int digits, Rounding r) { return ln(10, digits, r); }

/// log10(e) = 1 / ln 10; the rounding of ln 10 is reversed.
inline mpq_class log10_e(int digits, Rounding r) {
    const Rounding inner = r == Rounding::Up ? Rounding::Down : r == Rounding::Down ? Rounding::Up : r;
    detail::Real ten(digits + 8), l(digits + 8);
    mpfr_set_ui(ten.get(), 10, MPFR_RNDN);
    mpfr_log(l.get(), ten.get(), detail::mode(inner));
    mpfr_ui_div(l.get(), 1, l.get(), detail::mode(r));
    return detail::round_sig(l.to_q(), digits, r);
}

} // namespace directed

/// A positive real stored through its log10, an exact rational obtained by
/// directed rounding. Products and powers act exactly on the logarithm.
class LogMagnitude {
public:
    LogMagnitude() = default;
    LogMagnitude(mpq_class log10, int digits = default_digits, Rounding r = Rounding::Up)
        : log10_(std::move(log10)), digits_(digits), rounding_(r) {
        log10_.canonicalize();
    }

    static LogMagnitude one(int digits = default_digits) { return LogMagnitude(0, digits); }

    /// The integer or rational n, with its log rounded in direction r.
    static LogMagnitude of(const mpq_class& n, int digits = default_digits, Rounding r = Rounding::Up) {
        return LogMagnitude(directed::log10(n, digits, r), digits, r);
    }

    const mpq_class& log10() const { return log10_; }
    int digits() const { return digits_; }
    Rounding rounding() const { return rounding_; }

    LogMagnitude operator*(const LogMagnitude& o) const { return LogMagnitude(log10_ + o.log10_, digits_, rounding_); }
    LogMagnitude operator/(const LogMagnitude& o) const { return LogMagnitude(log10_ - o.log10_, digits_, rounding_); }
    LogMagnitude pow(const mpq_class& k) const { return LogMagnitude(log10_ * k, digits_, rounding_); }

    /// Sum of magnitudes: max + log10(1 + 10^(min - max)), rounded in this direction.
    LogMagnitude operator+(const LogMagnitude& o) const {
        const mpq_class& hi = log10_ >= o.log10_ ? log10_ : o.log10_;
        const mpq_class& lo = log10_ >= o.log10_ ? o.log10_ : log10_;
        const mpq_class gap = lo - hi;
        // Below 10^-(digits+2) the correction is smaller than the rounding grid.
        if (gap < -(digits_ + 2)) {
            const mpq_class bump = rounding_ == Rounding::Up ? detail::pow10q(-(digits_ + 2)) : mpq_class(0);
            return LogMagnitude(detail::round_sig(hi + bump, digits_, rounding_), digits_, rounding_);
        }
        mpq_class t = 1 + directed::exp10(gap, digits_ + 4, rounding_);
        return LogMagnitude(detail::round_sig(hi + directed::log10(t, digits_ + 4, rounding_), digits_, rounding_),
                            digits_, rounding_);
    }

    /// The log rounded to the digit budget in this magnitude's direction.
    LogMagnitude rounded() const {
        return LogMagnitude(detail::round_sig(log10_, digits_, rounding_), digits_, rounding_);
    }

    bool operator==(const LogMagnitude& o) const { return log10_ == o.log10_; }
    auto operator<=>(const LogMagnitude& o) const {
        const int c = cmp(log10_, o.log10_);
        return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

    /// log10 as a decimal string with `digits` significant digits; scientific
    /// ("1.234e+21482") when the exponent of the log itself is large.
    std::string log10_string() const { return format(log10_, digits_, rounding_); }

    /// The value itself as an integer (ceiling for upward magnitudes); only
    /// while log10 < 10^7.
    mpz_class integer_value() const {
        if (log10_ >= 10000000) throw MagnitudeOverflow("value has more than 10^7 digits");
        const int d = static_cast<int>(log10_.get_d()) + 16;
        mpq_class v = directed::exp10(log10_, std::max(d, digits_), rounding_);
        mpz_class n;
        if (rounding_ == Rounding::Down) mpz_fdiv_q(n.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
        else mpz_cdiv_q(n.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
        return n;
    }

    static std::string format(const mpq_class& q, int digits, Rounding r) {
        if (q == 0) return "0";
        const mpq_class rq = detail::round_sig(q, digits, r);
        const long e = detail::decimal_exponent(rq);
        mpq_class t = abs(rq) / detail::pow10q(e - digits + 1);
        std::string s = mpz_class(t.get_num() / t.get_den()).get_str();
        while (s.size() > 1 && s.back() == '0') s.pop_back();
        std::string out = rq < 0 ? "-" : "";
        if (e >= 20 || e < -6) {
            out += s.substr(0, 1);
            if (s.size() > 1) out += "." + s.substr(1);
            return out + "e" + (e >= 0 ? "+" : "-") + std::to_string(e >= 0 ? e : -e);
        }
        if (e >= 0) {
            if (static_cast<long>(s.size()) <= e + 1) return out + s + std::string(e + 1 - s.size(), '0');
            return out + s.substr(0, e + 1) + "." + s.substr(e + 1);
        }
        return out + "0." + std::string(-e - 1, '0') + s;
    }

private:
    mpq_class log10_ = 0;
    int digits_ = default_digits;
    Rounding rounding_ = Rounding::Up;
};

// ---------------------------------------------------------------------------
// Bound formulas. All logs inside formulas are natural logs.

struct CurveParams {
    std::uint64_t degree = 1;   // [K:Q]
    mpq_class height = 1;       // h(E), any sign
    int dim = 1;                // g
};

inline void check_params(const CurveParams& p) {
    if (p.degree < 1) throw InvalidParams("degree must be at least 1");
    if (p.dim < 1) throw InvalidParams("dimension must be at least 1");
}

inline std::uint64_t alpha(int g) {
    if (g < 1) throw InvalidParams("alpha needs g >= 1");
    const std::uint64_t gg = static_cast<std::uint64_t>(g);
    return 1024 * gg * gg * gg;
}

enum class IsogenyVariant { General, Elliptic, Power };
enum class B0Variant { General, Elliptic, ESquare };
enum class AdelicVariant { Composed, Gamma12, Gamma34 };

namespace detail {

inline mpq_class log10_up(const mpq_class& x, int digits) { return directed::log10(x, digits, Rounding::Up); }

/// max(h, ln d, 1), rounded up.
inline mpq_class height_term(const CurveParams& p, int digits) {
    mpq_class m = 1;
    const mpq_class ld = directed::ln(mpq_class(p.degree), digits, Rounding::Up);
    if (ld > m) m = ld;
    if (p.height > m) m = p.height;
    return m;
}

/// ln Y for the variant, where Y is (d(1+ln d)^2)^alpha, (d(1+ln d))^2 or
/// (d(1+ln d))^4. Kept as a natural log so the exponent 1 + ln Y is exact.
inline mpq_class masser_ln_y(const CurveParams& p, std::uint64_t d, B0Variant v, int digits) {
    const mpq_class ln_d = directed::ln(mpq_class(d), digits, Rounding::Up);
    const mpq_class ln_1 = directed::ln(1 + ln_d, digits, Rounding::Up);
    switch (v) {
    case B0Variant::General: return mpq_class(alpha(p.dim)) * (ln_d + 2 * ln_1);
    case B0Variant::Elliptic: return 2 * (ln_d + ln_1);
    case B0Variant::ESquare: return 4 * (ln_d + ln_1);
    }
    return 0;
}

} // namespace detail

/// b(d, g, h) and its elliptic and E^N refinements.
inline LogMagnitude isogeny_bound(const CurveParams& p, IsogenyVariant v, int power = 1, int digits = default_digits) {
    check_params(p);
    const mpq_class ld = detail::log10_up(mpq_class(p.degree), digits);
    const mpq_class lm = detail::log10_up(detail::height_term(p, digits), digits);
    mpq_class out;
    switch (v) {
    case IsogenyVariant::General: {
        const std::int64_t g = p.dim;
        out = mpq_class(alpha(p.dim)) *
              (mpq_class(64 * g * g) * detail::log10_up(mpq_class(14 * g), digits) + ld + 2 * lm);
        break;
    }
    case IsogenyVariant::Elliptic: out = 13 + 2 * ld + 2 * lm; break;
    case IsogenyVariant::Power:
        if (power < 1) throw InvalidParams("power variant needs N >= 1");
        out = mpq_class(power) * (13 + 2 * ld + 2 * lm);
        break;
    }
    return LogMagnitude(detail::round_sig(out, digits, Rounding::Up), digits);
}

/// 4^(eY) X^(1 + ln Y) with ln Y given exactly. The lcm bound's constant C
/// is read as Y.
inline LogMagnitude masser_lcm_bound_ln(const LogMagnitude& x, const mpq_class& ln_y, int digits = default_digits) {
    if (x.log10() < 0 || ln_y < 0) throw PreconditionViolated("masser_lcm_bound needs X, Y >= 1");
    const mpq_class y_value =
        ln_y == 0 ? mpq_class(1)
                  : detail::monotone(ln_y, digits, Rounding::Up,
                                     [](mpfr_ptr o, mpfr_srcptr i, mpfr_rnd_t m) { mpfr_exp(o, i, m); });
    const mpq_class first = directed::e(digits, Rounding::Up) * y_value * detail::log10_up(4, digits);
    const mpq_class out = first + (1 + ln_y) * x.log10();
    return LogMagnitude(detail::round_sig(out, digits, Rounding::Up), digits);
}

inline LogMagnitude masser_lcm_bound(const LogMagnitude& x, const LogMagnitude& y, int digits = default_digits) {
    if (y.log10() < 0) throw PreconditionViolated("masser_lcm_bound needs X, Y >= 1");
    const mpq_class ln_y = detail::round_sig(y.log10() * directed::ln10(digits, Rounding::Up), digits, Rounding::Up);
    return masser_lcm_bound_ln(x, ln_y, digits);
}

/// The exponent 1 + ln Y that b0_bound raises X to.
inline mpq_class masser_exponent(const CurveParams& p, std::uint64_t d_ext, B0Variant v, int digits = default_digits) {
    return 1 + detail::masser_ln_y(p, d_ext, v, digits);
}

/// b0(K, A; d_ext) through the lcm bound with the variant's X and Y.
inline LogMagnitude b0_bound(const CurveParams& p, std::uint64_t d_ext, B0Variant v, int digits = default_digits) {
    check_params(p);
    if (d_ext < 1) throw InvalidParams("d_ext must be at least 1");
    LogMagnitude x;
    switch (v) {
    case B0Variant::General: x = isogeny_bound(p, IsogenyVariant::General, 1, digits); break;
    case B0Variant::Elliptic: x = isogeny_bound(p, IsogenyVariant::Elliptic, 1, digits); break;
    case B0Variant::ESquare: x = isogeny_bound(p, IsogenyVariant::Power, 2, digits); break;
    }
    return masser_lcm_bound_ln(x, detail::masser_ln_y(p, d_ext, v, digits), digits);
}

inline LogMagnitude psi_bound(const CurveParams& p, int digits = default_digits) {
    const mpq_class out = detail::log10_up(30, digits) + b0_bound(p, 2, B0Variant::ESquare, digits).log10() +
                          b0_bound(p, 60, B0Variant::Elliptic, digits).log10();
    return LogMagnitude(detail::round_sig(out, digits, Rounding::Up), digits);
}

inline LogMagnitude d_infty_bound(const CurveParams& p, int digits = default_digits) {
    const mpq_class out = 5 * b0_bound(p, 24, B0Variant::Elliptic, digits).log10() +
                          b0_bound(p, 24, B0Variant::ESquare, digits).log10();
    return LogMagnitude(detail::round_sig(out, digits, Rounding::Up), digits);
}

/// D over an extension of degree at most `inflation` (24 for odd l, 192 for l = 2).
inline LogMagnitude d_ell_bound(const CurveParams& p, std::uint64_t inflation, int digits = default_digits) {
    CurveParams q = p;
    q.degree = p.degree * inflation;
    const mpq_class out = 5 * b0_bound(q, 1, B0Variant::Elliptic, digits).log10() +
                          b0_bound(q, 1, B0Variant::ESquare, digits).log10();
    return LogMagnitude(detail::round_sig(out, digits, Rounding::Up), digits);
}

inline LogMagnitude d2_bound(const CurveParams& p, int digits = default_digits) { return d_ell_bound(p, 192, digits); }

inline LogMagnitude adelic_index_bound(const CurveParams& p, AdelicVariant v, int digits = default_digits) {
    check_params(p);
    const mpq_class ld = detail::log10_up(mpq_class(p.degree), digits);
    const mpq_class lm = detail::log10_up(detail::height_term(p, digits), digits);
    const mpq_class log10e = directed::log10_e(digits, Rounding::Up);
    mpq_class out;
    switch (v) {
    case AdelicVariant::Composed:
        // rad(Psi) <= Psi.
        out = ld + 222 * detail::log10_up(2, digits) + 144 * d2_bound(p, digits).log10() +
              36 * psi_bound(p, digits).log10() + 48 * d_infty_bound(p, digits).log10();
        break;
    case AdelicVariant::Gamma12: {
        const mpq_class gamma2(24000000000);
        out = mpq_class(detail::pow10(21483)) * log10e + gamma2 * ld + 2 * gamma2 * lm;
        break;
    }
    case AdelicVariant::Gamma34:
        out = mpq_class(19000000000) * log10e + 12395 * (ld + lm);
        break;
    }
    return LogMagnitude(detail::round_sig(out, digits, Rounding::Up), digits);
}

/// l^33 D^48 for odd l, 2^255 D^144 for l = 2.
inline LogMagnitude index_divisor_bound(std::uint64_t ell, const LogMagnitude& d, int digits = default_digits) {
    const mpq_class ll = detail::log10_up(mpq_class(ell), digits);
    const mpq_class out = ell == 2 ? 255 * ll + 144 * d.log10() : 33 * ll + 48 * d.log10();
    return LogMagnitude(detail::round_sig(out, digits, Rounding::Up), digits);
}

/// N^2 / (zeta(2) * index), a lower bound: zeta(2) = pi^2/6 rounded up,
/// the quotient rounded down.
inline LogMagnitude torsion_degree_bound(const LogMagnitude& index, std::uint64_t order_n, int digits = default_digits) {
    if (order_n < 1) throw InvalidParams("torsion order must be at least 1");
    const mpq_class pi_up = directed::pi(digits + 4, Rounding::Up);
    const mpq_class zeta2_up = pi_up * pi_up / 6;
    const mpq_class out = 2 * directed::log10(mpq_class(order_n), digits + 4, Rounding::Down) -
                          directed::log10(zeta2_up, digits + 4, Rounding::Up) - index.log10();
    return LogMagnitude(detail::round_sig(out, digits, Rounding::Down), digits, Rounding::Down);
}

struct GeneralIndexReport {
    LogMagnitude d_ell;
    int n;      // first n with l^(n - v) > D(l)
    int level;  // 16n - 4, or 48n - 10 for l = 2
};

inline GeneralIndexReport general_index_bound(std::uint64_t ell, const CurveParams& p, int digits = default_digits) {
    LogMagnitude d = d_ell_bound(p, ell == 2 ? 192 : 24, digits);
    const int v = ell == 2 ? 1 : 0;
    const mpq_class ll = directed::log10(mpq_class(ell), digits, Rounding::Down);
    // Smallest n with (n - v) log10 l > log10 D.
    mpq_class t = d.log10() / ll;
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), t.get_num_mpz_t(), t.get_den_mpz_t());
    if (!f.fits_sint_p()) throw MagnitudeOverflow("n does not fit an int");
    const int n = static_cast<int>(f.get_si()) + 1 + v;
    return GeneralIndexReport{d, n, ell == 2 ? 48 * n - 10 : 16 * n - 4};
}

} // namespace ladic
