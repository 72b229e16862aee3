#include <gtest/gtest.h>

#include <random>

#include "ladic/bounds.hpp"

using namespace ladic;

namespace {

// Independent high-precision evaluation, 600 bits, nearest rounding.
struct Hp {
    mpfr_t v;
    Hp() { mpfr_init2(v, 600); }
    explicit Hp(double d) : Hp() { mpfr_set_d(v, d, MPFR_RNDN); }
    explicit Hp(const mpq_class& q) : Hp() { mpfr_set_q(v, q.get_mpq_t(), MPFR_RNDN); }
    ~Hp() { mpfr_clear(v); }
    Hp(const Hp&) = delete;
    mpq_class q() const {
        mpq_class r;
        mpfr_get_q(r.get_mpq_t(), v);
        return r;
    }
};

mpq_class hp_ln(const mpq_class& x) {
    Hp a(x), b;
    mpfr_log(b.v, a.v, MPFR_RNDN);
    return b.q();
}

mpq_class hp_log10(const mpq_class& x) {
    Hp a(x), b;
    mpfr_log10(b.v, a.v, MPFR_RNDN);
    return b.q();
}

mpq_class hp_exp(const mpq_class& x) {
    Hp a(x), b;
    mpfr_exp(b.v, a.v, MPFR_RNDN);
    return b.q();
}

mpq_class hp_e() { return hp_exp(1); }
mpq_class hp_log10e() { return 1 / hp_ln(10); }

mpq_class hp_pi() {
    Hp a;
    mpfr_const_pi(a.v, MPFR_RNDN);
    return a.q();
}

mpq_class pow10(long e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), 10, static_cast<unsigned long>(e));
    return mpq_class(r);
}

// |a - b| <= 10^-(digits-1) * |b|
bool agree(const mpq_class& a, const mpq_class& b, int digits) {
    mpq_class diff = abs(a - b);
    return diff * pow10(digits - 1) <= abs(b);
}

// Straight transcription of the elliptic / power-N isogeny bound (natural logs).
mpq_class oracle_isogeny_log10(std::uint64_t d, const mpq_class& h, int power) {
    mpq_class m = 1;
    if (d > 1 && hp_ln(d) > m) m = hp_ln(d);
    if (h > m) m = h;
    return power * (13 + 2 * hp_log10(d) + 2 * hp_log10(m));
}

// 4^(eY) X^(1 + ln Y), with Y = (d(1+ln d))^k.
mpq_class oracle_b0_log10(std::uint64_t d0, const mpq_class& h, std::uint64_t d, int k, int power) {
    const mpq_class ln_d = d == 1 ? mpq_class(0) : hp_ln(d);
    const mpq_class ln_y = k * (ln_d + hp_ln(1 + ln_d));
    return hp_e() * hp_exp(ln_y) * hp_log10(4) + (1 + ln_y) * oracle_isogeny_log10(d0, h, power);
}

CurveParams curve(std::uint64_t d, mpq_class h, int g = 1) {
    CurveParams p;
    p.degree = d;
    p.height = h;
    p.dim = g;
    return p;
}

} // namespace

TEST(Rounding, RoundSigDirections) {
    const mpq_class x(123456789, 1000);
    EXPECT_EQ(detail::round_sig(x, 3, Rounding::Up), mpq_class(124000));
    EXPECT_EQ(detail::round_sig(x, 3, Rounding::Down), mpq_class(123000));
    EXPECT_EQ(detail::round_sig(x, 4, Rounding::Nearest), mpq_class(123500));
    EXPECT_EQ(detail::round_sig(mpq_class(-15, 10), 1, Rounding::Up), mpq_class(-1));
    EXPECT_EQ(detail::round_sig(mpq_class(1, 3), 2, Rounding::Up), mpq_class(17, 50));
}

TEST(Rounding, DecimalExponent) {
    EXPECT_EQ(detail::decimal_exponent(mpq_class(1)), 0);
    EXPECT_EQ(detail::decimal_exponent(mpq_class(999)), 2);
    EXPECT_EQ(detail::decimal_exponent(mpq_class(1000)), 3);
    EXPECT_EQ(detail::decimal_exponent(mpq_class(1, 1000)), -3);
    EXPECT_EQ(detail::decimal_exponent(mpq_class(1, 999)), -3);
}

TEST(Directed, BracketsTrueValue) {
    for (int x : {2, 3, 7, 14, 30, 1000003}) {
        const mpq_class lo = directed::log10(x, 40, Rounding::Down);
        const mpq_class hi = directed::log10(x, 40, Rounding::Up);
        const mpq_class t = hp_log10(x);
        EXPECT_LE(lo, t);
        EXPECT_GE(hi, t);
        EXPECT_TRUE(agree(hi, t, 38));
    }
    EXPECT_EQ(directed::log10(1000, 64, Rounding::Up), 3);
    EXPECT_EQ(directed::log10(mpq_class(1, 100), 64, Rounding::Up), -2);
    EXPECT_EQ(directed::ln(1, 64, Rounding::Up), 0);
    EXPECT_GE(directed::e(64, Rounding::Up), hp_e());
    EXPECT_LE(directed::e(64, Rounding::Down), hp_e());
    EXPECT_GE(directed::pi(64, Rounding::Up), hp_pi());
    EXPECT_GE(directed::log10_e(64, Rounding::Up), hp_log10e());
    EXPECT_LE(directed::log10_e(64, Rounding::Down), hp_log10e());
}

TEST(Directed, RejectsNonPositive) {
    EXPECT_THROW(directed::log10(0, 64, Rounding::Up), PreconditionViolated);
    EXPECT_THROW(directed::ln(-1, 64, Rounding::Up), PreconditionViolated);
}

TEST(LogMagnitudeTest, ProductsAndPowersAreExact) {
    const LogMagnitude a(mpq_class(7, 3)), b(mpq_class(5, 2));
    EXPECT_EQ((a * b).log10(), mpq_class(29, 6));
    EXPECT_EQ((a / b).log10(), mpq_class(-1, 6));
    EXPECT_EQ(a.pow(48).log10(), mpq_class(112));
    EXPECT_LT(a, b);
    EXPECT_EQ(a, LogMagnitude(mpq_class(14, 6)));
}

TEST(LogMagnitudeTest, SumUpperBoundsTrueSum) {
    const LogMagnitude a(2), b(3);
    const mpq_class s = (a + b).log10();
    EXPECT_GE(s, hp_log10(1100));
    EXPECT_TRUE(agree(s, hp_log10(1100), 60));
    // A negligible summand only nudges upward.
    const LogMagnitude big(1000), tiny(1);
    EXPECT_GT((big + tiny).log10(), 1000);
    EXPECT_LT((big + tiny).log10(), mpq_class(1001, 1));
}

TEST(LogMagnitudeTest, Formatting) {
    EXPECT_EQ(LogMagnitude::format(13, 64, Rounding::Up), "13");
    EXPECT_EQ(LogMagnitude::format(mpq_class(1, 4), 64, Rounding::Up), "0.25");
    EXPECT_EQ(LogMagnitude::format(mpq_class(1234, 10), 64, Rounding::Up), "123.4");
    EXPECT_EQ(LogMagnitude::format(mpq_class(1, 3), 5, Rounding::Up), "0.33334");
    EXPECT_EQ(LogMagnitude::format(pow10(25) * 3, 64, Rounding::Up), "3e+25");
    EXPECT_EQ(LogMagnitude::format(mpq_class(-5, 2), 64, Rounding::Up), "-2.5");
}

TEST(LogMagnitudeTest, IntegerValue) {
    EXPECT_EQ(LogMagnitude(13).integer_value(), mpz_class("10000000000000"));
    EXPECT_EQ(LogMagnitude::of(12345).integer_value(), 12345 + 1);
    EXPECT_EQ(LogMagnitude::of(12345, 64, Rounding::Down).integer_value(), 12344);
    EXPECT_THROW(LogMagnitude(mpq_class(20000000)).integer_value(), MagnitudeOverflow);
}

TEST(Alpha, Values) {
    EXPECT_EQ(alpha(1), 1024u);
    EXPECT_EQ(alpha(2), 8192u);
    EXPECT_EQ(alpha(3), 27648u);
    EXPECT_THROW(alpha(0), InvalidParams);
}

TEST(Isogeny, EllipticUnitParamsIsExactlyTenToThirteen) {
    EXPECT_EQ(isogeny_bound(curve(1, 1), IsogenyVariant::Elliptic).log10(), 13);
    EXPECT_EQ(isogeny_bound(curve(1, 1), IsogenyVariant::Power, 2).log10(), 26);
    EXPECT_EQ(isogeny_bound(curve(1, -5), IsogenyVariant::Elliptic).log10(), 13);
}

TEST(Isogeny, GeneralUnitParams) {
    const mpq_class v = isogeny_bound(curve(1, 1), IsogenyVariant::General).log10();
    const mpq_class t = 65536 * hp_log10(14);
    EXPECT_GE(v, t);
    EXPECT_TRUE(agree(v, t, 60));
}

TEST(Isogeny, AgreesWithOracle) {
    for (std::uint64_t d : {1u, 2u, 7u, 100u, 10000u})
        for (int h : {-3, 0, 1, 5, 80}) {
            const mpq_class v = isogeny_bound(curve(d, h), IsogenyVariant::Elliptic).log10();
            const mpq_class t = oracle_isogeny_log10(d, h, 1);
            EXPECT_GE(v, t) << d << " " << h;
            EXPECT_TRUE(agree(v, t, 60)) << d << " " << h;
        }
}

TEST(Isogeny, RejectsBadParams) {
    EXPECT_THROW(isogeny_bound(curve(0, 1), IsogenyVariant::Elliptic), InvalidParams);
    EXPECT_THROW(isogeny_bound(curve(1, 1, 0), IsogenyVariant::General), InvalidParams);
    EXPECT_THROW(isogeny_bound(curve(1, 1), IsogenyVariant::Power, 0), InvalidParams);
}

TEST(Masser, UnitInputs) {
    const mpq_class v = masser_lcm_bound(LogMagnitude(0), LogMagnitude(0)).log10();
    const mpq_class t = hp_e() * hp_log10(4);
    EXPECT_GE(v, t);
    EXPECT_TRUE(agree(v, t, 60));
}

TEST(Masser, TenTen) {
    const mpq_class v = masser_lcm_bound(LogMagnitude(1), LogMagnitude(1)).log10();
    const mpq_class t = 10 * hp_e() * hp_log10(4) + (1 + hp_ln(10));
    EXPECT_GE(v, t);
    EXPECT_TRUE(agree(v, t, 60));
}

TEST(Masser, ExponentIdentityIsExact) {
    // ln((d(1+ln d)^2)^alpha) = alpha (ln d + 2 ln(1 + ln d)), both sides as
    // rationals built from the same directed primitives.
    for (int g : {1, 2})
        for (std::uint64_t d : {1u, 2u, 3u, 60u, 997u}) {
            const mpq_class ln_d = directed::ln(mpq_class(d), default_digits, Rounding::Up);
            const mpq_class ln_1 = directed::ln(1 + ln_d, default_digits, Rounding::Up);
            const mpq_class expect = 1 + mpq_class(alpha(g)) * (ln_d + 2 * ln_1);
            EXPECT_EQ(masser_exponent(curve(1, 1, g), d, B0Variant::General), expect);
            EXPECT_EQ(masser_exponent(curve(1, 1), d, B0Variant::Elliptic), 1 + 2 * (ln_d + ln_1));
            EXPECT_EQ(masser_exponent(curve(1, 1), d, B0Variant::ESquare), 1 + 4 * (ln_d + ln_1));
            // And the b0 bound raises X to exactly that exponent.
            const auto x = isogeny_bound(curve(1, 1, g), IsogenyVariant::General);
            const auto direct = masser_lcm_bound_ln(x, expect - 1);
            EXPECT_EQ(b0_bound(curve(1, 1, g), d, B0Variant::General), direct);
        }
    EXPECT_EQ(masser_exponent(curve(5, 1), 1, B0Variant::General), 1);
}

TEST(B0, ExtensionDegreeOneCollapses) {
    const mpq_class v = b0_bound(curve(1, 1), 1, B0Variant::Elliptic).log10();
    const mpq_class t = hp_e() * hp_log10(4) + 13;
    EXPECT_GE(v, t);
    EXPECT_TRUE(agree(v, t, 60));
}

TEST(B0, EllipticDegreeTwo) {
    const mpq_class v = b0_bound(curve(1, 1), 2, B0Variant::Elliptic).log10();
    const mpq_class l2 = hp_ln(2);
    const mpq_class t = hp_e() * 4 * (1 + l2) * (1 + l2) * hp_log10(4) + (1 + 2 * l2 + 2 * hp_ln(1 + l2)) * 13;
    EXPECT_GE(v, t);
    EXPECT_TRUE(agree(v, t, 60));
}

TEST(B0, AgreesWithOracle) {
    for (std::uint64_t d0 : {1u, 3u, 192u})
        for (std::uint64_t d : {1u, 2u, 24u, 60u}) {
            const auto p = curve(d0, 2);
            const mpq_class ell = b0_bound(p, d, B0Variant::Elliptic).log10();
            const mpq_class esq = b0_bound(p, d, B0Variant::ESquare).log10();
            const mpq_class t_ell = oracle_b0_log10(d0, 2, d, 2, 1);
            const mpq_class t_esq = oracle_b0_log10(d0, 2, d, 4, 2);
            EXPECT_GE(ell, t_ell);
            EXPECT_GE(esq, t_esq);
            EXPECT_TRUE(agree(ell, t_ell, 55)) << d0 << " " << d;
            EXPECT_TRUE(agree(esq, t_esq, 55)) << d0 << " " << d;
        }
}

TEST(B0, MonotoneInExtensionDegree) {
    for (auto v : {B0Variant::General, B0Variant::Elliptic, B0Variant::ESquare})
        EXPECT_GE(b0_bound(curve(1, 1), 60, v), b0_bound(curve(1, 1), 2, v));
    EXPECT_THROW(b0_bound(curve(1, 1), 0, B0Variant::Elliptic), InvalidParams);
}

TEST(Composite, PsiIsSumOfComponents) {
    const auto p = curve(3, 2);
    const mpq_class expect = directed::log10(30, default_digits, Rounding::Up) +
                             b0_bound(p, 2, B0Variant::ESquare).log10() + b0_bound(p, 60, B0Variant::Elliptic).log10();
    EXPECT_EQ(psi_bound(p).log10(), detail::round_sig(expect, default_digits, Rounding::Up));
}

TEST(Composite, DInftyStructure) {
    const auto p = curve(1, 1);
    const mpq_class expect =
        5 * b0_bound(p, 24, B0Variant::Elliptic).log10() + b0_bound(p, 24, B0Variant::ESquare).log10();
    EXPECT_EQ(d_infty_bound(p).log10(), detail::round_sig(expect, default_digits, Rounding::Up));
}

TEST(Composite, UnitParamsAgreeWithOracle) {
    const mpq_class psi = hp_log10(30) + oracle_b0_log10(1, 1, 2, 4, 2) + oracle_b0_log10(1, 1, 60, 2, 1);
    const mpq_class dinf = 5 * oracle_b0_log10(1, 1, 24, 2, 1) + oracle_b0_log10(1, 1, 24, 4, 2);
    const mpq_class d2 = 5 * oracle_b0_log10(192, 1, 1, 2, 1) + oracle_b0_log10(192, 1, 1, 4, 2);
    const auto p = curve(1, 1);
    EXPECT_GE(psi_bound(p).log10(), psi);
    EXPECT_GE(d_infty_bound(p).log10(), dinf);
    EXPECT_GE(d2_bound(p).log10(), d2);
    EXPECT_TRUE(agree(psi_bound(p).log10(), psi, 55));
    EXPECT_TRUE(agree(d_infty_bound(p).log10(), dinf, 55));
    EXPECT_TRUE(agree(d2_bound(p).log10(), d2, 55));
    const mpq_class composed = 222 * hp_log10(2) + 144 * d2 + 36 * psi + 48 * dinf;
    const mpq_class c = adelic_index_bound(p, AdelicVariant::Composed).log10();
    EXPECT_GE(c, composed);
    EXPECT_TRUE(agree(c, composed, 50));
}

TEST(Adelic, GammaConstantsToThirtyDigits) {
    const mpq_class g12 = adelic_index_bound(curve(1, 1), AdelicVariant::Gamma12).log10();
    EXPECT_TRUE(agree(g12, pow10(21483) * hp_log10e(), 30));
    EXPECT_GE(g12, pow10(21483) * hp_log10e());
    const mpq_class g34 = adelic_index_bound(curve(1, 1), AdelicVariant::Gamma34).log10();
    EXPECT_TRUE(agree(g34, mpq_class(19000000000) * hp_log10e(), 30));
    const std::string s = LogMagnitude(g12).log10_string();
    EXPECT_EQ(s.substr(0, 8), "4.342944");
    EXPECT_EQ(s.substr(s.size() - 7), "e+21482");
}

TEST(Adelic, GammaTwelveDominatesComposed) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 30; ++i) {
        const std::uint64_t d = 1 + rng() % 10000;
        const mpq_class h(static_cast<long>(rng() % 20001) - 10000, 2);
        const auto p = curve(d, h);
        EXPECT_LE(adelic_index_bound(p, AdelicVariant::Composed), adelic_index_bound(p, AdelicVariant::Gamma12))
            << d << " " << h;
    }
}

TEST(Adelic, MonotoneInDegreeAndHeight) {
    const std::uint64_t ds[] = {1, 2, 5, 40, 1000};
    const int hs[] = {-4, 1, 3, 30, 900};
    for (auto v : {AdelicVariant::Composed, AdelicVariant::Gamma12, AdelicVariant::Gamma34})
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                const auto here = adelic_index_bound(curve(ds[i], hs[j]), v);
                if (i + 1 < 5) EXPECT_LE(here, adelic_index_bound(curve(ds[i + 1], hs[j]), v));
                if (j + 1 < 5) EXPECT_LE(here, adelic_index_bound(curve(ds[i], hs[j + 1]), v));
            }
}

TEST(Adelic, DoubleBudgetOnlyTightens) {
    for (auto v : {AdelicVariant::Composed, AdelicVariant::Gamma12, AdelicVariant::Gamma34})
        for (std::uint64_t d : {1u, 7u}) {
            const auto lo = adelic_index_bound(curve(d, mpq_class(7, 2)), v, 64);
            const auto hi = adelic_index_bound(curve(d, mpq_class(7, 2)), v, 128);
            EXPECT_LE(hi.log10(), lo.log10());
        }
}

TEST(IndexDivisor, Values) {
    EXPECT_EQ(index_divisor_bound(3, LogMagnitude(0)).log10(),
              detail::round_sig(directed::log10(3, 64, Rounding::Up) * 33, 64, Rounding::Up));
    const mpq_class two = index_divisor_bound(2, LogMagnitude(0)).log10();
    EXPECT_GE(two, 255 * hp_log10(2));
    EXPECT_TRUE(agree(two, 255 * hp_log10(2), 60));
    // 33 + 48 log_l D in base-l units.
    const auto d = LogMagnitude(mpq_class(5, 2));
    const mpq_class v = index_divisor_bound(7, d).log10();
    EXPECT_TRUE(agree(v / hp_log10(7), 33 + 48 * (mpq_class(5, 2) / hp_log10(7)), 60));
}

TEST(Torsion, ZetaTwoConstant) {
    const auto t = torsion_degree_bound(LogMagnitude(0), 1);
    EXPECT_EQ(t.rounding(), Rounding::Down);
    const mpq_class truth = hp_log10(6 / (hp_pi() * hp_pi()));
    EXPECT_LE(t.log10(), truth);
    EXPECT_TRUE(agree(t.log10(), truth, 60));
    EXPECT_EQ(LogMagnitude::format(directed::exp10(t.log10(), 20, Rounding::Down), 12, Rounding::Down),
              "0.607927101854");
}

TEST(Torsion, HundredOverZeta) {
    const auto t = torsion_degree_bound(LogMagnitude(0), 10);
    EXPECT_TRUE(agree(t.log10(), 2 + hp_log10(6 / (hp_pi() * hp_pi())), 60));
    EXPECT_THROW(torsion_degree_bound(LogMagnitude(0), 0), InvalidParams);
}

TEST(Torsion, DoublingOrderQuadruples) {
    const auto index = LogMagnitude(mpq_class(123, 7));
    for (std::uint64_t n : {1u, 3u, 1000u, 123456u}) {
        const mpq_class a = torsion_degree_bound(index, n).log10();
        const mpq_class b = torsion_degree_bound(index, 2 * n).log10();
        const mpq_class gap = b - a - hp_log10(4);
        EXPECT_LT(abs(gap), mpq_class(1, 1) / pow10(55)) << n;
    }
}

TEST(GeneralIndex, LevelsAndThreshold) {
    const auto p = curve(1, 1);
    const auto odd = general_index_bound(3, p);
    EXPECT_EQ(odd.level, 16 * odd.n - 4);
    // l^n > D and l^(n-1) <= D.
    EXPECT_GT(odd.n * hp_log10(3), odd.d_ell.log10());
    EXPECT_LE((odd.n - 1) * hp_log10(3), odd.d_ell.log10());
    const auto two = general_index_bound(2, p);
    EXPECT_EQ(two.level, 48 * two.n - 10);
    EXPECT_GT((two.n - 1) * hp_log10(2), two.d_ell.log10());
    EXPECT_LE((two.n - 2) * hp_log10(2), two.d_ell.log10());
}

TEST(GeneralIndex, DellStructure) {
    const auto p = curve(2, 1);
    auto q = p;
    q.degree = 48;
    const mpq_class expect =
        5 * b0_bound(q, 1, B0Variant::Elliptic).log10() + b0_bound(q, 1, B0Variant::ESquare).log10();
    EXPECT_EQ(general_index_bound(5, p).d_ell.log10(), detail::round_sig(expect, default_digits, Rounding::Up));
    EXPECT_EQ(general_index_bound(2, p).d_ell, d2_bound(p));
}
