#pragma once

#include <atomic>
#include <chrono>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dickson.hpp"
#include "lie.hpp"

namespace ladic {

enum class Outcome { Verified, Violated, Inapplicable, InsufficientPrecision, Capped };

inline const char* to_string(Outcome o) {
    switch (o) {
    case Outcome::Verified: return "verified";
    case Outcome::Violated: return "violated";
    case Outcome::Inapplicable: return "inapplicable";
    case Outcome::InsufficientPrecision: return "insufficient";
    case Outcome::Capped: return "capped";
    }
    return "?";
}

struct VerificationReport {
    std::string theorem;
    u64 prime = 0;
    int precision = 0;
    int param = 0;  // s or n
    std::vector<Mat2> generators;
    Outcome outcome = Outcome::Inapplicable;
    bool vacuous = false;  // hypothesis of the implication was false
    std::string reason;
    std::optional<Mat2> witness;
    int required_precision = 0;
    u64 group_order = 0;
    std::string detail;
    double elapsed_ms = 0;

    /// One structured line; timing is left out so output is reproducible.
    std::string to_line() const {
        std::ostringstream os;
        os << "theorem=" << theorem << " prime=" << prime << " precision=" << precision
           << " param=" << param << " order=" << group_order << " outcome=" << to_string(outcome);
        if (outcome == Outcome::Verified) os << " vacuous=" << (vacuous ? "yes" : "no");
        if (witness) os << " witness=" << witness->to_string();
        if (outcome == Outcome::InsufficientPrecision) os << " required=" << required_precision;
        if (!detail.empty()) os << " " << detail;
        if (!reason.empty()) os << " reason=\"" << reason << "\"";
        return os.str();
    }
};

namespace detail {

inline VerificationReport start_report(const std::string& tag, const GroupClosure& g, int param) {
    VerificationReport r;
    r.theorem = tag;
    r.prime = g.prime();
    r.precision = g.precision();
    r.param = param;
    r.generators = g.generators();
    r.group_order = g.size();
    return r;
}

inline VerificationReport& inapplicable(VerificationReport& r, std::string why) {
    r.outcome = Outcome::Inapplicable;
    r.reason = std::move(why);
    return r;
}

inline VerificationReport& insufficient(VerificationReport& r, int need) {
    r.outcome = Outcome::InsufficientPrecision;
    r.required_precision = need;
    return r;
}

inline VerificationReport& violated(VerificationReport& r, const Mat2& w, std::string why) {
    r.outcome = Outcome::Violated;
    r.witness = w;
    r.reason = std::move(why);
    return r;
}

inline VerificationReport& verified(VerificationReport& r, bool vacuous) {
    r.outcome = Outcome::Verified;
    r.vacuous = vacuous;
    return r;
}

inline bool is_square_mod(u64 u, u64 p) { return pow_mod(u % p, (p - 1) / 2, p) == 1; }

/// First element of the ordered scaled basis missing from L, if any.
inline std::optional<Mat2> missing_scaled(const LieModule& lie, int s) {
    for (const Mat2& x : scaled_sl2_basis(lie.context(), s))
        if (!lie.contains(x)) return x;
    return std::nullopt;
}

} // namespace detail

struct HypothesisCheck {
    bool ok = false;
    std::string reason;
};

/// Hypothesis of the (*) implication read on X = G(l) inside SL2(F_l): X is
/// Cartan-contained of order != 4, or Borel with l | |X| and |X/S| != 4 where
/// S is its l-Sylow. In both cases |X/S| is the order of G/N(G).
inline HypothesisCheck star_hypothesis_mod_ell(const GroupClosure& x) {
    const u64 p = x.prime();
    DicksonReport r = classify_mod_ell(x);
    const u64 sylow = (x.size() % p == 0) ? p : 1;  // l^2 never divides |SL2(F_l)|
    const u64 quotient = x.size() / sylow;
    const bool cartan = r.cls == DicksonClass::SplitCartan || r.cls == DicksonClass::NonsplitCartan;
    if (sylow == 1 && !cartan) return {false, std::string("image mod l is ") + to_string(r.cls)};
    if (sylow == p && r.cls != DicksonClass::Borel) return {false, std::string("image mod l is ") + to_string(r.cls)};
    if (quotient == 4) return {false, "|G/N(G)| = 4"};
    return {true, ""};
}

/// (*) hypothesis for G inside SL2 at precision N. |G/N(G)| is taken as the
/// explicit index of max_normal_pro_ell, which agrees with the mod-l count.
inline HypothesisCheck star_hypothesis(const GroupClosure& g) {
    if (!g.is_sl2_subset()) return {false, "G is not inside SL2"};
    return star_hypothesis_mod_ell(reduce(g, 1));
}

/// (**) hypotheses: square determinants and the (*) hypothesis on Sat(G)^{det=1}, read mod l.
inline HypothesisCheck starstar_hypothesis(const GroupClosure& g) {
    const u64 p = g.prime();
    if (p == 2) return {false, "l must be odd"};
    for (const Mat2& x : g.generators())
        if (!detail::is_square_mod(x.det().residue(), p)) return {false, "det(G) contains a non-square"};
    HypothesisCheck h = star_hypothesis_mod_ell(sat_det1_mod_ell(reduce(g, 1)));
    if (!h.ok) h.reason = "Sat(G)^{det=1}: " + h.reason;
    return h;
}

/// G(4) trivial and det(G) = 1 mod 8.
inline HypothesisCheck two_adic_hypothesis(const GroupClosure& g) {
    if (g.prime() != 2) return {false, "l must be 2"};
    if (g.precision() < 3) return {false, "need N >= 3 to read det mod 8"};
    for (const Mat2& x : g.generators()) {
        if (!is_identity_mod(x, 4)) return {false, "G(4) is not trivial"};
        if (x.det().residue() % 8 != 1) return {false, "det(G) is not 1 mod 8"};
    }
    return {true, ""};
}

/// If L(G) contains l^s sl2 then L(N(G)) contains l^2s sl2.
inline VerificationReport check_star(const GroupClosure& g, int s, u64 cap = default_cap) {
    VerificationReport r = detail::start_report("star", g, s);
    if (g.prime() == 2) return detail::inapplicable(r, "l must be odd");
    if (s < 1) return detail::inapplicable(r, "s must be positive");
    if (g.precision() < 2 * s + 1) return detail::insufficient(r, 2 * s + 1);
    HypothesisCheck h = star_hypothesis(g);
    if (!h.ok) return detail::inapplicable(r, h.reason);

    if (!contains_scaled_sl2(special_lie_algebra(g), s)) return detail::verified(r, true);
    ProLStructure n = max_normal_pro_ell(g, cap);
    r.detail = "normal_index=" + std::to_string(n.index);
    if (auto w = detail::missing_scaled(special_lie_algebra(n.normal), 2 * s))
        return detail::violated(r, *w, "l^2s sl2 not inside L(N(G))");
    return detail::verified(r, false);
}

/// If L(G) contains l^s sl2 then G' contains B_l(4s).
inline VerificationReport check_starstar(const GroupClosure& g, int s, u64 cap = default_cap) {
    VerificationReport r = detail::start_report("starstar", g, s);
    if (g.prime() == 2) return detail::inapplicable(r, "l must be odd");
    if (s < 1) return detail::inapplicable(r, "s must be positive");
    if (g.precision() < 4 * s + 1) return detail::insufficient(r, 4 * s + 1);
    HypothesisCheck h = starstar_hypothesis(g);
    if (!h.ok) return detail::inapplicable(r, h.reason);

    if (!contains_scaled_sl2(special_lie_algebra(g), s)) return detail::verified(r, true);
    GroupClosure d = derived_subgroup(g, cap, 1);
    r.detail = "derived_order=" + std::to_string(d.size());
    if (auto w = missing_congruence_element(d, 4 * s, cap))
        return detail::violated(r, *w, "B(4s) not inside G'");
    return detail::verified(r, false);
}

/// l = 2, G inside SL2 trivial mod 4: if L(G) contains 2^s sl2 then G contains B_2(6s).
inline VerificationReport check_sl2z2(const GroupClosure& g, int s, u64 cap = default_cap) {
    VerificationReport r = detail::start_report("sl2z2", g, s);
    if (g.prime() != 2) return detail::inapplicable(r, "l must be 2");
    if (s < 2) return detail::inapplicable(r, "s must be at least 2");
    if (g.precision() < 6 * s + 1) return detail::insufficient(r, 6 * s + 1);
    if (!g.is_sl2_subset()) return detail::inapplicable(r, "G is not inside SL2");
    for (const Mat2& x : g.generators())
        if (!is_identity_mod(x, 4)) return detail::inapplicable(r, "G(4) is not trivial");

    if (!contains_scaled_sl2(special_lie_algebra(g), s)) return detail::verified(r, true);
    if (auto w = missing_congruence_element(g, 6 * s, cap)) return detail::violated(r, *w, "B(6s) not inside G");
    return detail::verified(r, false);
}

/// l = 2 with G(4) trivial and det = 1 mod 8: if L(G) contains 2^n sl2 then
/// G' contains B_2(12n+2). Below N = 12n+3 the hypothesis is still decided;
/// in windowed mode the observed congruence level of G' is reported instead
/// of a verdict.
inline VerificationReport check_gl2z2(const GroupClosure& g, int n, bool windowed = false, u64 cap = default_cap) {
    VerificationReport r = detail::start_report("gl2z2", g, n);
    if (n < 1) return detail::inapplicable(r, "n must be positive");
    HypothesisCheck h = two_adic_hypothesis(g);
    if (!h.ok) return detail::inapplicable(r, h.reason);
    // Membership of 2^n sl2 needs n <= N - 2 because of the diagonal ambiguity of Theta.
    if (g.precision() < n + 2) return detail::insufficient(r, 12 * n + 3);

    if (!contains_scaled_sl2(special_lie_algebra(g), n)) return detail::verified(r, true);
    const int level = 12 * n + 2;
    if (g.precision() < level + 1) {
        if (windowed) {
            GroupClosure d = derived_subgroup(g, cap, 1);
            r.detail = "window_level=" + std::to_string(congruence_level(d));
        }
        return detail::insufficient(r, level + 1);
    }
    GroupClosure d = derived_subgroup(g, cap, 1);
    if (auto w = missing_congruence_element(d, level, cap)) return detail::violated(r, *w, "B(12n+2) not inside G'");
    return detail::verified(r, false);
}

/// A line of P1(Z/l^m) fixed by every generator, if one exists. Lines are
/// (1, t) for t mod l^m and (u, 1) for u divisible by l.
inline std::optional<Line> common_eigenline(const std::vector<Mat2>& gens, const PadicContext& ctx, int m) {
    const u64 mod = ctx.power(m), p = ctx.prime();
    auto fixes = [&](u64 x, u64 y) {
        for (const Mat2& g : gens) {
            const u64 a = g.a() % mod, b = g.b() % mod, c = g.c() % mod, d = g.d() % mod;
            const u64 gx = (mul_mod(a, x, mod) + mul_mod(b, y, mod)) % mod;
            const u64 gy = (mul_mod(c, x, mod) + mul_mod(d, y, mod)) % mod;
            // (gx, gy) proportional to (x, y) with one coordinate of (x, y) equal to 1.
            if (x == 1 % mod) {
                if (gy != mul_mod(gx, y, mod)) return false;
            } else if (gx != mul_mod(gy, x, mod)) {
                return false;
            }
        }
        return true;
    };
    for (u64 t = 0; t < mod; ++t)
        if (fixes(1 % mod, t)) return Line{1 % mod, t};
    for (u64 u = 0; u < mod; u += p)
        if (fixes(u, 1 % mod)) return Line{u, 1 % mod};
    return std::nullopt;
}

/// The j_n trichotomy. When k(L) is bottom the true k is at least N, so N is
/// used in the case-2 level (a weaker claim). With check_derived = true,
/// case 3 also checks B(16n-4) (odd l) or B(48n-10) (l = 2) inside G'.
inline VerificationReport trichotomy(const GroupClosure& g, int n, bool check_derived = false, u64 cap = default_cap) {
    VerificationReport r = detail::start_report("trichotomy", g, n);
    const u64 p = g.prime();
    const int big_n = g.precision();
    const int v = p == 2 ? 1 : 0;
    if (n < 1) return detail::inapplicable(r, "n must be positive");
    HypothesisCheck h = p == 2 ? two_adic_hypothesis(g) : starstar_hypothesis(g);
    if (!h.ok) return detail::inapplicable(r, h.reason);
    if (big_n < 2 * n + v) return detail::insufficient(r, 2 * n + v);

    LieModule lie = special_lie_algebra(g);
    const Valuation kv = k_of(lie);
    if (kv && n < *kv) return detail::inapplicable(r, "n < k(L)");
    const int k = valuation_or(kv, big_n);
    const int jn = j_n(lie, n), j2n = j_n(lie, 2 * n);
    std::ostringstream d;
    d << "k=" << k << " j_n=" << jn << " j_2n=" << j2n;

    if (jn <= 1) {
        r.detail = "case=1 " + d.str();
        GroupClosure gn = reduce(g, n);
        const auto& gens = gn.generators();
        for (std::size_t i = 0; i < gens.size(); ++i)
            for (std::size_t j = i + 1; j < gens.size(); ++j)
                if (!(gens[i] * gens[j] == gens[j] * gens[i]))
                    return detail::violated(r, commutator(gens[i], gens[j]), "G(l^n) is not abelian");
        return detail::verified(r, false);
    }
    if (jn == 2) {
        const int m = n - k + 1 - 2 * v;
        d << " level=" << m;
        std::optional<Line> line;
        if (m >= 1) {
            line = common_eigenline(g.generators(), g.context(), m);
            if (line) d << " eigenline=(" << (*line)[0] << "," << (*line)[1] << ")";
        }
        r.detail = "case=2 " + d.str();
        if (j2n != 3 && m >= 1 && !line)
            return detail::violated(r, g.generators().front().reduced(m), "no common eigenline mod l^m");
        return detail::verified(r, false);
    }

    const int t = n + 2 * k - 1;
    d << " exponent=" << t;
    r.detail = "case=3 " + d.str();
    if (t >= big_n) return detail::insufficient(r, t + 1);
    if (auto w = detail::missing_scaled(lie, t)) return detail::violated(r, *w, "l^(n+2k-1) sl2 not inside L");
    if (t == 0 || !contains_scaled_sl2(lie, t - 1)) r.detail += " tight=yes";
    if (check_derived) {
        const int level = p == 2 ? 48 * n - 10 : 16 * n - 4;
        if (big_n < level + 1) return detail::insufficient(r, level + 1);
        GroupClosure der = derived_subgroup(g, cap, 1);
        if (auto w = missing_congruence_element(der, level, cap)) return detail::violated(r, *w, "B not inside G'");
    }
    return detail::verified(r, false);
}

/// Case 3 of the trichotomy read on a Lie module alone (no group), with the
/// tightness of the exponent n + 2k - 1.
inline VerificationReport trichotomy_lie(const LieModule& lie, int n) {
    VerificationReport r;
    r.theorem = "trichotomy";
    r.prime = lie.context().prime();
    r.precision = lie.context().precision();
    r.param = n;
    const int big_n = r.precision;
    if (n < 1 || n > big_n) return detail::inapplicable(r, "need 1 <= n <= N");
    const Valuation kv = k_of(lie);
    if (!kv || n < *kv) return detail::inapplicable(r, "n < k(L)");
    const int k = *kv;
    const int jn = j_n(lie, n);
    std::ostringstream d;
    d << "k=" << k << " j_n=" << jn;
    if (jn != 3) {
        r.detail = d.str();
        return detail::inapplicable(r, "cases 1 and 2 need the group");
    }
    const int t = n + 2 * k - 1;
    d << " exponent=" << t;
    r.detail = "case=3 " + d.str();
    if (t >= big_n) return detail::insufficient(r, t + 1);
    if (auto w = detail::missing_scaled(lie, t)) return detail::violated(r, *w, "l^(n+2k-1) sl2 not inside L");
    // At exponent 0 nothing smaller exists, so 0 is tight by definition.
    r.detail += t >= 1 && contains_scaled_sl2(lie, t - 1) ? " tight=no" : " tight=yes";
    return detail::verified(r, false);
}

// ---------------------------------------------------------------------------
// Bounded-index subgroups

struct H1Selection {
    GroupClosure h;
    u64 index;
    std::string route;
};

/// The case router producing H1 of index at most 24 for odd l.
inline H1Selection select_h1(const GroupClosure& g, u64 cap = default_cap) {
    const PadicContext& ctx = g.context();
    const u64 p = ctx.prime();
    if (p == 2) throw PreconditionViolated("select_h1: l must be odd (use select_h1_two)");
    auto done = [&](GroupClosure h, std::string route) {
        const u64 index = g.size() / h.size();
        return H1Selection{std::move(h), index, std::move(route)};
    };

    GroupClosure j = reduce(g, 1);
    DicksonReport top = classify_mod_ell(j);
    if (p >= 5 && top.cls == DicksonClass::ContainsSL2) return done(g, "derived-full");

    GroupClosure g1 = filter_subgroup(g, [p](const Mat2& x) { return detail::is_square_mod(x.det().residue(), p); }, cap);
    GroupClosure j1 = reduce(g1, 1);
    auto mod_ell = [](const Mat2& x) { return x.reduced(1); };
    auto projective_kernel = [&](const GroupClosure& k) {
        return filter_subgroup(k, [&](const Mat2& x) { return mod_ell(x).is_scalar(); }, cap);
    };

    if (p == 3) {
        // An element of order 3 generates a 3-Sylow of G1(3).
        std::optional<Mat2> b;
        j1.for_each([&](const Mat2& x) {
            if (!b && element_order(x) == 3) b = x;
        });
        if (!b) return done(filter_subgroup(g1, [](const Mat2& x) { return is_identity_mod(x, 3); }, cap), "sylow-3");
        GroupClosure sylow = close(j1.context(), {*b}, cap, 1);
        return done(filter_subgroup(g1, [&](const Mat2& x) { return sylow.contains(mod_ell(x)); }, cap), "sylow-3");
    }

    DicksonReport r = classify_mod_ell(j1);
    if (r.cls == DicksonClass::Exceptional) {
        const u64 want = r.exceptional == ExceptionalType::A5 ? 5 : 3;
        std::optional<Mat2> b;
        j1.for_each([&](const Mat2& x) {
            if (!b && projective_order(x) == want) b = x;
        });
        if (!b) throw CaseNotCovered("exceptional image without an element of projective order " + std::to_string(want));
        // <b> times scalars, pulled back.
        std::vector<u64> allowed;
        Mat2 y = Mat2::identity(j1.context());
        for (u64 i = 0; i < want; ++i, y = y * *b)
            for (u64 lam = 1; lam < p; ++lam) allowed.push_back(y.scaled(lam).code());
        std::sort(allowed.begin(), allowed.end());
        return done(filter_subgroup(g1, [&](const Mat2& x) {
            return std::binary_search(allowed.begin(), allowed.end(), mod_ell(x).code());
        }, cap), "exceptional");
    }

    auto cartan_route = [&](const GroupClosure& k, std::string prefix) {
        if (sat_det1_mod_ell(reduce(k, 1)).size() == 4) return done(projective_kernel(k), prefix + "cartan-kernel");
        return done(k, prefix + "cartan");
    };
    if (r.cls == DicksonClass::SplitCartan || r.cls == DicksonClass::NonsplitCartan) return cartan_route(g1, "");
    if (r.cls == DicksonClass::NormalizerSplitCartan) {
        const auto lines = r.lines;
        GroupClosure c = filter_subgroup(g1, [&](const Mat2& x) {
            Mat2 y = mod_ell(x);
            return fixes_line(y, lines[0]) && fixes_line(y, lines[1]);
        }, cap);
        return cartan_route(c, "normalizer-");
    }
    if (r.cls == DicksonClass::NormalizerNonsplitCartan) {
        const Mat2 e = *r.cartan_element;
        GroupClosure c = filter_subgroup(g1, [&](const Mat2& x) {
            Mat2 y = mod_ell(x);
            return y * e == e * y;
        }, cap);
        return cartan_route(c, "normalizer-");
    }
    if (r.cls == DicksonClass::Borel) {
        GroupClosure x = sat_det1_mod_ell(j1);
        const u64 quotient = x.size() % p == 0 ? x.size() / p : x.size();
        if (quotient != 4) return done(g1, "borel");
        // tau(g) = a/c on the eigenline; a/c = 1 iff a^2 = det.
        const Line v = r.lines.front();
        return done(filter_subgroup(g1, [&](const Mat2& m) {
            Mat2 y = mod_ell(m);
            const u64 gx = (mul_mod(y.a(), v[0], p) + mul_mod(y.b(), v[1], p)) % p;
            const u64 gy = (mul_mod(y.c(), v[0], p) + mul_mod(y.d(), v[1], p)) % p;
            const u64 a = v[0] != 0 ? mul_mod(gx, inverse_mod(v[0], p), p) : mul_mod(gy, inverse_mod(v[1], p), p);
            return mul_mod(a, a, p) == y.det().residue();
        }, cap), "borel-kernel");
    }
    throw CaseNotCovered(std::string("select_h1: unexpected class ") + to_string(r.cls));
}

/// l = 2: elements that are Id mod 4 with det = 1 mod 8.
inline H1Selection select_h1_two(const GroupClosure& g, u64 cap = default_cap) {
    if (g.prime() != 2) throw PreconditionViolated("select_h1_two: l must be 2");
    if (g.precision() < 3) throw InsufficientPrecision(3);
    GroupClosure h = filter_subgroup(g, [](const Mat2& x) {
        return is_identity_mod(x, 4) && x.det().residue() % 8 == 1;
    }, cap);
    const u64 index = g.size() / h.size();
    return H1Selection{std::move(h), index, "double-kernel"};
}

// ---------------------------------------------------------------------------
// Fixtures

/// A square root of -1 modulo l^N, l = 1 mod 4, by Newton iteration.
inline u64 sqrt_minus_one(const PadicContext& ctx) {
    const u64 p = ctx.prime(), m = ctx.modulus();
    if (p % 4 != 1) throw InvalidParams("sqrt(-1) needs l = 1 mod 4");
    u64 i = 2;
    while (mul_mod(i, i, p) != p - 1) ++i;
    for (int step = 0; step < ctx.precision() + 1; ++step) {
        const u64 f = (mul_mod(i, i, m) + 1) % m;
        i = (i + m - mul_mod(f, inverse_mod(2 * i % m, m), m)) % m;
    }
    return i;
}

/// Teichmuller lift of an element of order `order` in F_l^x.
inline u64 teichmuller_root(const PadicContext& ctx, u64 order) {
    const u64 p = ctx.prime(), m = ctx.modulus();
    if (order == 0 || (p - 1) % order != 0) throw InvalidParams("root order must divide l - 1");
    const u64 g = unit_group_generators(ctx.with_precision(1)).front();
    u64 w = pow_mod(g, (p - 1) / order, p);
    for (int step = 0; step < ctx.precision(); ++step) w = pow_mod(w, p, m);
    return w;
}

/// 12-element lift of S3 (permutations of 0, 1, infinity) times B_l(t).
inline GroupClosure fixture_s3_lift(u64 p, int t, int big_n, u64 cap = default_cap) {
    if (!is_prime(p) || p % 4 != 1) throw InvalidParams("s3-lift needs a prime l = 1 mod 4");
    if (t < 1 || big_n < 1) throw InvalidParams("s3-lift needs t >= 1 and N >= 1");
    PadicContext ctx(p, big_n);
    detail::check_group_context(ctx);
    const i64 i = static_cast<i64>(sqrt_minus_one(ctx));
    std::vector<Mat2> gens{Mat2(ctx, 0, 1, -1, 1), Mat2(ctx, 0, i, i, 0), Mat2(ctx, -i, i, 0, i),
                           Mat2(ctx, i, 0, i, -i), Mat2(ctx, 1, -1, 1, 0), Mat2::scalar(ctx, ctx.modulus() - 1)};
    if (t < big_n) {
        const i64 q = static_cast<i64>(ctx.power(t));
        gens.push_back(lower_unipotent(ctx, q));
        gens.push_back(upper_unipotent(ctx, q));
        for (i64 c : unit_congruence_generators(ctx, t)) gens.push_back(diagonal_unit(ctx, c));
    }
    return close(ctx, gens, cap, 1);
}

struct PinkBorel {
    GroupClosure g;
    GroupClosure h;  // the pro-l part
    Mat2 torus;      // diag(a, 1/a)
};

/// H = { x in SL2 : tr x = 2 mod l^2s, Theta(x) in M } with
/// M = l^s E12 + l^s E21 + l^2s (E11 - E22), joined with diag(a, 1/a) for a
/// root of unity of the given order.
inline PinkBorel fixture_pink_borel(u64 p, int s, int big_n, u64 order, u64 cap = default_cap) {
    if (!is_prime(p) || p == 2) throw InvalidParams("pink-borel needs an odd prime");
    if (s < 1 || big_n < 2 * s + 1) throw InvalidParams("pink-borel needs s >= 1 and N >= 2s + 1");
    if (order < 3 || (p - 1) % order != 0) throw InvalidParams("pink-borel needs a root order >= 3 dividing l - 1");
    PadicContext ctx(p, big_n);
    detail::check_group_context(ctx);
    const u64 m = ctx.modulus(), ls = ctx.power(s), l2s = ctx.power(2 * s);
    const PadicInt two(ctx, 2);

    std::vector<u64> codes;
    const GroupClosure bs = congruence_subgroup(ctx, s, cap);
    for (u64 c : bs.codes()) {
        Mat2 x = Mat2::from_code(ctx, c);
        Valuation vt = valuation(x.trace() - two);
        if (vt && *vt < 2 * s) continue;
        Mat2 th = theta(x);
        if (th.b() % ls || th.c() % ls || th.a() % l2s) continue;
        codes.push_back(c);
    }
    GroupClosure h = GroupClosure::from_codes(ctx, std::move(codes), cap);
    const u64 a = teichmuller_root(ctx, order);
    Mat2 torus = Mat2::from_residues(ctx, {a, 0, 0, inverse_mod(a, m)});
    ClosureBuilder b(ctx, cap, 1);
    std::vector<Mat2> gens = h.generators();
    for (const Mat2& x : gens) b.add_generator(x);
    b.add_generator(torus);
    gens.push_back(torus);
    return PinkBorel{b.build(gens), std::move(h), torus};
}

/// x1 = [[1, 0], [l^k, -1]], x2 = l^(k+n-1) diag(1, -1), x3 = l^(n-1) E12.
/// Here k(L) = k and the smallest s with l^s sl2 inside L is n + 2k - 1.
inline LieModule fixture_optimal_lie(u64 p, int k, int n, int big_n) {
    if (!is_prime(p)) throw InvalidParams("optimal-lie needs a prime");
    if (k < 0 || n < 1) throw InvalidParams("optimal-lie needs k >= 0 and n >= 1");
    if (big_n < n + 2 * k) throw InvalidParams("optimal-lie needs N >= n + 2k");
    PadicContext ctx(p, big_n);
    const i64 lk = static_cast<i64>(ctx.power(k));
    const i64 lkn = static_cast<i64>(ctx.power(k + n - 1));
    const i64 ln1 = static_cast<i64>(ctx.power(n - 1));
    return LieModule(ctx, {Mat2(ctx, 1, 0, lk, -1), Mat2(ctx, lkn, 0, 0, -lkn), Mat2(ctx, 0, ln1, 0, 0)});
}

// ---------------------------------------------------------------------------
// Campaigns

/// Deterministic 64-bit seed for trial i.
inline u64 trial_seed(u64 seed, u64 index) {
    u64 z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace detail {

struct Sampler {
    const PadicContext& ctx;
    std::mt19937_64 rng;

    u64 below(u64 n) { return rng() % n; }
    u64 residue() { return below(ctx.modulus()); }
    u64 unit_mod_ell() { return 1 + below(ctx.prime() - 1); }

    /// Valuation in [lo, N], equal to lo a third of the time; N means the coordinate vanishes.
    int valuation(int lo) {
        if (below(3) == 0) return lo;
        return lo + static_cast<int>(below(static_cast<u64>(ctx.precision() - lo + 1)));
    }

    /// L(l^i x) R(l^j y) D(l^k z), a random element of B_l(lo) of det 1.
    Mat2 perturbation(int lo) {
        const u64 m = ctx.modulus();
        auto scaled = [&](int v) {
            return v >= ctx.precision() ? u64{0} : mul_mod(ctx.power(v), residue(), m);
        };
        Mat2 l = lower_unipotent(ctx, static_cast<i64>(scaled(valuation(lo))));
        Mat2 r = upper_unipotent(ctx, static_cast<i64>(scaled(valuation(lo))));
        const int vd = std::max(valuation(lo), ctx.prime() == 2 ? 2 : 1);
        Mat2 d = diagonal_unit(ctx, static_cast<i64>(scaled(vd)));
        return l * r * d;
    }

    /// Companion matrix of x^2 - t x + det with irreducible reduction mod l.
    Mat2 nonsplit(u64 det) {
        const u64 p = ctx.prime();
        for (;;) {
            const u64 t = below(p);
            // x^2 - t x + det irreducible iff t^2 - 4 det is a non-square mod l.
            const u64 disc = (t * t % p + p * 4 - 4 * det % p) % p;
            if (disc != 0 && !is_square_mod(disc, p))
                return Mat2(ctx, 0, -static_cast<i64>(det), 1, static_cast<i64>(t));
        }
    }

    /// Base element mod l from a structured family, lifted with det 1 when sl2 is set.
    Mat2 base(bool sl2) {
        const u64 p = ctx.prime(), m = ctx.modulus();
        const u64 u = unit_mod_ell();
        const u64 u2 = sl2 ? inverse_mod(u, m) : unit_mod_ell();
        switch (below(6)) {
        case 0: return Mat2::identity(ctx);
        case 1: return Mat2::scalar(ctx, m - 1);
        case 2: return Mat2::from_residues(ctx, {u, 0, 0, u2});
        case 3: return Mat2::from_residues(ctx, {u, below(p), 0, u2});
        case 4: return nonsplit(sl2 ? 1 : mul_mod(u, u2, p));
        default: return Mat2::from_residues(ctx, {1, 1, 0, 1});
        }
    }
};

} // namespace detail

/// 1 to 3 structured generators for a theorem tag. Odd l: an SL2 base lift
/// times a congruence perturbation, scaled by a root of unity (star keeps
/// SL2); a quarter of the starstar/trichotomy draws use a non-square
/// determinant. l = 2: perturbations trivial mod 4, optionally scaled by 1 + 8t.
inline std::vector<Mat2> sample_generators(const std::string& theorem, const PadicContext& ctx, u64 seed) {
    detail::Sampler s{ctx, std::mt19937_64(seed)};
    const u64 p = ctx.prime(), m = ctx.modulus();
    const int count = 1 + static_cast<int>(s.below(3));
    std::vector<Mat2> gens;
    if (p == 2) {
        const bool sl2 = theorem == "sl2z2";
        const int lo = sl2 ? 2 + static_cast<int>(s.below(3)) : 2;
        for (int i = 0; i < count; ++i) {
            Mat2 x = s.perturbation(lo);
            if (!sl2 && s.below(3) == 0 && ctx.precision() > 3) x = x.scaled((1 + 8 * s.residue()) % m);
            gens.push_back(x);
        }
        return gens;
    }
    const bool sl2 = theorem == "star";
    const bool nonsquare = !sl2 && s.below(4) == 0;
    const u64 w = teichmuller_root(ctx, p - 1);  // generates the roots of unity
    for (int i = 0; i < count; ++i) {
        Mat2 x = s.base(true) * s.perturbation(1);
        if (!sl2) x = x.scaled(pow_mod(w, s.below(p - 1), m));
        gens.push_back(x);
    }
    if (nonsquare) gens.push_back(Mat2::from_residues(ctx, {w, 0, 0, 1}));
    return gens;
}

inline GroupClosure sample_group(const std::string& theorem, const PadicContext& ctx, u64 seed, u64 cap) {
    return close(ctx, sample_generators(theorem, ctx, seed), cap, 1);
}

/// Applicability read from generators alone (images mod l or mod 4 and
/// determinants), so inapplicable draws never build the full closure.
inline HypothesisCheck generator_hypothesis(const std::string& theorem, const PadicContext& ctx,
                                            const std::vector<Mat2>& gens) {
    const u64 p = ctx.prime();
    if (p == 2) {
        for (const Mat2& x : gens) {
            if (!is_identity_mod(x, 4)) return {false, "G(4) is not trivial"};
            if (theorem == "sl2z2" ? x.det().residue() != 1 : x.det().residue() % 8 != 1)
                return {false, "determinant condition fails"};
        }
        return {true, ""};
    }
    PadicContext c1 = ctx.with_precision(1);
    std::vector<Mat2> red;
    for (const Mat2& x : gens) red.push_back(x.reduced(1));
    GroupClosure j = close(c1, red, default_cap, 1);
    if (theorem == "star") {
        for (const Mat2& x : gens)
            if (x.det().residue() != 1) return {false, "G is not inside SL2"};
        return star_hypothesis_mod_ell(j);
    }
    for (const Mat2& x : gens)
        if (!detail::is_square_mod(x.det().residue(), p)) return {false, "det(G) contains a non-square"};
    return star_hypothesis_mod_ell(sat_det1_mod_ell(j));
}

struct CampaignConfig {
    std::string theorem;  // star, starstar, sl2z2, gl2z2, trichotomy
    u64 prime = 3;
    int precision = 4;
    int param = 1;
    u64 trials = 10;
    u64 seed = 0;
    u64 cap = default_cap;
    unsigned threads = 0;
    /// Draw until `trials` reports are not Inapplicable (bounded by max_attempts).
    bool until_applicable = false;
    u64 max_attempts = 100000;
};

struct CampaignResult {
    std::vector<VerificationReport> reports;
    u64 count(Outcome o) const {
        return static_cast<u64>(std::count_if(reports.begin(), reports.end(), [o](const auto& r) { return r.outcome == o; }));
    }
    u64 applicable() const { return reports.size() - count(Outcome::Inapplicable); }
    std::string summary() const {
        std::ostringstream os;
        os << "trials=" << reports.size() << " verified=" << count(Outcome::Verified)
           << " violated=" << count(Outcome::Violated) << " inapplicable=" << count(Outcome::Inapplicable)
           << " insufficient=" << count(Outcome::InsufficientPrecision) << " capped=" << count(Outcome::Capped);
        return os.str();
    }
};

inline VerificationReport verify_group(const std::string& theorem, const GroupClosure& g, int param, u64 cap) {
    if (theorem == "star") return check_star(g, param, cap);
    if (theorem == "starstar") return check_starstar(g, param, cap);
    if (theorem == "sl2z2") return check_sl2z2(g, param, cap);
    if (theorem == "gl2z2") return check_gl2z2(g, param, true, cap);
    if (theorem == "trichotomy") return trichotomy(g, param, false, cap);
    throw InvalidParams("unknown theorem tag: " + theorem);
}

inline VerificationReport run_trial(const CampaignConfig& cfg, u64 index) {
    const auto t0 = std::chrono::steady_clock::now();
    PadicContext ctx(cfg.prime, cfg.precision);
    VerificationReport r;
    try {
        std::vector<Mat2> gens = sample_generators(cfg.theorem, ctx, trial_seed(cfg.seed, index));
        HypothesisCheck h = generator_hypothesis(cfg.theorem, ctx, gens);
        if (!h.ok) {
            r.theorem = cfg.theorem;
            r.prime = cfg.prime;
            r.precision = cfg.precision;
            r.param = cfg.param;
            r.generators = gens;
            r.reason = h.reason;
        } else {
            r = verify_group(cfg.theorem, close(ctx, gens, cfg.cap, 1), cfg.param, cfg.cap);
        }
    } catch (const CapExceeded& e) {
        r.theorem = cfg.theorem;
        r.prime = cfg.prime;
        r.precision = cfg.precision;
        r.param = cfg.param;
        r.outcome = Outcome::Capped;
        r.reason = e.what();
    }
    r.detail = "trial=" + std::to_string(index) + (r.detail.empty() ? "" : " " + r.detail);
    r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

/// Runs trials on a worker pool; results are ordered by trial index.
inline CampaignResult run_campaign(const CampaignConfig& cfg) {
    if (cfg.theorem != "star" && cfg.theorem != "starstar" && cfg.theorem != "sl2z2" && cfg.theorem != "gl2z2" &&
        cfg.theorem != "trichotomy")
        throw InvalidParams("unknown theorem tag: " + cfg.theorem);
    if (!is_prime(cfg.prime)) throw InvalidParams("prime expected");
    detail::check_group_context(PadicContext(cfg.prime, cfg.precision));
    const unsigned threads = cfg.threads == 0 ? detail::default_threads() : cfg.threads;

    CampaignResult out;
    u64 next = 0, kept = 0;
    while (kept < cfg.trials && next < cfg.max_attempts) {
        const u64 batch = cfg.until_applicable ? std::max<u64>(threads, 1) : cfg.trials;
        const u64 hi = std::min(next + batch, cfg.max_attempts);
        std::vector<VerificationReport> got(hi - next);
        std::atomic<u64> cursor{next};
        auto work = [&] {
            for (u64 i; (i = cursor.fetch_add(1)) < hi;) got[i - next] = run_trial(cfg, i);
        };
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < threads && t < hi - next; ++t) pool.emplace_back(work);
        work();
        for (auto& th : pool) th.join();
        for (auto& r : got) {
            if (kept == cfg.trials) break;
            if (!cfg.until_applicable || r.outcome != Outcome::Inapplicable) ++kept;
            out.reports.push_back(std::move(r));
        }
        next = hi;
    }
    return out;
}

} // namespace ladic
