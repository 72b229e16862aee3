#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "group.hpp"

namespace ladic {

enum class DicksonClass {
    SplitCartan,
    NonsplitCartan,
    NormalizerSplitCartan,
    NormalizerNonsplitCartan,
    Borel,
    Exceptional,
    ContainsSL2,
};

enum class ExceptionalType { None, A4, S4, A5 };

inline const char* to_string(DicksonClass c) {
    switch (c) {
    case DicksonClass::SplitCartan: return "split-cartan";
    case DicksonClass::NonsplitCartan: return "nonsplit-cartan";
    case DicksonClass::NormalizerSplitCartan: return "normalizer-split-cartan";
    case DicksonClass::NormalizerNonsplitCartan: return "normalizer-nonsplit-cartan";
    case DicksonClass::Borel: return "borel";
    case DicksonClass::Exceptional: return "exceptional";
    case DicksonClass::ContainsSL2: return "contains-sl2";
    }
    return "?";
}

inline const char* to_string(ExceptionalType t) {
    switch (t) {
    case ExceptionalType::None: return "none";
    case ExceptionalType::A4: return "A4";
    case ExceptionalType::S4: return "S4";
    case ExceptionalType::A5: return "A5";
    }
    return "?";
}

/// Point of P^1(F_l): (1, t) for t < l, or (0, 1).
using Line = std::array<u64, 2>;

inline std::vector<Line> projective_line(u64 p) {
    std::vector<Line> out;
    for (u64 t = 0; t < p; ++t) out.push_back({1, t});
    out.push_back({0, 1});
    return out;
}

/// g maps the line spanned by v to itself.
inline bool fixes_line(const Mat2& g, const Line& v) {
    const u64 p = g.context().modulus();
    const u64 x = (mul_mod(g.a(), v[0], p) + mul_mod(g.b(), v[1], p)) % p;
    const u64 y = (mul_mod(g.c(), v[0], p) + mul_mod(g.d(), v[1], p)) % p;
    return (mul_mod(v[0], y, p) + p - mul_mod(v[1], x, p)) % p == 0;
}

/// Image of the line v under g, normalized.
inline Line apply_line(const Mat2& g, const Line& v) {
    const u64 p = g.context().modulus();
    u64 x = (mul_mod(g.a(), v[0], p) + mul_mod(g.b(), v[1], p)) % p;
    u64 y = (mul_mod(g.c(), v[0], p) + mul_mod(g.d(), v[1], p)) % p;
    if (x == 0) return {0, 1};
    return {1, mul_mod(y, inverse_mod(x, p), p)};
}

/// Characteristic polynomial x^2 - tr x + det has no root in F_l.
inline bool irreducible_charpoly(const Mat2& g) {
    const u64 p = g.context().modulus();
    const u64 t = g.trace().residue(), d = g.det().residue();
    for (u64 x = 0; x < p; ++x)
        if ((mul_mod(x, x, p) + p - mul_mod(t, x, p) + d) % p == 0) return false;
    return true;
}

/// Smallest k >= 1 with g^k scalar.
inline u64 projective_order(const Mat2& g) {
    Mat2 y = g;
    u64 k = 1;
    while (!y.is_scalar()) {
        y = y * g;
        ++k;
    }
    return k;
}

struct ProjectiveData {
    u64 order = 0;
    std::map<u64, u64> element_orders;  // projective order -> number of classes mod scalars
};

/// |PJ| and its element orders, for J at precision 1.
inline ProjectiveData projective_data(const GroupClosure& j) {
    if (j.precision() != 1) throw PreconditionViolated("projective_data: precision must be 1");
    u64 scalars = 0;
    std::map<u64, u64> orders;
    j.for_each([&](const Mat2& x) {
        if (x.is_scalar()) ++scalars;
        ++orders[projective_order(x)];
    });
    ProjectiveData out;
    out.order = j.size() / scalars;
    for (auto& [k, n] : orders) out.element_orders[k] = n / scalars;
    return out;
}

struct DicksonReport {
    DicksonClass cls = DicksonClass::SplitCartan;
    ExceptionalType exceptional = ExceptionalType::None;
    u64 order = 0;
    u64 projective_order = 0;
    /// Borel: the common eigenline. Split Cartan and its normalizer: the two lines.
    std::vector<Line> lines;
    /// Nonsplit Cartan and its normalizer: an element with irreducible
    /// characteristic polynomial whose centralizer is the Cartan.
    std::optional<Mat2> cartan_element;
};

namespace detail {

inline bool all_fix(const std::vector<Mat2>& gens, const Line& v) {
    for (const Mat2& g : gens)
        if (!fixes_line(g, v)) return false;
    return true;
}

/// h g h^-1 is g or its conjugate tr(g) - g.
inline bool normalizes_cartan_of(const Mat2& h, const Mat2& g) {
    const PadicContext& ctx = g.context();
    Mat2 c = h * g * h.inverse();
    Mat2 bar = Mat2::scalar(ctx, g.trace().residue()) - g;
    return c == g || c == bar;
}

inline std::vector<Mat2> group_generators(const GroupClosure& j) {
    if (!j.generators().empty()) return j.generators();
    return {Mat2::identity(j.context())};
}

} // namespace detail

/// Dickson class of a subgroup of GL2(F_l), reported with a witness.
inline DicksonReport classify_mod_ell(const GroupClosure& j) {
    const PadicContext& ctx = j.context();
    if (ctx.precision() != 1) throw PreconditionViolated("classify_mod_ell: precision must be 1");
    const u64 p = ctx.prime();
    const std::vector<Mat2> gens = detail::group_generators(j);
    DicksonReport r;
    r.order = j.size();
    r.projective_order = projective_data(j).order;

    if (p == 2) {
        // GL2(F2) = S3: orders 1, 2, 3, 6.
        switch (j.size()) {
        case 1: r.cls = DicksonClass::SplitCartan; r.lines = {{1, 0}, {0, 1}}; return r;
        case 2:
            r.cls = DicksonClass::Borel;
            for (const Line& v : projective_line(2))
                if (detail::all_fix(gens, v)) { r.lines = {v}; return r; }
            break;
        case 3:
            r.cls = DicksonClass::NonsplitCartan;
            j.for_each([&](const Mat2& x) { if (!r.cartan_element && irreducible_charpoly(x)) r.cartan_element = x; });
            return r;
        case 6: r.cls = DicksonClass::ContainsSL2; return r;
        }
        throw UnclassifiableInternal("subgroup of GL2(F2) of order " + std::to_string(j.size()));
    }

    const std::vector<Line> lines = projective_line(p);
    std::vector<Line> fixed;
    for (const Line& v : lines)
        if (detail::all_fix(gens, v)) fixed.push_back(v);

    if (j.size() % p == 0) {
        if (!fixed.empty()) {
            r.cls = DicksonClass::Borel;
            r.lines = {fixed.front()};
            return r;
        }
        u64 det_one = 0;
        j.for_each([&](const Mat2& x) { if (x.det().residue() == 1) ++det_one; });
        if (det_one == p * (p * p - 1)) {
            r.cls = DicksonClass::ContainsSL2;
            return r;
        }
        throw UnclassifiableInternal("order divisible by l but neither Borel nor containing SL2");
    }

    if (fixed.size() >= 2) {
        r.cls = DicksonClass::SplitCartan;
        r.lines = {fixed[0], fixed[1]};
        return r;
    }

    std::optional<Mat2> irreducible;
    j.for_each([&](const Mat2& x) { if (!irreducible && irreducible_charpoly(x)) irreducible = x; });
    if (is_abelian(j) && irreducible) {
        r.cls = DicksonClass::NonsplitCartan;
        r.cartan_element = irreducible;
        return r;
    }

    for (std::size_t a = 0; a < lines.size(); ++a)
        for (std::size_t b = a + 1; b < lines.size(); ++b) {
            bool ok = true;
            for (const Mat2& g : gens) {
                Line x = apply_line(g, lines[a]), y = apply_line(g, lines[b]);
                if (!((x == lines[a] && y == lines[b]) || (x == lines[b] && y == lines[a]))) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                r.cls = DicksonClass::NormalizerSplitCartan;
                r.lines = {lines[a], lines[b]};
                return r;
            }
        }

    auto normalizes = [&](const Mat2& g) {
        for (const Mat2& h : gens)
            if (!detail::normalizes_cartan_of(h, g)) return false;
        return true;
    };
    std::optional<Mat2> cartan;
    j.for_each([&](const Mat2& x) { if (!cartan && irreducible_charpoly(x) && normalizes(x)) cartan = x; });
    for (u64 b = 1; !cartan && b < p; ++b)
        for (u64 c = 0; !cartan && c < p; ++c)
            for (u64 a = 0; !cartan && a < p; ++a)
                for (u64 d = 0; !cartan && d < p; ++d) {
                    Mat2 x = Mat2::from_residues(ctx, {a, b, c, d});
                    if (irreducible_charpoly(x) && normalizes(x)) cartan = x;
                }
    if (cartan) {
        r.cls = DicksonClass::NormalizerNonsplitCartan;
        r.cartan_element = cartan;
        return r;
    }

    ProjectiveData pd = projective_data(j);
    auto has = [&](u64 k) { return pd.element_orders.count(k) != 0; };
    r.cls = DicksonClass::Exceptional;
    if (pd.order == 12 && !has(4) && !has(5) && !has(6)) r.exceptional = ExceptionalType::A4;
    else if (pd.order == 24 && has(4) && !has(6)) r.exceptional = ExceptionalType::S4;
    else if (pd.order == 60 && has(5)) r.exceptional = ExceptionalType::A5;
    else throw UnclassifiableInternal("no Dickson class for subgroup of order " + std::to_string(j.size()));
    return r;
}

/// Generators of the unit group of Z/l^N.
inline std::vector<u64> unit_group_generators(const PadicContext& ctx) {
    const u64 p = ctx.prime(), m = ctx.modulus();
    if (p == 2) {
        std::vector<u64> out;
        if (m > 2) out.push_back(m - 1);
        if (m > 4) out.push_back(5);
        return out;
    }
    // A primitive root mod l that is also one mod l^2 generates (Z/l^N)^x.
    for (u64 g = 2; g < p * p + p; ++g) {
        if (g % p == 0) continue;
        bool primitive = true;
        for (u64 q = 2; q <= p - 1; ++q) {
            if ((p - 1) % q != 0 || !is_prime(q)) continue;
            if (pow_mod(g, (p - 1) / q, p) == 1) primitive = false;
        }
        if (!primitive) continue;
        if (ctx.precision() >= 2 && pow_mod(g, p - 1, p * p) == 1) continue;
        return {g % m};
    }
    throw UnclassifiableInternal("no primitive root found");
}

/// Sat(G): generated by G and the scalar units.
inline GroupClosure saturate(const GroupClosure& g, u64 cap = default_cap) {
    const PadicContext& ctx = g.context();
    ClosureBuilder b(ctx, cap);
    std::vector<Mat2> gens = g.generators();
    for (const Mat2& x : gens) b.add_generator(x);
    for (u64 u : unit_group_generators(ctx)) {
        Mat2 s = Mat2::scalar(ctx, u);
        gens.push_back(s);
        b.add_generator(s);
    }
    return b.build(gens);
}

/// G^{det=1} = G intersect SL2.
inline GroupClosure det1_part(const GroupClosure& g, u64 cap = default_cap) {
    const u64 one = 1 % g.context().modulus();
    return filter_subgroup(g, [one](const Mat2& x) { return x.det().residue() == one; }, cap);
}

/// Sat(G)^{det=1} mod l computed from J = G(l) alone: { lambda x : x in J, lambda^2 det x = 1 }.
inline GroupClosure sat_det1_mod_ell(const GroupClosure& j) {
    const PadicContext& ctx = j.context();
    if (ctx.precision() != 1) throw PreconditionViolated("sat_det1_mod_ell: precision must be 1");
    const u64 p = ctx.prime();
    std::vector<u64> codes;
    j.for_each([&](const Mat2& x) {
        const u64 d = x.det().residue();
        for (u64 lam = 1; lam < p; ++lam)
            if (mul_mod(mul_mod(lam, lam, p), d, p) == 1 % p) codes.push_back(x.scaled(lam).code());
    });
    return GroupClosure::from_codes(ctx, std::move(codes));
}

enum class ProLCase { PrimeToEll, BorelWithEll, FullSL2 };

inline const char* to_string(ProLCase c) {
    switch (c) {
    case ProLCase::PrimeToEll: return "prime-to-l";
    case ProLCase::BorelWithEll: return "borel-with-l";
    case ProLCase::FullSL2: return "full-sl2";
    }
    return "?";
}

struct ProLStructure {
    ProLCase tag;
    GroupClosure normal;
    u64 index;
};

/// Maximal normal pro-l subgroup N(G) of G inside SL2, at precision N.
inline ProLStructure max_normal_pro_ell(const GroupClosure& g, u64 cap = default_cap) {
    const PadicContext& ctx = g.context();
    const u64 p = ctx.prime();
    if (!g.is_sl2_subset()) throw PreconditionViolated("max_normal_pro_ell: G must lie in SL2");
    GroupClosure j = reduce(g, 1);
    auto kernel = [&] {
        return filter_subgroup(g, [p](const Mat2& x) { return is_identity_mod(x, p); }, cap);
    };
    auto finish = [&](ProLCase tag, GroupClosure n) {
        const u64 index = g.size() / n.size();
        return ProLStructure{tag, std::move(n), index};
    };

    if (j.size() % p != 0) return finish(ProLCase::PrimeToEll, kernel());
    DicksonReport r = classify_mod_ell(j);
    if (r.cls == DicksonClass::Borel) {
        // Inside a Borel of SL2(F_l) the l-Sylow is the set of unipotents.
        const u64 two = 2 % p;
        return finish(ProLCase::BorelWithEll, filter_subgroup(g, [p, two](const Mat2& x) {
            return x.trace().residue() % p == two;
        }, cap));
    }
    if (r.cls == DicksonClass::ContainsSL2) return finish(ProLCase::FullSL2, kernel());
    throw CaseNotCovered("G(l) has order divisible by l but is neither Borel nor SL2");
}

} // namespace ladic
