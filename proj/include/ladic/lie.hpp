#pragma once

#include <array>
#include <vector>

#include "group.hpp"

namespace ladic {

namespace detail {

// Traceless matrices are handled as coordinate vectors (m21, m11, m12).
using Vec3 = std::array<u64, 3>;

inline Vec3 to_coords(const Mat2& x) { return {x.c(), x.a(), x.b()}; }

inline Mat2 from_coords(const PadicContext& ctx, const Vec3& v) {
    const u64 m = ctx.modulus();
    return Mat2::from_residues(ctx, {v[1], v[2], v[0], (m - v[1]) % m});
}

inline bool is_zero(const Vec3& v) { return v[0] == 0 && v[1] == 0 && v[2] == 0; }

} // namespace detail

/// Triangular basis x1 (general), x2 (upper triangular), x3 (strictly upper).
/// A missing vector is zero and its pivot valuation is bottom.
struct ReducedBasis {
    std::array<Mat2, 3> x;
    std::array<Valuation, 3> pivot;
    int rank = 0;

    const Mat2& x1() const { return x[0]; }
    const Mat2& x2() const { return x[1]; }
    const Mat2& x3() const { return x[2]; }
};

/// Elimination over Z/l^N with minimal-valuation pivots in coordinate order
/// (m21, m11, m12); ties go to the lowest index. After a pivot p of valuation
/// k is chosen, l^(N-k) * p (zero in the pivot column) joins the remaining
/// rows, so greedy reduction against the result decides membership.
inline ReducedBasis reduced_basis(const PadicContext& ctx, const std::vector<Mat2>& s) {
    const u64 m = ctx.modulus();
    const u64 p = ctx.prime();
    const int big_n = ctx.precision();
    std::vector<detail::Vec3> rows;
    for (const Mat2& x : s) {
        if (!(x.context() == ctx)) throw PreconditionViolated("reduced_basis: context mismatch");
        if (x.trace().residue() != 0) throw PreconditionViolated("reduced_basis: element not traceless");
        rows.push_back(detail::to_coords(x));
    }

    ReducedBasis out{{Mat2::zero(ctx), Mat2::zero(ctx), Mat2::zero(ctx)}, {}, 0};
    for (int col = 0; col < 3; ++col) {
        int best = -1;
        int best_v = big_n;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Valuation v = valuation_of(rows[i][col], p);
            if (v && *v < best_v) {
                best_v = *v;
                best = static_cast<int>(i);
            }
        }
        if (best < 0) continue;

        const detail::Vec3 piv = rows[best];
        rows.erase(rows.begin() + best);
        const u64 scale = ctx.power(best_v);
        const u64 piv_unit_inv = inverse_mod(piv[col] / scale, m);
        for (auto& r : rows) {
            if (r[col] == 0) continue;
            const u64 q = mul_mod(r[col] / scale, piv_unit_inv, m);
            for (int j = 0; j < 3; ++j) r[j] = (r[j] + m - mul_mod(q, piv[j], m)) % m;
        }
        if (best_v > 0) {
            const u64 f = ctx.power(big_n - best_v);
            detail::Vec3 extra{mul_mod(f, piv[0], m), mul_mod(f, piv[1], m), mul_mod(f, piv[2], m)};
            if (!detail::is_zero(extra)) rows.push_back(extra);
        }
        out.x[col] = detail::from_coords(ctx, piv);
        out.pivot[col] = best_v;
        ++out.rank;
    }
    return out;
}

/// A Z/l^N-submodule of sl2(Z/l^N) given by a spanning set.
class LieModule {
public:
    explicit LieModule(const PadicContext& ctx, std::vector<Mat2> span = {})
        : ctx_(ctx), span_(std::move(span)), basis_(reduced_basis(ctx_, span_)) {}

    const PadicContext& context() const { return ctx_; }
    const std::vector<Mat2>& spanning_set() const { return span_; }
    const ReducedBasis& basis() const { return basis_; }
    int rank() const { return basis_.rank; }

    bool contains(const Mat2& y) const {
        if (y.trace().residue() != 0) return false;
        const u64 m = ctx_.modulus();
        detail::Vec3 v = detail::to_coords(y);
        for (int col = 0; col < 3; ++col) {
            if (v[col] == 0) continue;
            if (!basis_.pivot[col]) return false;
            const int k = *basis_.pivot[col];
            Valuation vv = valuation_of(v[col], ctx_.prime());
            if (*vv < k) return false;
            const detail::Vec3 piv = detail::to_coords(basis_.x[col]);
            const u64 scale = ctx_.power(k);
            const u64 q = mul_mod(v[col] / scale, inverse_mod(piv[col] / scale, m), m);
            for (int j = 0; j < 3; ++j) v[j] = (v[j] + m - mul_mod(q, piv[j], m)) % m;
        }
        return detail::is_zero(v);
    }

    bool contains(const LieModule& o) const {
        for (const Mat2& x : o.basis_.x)
            if (!contains(x)) return false;
        return true;
    }

    bool same_module(const LieModule& o) const { return contains(o) && o.contains(*this); }

    /// Returns true when y enlarged the module.
    bool add(const Mat2& y) {
        if (contains(y)) return false;
        span_.push_back(y);
        basis_ = reduced_basis(ctx_, span_);
        return true;
    }

private:
    PadicContext ctx_;
    std::vector<Mat2> span_;
    ReducedBasis basis_;
};

/// L(G): span of Theta(g) over every element of G. Elements whose image
/// already lies in the module are skipped, so the spanning set stays short.
inline LieModule special_lie_algebra(const GroupClosure& g) {
    LieModule lie(g.context());
    for (u64 c : g.codes()) lie.add(theta(Mat2::from_code(g.context(), c)));
    return lie;
}

/// k(L) = min valuation of the bottom-left entry over L.
inline Valuation k_of(const LieModule& lie) { return lie.basis().pivot[0]; }

/// Number of reduced-basis vectors that are nonzero mod l^n.
inline int j_n(const LieModule& lie, int n) {
    if (n < 0 || n > lie.context().precision()) throw PreconditionViolated("j_n: need 0 <= n <= N");
    const u64 mn = lie.context().power(n);
    int count = 0;
    for (const Mat2& x : lie.basis().x)
        if (x.a() % mn || x.b() % mn || x.c() % mn || x.d() % mn) ++count;
    return count;
}

/// l^s E12, l^s E21, l^s (E11 - E22).
inline std::array<Mat2, 3> scaled_sl2_basis(const PadicContext& ctx, int s) {
    const i64 q = static_cast<i64>(ctx.power(s));
    return {Mat2(ctx, 0, q, 0, 0), Mat2(ctx, 0, 0, q, 0), Mat2(ctx, q, 0, 0, -q)};
}

inline bool contains_scaled_sl2(const LieModule& lie, int s) {
    if (s < 0) throw PreconditionViolated("contains_scaled_sl2: s < 0");
    if (s >= lie.context().precision()) throw InsufficientPrecision(s + 1);
    for (const Mat2& x : scaled_sl2_basis(lie.context(), s))
        if (!lie.contains(x)) return false;
    return true;
}

/// Smallest s < N with l^s sl2 inside L, if any.
inline std::optional<int> min_scaled_sl2(const LieModule& lie) {
    for (int s = 0; s < lie.context().precision(); ++s)
        if (contains_scaled_sl2(lie, s)) return s;
    return std::nullopt;
}

/// Valuation of the ideal generated by tr(xy), x, y in L.
inline Valuation trace_ideal(const LieModule& lie) {
    Valuation best;
    const auto& x = lie.basis().x;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            Valuation v = valuation((x[i] * x[j]).trace());
            if (v && (!best || *v < *best)) best = v;
        }
    return best;
}

/// [L, L], spanned by brackets of basis vectors.
inline LieModule bracket_module(const LieModule& lie) {
    const auto& x = lie.basis().x;
    return LieModule(lie.context(), {bracket(x[0], x[1]), bracket(x[0], x[2]), bracket(x[1], x[2])});
}

/// H2 = { x in SL2 : Theta(x) in [L,L], tr(x) - 2 in C(G) } for a pro-l
/// group G in SL2, l odd. Both conditions force x = Id mod l, so only the
/// first congruence subgroup is scanned.
inline GroupClosure pink_derived(const GroupClosure& g, u64 cap = default_cap) {
    const PadicContext& ctx = g.context();
    if (ctx.prime() == 2) throw PreconditionViolated("pink_derived: l must be odd");
    if (!g.is_sl2_subset()) throw PreconditionViolated("pink_derived: G must lie in SL2");
    for (u64 c : g.codes())
        if (!is_identity_mod(Mat2::from_code(ctx, c), ctx.prime()))
            throw PreconditionViolated("pink_derived: G is not pro-l");
    if (ctx.precision() == 1) return g;

    LieModule lie = special_lie_algebra(g);
    LieModule derived = bracket_module(lie);
    Valuation c = trace_ideal(lie);
    const PadicInt two(ctx, 2);

    // Truncation can leave the filtered set just short of a group, so the
    // result is the group it generates.
    ClosureBuilder h(ctx, cap, 1);
    const GroupClosure b1 = congruence_subgroup(ctx, 1, cap);
    for (u64 code : b1.codes()) {
        Mat2 x = Mat2::from_code(ctx, code);
        Valuation vt = valuation(x.trace() - two);
        if (vt && (!c || *vt < *c)) continue;
        if (h.contains(code) || !derived.contains(theta(x))) continue;
        h.add_generator(x);
    }
    return h.build();
}

} // namespace ladic
