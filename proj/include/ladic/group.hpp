#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "mat2.hpp"

namespace ladic {

inline constexpr u64 default_cap = u64{1} << 24;

namespace detail {

/// Products of packed codes with the modulus fixed up front.
class CodeArith {
public:
    explicit CodeArith(u64 modulus)
        : m_(modulus), pow2_((modulus & (modulus - 1)) == 0), mask_(modulus - 1) {}

    u64 mod(u64 x) const { return pow2_ ? (x & mask_) : (x % m_); }

    u64 mul(u64 x, u64 y) const {
        const u64 a = x >> 48, b = (x >> 32) & 0xffff, c = (x >> 16) & 0xffff, d = x & 0xffff;
        const u64 e = y >> 48, f = (y >> 32) & 0xffff, g = (y >> 16) & 0xffff, h = y & 0xffff;
        return (mod(a * e + b * g) << 48) | (mod(a * f + b * h) << 32) |
               (mod(c * e + d * g) << 16) | mod(c * f + d * h);
    }

    /// Reduce every entry of a code modulo l^n (n <= N).
    static u64 reduce_code(u64 x, u64 mn) {
        return ((x >> 48) % mn) << 48 | (((x >> 32) & 0xffff) % mn) << 32 |
               (((x >> 16) & 0xffff) % mn) << 16 | ((x & 0xffff) % mn);
    }

private:
    u64 m_;
    bool pow2_;
    u64 mask_;
};

/// Open-addressing set of 64-bit codes. All-ones is never a group element
/// (its determinant is zero), so it marks empty slots.
class CodeSet {
public:
    static constexpr u64 empty = ~u64{0};

    CodeSet() { rehash(64); }

    bool contains(u64 x) const {
        for (u64 i = slot(x);; i = (i + 1) & mask_) {
            if (slots_[i] == x) return true;
            if (slots_[i] == empty) return false;
        }
    }

    bool insert(u64 x) {
        if (2 * (count_ + 1) > slots_.size()) rehash(slots_.size() * 2);
        for (u64 i = slot(x);; i = (i + 1) & mask_) {
            if (slots_[i] == x) return false;
            if (slots_[i] == empty) {
                slots_[i] = x;
                ++count_;
                return true;
            }
        }
    }

    void reserve(std::size_t n) {
        std::size_t cap = 64;
        while (cap < 2 * n) cap *= 2;
        if (cap > slots_.size()) rehash(cap);
    }

    std::size_t size() const { return count_; }

private:
    static u64 mix(u64 x) {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }
    u64 slot(u64 x) const { return mix(x) & mask_; }

    void rehash(std::size_t cap) {
        std::vector<u64> old = std::move(slots_);
        slots_.assign(cap, empty);
        mask_ = cap - 1;
        count_ = 0;
        for (u64 x : old)
            if (x != empty) insert(x);
    }

    std::vector<u64> slots_;
    u64 mask_ = 0;
    std::size_t count_ = 0;
};

inline void check_group_context(const PadicContext& ctx) {
    if (ctx.modulus() > max_group_modulus)
        throw InvalidParams("l^N = " + std::to_string(ctx.modulus()) + " exceeds the 2^16 group modulus limit");
}

inline unsigned default_threads() {
    unsigned t = std::thread::hardware_concurrency();
    return t == 0 ? 1 : t;
}

} // namespace detail

class GroupClosure;

/// Incremental closure by Dimino's method: adding a generator extends the
/// current group K by whole right cosets K*e.
class ClosureBuilder {
public:
    explicit ClosureBuilder(const PadicContext& ctx, u64 cap = default_cap, unsigned threads = 0)
        : ctx_(ctx), arith_(ctx.modulus()), cap_(cap),
          threads_(threads == 0 ? detail::default_threads() : threads) {
        detail::check_group_context(ctx);
        const u64 id = Mat2::identity(ctx).code();
        elems_.push_back(id);
        set_.insert(id);
    }

    const PadicContext& context() const { return ctx_; }
    bool contains(u64 code) const { return set_.contains(code); }
    bool contains(const Mat2& g) const { return set_.contains(g.code()); }
    std::size_t size() const { return elems_.size(); }
    const std::vector<Mat2>& generators() const { return gens_; }
    const std::vector<u64>& elements() const { return elems_; }

    /// Returns true when g was new and the group grew.
    bool add_generator(const Mat2& g) {
        if (!(g.context() == ctx_)) throw PreconditionViolated("generator context mismatch");
        if (!g.invertible()) throw PreconditionViolated("generator not invertible: " + g.to_string());
        if (contains(g)) return false;
        gens_.push_back(g);
        std::vector<u64> gen_codes;
        for (const Mat2& s : gens_) gen_codes.push_back(s.code());

        const std::size_t m = elems_.size();
        std::vector<u64> reps{elems_.front()};
        for (std::size_t pos = 0; pos < reps.size(); ++pos) {
            for (u64 s : gen_codes) {
                const u64 e = arith_.mul(reps[pos], s);
                if (set_.contains(e)) continue;
                add_coset(m, e);
                reps.push_back(e);
            }
        }
        return true;
    }

    GroupClosure build(std::vector<Mat2> generators) const;
    GroupClosure build() const;

private:
    void add_coset(std::size_t m, u64 e) {
        const std::size_t base = elems_.size();
        if (base + m > cap_) throw CapExceeded(cap_);
        elems_.resize(base + m);
        set_.reserve(base + m);
        auto fill = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) elems_[base + i] = arith_.mul(elems_[i], e);
        };
        if (threads_ > 1 && m >= (std::size_t{1} << 15)) {
            std::vector<std::thread> pool;
            const std::size_t chunk = (m + threads_ - 1) / threads_;
            for (unsigned t = 0; t < threads_; ++t) {
                std::size_t lo = t * chunk, hi = std::min(m, lo + chunk);
                if (lo < hi) pool.emplace_back(fill, lo, hi);
            }
            for (auto& th : pool) th.join();
        } else {
            fill(0, m);
        }
        for (std::size_t i = base; i < base + m; ++i) set_.insert(elems_[i]);
    }

    PadicContext ctx_;
    detail::CodeArith arith_;
    u64 cap_;
    unsigned threads_;
    std::vector<u64> elems_;
    detail::CodeSet set_;
    std::vector<Mat2> gens_;
};

/// A finite subgroup of GL2(Z/l^N) stored as its sorted element codes.
class GroupClosure {
public:
    GroupClosure(const PadicContext& ctx, std::vector<Mat2> generators, std::vector<u64> sorted_codes)
        : ctx_(ctx), gens_(std::move(generators)), codes_(std::move(sorted_codes)) {
        const u64 m = ctx_.modulus();
        sl2_ = std::all_of(codes_.begin(), codes_.end(), [&](u64 c) {
            return Mat2::from_code(ctx_, c).det().residue() == 1 % m;
        });
        mod2_ = ctx_.prime() == 2 && std::all_of(codes_.begin(), codes_.end(), [](u64 c) {
            return ((c >> 48) & 1) == 1 && ((c >> 32) & 1) == 0 && ((c >> 16) & 1) == 0 && (c & 1) == 1;
        });
    }

    /// Builds a group from an explicit element set, choosing a generating
    /// set greedily in key order.
    static GroupClosure from_codes(const PadicContext& ctx, std::vector<u64> codes, u64 cap = default_cap) {
        std::sort(codes.begin(), codes.end());
        codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
        ClosureBuilder b(ctx, std::max<u64>(cap, codes.size()), 1);
        for (u64 c : codes)
            if (!b.contains(c)) b.add_generator(Mat2::from_code(ctx, c));
        if (b.size() != codes.size()) throw PreconditionViolated("element set is not a group");
        return GroupClosure(ctx, b.generators(), std::move(codes));
    }

    const PadicContext& context() const { return ctx_; }
    u64 prime() const { return ctx_.prime(); }
    int precision() const { return ctx_.precision(); }
    const std::vector<Mat2>& generators() const { return gens_; }
    const std::vector<u64>& codes() const { return codes_; }
    std::size_t size() const { return codes_.size(); }
    bool is_sl2_subset() const { return sl2_; }
    bool mod2_trivial() const { return mod2_; }

    Mat2 element(std::size_t i) const { return Mat2::from_code(ctx_, codes_[i]); }
    bool contains(u64 code) const { return std::binary_search(codes_.begin(), codes_.end(), code); }
    bool contains(const Mat2& g) const { return g.context() == ctx_ && contains(g.code()); }

    /// Canonical packed keys, ascending.
    std::vector<u64> keys() const {
        std::vector<u64> out;
        out.reserve(codes_.size());
        for (u64 c : codes_) out.push_back(Mat2::from_code(ctx_, c).key());
        return out;
    }

    template <class F>
    void for_each(F&& f) const {
        for (u64 c : codes_) f(Mat2::from_code(ctx_, c));
    }

    bool same_elements(const GroupClosure& o) const { return ctx_ == o.ctx_ && codes_ == o.codes_; }

private:
    PadicContext ctx_;
    std::vector<Mat2> gens_;
    std::vector<u64> codes_;
    bool sl2_ = false;
    bool mod2_ = false;
};

inline GroupClosure ClosureBuilder::build(std::vector<Mat2> generators) const {
    std::vector<u64> codes = elems_;
    std::sort(codes.begin(), codes.end());
    return GroupClosure(ctx_, std::move(generators), std::move(codes));
}

inline GroupClosure ClosureBuilder::build() const { return build(gens_); }

/// Subgroup of GL2(Z/l^N) generated by the given matrices.
inline GroupClosure close(const PadicContext& ctx, const std::vector<Mat2>& generators,
                          u64 cap = default_cap, unsigned threads = 0) {
    ClosureBuilder b(ctx, cap, threads);
    for (const Mat2& g : generators) b.add_generator(g);
    return b.build(generators);
}

inline GroupClosure close(const std::vector<Mat2>& generators, u64 cap = default_cap, unsigned threads = 0) {
    if (generators.empty()) throw PreconditionViolated("close: need a context; pass it explicitly");
    return close(generators.front().context(), generators, cap, threads);
}

/// Generators of the units 1 + l^n Z modulo l^N, written as c with D_c = diag(1+c, 1/(1+c)).
inline std::vector<i64> unit_congruence_generators(const PadicContext& ctx, int n) {
    if (ctx.prime() == 2 && n == 1) return {-2, 4};
    return {static_cast<i64>(ctx.power(n))};
}

/// B_l(n) = { x in SL2 : x = Id mod l^n }, by direct enumeration.
inline GroupClosure congruence_subgroup(const PadicContext& ctx, int n, u64 cap = default_cap) {
    detail::check_group_context(ctx);
    const int big_n = ctx.precision();
    if (n < 1 || n > big_n) throw PreconditionViolated("congruence_subgroup: need 1 <= n <= N");
    const u64 m = ctx.modulus();
    const u64 step = ctx.power(n);
    const u64 count = ctx.power(big_n - n);
    if (count * count * count > cap) throw CapExceeded(cap);

    std::vector<u64> codes;
    codes.reserve(count * count * count);
    for (u64 i = 0; i < count; ++i) {
        const u64 a = (1 + i * step) % m;
        const u64 a_inv = inverse_mod(a, m);
        for (u64 j = 0; j < count; ++j) {
            const u64 b = j * step;
            for (u64 k = 0; k < count; ++k) {
                const u64 c = k * step;
                const u64 d = mul_mod((1 + mul_mod(b, c, m)) % m, a_inv, m);
                codes.push_back((a << 48) | (b << 32) | (c << 16) | d);
            }
        }
    }
    std::sort(codes.begin(), codes.end());

    std::vector<Mat2> gens;
    if (n < big_n) {
        gens.push_back(lower_unipotent(ctx, static_cast<i64>(step)));
        gens.push_back(upper_unipotent(ctx, static_cast<i64>(step)));
        for (i64 c : unit_congruence_generators(ctx, n)) gens.push_back(diagonal_unit(ctx, c));
    }
    return GroupClosure(ctx, std::move(gens), std::move(codes));
}

/// Full SL2(Z/l^N); SL2(Z) surjects onto it and is generated by the unipotents.
inline GroupClosure special_linear_group(const PadicContext& ctx, u64 cap = default_cap) {
    return close(ctx, {upper_unipotent(ctx, 1), lower_unipotent(ctx, 1)}, cap);
}

/// Derived subgroup: closure of the commutators of generator pairs, then
/// normal closure under conjugation by the generators of G. The result H is
/// normal with G/H abelian, hence contains every commutator [g, h].
inline GroupClosure derived_subgroup(const GroupClosure& g, u64 cap = default_cap, unsigned threads = 0) {
    const PadicContext& ctx = g.context();
    ClosureBuilder h(ctx, cap, threads);
    const auto& gens = g.generators();
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i + 1; j < gens.size(); ++j) h.add_generator(commutator(gens[i], gens[j]));

    std::vector<Mat2> inv;
    for (const Mat2& x : gens) inv.push_back(x.inverse());
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t k = 0; k < h.generators().size(); ++k) {
            const Mat2 y = h.generators()[k];
            for (std::size_t i = 0; i < gens.size(); ++i) {
                if (h.add_generator(gens[i] * y * inv[i])) changed = true;
            }
        }
    }
    return h.build();
}

/// Image of G modulo l^m.
inline GroupClosure reduce(const GroupClosure& g, int m) {
    if (m < 1 || m > g.precision()) throw PreconditionViolated("reduce: need 1 <= m <= N");
    if (m == g.precision()) return g;
    PadicContext cm = g.context().with_precision(m);
    const u64 mn = cm.modulus();
    std::vector<u64> codes;
    codes.reserve(g.size());
    for (u64 c : g.codes()) codes.push_back(detail::CodeArith::reduce_code(c, mn));
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    std::vector<Mat2> gens;
    for (const Mat2& x : g.generators()) gens.push_back(x.reduced(m));
    return GroupClosure(cm, std::move(gens), std::move(codes));
}

inline bool is_identity_mod(const Mat2& x, u64 mn) {
    return x.a() % mn == 1 % mn && x.b() % mn == 0 && x.c() % mn == 0 && x.d() % mn == 1 % mn;
}

/// True iff every element of B_l(n) (mod l^N) lies in G. Counts the elements
/// of G that are Id mod l^n with determinant 1 and compares with l^(3(N-n)).
inline bool contains_congruence(const GroupClosure& g, int n) {
    const PadicContext& ctx = g.context();
    if (n < 1 || n > ctx.precision()) throw PreconditionViolated("contains_congruence: need 1 <= n <= N");
    const u64 mn = ctx.power(n);
    const u64 side = ctx.power(ctx.precision() - n);
    const u64 want = side * side * side;
    u64 have = 0;
    for (u64 c : g.codes()) {
        Mat2 x = Mat2::from_code(ctx, c);
        if (is_identity_mod(x, mn) && x.det().residue() == 1 % ctx.modulus()) ++have;
    }
    return have == want;
}

/// An element of B_l(n) missing from G, if any (re-checkable witness).
inline std::optional<Mat2> missing_congruence_element(const GroupClosure& g, int n, u64 cap = default_cap) {
    GroupClosure b = congruence_subgroup(g.context(), n, cap);
    for (u64 c : b.codes())
        if (!g.contains(c)) return Mat2::from_code(g.context(), c);
    return std::nullopt;
}

/// Smallest n in [1, N] with B_l(n) inside G.
inline int congruence_level(const GroupClosure& g) {
    for (int n = 1; n <= g.precision(); ++n)
        if (contains_congruence(g, n)) return n;
    return g.precision();
}

/// Subgroup of elements satisfying pred (the caller guarantees closure).
inline GroupClosure filter_subgroup(const GroupClosure& g, const std::function<bool(const Mat2&)>& pred,
                                    u64 cap = default_cap) {
    std::vector<u64> codes;
    for (u64 c : g.codes())
        if (pred(Mat2::from_code(g.context(), c))) codes.push_back(c);
    return GroupClosure::from_codes(g.context(), std::move(codes), cap);
}

/// Order of an invertible matrix; bounded by |GL2(Z/l^N)|.
inline u64 element_order(const Mat2& x) {
    const Mat2 id = Mat2::identity(x.context());
    Mat2 y = x;
    u64 k = 1;
    while (!(y == id)) {
        y = y * x;
        ++k;
    }
    return k;
}

inline bool is_abelian(const GroupClosure& g) {
    const auto& gens = g.generators();
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i + 1; j < gens.size(); ++j)
            if (!(gens[i] * gens[j] == gens[j] * gens[i])) return false;
    return true;
}

} // namespace ladic
