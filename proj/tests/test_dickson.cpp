#include <gtest/gtest.h>

#include <random>
#include <set>

#include "ladic/dickson.hpp"
#include "ladic/lie.hpp"

using namespace ladic;

namespace {

std::vector<Mat2> all_gl2(const PadicContext& ctx) {
    std::vector<Mat2> out;
    const u64 m = ctx.modulus();
    for (u64 a = 0; a < m; ++a)
        for (u64 b = 0; b < m; ++b)
            for (u64 c = 0; c < m; ++c)
                for (u64 d = 0; d < m; ++d) {
                    Mat2 x = Mat2::from_residues(ctx, {a, b, c, d});
                    if (x.invertible()) out.push_back(x);
                }
    return out;
}

std::vector<Mat2> all_sl2(const PadicContext& ctx) {
    std::vector<Mat2> out;
    for (const Mat2& x : all_gl2(ctx))
        if (x.det().residue() == 1) out.push_back(x);
    return out;
}

// Independent re-check of a report against every element of J.
::testing::AssertionResult witness_holds(const GroupClosure& j, const DicksonReport& r) {
    const PadicContext& ctx = j.context();
    bool ok = true;
    std::string why;
    auto fail = [&](const std::string& w) { ok = false; why = w; };
    switch (r.cls) {
    case DicksonClass::Borel:
        if (r.lines.size() != 1) fail("no line");
        else j.for_each([&](const Mat2& x) { if (!fixes_line(x, r.lines[0])) fail("line moved"); });
        break;
    case DicksonClass::SplitCartan:
        if (r.lines.size() != 2 || r.lines[0] == r.lines[1]) fail("lines");
        else j.for_each([&](const Mat2& x) {
            if (!fixes_line(x, r.lines[0]) || !fixes_line(x, r.lines[1])) fail("line moved");
        });
        break;
    case DicksonClass::NormalizerSplitCartan:
        if (r.lines.size() != 2 || r.lines[0] == r.lines[1]) fail("lines");
        else j.for_each([&](const Mat2& x) {
            Line a = apply_line(x, r.lines[0]), b = apply_line(x, r.lines[1]);
            if (!((a == r.lines[0] && b == r.lines[1]) || (a == r.lines[1] && b == r.lines[0]))) fail("pair moved");
        });
        break;
    case DicksonClass::NonsplitCartan:
    case DicksonClass::NormalizerNonsplitCartan: {
        if (!r.cartan_element || !irreducible_charpoly(*r.cartan_element)) {
            fail("cartan element");
            break;
        }
        const Mat2 c = *r.cartan_element;
        const Mat2 bar = Mat2::scalar(ctx, c.trace().residue()) - c;
        j.for_each([&](const Mat2& x) {
            Mat2 y = x * c * x.inverse();
            if (r.cls == DicksonClass::NonsplitCartan ? !(y == c) : !(y == c || y == bar)) fail("not normalized");
        });
        break;
    }
    case DicksonClass::Exceptional: {
        u64 po = projective_data(j).order;
        if (po != 12 && po != 24 && po != 60) fail("projective order");
        if (j.size() % ctx.prime() == 0) fail("order divisible by l");
        break;
    }
    case DicksonClass::ContainsSL2:
        for (const Mat2& x : all_sl2(ctx))
            if (!j.contains(x)) {
                fail("missing SL2 element");
                break;
            }
        break;
    }
    if (ok) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << to_string(r.cls) << ": " << why << " |J|=" << j.size();
}

// Largest abelian subgroup of PJ, by brute force over pairs.
u64 max_abelian_projective(const GroupClosure& j) {
    const PadicContext& ctx = j.context();
    std::vector<Mat2> reps;
    std::set<u64> seen;
    j.for_each([&](const Mat2& x) {
        if (seen.count(x.code())) return;
        reps.push_back(x);
        for (u64 lam = 1; lam < ctx.prime(); ++lam) seen.insert(x.scaled(lam).code());
    });
    const u64 scalars = j.size() / reps.size();
    u64 best = 1;
    std::vector<Mat2> sc;
    for (u64 lam = 1; lam < ctx.prime(); ++lam) sc.push_back(Mat2::scalar(ctx, lam));
    for (const Mat2& x : reps)
        for (const Mat2& y : reps) {
            if (!commutator(x, y).is_scalar()) continue;
            std::vector<Mat2> gens{x, y};
            gens.insert(gens.end(), sc.begin(), sc.end());
            auto h = close(ctx, gens);
            u64 hs = 0;
            h.for_each([&](const Mat2& z) { if (z.is_scalar()) ++hs; });
            best = std::max<u64>(best, h.size() / hs);
        }
    (void)scalars;
    return best;
}

} // namespace

// ---------------------------------------------------------------------------
// classify_mod_ell
// ---------------------------------------------------------------------------

TEST(Classify, SplitCartanDiagonal) {
    PadicContext ctx(5, 1);
    auto j = close(ctx, {Mat2(ctx, 2, 0, 0, 1), Mat2(ctx, 1, 0, 0, 2)});
    EXPECT_EQ(j.size(), 16u);
    DicksonReport r = classify_mod_ell(j);
    EXPECT_EQ(r.cls, DicksonClass::SplitCartan);
    EXPECT_TRUE(witness_holds(j, r));
}

TEST(Classify, NonsplitCartanAtThree) {
    // [[a, 2b], [b, a]]: F_9^x with eps = 2 a nonresidue mod 3.
    PadicContext ctx(3, 1);
    std::vector<Mat2> gens;
    for (i64 a = 0; a < 3; ++a)
        for (i64 b = 0; b < 3; ++b)
            if (a || b) gens.push_back(Mat2(ctx, a, 2 * b, b, a));
    auto j = close(ctx, gens);
    EXPECT_EQ(j.size(), 8u);
    DicksonReport r = classify_mod_ell(j);
    EXPECT_EQ(r.cls, DicksonClass::NonsplitCartan);
    EXPECT_TRUE(witness_holds(j, r));
}

TEST(Classify, SL2F5) {
    PadicContext ctx(5, 1);
    auto j = special_linear_group(ctx);
    EXPECT_EQ(j.size(), 120u);
    DicksonReport r = classify_mod_ell(j);
    EXPECT_EQ(r.cls, DicksonClass::ContainsSL2);
    EXPECT_EQ(r.projective_order, 60u);
}

TEST(Classify, RejectsHigherPrecision) {
    PadicContext ctx(5, 2);
    EXPECT_THROW(classify_mod_ell(close(ctx, {Mat2::identity(ctx)})), PreconditionViolated);
}

TEST(Classify, ExhaustiveAtThree) {
    PadicContext ctx(3, 1);
    auto gl = all_gl2(ctx);
    ASSERT_EQ(gl.size(), 48u);
    std::set<std::vector<u64>> seen;
    std::map<DicksonClass, int> counts;
    for (const Mat2& x : gl)
        for (const Mat2& y : gl) {
            auto j = close(ctx, {x, y});
            if (!seen.insert(j.codes()).second) continue;
            DicksonReport r = classify_mod_ell(j);
            ++counts[r.cls];
            EXPECT_TRUE(witness_holds(j, r));
            if (j.size() % 3 == 0)
                EXPECT_TRUE(r.cls == DicksonClass::ContainsSL2 || r.cls == DicksonClass::Borel);
        }
    EXPECT_GT(seen.size(), 20u);
    for (DicksonClass c : {DicksonClass::SplitCartan, DicksonClass::NonsplitCartan,
                           DicksonClass::NormalizerSplitCartan, DicksonClass::NormalizerNonsplitCartan,
                           DicksonClass::Borel, DicksonClass::ContainsSL2})
        EXPECT_GT(counts[c], 0) << to_string(c);
}

TEST(Classify, ExhaustiveAtTwo) {
    PadicContext ctx(2, 1);
    auto gl = all_gl2(ctx);
    for (const Mat2& x : gl)
        for (const Mat2& y : gl) {
            auto j = close(ctx, {x, y});
            DicksonReport r = classify_mod_ell(j);
            EXPECT_TRUE(witness_holds(j, r));
        }
}

TEST(Classify, RandomPairsWitnessesAndExceptionalTypes) {
    std::mt19937_64 rng(61);
    std::set<ExceptionalType> types;
    for (u64 p : {5, 7, 11}) {
        PadicContext ctx(p, 1);
        auto sl = all_sl2(ctx);
        auto gl = all_gl2(ctx);
        for (int t = 0; t < 400; ++t) {
            const auto& pool = (t % 2) ? sl : gl;
            auto j = close(ctx, {pool[rng() % pool.size()], pool[rng() % pool.size()]});
            DicksonReport r = classify_mod_ell(j);
            EXPECT_TRUE(witness_holds(j, r));
            if (j.size() % p == 0) EXPECT_TRUE(r.cls == DicksonClass::ContainsSL2 || r.cls == DicksonClass::Borel);
            if (r.cls == DicksonClass::Exceptional) {
                types.insert(r.exceptional);
                u64 limit = r.exceptional == ExceptionalType::A5 ? 5 : 4;
                if (types.size() <= 3) EXPECT_LE(max_abelian_projective(j), limit);
            }
        }
    }
    EXPECT_TRUE(types.count(ExceptionalType::S4));
    EXPECT_TRUE(types.count(ExceptionalType::A5));
}

// ---------------------------------------------------------------------------
// projective data
// ---------------------------------------------------------------------------

TEST(ProjectiveData, Examples) {
    PadicContext ctx(5, 1);
    EXPECT_EQ(projective_data(close(ctx, {Mat2::scalar(ctx, 2)})).order, 1u);
    PadicContext c3(3, 1);
    EXPECT_EQ(projective_data(special_linear_group(c3)).order, 12u);
    EXPECT_THROW(projective_data(special_linear_group(PadicContext(3, 2))), PreconditionViolated);
}

// ---------------------------------------------------------------------------
// saturation and det-1 part
// ---------------------------------------------------------------------------

TEST(Saturate, Examples) {
    PadicContext c31(3, 1);
    auto s = saturate(close(c31, {Mat2::identity(c31)}));
    EXPECT_EQ(s.size(), 2u);
    PadicContext ctx(5, 2);
    auto g = close(ctx, {Mat2(ctx, 1, 5, 0, 1), Mat2(ctx, 2, 0, 0, 13)});
    auto sat = saturate(g);
    EXPECT_TRUE(saturate(sat).same_elements(sat));
    for (u64 u = 1; u < 25; ++u)
        if (u % 5) EXPECT_TRUE(sat.contains(Mat2::scalar(ctx, u)));
}

TEST(Saturate, UnitGeneratorsGenerate) {
    for (u64 p : {2, 3, 5, 7}) {
        for (int n = 1; n <= 4; ++n) {
            PadicContext ctx(p, n);
            std::set<u64> got{1 % ctx.modulus()};
            std::vector<u64> frontier{1 % ctx.modulus()};
            auto gens = unit_group_generators(ctx);
            while (!frontier.empty()) {
                u64 x = frontier.back();
                frontier.pop_back();
                for (u64 g : gens) {
                    u64 y = mul_mod(x, g, ctx.modulus());
                    if (got.insert(y).second) frontier.push_back(y);
                }
            }
            EXPECT_EQ(got.size(), ctx.modulus() - ctx.modulus() / p) << p << " " << n;
        }
    }
}

TEST(Saturate, CommutesWithReduction) {
    std::mt19937_64 rng(67);
    for (u64 p : {3, 5}) {
        PadicContext ctx(p, 2);
        auto gl = all_gl2(PadicContext(p, 1));
        for (int t = 0; t < 20; ++t) {
            Mat2 a = Mat2::from_residues(ctx, gl[rng() % gl.size()].residues());
            Mat2 b = upper_unipotent(ctx, static_cast<i64>(p * (rng() % p)));
            auto g = close(ctx, {a, b});
            EXPECT_TRUE(reduce(saturate(g), 1).same_elements(saturate(reduce(g, 1))));
        }
    }
}

TEST(Det1Part, Examples) {
    PadicContext ctx(5, 1);
    auto gl = close(ctx, {Mat2(ctx, 2, 0, 0, 1), Mat2(ctx, 1, 1, 0, 1), Mat2(ctx, 0, 1, 1, 0)});
    EXPECT_EQ(gl.size(), 480u);
    EXPECT_EQ(det1_part(gl).size(), 120u);
    auto sl = special_linear_group(PadicContext(3, 2));
    EXPECT_TRUE(det1_part(sl).same_elements(sl));
}

TEST(Det1Part, SaturationBijection) {
    // H containing -Id with square determinants: Sat(Sat(H)^{det=1}) = Sat(H).
    std::mt19937_64 rng(71);
    PadicContext ctx(3, 2);
    for (int t = 0; t < 20; ++t) {
        Mat2 a = upper_unipotent(ctx, static_cast<i64>(rng() % 9)) * Mat2(ctx, 4, 0, 0, 1);
        Mat2 b = lower_unipotent(ctx, 3 * static_cast<i64>(rng() % 3));
        auto h = close(ctx, {a, b, -Mat2::identity(ctx)});
        auto sat = saturate(h);
        EXPECT_TRUE(saturate(det1_part(sat)).same_elements(sat));
        EXPECT_TRUE(special_lie_algebra(sat).same_module(special_lie_algebra(h)));
        EXPECT_TRUE(special_lie_algebra(det1_part(sat)).same_module(special_lie_algebra(h)));
    }
}

TEST(Det1Part, CommutesWithReductionAfterSaturation) {
    std::mt19937_64 rng(73);
    for (u64 p : {3, 5}) {
        PadicContext ctx(p, 2);
        auto gl = all_gl2(PadicContext(p, 1));
        for (int t = 0; t < 20; ++t) {
            Mat2 a = Mat2::from_residues(ctx, gl[rng() % gl.size()].residues());
            Mat2 b = lower_unipotent(ctx, static_cast<i64>(p * (rng() % p)));
            auto sat = saturate(close(ctx, {a, b}));
            auto lhs = det1_part(reduce(sat, 1));
            auto rhs = reduce(det1_part(sat), 1);
            EXPECT_TRUE(lhs.same_elements(rhs));
            EXPECT_TRUE(sat_det1_mod_ell(reduce(close(ctx, {a, b}), 1)).same_elements(rhs));
        }
    }
}

// ---------------------------------------------------------------------------
// Serre lift
// ---------------------------------------------------------------------------

TEST(SerreLift, FullModFiveLiftsToFullModTwentyFive) {
    std::mt19937_64 rng(79);
    PadicContext c1(5, 1), c2(5, 2);
    auto sl_mod25 = special_linear_group(c2);
    ASSERT_EQ(sl_mod25.size(), 15000u);
    int tried = 0;
    while (tried < 20) {
        std::vector<Mat2> gens;
        for (int i = 0; i < 2; ++i) {
            Mat2 x = Mat2::from_code(c2, sl_mod25.codes()[rng() % sl_mod25.size()]);
            gens.push_back(x);
        }
        std::vector<Mat2> low;
        for (const Mat2& x : gens) low.push_back(x.reduced(1));
        if (close(c1, low).size() != 120) continue;
        ++tried;
        EXPECT_TRUE(close(c2, gens).same_elements(sl_mod25));
    }
}

// ---------------------------------------------------------------------------
// max_normal_pro_ell
// ---------------------------------------------------------------------------

TEST(MaxNormalProL, ProLGroupIsItsOwn) {
    PadicContext ctx(3, 3);
    auto g = congruence_subgroup(ctx, 1);
    auto s = max_normal_pro_ell(g);
    EXPECT_EQ(s.tag, ProLCase::PrimeToEll);
    EXPECT_TRUE(s.normal.same_elements(g));
    EXPECT_EQ(s.index, 1u);
}

TEST(MaxNormalProL, FullSL2ModNine) {
    PadicContext ctx(3, 2);
    auto s = max_normal_pro_ell(special_linear_group(ctx));
    EXPECT_EQ(s.tag, ProLCase::FullSL2);
    EXPECT_EQ(s.normal.size(), 27u);
    EXPECT_EQ(s.index, 24u);
    EXPECT_TRUE(s.normal.same_elements(congruence_subgroup(ctx, 1)));
}

TEST(MaxNormalProL, BorelIndexIsPrimeToLPart) {
    PadicContext ctx(5, 2);
    auto g = close(ctx, {Mat2(ctx, 2, 1, 0, 13), Mat2(ctx, 1, 1, 0, 1), Mat2(ctx, 1, 0, 5, 1)});
    ASSERT_TRUE(g.is_sl2_subset());
    auto j = reduce(g, 1);
    auto s = max_normal_pro_ell(g);
    EXPECT_EQ(s.tag, ProLCase::BorelWithEll);
    u64 sylow = 1;
    for (u64 n = j.size(); n % 5 == 0; n /= 5) sylow *= 5;
    EXPECT_EQ(s.index, j.size() / sylow);
}

TEST(MaxNormalProL, OutputIsNormalAndProL) {
    std::mt19937_64 rng(83);
    PadicContext ctx(3, 2);
    auto sl = special_linear_group(ctx);
    for (int t = 0; t < 30; ++t) {
        auto g = close(ctx, {sl.element(rng() % sl.size()), sl.element(rng() % sl.size())});
        auto s = max_normal_pro_ell(g);
        EXPECT_EQ(g.size() % s.normal.size(), 0u);
        // G/N(G) is prime to l except when G(l) is all of SL2(F_l).
        if (s.tag != ProLCase::FullSL2) EXPECT_NE(s.index % 3, 0u);
        else EXPECT_EQ(s.index, 24u);
        for (const Mat2& x : g.generators())
            s.normal.for_each([&](const Mat2& n) { EXPECT_TRUE(s.normal.contains(x * n * x.inverse())); });
        // pro-l: order is a power of l
        u64 n = s.normal.size();
        while (n % 3 == 0) n /= 3;
        EXPECT_EQ(n, 1u);
    }
}
