// ladic: group I/O, classification, Lie-algebra analysis, verification
// campaigns, fixtures and bound evaluation.
//
// Exit codes: 0 ok, 1 violation, 2 invalid input, 3 resource cap.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "ladic/bounds.hpp"
#include "ladic/dickson.hpp"
#include "ladic/group_io.hpp"
#include "ladic/lie.hpp"
#include "ladic/theorems.hpp"

using namespace ladic;

namespace {

enum Exit { Ok = 0, Violation = 1, Invalid = 2, Cap = 3 };

u64 env_u64(const char* name, u64 fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    try {
        return std::stoull(v);
    } catch (...) {
        throw InvalidParams(std::string(name) + " is not a number");
    }
}

/// "3.5", "-2", "7/2" or "1.25e3" as an exact rational.
mpq_class parse_rational(const std::string& s) {
    static const std::regex dec(R"(([+-]?)(\d*)(?:\.(\d*))?(?:[eE]([+-]?\d+))?)");
    static const std::regex frac(R"([+-]?\d+/\d+)");
    if (std::regex_match(s, frac)) {
        mpq_class q(s);
        if (q.get_den() == 0) throw InvalidParams("zero denominator in " + s);
        q.canonicalize();
        return q;
    }
    std::smatch m;
    if (!std::regex_match(s, m, dec) || (m[2].length() == 0 && m[3].length() == 0))
        throw InvalidParams("not a number: " + s);
    const std::string digits = m[2].str() + m[3].str();
    long exp = m[4].matched ? std::stol(m[4].str()) : 0;
    exp -= static_cast<long>(m[3].length());
    mpq_class q{mpz_class(digits.empty() ? "0" : digits)};
    q *= detail::pow10q(exp);
    if (m[1] == "-") q = -q;
    return q;
}

struct Common {
    u64 cap = default_cap;
    int digits = default_digits;
    unsigned threads = 0;
};

// ---------------------------------------------------------------------------
// bound

struct BoundArgs {
    long long degree = 1;
    std::string height = "1";
    int dim = 1;
    std::string formula = "adelic";
    std::string variant = "composed";
    long long d_ext = 1;
    u64 prime = 3;
    long long torsion = 0;
};

std::string params_text(const CurveParams& p, const BoundArgs& a) {
    std::ostringstream os;
    os << "degree=" << p.degree << " height=" << a.height << " dim=" << p.dim;
    return os.str();
}

int cmd_bound(const BoundArgs& a, const Common& c) {
    if (a.degree < 1) throw InvalidParams("degree must be at least 1");
    if (a.dim < 1) throw InvalidParams("dim must be at least 1");
    if (a.d_ext < 1) throw InvalidParams("d-ext must be at least 1");
    if (a.torsion < 0) throw InvalidParams("torsion order must be positive");
    CurveParams p;
    p.degree = static_cast<u64>(a.degree);
    p.height = parse_rational(a.height);
    p.dim = a.dim;
    const int d = c.digits;

    auto emit = [&](const std::string& formula, const std::string& extra, const LogMagnitude& m,
                    const char* field = "log10_upper") {
        std::cout << "formula=" << formula << " " << params_text(p, a) << extra << " " << field << "="
                  << m.log10_string() << " digit_budget=" << d << "\n";
    };

    LogMagnitude index;
    if (a.formula == "adelic") {
        AdelicVariant v;
        if (a.variant == "composed") v = AdelicVariant::Composed;
        else if (a.variant == "gamma12") v = AdelicVariant::Gamma12;
        else if (a.variant == "gamma34") v = AdelicVariant::Gamma34;
        else throw InvalidParams("unknown variant " + a.variant);
        index = adelic_index_bound(p, v, d);
        emit("adelic", " variant=" + a.variant, index);
    } else if (a.formula == "isogeny") {
        IsogenyVariant v = a.variant == "general" ? IsogenyVariant::General
                         : a.variant == "power"   ? IsogenyVariant::Power
                                                  : IsogenyVariant::Elliptic;
        if (a.variant != "general" && a.variant != "power" && a.variant != "elliptic")
            throw InvalidParams("isogeny variants: general, elliptic, power");
        emit("isogeny", " variant=" + a.variant, isogeny_bound(p, v, static_cast<int>(a.d_ext), d));
    } else if (a.formula == "b0") {
        B0Variant v = a.variant == "general" ? B0Variant::General
                    : a.variant == "e-square" ? B0Variant::ESquare
                                              : B0Variant::Elliptic;
        if (a.variant != "general" && a.variant != "e-square" && a.variant != "elliptic")
            throw InvalidParams("b0 variants: general, elliptic, e-square");
        emit("b0", " variant=" + a.variant + " d_ext=" + std::to_string(a.d_ext),
             b0_bound(p, static_cast<u64>(a.d_ext), v, d));
    } else if (a.formula == "psi") {
        emit("psi", "", psi_bound(p, d));
    } else if (a.formula == "d-infty") {
        emit("d-infty", "", d_infty_bound(p, d));
    } else if (a.formula == "d2") {
        emit("d2", "", d2_bound(p, d));
    } else if (a.formula == "general-index") {
        if (!is_prime(a.prime)) throw InvalidParams("prime expected");
        const auto r = general_index_bound(a.prime, p, d);
        emit("general-index", " prime=" + std::to_string(a.prime) + " n=" + std::to_string(r.n) +
                                  " level=" + std::to_string(r.level),
             r.d_ell);
        emit("index-divisor", " prime=" + std::to_string(a.prime), index_divisor_bound(a.prime, r.d_ell, d));
    } else {
        throw InvalidParams("unknown formula " + a.formula);
    }

    if (a.torsion > 0) {
        if (a.formula != "adelic") throw InvalidParams("--torsion needs the adelic formula");
        const auto t = torsion_degree_bound(index, static_cast<u64>(a.torsion), d);
        std::cout << "formula=torsion-degree " << params_text(p, a) << " variant=" << a.variant
                  << " order=" << a.torsion << " log10_lower=" << t.log10_string() << " digit_budget=" << d << "\n";
    }
    return Ok;
}

// ---------------------------------------------------------------------------
// classify / lie

GroupClosure load_group(const std::string& path, const Common& c, int precision_override = 0) {
    const GroupSpec spec = read_group_file(path);
    if (spec.generators.empty()) throw ParseError(path + ": no generators");
    const PadicContext full = spec.context();
    const PadicContext ctx = precision_override > 0 ? full.with_precision(precision_override) : full;
    auto gens = spec_generators(spec, full);
    for (auto& g : gens) g = g.reduced(ctx.precision());
    detail::check_group_context(ctx);
    return close(ctx, gens, c.cap, c.threads);
}

std::string line_text(const Line& v) { return "(" + std::to_string(v[0]) + ":" + std::to_string(v[1]) + ")"; }

int cmd_classify(const std::string& path, bool keys, const Common& c) {
    const GroupClosure j = load_group(path, c, 1);
    const DicksonReport r = classify_mod_ell(j);
    std::cout << "prime=" << j.prime() << " order=" << r.order << " projective_order=" << r.projective_order
              << " class=" << to_string(r.cls);
    if (r.cls == DicksonClass::Exceptional) std::cout << " exceptional=" << to_string(r.exceptional);
    for (const Line& v : r.lines) std::cout << " line=" << line_text(v);
    if (r.cartan_element) std::cout << " cartan_element=" << r.cartan_element->to_string();
    std::cout << "\n";
    if (keys) write_keys(std::cout, j);
    return Ok;
}

int cmd_lie(const std::string& path, int n, const Common& c) {
    const GroupSpec spec = read_group_file(path);
    const PadicContext ctx = spec.context();
    std::optional<LieModule> lie;
    std::string source;
    if (!spec.lie.empty()) {
        lie.emplace(ctx, to_matrices(ctx, spec.lie));
        source = "module";
    } else {
        const GroupClosure g = close(ctx, spec_generators(spec, ctx), c.cap, c.threads);
        lie.emplace(special_lie_algebra(g));
        source = "group order=" + std::to_string(g.size());
    }
    const auto& b = lie->basis();
    auto val = [](const Valuation& v) { return v ? std::to_string(*v) : std::string("bottom"); };
    std::cout << "prime=" << ctx.prime() << " precision=" << ctx.precision() << " source=" << source
              << " rank=" << lie->rank() << " k=" << val(k_of(*lie)) << " trace_ideal=" << val(trace_ideal(*lie))
              << "\n";
    for (int i = 0; i < 3; ++i)
        std::cout << "x" << (i + 1) << "=" << b.x[i].to_string() << " pivot=" << val(b.pivot[i]) << "\n";
    std::cout << "j_n";
    for (int m = 1; m <= ctx.precision(); ++m) std::cout << " " << m << ":" << j_n(*lie, m);
    std::cout << "\n";
    const auto smin = min_scaled_sl2(*lie);
    std::cout << "scaled_sl2";
    for (int s = 0; s < ctx.precision(); ++s) std::cout << " " << s << ":" << (contains_scaled_sl2(*lie, s) ? "yes" : "no");
    std::cout << " min=" << (smin ? std::to_string(*smin) : std::string("none")) << "\n";
    if (n > 0) std::cout << trichotomy_lie(*lie, n).to_line() << "\n";
    return Ok;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
    std::string theorem;
    std::string file;
    std::string fixture;
    u64 prime = 3;
    int precision = 0;
    int s = 0;
    int n = 0;
    int k = 0;
    int t = 0;
    u64 order = 0;
    u64 trials = 10;
    u64 seed = 0;
    bool until_applicable = false;
};

int report_exit(const std::vector<VerificationReport>& reports) {
    for (const auto& r : reports)
        if (r.outcome == Outcome::Violated) return Violation;
    return Ok;
}

int cmd_verify(const VerifyArgs& a, const Common& c) {
    static const std::set<std::string> tags{"star", "starstar", "sl2z2", "gl2z2", "trichotomy"};
    if (!tags.count(a.theorem)) throw InvalidParams("unknown theorem tag: " + a.theorem);
    const int param = a.theorem == "trichotomy" || a.theorem == "gl2z2" ? a.n : a.s;

    if (a.fixture == "optimal-lie") {
        if (a.theorem != "trichotomy") throw InvalidParams("optimal-lie is a trichotomy fixture");
        if (a.n < 1 || a.k < 0) throw InvalidParams("optimal-lie needs --n >= 1 and --k >= 0");
        const int big_n = a.precision > 0 ? a.precision : a.n + 2 * a.k + 2;
        const LieModule lie = fixture_optimal_lie(a.prime, a.k, a.n, big_n);
        // The family has j = 3 from level n + k on; the sl2 flip sits at n + 2k - 1.
        auto r = trichotomy_lie(lie, a.n + a.k);
        const int e = a.n + 2 * a.k - 1;
        if (e < big_n) {
            const bool flip = contains_scaled_sl2(lie, e) && (e == 0 || !contains_scaled_sl2(lie, e - 1));
            r.detail += " family_exponent=" + std::to_string(e) + " flip=" + (flip ? "yes" : "no");
        }
        std::cout << r.to_line() << "\n";
        CampaignResult cr;
        cr.reports.push_back(r);
        std::cout << cr.summary() << "\n";
        return report_exit(cr.reports);
    }

    std::optional<GroupClosure> g;
    if (!a.file.empty()) {
        g = load_group(a.file, c);
    } else if (a.fixture == "pink-borel") {
        const int big_n = a.precision > 0 ? a.precision : 2 * a.s + 2;
        g = fixture_pink_borel(a.prime, a.s, big_n, a.order, c.cap).g;
    } else if (a.fixture == "s3-lift") {
        const int big_n = a.precision > 0 ? a.precision : a.t + 1;
        g = fixture_s3_lift(a.prime, a.t, big_n, c.cap);
    } else if (!a.fixture.empty()) {
        throw InvalidParams("unknown fixture " + a.fixture);
    }

    if (g) {
        if (param < 1) throw InvalidParams("--s or --n must be at least 1");
        const auto r = verify_group(a.theorem, *g, param, c.cap);
        std::cout << r.to_line() << "\n";
        CampaignResult cr;
        cr.reports.push_back(r);
        std::cout << cr.summary() << "\n";
        return report_exit(cr.reports);
    }

    CampaignConfig cfg;
    cfg.theorem = a.theorem;
    cfg.prime = a.prime;
    cfg.precision = a.precision > 0 ? a.precision : 4;
    cfg.param = param;
    cfg.trials = a.trials;
    cfg.seed = a.seed;
    cfg.cap = c.cap;
    cfg.threads = c.threads;
    cfg.until_applicable = a.until_applicable;
    if (cfg.param < 1) throw InvalidParams("--s or --n must be at least 1");
    const CampaignResult res = run_campaign(cfg);
    for (const auto& r : res.reports) std::cout << r.to_line() << "\n";
    std::cout << res.summary() << "\n";
    return report_exit(res.reports);
}

// ---------------------------------------------------------------------------
// fixture

int cmd_fixture(const std::string& name, const VerifyArgs& a, bool keys, const Common& c) {
    if (name == "optimal-lie") {
        const int big_n = a.precision > 0 ? a.precision : a.n + 2 * a.k + 2;
        const LieModule lie = fixture_optimal_lie(a.prime, a.k, a.n, big_n);
        std::cout << "prime = " << a.prime << "\nprecision = " << big_n << "\n";
        for (const Mat2& x : lie.spanning_set())
            std::cout << "lie = " << x.a() << ' ' << x.b() << ' ' << x.c() << ' ' << x.d() << "\n";
        return Ok;
    }
    std::optional<GroupClosure> g;
    if (name == "pink-borel") g = fixture_pink_borel(a.prime, a.s, a.precision > 0 ? a.precision : 2 * a.s + 2, a.order, c.cap).g;
    else if (name == "s3-lift") g = fixture_s3_lift(a.prime, a.t, a.precision > 0 ? a.precision : a.t + 1, c.cap);
    else if (name == "congruence") {
        const PadicContext ctx(a.prime, a.precision > 0 ? a.precision : 2);
        g = congruence_subgroup(ctx, std::max(a.n, 1), c.cap);
    } else if (name == "sl2") {
        g = special_linear_group(PadicContext(a.prime, a.precision > 0 ? a.precision : 1), c.cap);
    } else {
        throw InvalidParams("unknown fixture " + name);
    }
    if (keys) write_keys(std::cout, *g);
    else write_group_spec(std::cout, *g);
    return Ok;
}

// ---------------------------------------------------------------------------
// selftest

using Goldens = std::map<std::string, u64>;

Goldens embedded_goldens() {
    return {
        {"generator_family.3.1.3", 729},
        {"generator_family.3.1.2", 27},
        {"generator_family.2.2.4", 64},
        {"generator_family.5.1.2", 125},
        {"derived_missing.3.1.3", 0},
        {"derived_order.3.1.3", 27},
        {"addition_formula_failures", 0},
        {"sl2_order.3.2", 648},
        {"saturation_order.3.2", 162},
        {"saturation_idempotent_failures", 0},
        {"det1_part_order.5.1", 4},
    };
}

Goldens read_goldens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    Goldens g;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = detail::trim(raw.substr(0, raw.find('#')));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError("goldens line " + std::to_string(line) + ": expected name = value");
        try {
            g[detail::trim(s.substr(0, eq))] = std::stoull(detail::trim(s.substr(eq + 1)));
        } catch (const std::logic_error&) {
            throw ParseError("goldens line " + std::to_string(line) + ": bad value");
        }
    }
    return g;
}

std::map<std::string, u64> compute_goldens(const Common& c) {
    std::map<std::string, u64> got;
    for (auto [p, n, big] : {std::tuple{3, 1, 3}, {3, 1, 2}, {2, 2, 4}, {5, 1, 2}}) {
        const PadicContext ctx(p, big);
        const i64 q = static_cast<i64>(ctx.power(n));
        std::vector<Mat2> gens{lower_unipotent(ctx, q), upper_unipotent(ctx, q)};
        for (u64 x = 0; x < ctx.modulus(); x += ctx.power(n)) gens.push_back(diagonal_unit(ctx, static_cast<i64>(x)));
        const GroupClosure g = close(ctx, gens, c.cap, c.threads);
        const bool same = g.same_elements(congruence_subgroup(ctx, n));
        got["generator_family." + std::to_string(p) + "." + std::to_string(n) + "." + std::to_string(big)] =
            same ? g.size() : 0;
    }
    {
        const PadicContext ctx(3, 3);
        const GroupClosure d = derived_subgroup(congruence_subgroup(ctx, 1), c.cap, c.threads);
        const GroupClosure b2 = congruence_subgroup(ctx, 2);
        u64 missing = 0;
        b2.for_each([&](const Mat2& x) { missing += d.contains(x) ? 0 : 1; });
        got["derived_missing.3.1.3"] = missing;
        got["derived_order.3.1.3"] = d.size();
    }
    {
        std::mt19937_64 rng(5);
        u64 failures = 0;
        for (u64 p : {2, 3, 5, 7}) {
            const PadicContext ctx(p, 4);
            const u64 m = ctx.modulus();
            // At l = 2 stay in Id + 2M so every trace in sight is even.
            const u64 step = p == 2 ? 2 : 1;
            auto rand_gl = [&] {
                for (;;) {
                    Mat2 x = Mat2::from_residues(ctx, {rng() % m * step, rng() % m * step, rng() % m * step,
                                                       rng() % m * step});
                    if (p == 2) x = x + Mat2::identity(ctx);
                    if (x.invertible()) return x;
                }
            };
            for (int i = 0; i < 250; ++i) {
                const Mat2 g1 = rand_gl(), g2 = rand_gl();
                const Mat2 t1 = theta(g1), t2 = theta(g2);
                const PadicInt two(ctx, 2);
                const Mat2 lhs = (theta(g1 * g2) - t1 - t2).scaled(2);
                const Mat2 rhs = bracket(t1, t2) + t2.scaled(g1.trace() - two) + t1.scaled(g2.trace() - two);
                if (!(lhs == rhs)) ++failures;
            }
        }
        got["addition_formula_failures"] = failures;
    }
    {
        const PadicContext ctx(3, 2);
        got["sl2_order.3.2"] = special_linear_group(ctx, c.cap).size();
        const GroupClosure b = congruence_subgroup(ctx, 1);
        const GroupClosure s = saturate(b, c.cap);
        got["saturation_order.3.2"] = s.size();
        u64 bad = 0;
        if (!saturate(s, c.cap).same_elements(s)) ++bad;
        const GroupClosure sl = special_linear_group(ctx, c.cap);
        if (!det1_part(saturate(sl, c.cap), c.cap).same_elements(sl)) ++bad;
        got["saturation_idempotent_failures"] = bad;
    }
    {
        // Sat(<diag(2, 1)>) mod 5 is the diagonal torus; its det-1 part is diag(a, 1/a).
        const PadicContext ctx(5, 1);
        const GroupClosure s = saturate(close(ctx, {Mat2(ctx, 2, 0, 0, 1)}));
        got["det1_part_order.5.1"] = det1_part(s).size();
    }
    return got;
}

int cmd_selftest(const std::string& goldens_path, const Common& c) {
    Goldens want = embedded_goldens();
    if (!goldens_path.empty())
        for (const auto& [k, v] : read_goldens(goldens_path)) {
            if (!want.count(k)) throw ParseError("unknown golden " + k);
            want[k] = v;
        }
    const auto got = compute_goldens(c);
    int failed = 0;
    for (const auto& [k, v] : want) {
        const u64 g = got.at(k);
        const bool ok = g == v;
        failed += ok ? 0 : 1;
        std::cout << "check=" << k << " expected=" << v << " got=" << g << " " << (ok ? "PASS" : "FAIL") << "\n";
    }
    std::cout << "selftest checks=" << want.size() << " failed=" << failed << "\n";
    return failed == 0 ? Ok : Violation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"l-adic image toolkit"};
    app.require_subcommand(1);
    Common common;
    common.cap = default_cap;
    common.digits = default_digits;
    app.add_option("--cap", common.cap, "closure size cap (default: LADIC_CAP or 2^24)");
    app.add_option("--threads", common.threads, "worker threads (0 = hardware)");

    BoundArgs bound;
    auto* sb = app.add_subcommand("bound", "evaluate explicit index bounds");
    sb->add_option("--degree", bound.degree, "[K:Q]");
    sb->add_option("--height", bound.height, "h(E), decimal or p/q");
    sb->add_option("--dim", bound.dim, "abelian variety dimension g");
    sb->add_option("--formula", bound.formula, "adelic, isogeny, b0, psi, d-infty, d2, general-index");
    sb->add_option("--variant", bound.variant, "formula variant");
    sb->add_option("--d-ext", bound.d_ext, "extension degree for b0, or N for the power isogeny variant");
    sb->add_option("--prime", bound.prime, "prime for general-index");
    sb->add_option("--torsion", bound.torsion, "also print the torsion-degree lower bound for this order");
    sb->add_option("--digits", common.digits, "digit budget (default: LADIC_DIGITS or 64)");

    std::string file;
    bool keys = false;
    auto* sc = app.add_subcommand("classify", "classify the mod-l image of a group file");
    sc->add_option("file", file)->required();
    sc->add_flag("--keys", keys, "also dump the sorted packed keys");

    int lie_n = 0;
    auto* sl = app.add_subcommand("lie", "reduced basis and invariants of L(G)");
    sl->add_option("file", file)->required();
    sl->add_option("--n", lie_n, "also run the case-3 trichotomy check at this n");

    VerifyArgs va;
    auto add_fixture_opts = [&](CLI::App* s) {
        s->add_option("--prime", va.prime);
        s->add_option("--precision", va.precision);
        s->add_option("--s", va.s);
        s->add_option("--n", va.n);
        s->add_option("--k", va.k);
        s->add_option("--t", va.t, "lift depth for s3-lift");
        s->add_option("--order", va.order, "root-of-unity order for pink-borel");
    };
    auto* sv = app.add_subcommand("verify", "verify a theorem on a group, fixture or random campaign");
    sv->add_option("--theorem", va.theorem, "star, starstar, sl2z2, gl2z2, trichotomy")->required();
    sv->add_option("--file", va.file);
    sv->add_option("--fixture", va.fixture, "optimal-lie, pink-borel, s3-lift");
    sv->add_option("--trials", va.trials);
    sv->add_option("--seed", va.seed);
    sv->add_flag("--until-applicable", va.until_applicable, "count only applicable trials");
    add_fixture_opts(sv);

    std::string fixture_name;
    auto* sf = app.add_subcommand("fixture", "write a fixture as a group file");
    sf->add_option("name", fixture_name, "optimal-lie, pink-borel, s3-lift, congruence, sl2")->required();
    sf->add_flag("--keys", keys, "dump sorted packed keys instead");
    add_fixture_opts(sf);

    std::string goldens;
    auto* st = app.add_subcommand("selftest", "run the embedded golden suite");
    st->add_option("--goldens", goldens, "override goldens from a name = value file");

    try {
        common.cap = env_u64("LADIC_CAP", common.cap);
        common.digits = static_cast<int>(env_u64("LADIC_DIGITS", static_cast<u64>(common.digits)));
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return Invalid;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Invalid;
    }

    try {
        if (common.digits < 8 || common.digits > 100000) throw InvalidParams("digit budget must be in [8, 100000]");
        if (*sb) return cmd_bound(bound, common);
        if (*sc) return cmd_classify(file, keys, common);
        if (*sl) return cmd_lie(file, lie_n, common);
        if (*sv) return cmd_verify(va, common);
        if (*sf) return cmd_fixture(fixture_name, va, keys, common);
        if (*st) return cmd_selftest(goldens, common);
    } catch (const CapExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Cap;
    } catch (const MagnitudeOverflow& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Cap;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Invalid;
    }
    return Invalid;
}
