#pragma once

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "group.hpp"

namespace ladic {

using Entries = std::array<i64, 4>;

/// Parsed group description.
///
///   # comment
///   prime = 3
///   precision = 4
///   generator = 1 1 0 1          (row-major, one matrix)
///   generators = [[2,0],[0,1]] [[1,0],[3,1]]   (any multiple of four)
///   lie = 0 1 0 0                (optional spanning set of a Lie module)
///
/// Brackets and commas are read as whitespace. Integers may be negative and
/// are reduced mod l^N.
struct GroupSpec {
    u64 prime = 0;
    int precision = 0;
    std::vector<Entries> generators;
    std::vector<Entries> lie;

    PadicContext context() const { return PadicContext(prime, precision); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<i64> parse_integers(const std::string& text, int line) {
    std::string s = text;
    for (char& c : s)
        if (c == '[' || c == ']' || c == ',' || c == ';' || c == '(' || c == ')') c = ' ';
    std::vector<i64> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) {
        i64 v = 0;
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size())
            throw ParseError("line " + std::to_string(line) + ": bad integer '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

inline void push_matrices(std::vector<Entries>& dst, const std::vector<i64>& v, int line, bool exactly_one) {
    if (v.empty() || v.size() % 4 != 0 || (exactly_one && v.size() != 4))
        throw ParseError("line " + std::to_string(line) + ": expected " +
                         (exactly_one ? std::string("4 integers") : std::string("a multiple of 4 integers")));
    for (std::size_t i = 0; i < v.size(); i += 4) dst.push_back({v[i], v[i + 1], v[i + 2], v[i + 3]});
}

} // namespace detail

inline GroupSpec parse_group_spec(std::istream& in) {
    GroupSpec spec;
    bool have_prime = false, have_precision = false;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError("line " + std::to_string(line) + ": expected key = value");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::vector<i64> v = detail::parse_integers(s.substr(eq + 1), line);
        auto single = [&](bool& seen) {
            if (seen) throw ParseError("line " + std::to_string(line) + ": duplicate " + key);
            if (v.size() != 1 || v[0] < 1) throw ParseError("line " + std::to_string(line) + ": " + key + " needs one positive integer");
            seen = true;
            return v[0];
        };
        if (key == "prime") spec.prime = static_cast<u64>(single(have_prime));
        else if (key == "precision") spec.precision = static_cast<int>(single(have_precision));
        else if (key == "generator") detail::push_matrices(spec.generators, v, line, true);
        else if (key == "generators") detail::push_matrices(spec.generators, v, line, false);
        else if (key == "lie") detail::push_matrices(spec.lie, v, line, false);
        else throw ParseError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
    if (!have_prime) throw ParseError("missing prime");
    if (!have_precision) throw ParseError("missing precision");
    if (spec.generators.empty() && spec.lie.empty()) throw ParseError("no generators");
    try {
        (void)spec.context();
    } catch (const InvalidParams& e) {
        throw ParseError(e.what());
    }
    return spec;
}

inline GroupSpec parse_group_spec(const std::string& text) {
    std::istringstream in(text);
    return parse_group_spec(in);
}

inline GroupSpec read_group_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return parse_group_spec(in);
}

inline std::vector<Mat2> to_matrices(const PadicContext& ctx, const std::vector<Entries>& list) {
    std::vector<Mat2> out;
    out.reserve(list.size());
    for (const Entries& e : list) out.emplace_back(ctx, e[0], e[1], e[2], e[3]);
    return out;
}

/// Generators as invertible matrices mod l^N.
inline std::vector<Mat2> spec_generators(const GroupSpec& spec, const PadicContext& ctx) {
    std::vector<Mat2> out = to_matrices(ctx, spec.generators);
    for (const Mat2& g : out)
        if (!g.invertible()) throw ParseError("generator " + g.to_string() + " is not invertible");
    return out;
}

inline void write_group_spec(std::ostream& os, const PadicContext& ctx, const std::vector<Mat2>& gens) {
    os << "prime = " << ctx.prime() << "\nprecision = " << ctx.precision() << '\n';
    for (const Mat2& g : gens) os << "generator = " << g.a() << ' ' << g.b() << ' ' << g.c() << ' ' << g.d() << '\n';
}

inline void write_group_spec(std::ostream& os, const GroupClosure& g) {
    write_group_spec(os, g.context(), g.generators());
}

/// Sorted canonical keys, one per line.
inline void write_keys(std::ostream& os, const GroupClosure& g) {
    for (u64 k : g.keys()) os << k << '\n';
}

inline std::vector<u64> read_keys(std::istream& in) {
    std::vector<u64> out;
    std::string tok;
    while (in >> tok) {
        u64 v = 0;
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size()) throw ParseError("bad key '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

/// Group with exactly the given elements; rejects keys out of range and sets
/// that are not closed.
inline GroupClosure group_from_keys(const PadicContext& ctx, const std::vector<u64>& keys, u64 cap = default_cap) {
    const u64 m = ctx.modulus();
    const u128 bound = static_cast<u128>(m) * m * m * m;
    std::vector<u64> codes;
    codes.reserve(keys.size());
    for (u64 k : keys) {
        if (k >= bound) throw ParseError("key " + std::to_string(k) + " out of range");
        codes.push_back(Mat2::from_key(ctx, k).code());
    }
    try {
        return GroupClosure::from_codes(ctx, std::move(codes), cap);
    } catch (const PreconditionViolated& e) {
        throw ParseError(e.what());
    }
}

} // namespace ladic
