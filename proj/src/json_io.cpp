#include "gbc/json_io.hpp"

#include <charconv>
#include <cstdio>
#include <map>
#include <utility>
#include <vector>

#include "gbc/errors.hpp"

namespace gbc {

namespace {

const Json& require(const Json& j, const char* key, const char* where) {
    if (!j.is_object())
        throw ConfigError(std::string(where) + ": expected an object with '" + key + "'");
    const auto it = j.find(key);
    if (it == j.end()) throw ConfigError(std::string(where) + ": missing '" + key + "'");
    return *it;
}

double number(const Json& j, const char* where) {
    if (!j.is_number()) throw ConfigError(std::string(where) + ": expected a number");
    return j.get<double>();
}

std::int64_t integer(const Json& j, const char* where) {
    if (!j.is_number_integer()) throw ConfigError(std::string(where) + ": expected an integer");
    return j.get<std::int64_t>();
}

Word word_from_json(const Json& j, const char* where) {
    if (!j.is_array()) throw ConfigError(std::string(where) + ": expected a symbol array");
    Word w;
    w.reserve(j.size());
    for (const auto& s : j) w.push_back(static_cast<int>(integer(s, where)));
    return w;
}

std::vector<Cylinder> cylinder_list(const TransitionMatrix& a, const Json& j,
                                    const char* where) {
    if (!j.is_array() || j.empty())
        throw ConfigError(std::string(where) + ": expected a nonempty cylinder array");
    std::vector<Cylinder> out;
    out.reserve(j.size());
    for (const auto& c : j) out.push_back(cylinder_from_json(a, c));
    return out;
}

Eigen::Vector2d vector2_from_json(const Json& j, const char* where) {
    if (!j.is_array() || j.size() != 2)
        throw ConfigError(std::string(where) + ": expected [x, y]");
    return {number(j[0], where), number(j[1], where)};
}

}  // namespace

TransitionMatrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("matrix: expected a nonempty row array");
    const auto m = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXi a(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m)
            throw ConfigError("matrix: row " + std::to_string(r) + " must have " +
                              std::to_string(m) + " entries");
        for (Eigen::Index c = 0; c < m; ++c)
            a(r, c) = static_cast<int>(integer(row[static_cast<std::size_t>(c)], "matrix"));
    }
    return check_transitive(a);
}

Potential potential_from_json(const TransitionMatrix& a, const Json& j) {
    if (j.contains("constant")) return Potential::constant(a, number(j["constant"], "potential"));
    const int memory = static_cast<int>(integer(require(j, "memory", "potential"), "potential"));
    const Json& entries = require(j, "entries", "potential");
    if (!entries.is_array()) throw ConfigError("potential: 'entries' must be an array");
    std::map<Word, double> values;
    for (const auto& e : entries)
        values[word_from_json(require(e, "word", "potential entry"), "potential entry")] =
            number(require(e, "value", "potential entry"), "potential entry");
    return Potential(a, memory, std::move(values));
}

MarkovGibbs chain_from_json(const Json& j) {
    const TransitionMatrix a = matrix_from_json(require(j, "matrix", "chain"));
    const Potential phi = potential_from_json(a, require(j, "potential", "chain"));
    return build_markov_gibbs(a, phi);
}

Cylinder cylinder_from_json(const TransitionMatrix& a, const Json& j) {
    const std::int64_t lo = integer(require(j, "lo", "cylinder"), "cylinder");
    const std::int64_t hi = integer(require(j, "hi", "cylinder"), "cylinder");
    return Cylinder(a, Interval(lo, hi), word_from_json(require(j, "word", "cylinder"), "cylinder"));
}

CylinderSequence sequence_from_json(const MarkovGibbs& g, const Json& j, std::uint64_t seed) {
    if (j.contains("direct"))
        return CylinderSequence::direct(cylinder_list(g.base(), j["direct"], "sequence.direct"),
                                        {});
    if (j.contains("derive")) {
        const Json& d = j["derive"];
        std::vector<std::int64_t> lengths;
        const Json& lj = require(d, "lengths", "sequence.derive");
        if (!lj.is_array()) throw ConfigError("sequence.derive: 'lengths' must be an array");
        for (const auto& l : lj) lengths.push_back(integer(l, "sequence.derive.lengths"));
        return derive_sequence(
            cylinder_list(g.base(), require(d, "base", "sequence.derive"), "sequence.derive"),
            std::move(lengths));
    }
    if (j.contains("random")) {
        const Json& r = j["random"];
        return random_nested_sequence(g, integer(require(r, "n", "sequence.random"), "n"), seed,
                                      integer(require(r, "jitter", "sequence.random"), "jitter"),
                                      number(require(r, "cap", "sequence.random"), "cap"),
                                      number(require(r, "scale", "sequence.random"), "scale"));
    }
    if (j.contains("thm22")) {
        const Json& t = j["thm22"];
        const Cylinder base = cylinder_from_json(g.base(), require(t, "base", "sequence.thm22"));
        const std::int64_t k = integer(require(t, "K", "sequence.thm22"), "K");
        return thm22_counterexample(g, base, [](std::int64_t b) { return b; }, k);
    }
    if (j.contains("thm23")) {
        const Json& t = j["thm23"];
        return thm23_counterexample(g, number(require(t, "eps", "sequence.thm23"), "eps"),
                                    integer(require(t, "K", "sequence.thm23"), "K"));
    }
    if (j.contains("prop16"))
        return prop16_sequence(g, cylinder_list(g.base(),
                                                require(j["prop16"], "base", "sequence.prop16"),
                                                "sequence.prop16"));
    throw ConfigError(
        "sequence: expected one of 'direct', 'derive', 'random', 'thm22', 'thm23', 'prop16'");
}

Eigen::Matrix2i matrix2i_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
        !j[1].is_array() || j[1].size() != 2)
        throw ConfigError("matrix: expected [[a, b], [c, d]]");
    Eigen::Matrix2i m;
    m << static_cast<int>(integer(j[0][0], "matrix")), static_cast<int>(integer(j[0][1], "matrix")),
        static_cast<int>(integer(j[1][0], "matrix")), static_cast<int>(integer(j[1][1], "matrix"));
    return m;
}

Rectangle rectangle_from_json(const Json& j) {
    Rectangle r;
    r.center = vector2_from_json(require(j, "center", "rect"), "rect.center");
    r.d_u = number(require(j, "du", "rect"), "rect.du");
    r.d_s = number(require(j, "ds", "rect"), "rect.ds");
    return r;
}

TorusTargets torus_targets_from_json(const Json& j) {
    if (j.contains("list")) {
        const Json& l = j["list"];
        if (!l.is_array() || l.empty())
            throw ConfigError("targets.list: expected a nonempty rect array");
        std::vector<Rectangle> rects;
        rects.reserve(l.size());
        for (const auto& r : l) rects.push_back(rectangle_from_json(r));
        return TorusTargets::from_list(std::move(rects));
    }
    if (j.contains("fixed")) return TorusTargets::fixed_rect(rectangle_from_json(j["fixed"]));
    if (j.contains("shrinking")) {
        const Json& s = j["shrinking"];
        return TorusTargets::shrinking_squares(
            vector2_from_json(require(s, "center", "targets.shrinking"), "center"),
            number(require(s, "cap", "targets.shrinking"), "cap"),
            number(require(s, "scale", "targets.shrinking"), "scale"));
    }
    if (j.contains("drifting"))
        return TorusTargets::drifting_rect(rectangle_from_json(j["drifting"]));
    throw ConfigError("targets: expected one of 'list', 'fixed', 'shrinking', 'drifting'");
}

BakerTargets baker_targets_from_json(const Json& j) {
    if (j.contains("fixed")) {
        const Json& f = j["fixed"];
        return BakerTargets::fixed_ball(
            {vector2_from_json(require(f, "center", "targets.fixed"), "center"),
             number(require(f, "radius", "targets.fixed"), "radius")});
    }
    if (j.contains("shrinking")) {
        const Json& s = j["shrinking"];
        return BakerTargets::shrinking_balls(
            vector2_from_json(require(s, "center", "targets.shrinking"), "center"),
            number(require(s, "cap", "targets.shrinking"), "cap"),
            number(require(s, "scale", "targets.shrinking"), "scale"));
    }
    throw ConfigError("targets: expected one of 'fixed', 'shrinking'");
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash(Json config) {
    config.erase("out");
    config.erase("workers");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config.dump())));
    return buf;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace gbc
