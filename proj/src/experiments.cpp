#include "gbc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gbc/errors.hpp"
#include "gbc/log.hpp"
#include "gbc/orbit_sim.hpp"

namespace gbc {

namespace {

std::string cell(double v) { return format_double(v); }
std::string cell(std::int64_t v) { return std::to_string(v); }
std::string cell(std::uint64_t v) { return std::to_string(v); }

struct Csv {
    std::string text;

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i > 0) text += ',';
            text += fields[i];
        }
        text += '\n';
    }
};

const Json& require(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object with '" + key + "'");
    const auto it = j.find(key);
    if (it == j.end()) throw ConfigError(where + ": missing '" + key + "'");
    return *it;
}

std::int64_t integer_at(const Json& j, const char* key, const std::string& where) {
    const Json& v = require(j, key, where);
    if (!v.is_number_integer()) throw ConfigError(where + ": '" + key + "' must be an integer");
    return v.get<std::int64_t>();
}

std::uint64_t seed_of(const Json& config, const std::string& kind) {
    // no entropy default: every run names its seed, reruns are exact
    const Json& v = require(config, "seed", kind + " config");
    if (!v.is_number_integer() || v.get<double>() < 0)
        throw ConfigError(kind + " config: 'seed' must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

int workers_of(const Json& config) {
    const int w = static_cast<int>(config.value("workers", 1));
    if (w < 1) throw ConfigError("config: 'workers' must be positive");
    return w;
}

double sorted_quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Json exponent_summary(std::vector<double> exponents) {
    std::sort(exponents.begin(), exponents.end());
    std::int64_t below = 0;
    for (const double e : exponents) below += e <= 0.75 ? 1 : 0;
    return Json{{"median", sorted_quantile(exponents, 0.5)},
                {"p90", sorted_quantile(exponents, 0.9)},
                {"below_0.75", static_cast<double>(below) /
                                   static_cast<double>(std::max<std::size_t>(
                                       exponents.size(), 1))}};
}

Json quantile_row(const std::array<double, 5>& qs) {
    return Json{{"q05", qs[0]}, {"q25", qs[1]}, {"median", qs[2]}, {"q75", qs[3]}, {"q95", qs[4]}};
}

// Shared CSV emitter for the three Monte Carlo kinds: one row per sample and
// checkpoint, with an optional fixed label column after N.
void hitstats_rows(Csv& csv, const std::string& kind, const std::string& hash,
                   const HitStatistics& stats, const char* label) {
    for (std::size_t i = 0; i < stats.counts.size(); ++i)
        for (std::size_t j = 0; j < stats.checkpoints.size(); ++j) {
            std::vector<std::string> fields{kind, hash, cell(stats.sample_seeds[i]),
                                            cell(stats.checkpoints[j])};
            if (label != nullptr) fields.emplace_back(label);
            fields.push_back(cell(stats.expected[j]));
            fields.push_back(cell(stats.counts[i][j]));
            fields.push_back(
                cell(static_cast<double>(stats.counts[i][j]) / stats.expected[j]));
            csv.row(fields);
        }
}

Json hitstats_summary(const HitStatistics& stats) {
    return Json{{"checkpoints", stats.checkpoints},
                {"expected_final", stats.expected.back()},
                {"samples", stats.counts.size()},
                {"ratio_final", quantile_row(stats.ratio_quantiles.back())},
                {"exponents", exponent_summary(stats.exponents)}};
}

RunArtifacts run_measure(const Json& config, std::string hash) {
    const MarkovGibbs g = chain_from_json(require(config, "chain", "measure config"));
    const std::vector<Cylinder> cyls = [&] {
        const Json& c = require(config, "cylinders", "measure config");
        if (!c.is_array() || c.empty())
            throw ConfigError("measure config: 'cylinders' must be a nonempty array");
        std::vector<Cylinder> out;
        for (const auto& e : c) out.push_back(cylinder_from_json(g.base(), e));
        return out;
    }();

    Csv csv;
    csv.row({"kind", "config_hash", "item", "i", "j", "lag", "value"});
    Json singles = Json::array();
    for (std::size_t i = 0; i < cyls.size(); ++i) {
        const double mu = cylinder_measure(g, cyls[i]);
        csv.row({"measure", hash, "cylinder", cell(static_cast<std::int64_t>(i)), "", "",
                 cell(mu)});
        singles.push_back(mu);
    }

    Json joints = Json::array();
    if (config.contains("joint")) {
        for (const auto& p : config["joint"]) {
            const auto a = integer_at(p, "a", "measure config joint");
            const auto b = integer_at(p, "b", "measure config joint");
            const auto lag = integer_at(p, "lag", "measure config joint");
            const auto n = static_cast<std::int64_t>(cyls.size());
            if (a < 0 || b < 0 || a >= n || b >= n)
                throw ConfigError("measure config: joint pair indexes a cylinder out of range");
            const double mu = joint_measure_at_lag(g, cyls[static_cast<std::size_t>(a)],
                                                   cyls[static_cast<std::size_t>(b)], lag);
            csv.row({"measure", hash, "joint", cell(a), cell(b), cell(lag), cell(mu)});
            joints.push_back(Json{{"a", a}, {"b", b}, {"lag", lag}, {"value", mu}});
        }
    }

    Json summary{{"kind", "measure"},
                 {"config_hash", hash},
                 {"lambda", g.lambda()},
                 {"pressure", g.pressure()},
                 {"theta3", g.theta3()},
                 {"states", g.states()},
                 {"block_length", g.block_length()},
                 {"cylinder_measures", singles},
                 {"joint_measures", joints}};
    return {"measure", std::move(hash), std::move(csv.text), std::move(summary)};
}

RunArtifacts run_sp_check(const Json& config, std::string hash) {
    const MarkovGibbs g = chain_from_json(require(config, "chain", "sp-check config"));
    const std::uint64_t seed = seed_of(config, "sp-check");
    const CylinderSequence seq =
        sequence_from_json(g, require(config, "sequence", "sp-check config"), seed);

    std::vector<std::int64_t> grid;
    if (config.contains("n_grid")) {
        for (const auto& n : config["n_grid"]) grid.push_back(n.get<std::int64_t>());
    } else {
        grid = geometric_checkpoints(seq.size(), 8);
    }
    const SpReport rep = sp_verdict(g, seq, grid, workers_of(config));

    Csv csv;
    csv.row({"kind", "config_hash", "M", "N", "sumR", "sumMu", "ratio"});
    for (const auto& c : rep.cells)
        csv.row({"sp-check", hash, cell(c.m), cell(c.n), cell(c.sum_r), cell(c.sum_mu),
                 cell(c.ratio)});

    Json summary{{"kind", "sp-check"},     {"config_hash", hash},
                 {"verdict", rep.verdict}, {"sup_ratio", rep.sup_ratio},
                 {"trend_slope", rep.trend_slope}, {"cells", rep.cells.size()},
                 {"sequence_size", seq.size()},    {"warnings", seq.warnings()}};
    return {"sp-check", std::move(hash), std::move(csv.text), std::move(summary)};
}

RunArtifacts run_counterexample(const Json& config, std::string hash) {
    const MarkovGibbs g = chain_from_json(require(config, "chain", "counterexample config"));
    const Json& thm_j = require(config, "thm", "counterexample config");
    if (!thm_j.is_string())
        throw ConfigError("counterexample config: 'thm' must be \"2.2\", \"2.3\" or \"1.6\"");
    const std::string thm = thm_j.get<std::string>();

    const CylinderSequence seq = [&] {
        if (thm == "2.2")
            return thm22_counterexample(
                g, cylinder_from_json(g.base(), require(config, "base", "counterexample config")),
                [](std::int64_t k) { return k; },
                integer_at(config, "K", "counterexample config"));
        if (thm == "2.3")
            return thm23_counterexample(
                g, require(config, "eps", "counterexample config").get<double>(),
                integer_at(config, "K", "counterexample config"));
        if (thm == "1.6") {
            const Json& base = require(config, "base", "counterexample config");
            std::vector<Cylinder> cyls;
            for (const auto& c : base) cyls.push_back(cylinder_from_json(g.base(), c));
            return prop16_sequence(g, std::move(cyls));
        }
        throw ConfigError("counterexample config: unknown thm '" + thm + "'");
    }();
    const int workers = workers_of(config);

    const auto k_count = static_cast<std::int64_t>(seq.base().size());
    std::vector<std::int64_t> rows;
    if (k_count <= 512)
        for (std::int64_t k = 1; k <= k_count; ++k) rows.push_back(k);
    else
        rows = geometric_checkpoints(k_count, 64);

    Csv csv;
    csv.row({"kind", "config_hash", "k", "l_k", "word_len", "mu_base", "s_k", "cum_base",
             "cum_derived", "ratio"});
    double cum_base = 0.0, cum_derived = 0.0;
    std::size_t next = 0;
    for (std::int64_t k = 1; k <= k_count; ++k) {
        const auto idx = static_cast<std::size_t>(k - 1);
        const double mu = cylinder_measure(g, seq.base()[idx]);
        cum_base += mu;
        cum_derived += static_cast<double>(seq.lengths()[idx]) * mu;
        if (next < rows.size() && rows[next] == k) {
            ++next;
            const std::int64_t s_k = seq.partial_sums()[static_cast<std::size_t>(k)];
            // correlation windows above the cap are not comparable; leave
            // the cell empty rather than report a truncated ratio
            const std::string ratio =
                s_k <= 5000 ? cell(sp_cell(g, seq, 1, s_k, workers).ratio) : std::string{};
            csv.row({"counterexample", hash, cell(k), cell(seq.lengths()[idx]),
                     cell(seq.base()[idx].support().length()), cell(mu), cell(s_k),
                     cell(cum_base), cell(cum_derived), ratio});
        }
    }

    const double tail = [&] {
        // Cauchy check on the base masses: share of the final sum collected
        // after the halfway block
        double half = 0.0;
        for (std::int64_t k = 1; k <= k_count / 2; ++k)
            half += cylinder_measure(g, seq.base()[static_cast<std::size_t>(k - 1)]);
        return cum_base > 0.0 ? (cum_base - half) / cum_base : 0.0;
    }();

    Json summary{{"kind", "counterexample"},
                 {"config_hash", hash},
                 {"thm", thm},
                 {"K", k_count},
                 {"size", seq.size()},
                 {"cum_base", cum_base},
                 {"cum_derived", cum_derived},
                 {"base_tail_fraction", tail},
                 {"warnings", seq.warnings()}};
    if (seq.size() <= 50000) {
        const SpReport rep = sp_verdict(g, seq, geometric_checkpoints(seq.size(), 8), workers);
        summary["verdict"] = rep.verdict;
        summary["sup_ratio"] = rep.sup_ratio;
        summary["trend_slope"] = rep.trend_slope;
    } else {
        summary["verdict"] = "skipped: horizon above the correlation window cap";
    }
    return {"counterexample", std::move(hash), std::move(csv.text), std::move(summary)};
}

RunArtifacts run_simulate(const Json& config, std::string hash) {
    const MarkovGibbs g = chain_from_json(require(config, "chain", "simulate config"));
    const std::uint64_t seed = seed_of(config, "simulate");
    const CylinderSequence seq =
        sequence_from_json(g, require(config, "sequence", "simulate config"), seed);
    const std::int64_t n_max =
        config.contains("n_max") ? integer_at(config, "n_max", "simulate config") : seq.size();

    const HitStatistics stats = sbc_experiment(
        g, seq, n_max, static_cast<int>(config.value("checkpoints", 8)),
        static_cast<int>(integer_at(config, "samples", "simulate config")), seed,
        workers_of(config));

    Csv csv;
    csv.row({"kind", "config_hash", "seed", "N", "E_N", "S_N", "ratio"});
    hitstats_rows(csv, "simulate", hash, stats, nullptr);

    Json summary = hitstats_summary(stats);
    summary["kind"] = "simulate";
    summary["config_hash"] = hash;
    summary["sequence_size"] = seq.size();
    summary["warnings"] = seq.warnings();
    return {"simulate", std::move(hash), std::move(csv.text), std::move(summary)};
}

RunArtifacts run_toral(const Json& config, std::string hash) {
    const ToralMap map = build_toral(matrix2i_from_json(require(config, "matrix", "toral config")));
    const TorusTargets targets =
        torus_targets_from_json(require(config, "targets", "toral config"));

    const HitStatistics stats = torus_hit_experiment(
        map, targets, integer_at(config, "n_max", "toral config"),
        static_cast<int>(config.value("checkpoints", 8)),
        static_cast<int>(integer_at(config, "samples", "toral config")),
        seed_of(config, "toral"), workers_of(config));

    Csv csv;
    csv.row({"kind", "config_hash", "seed", "N", "E_N", "S_N", "ratio"});
    hitstats_rows(csv, "toral", hash, stats, nullptr);

    Json summary = hitstats_summary(stats);
    summary["kind"] = "toral";
    summary["config_hash"] = hash;
    summary["lambda_u"] = map.lambda_u;
    summary["frame_det"] = map.frame_det;
    return {"toral", std::move(hash), std::move(csv.text), std::move(summary)};
}

RunArtifacts run_baker(const Json& config, std::string hash) {
    const BakerTargets targets =
        baker_targets_from_json(require(config, "targets", "baker config"));

    const BakerHits hits = baker_hit_experiment(
        targets, integer_at(config, "n_max", "baker config"),
        static_cast<int>(config.value("checkpoints", 8)),
        static_cast<int>(integer_at(config, "samples", "baker config")),
        seed_of(config, "baker"), workers_of(config));

    Csv csv;
    csv.row({"kind", "config_hash", "seed", "N", "target", "E_N", "S_N", "ratio"});
    hitstats_rows(csv, "baker", hash, hits.squares, "squares");
    hitstats_rows(csv, "baker", hash, hits.balls, "balls");

    Json summary{{"kind", "baker"},
                 {"config_hash", hash},
                 {"squares", hitstats_summary(hits.squares)},
                 {"balls", hitstats_summary(hits.balls)}};
    return {"baker", std::move(hash), std::move(csv.text), std::move(summary)};
}

}  // namespace

RunArtifacts run_experiment(const Json& config) {
    const Json& kind_j = require(config, "kind", "config");
    if (!kind_j.is_string()) throw ConfigError("config: 'kind' must be a string");
    const std::string kind = kind_j.get<std::string>();
    seed_of(config, kind);   // every kind, even the deterministic ones:
    workers_of(config);      // reruns are exact and knobs are always sane
    std::string hash = config_hash(config);
    log::info("running " + kind + " (config hash " + hash + ")");

    if (kind == "measure") return run_measure(config, std::move(hash));
    if (kind == "sp-check") return run_sp_check(config, std::move(hash));
    if (kind == "counterexample") return run_counterexample(config, std::move(hash));
    if (kind == "simulate") return run_simulate(config, std::move(hash));
    if (kind == "toral") return run_toral(config, std::move(hash));
    if (kind == "baker") return run_baker(config, std::move(hash));
    throw ConfigError("config: unknown kind '" + kind + "'");
}

namespace {

// ln 0.3, ln 0.7, ln 0.5 written out; fixture text must parse to the exact
// doubles the tests freeze
constexpr const char* kFixtures = R"json({
  "bernoulli2": {
    "kind": "measure",
    "seed": 1,
    "chain": {
      "matrix": [[1, 1], [1, 1]],
      "potential": {"memory": 1, "entries": [
        {"word": [0], "value": -1.2039728043259361},
        {"word": [1], "value": -0.35667494393873245}
      ]}
    },
    "cylinders": [
      {"lo": 0, "hi": 1, "word": [0, 1]},
      {"lo": -1, "hi": 1, "word": [1, 0, 1]},
      {"lo": 0, "hi": 0, "word": [0]}
    ],
    "joint": [{"a": 0, "b": 2, "lag": 3}]
  },
  "golden-mean-parry": {
    "kind": "sp-check",
    "seed": 1,
    "chain": {
      "matrix": [[1, 1], [1, 0]],
      "potential": {"constant": 0.0}
    },
    "sequence": {"random": {"n": 400, "jitter": 1, "cap": 0.5, "scale": 1.0}}
  },
  "cat-map": {
    "kind": "toral",
    "seed": 2026,
    "matrix": [[2, 1], [1, 1]],
    "targets": {"shrinking": {"center": [0.37, 0.58], "cap": 0.002, "scale": 10.0}},
    "n_max": 20000,
    "checkpoints": 8,
    "samples": 50
  },
  "baker": {
    "kind": "baker",
    "seed": 11,
    "targets": {"shrinking": {"center": [0.41, 0.43], "cap": 0.15, "scale": 150.0}},
    "n_max": 40000,
    "checkpoints": 8,
    "samples": 40
  },
  "thm22": {
    "kind": "counterexample",
    "seed": 1,
    "chain": {
      "matrix": [[1, 1], [1, 0]],
      "potential": {"constant": 0.0}
    },
    "thm": "2.2",
    "base": {"lo": 0, "hi": 0, "word": [0]},
    "K": 60
  },
  "thm23": {
    "kind": "counterexample",
    "seed": 1,
    "chain": {
      "matrix": [[1, 1], [1, 0]],
      "potential": {"constant": 0.0}
    },
    "thm": "2.3",
    "eps": 0.5,
    "K": 70000
  },
  "prop16": {
    "kind": "counterexample",
    "seed": 1,
    "chain": {
      "matrix": [[1, 1], [1, 1]],
      "potential": {"constant": -0.6931471805599453}
    },
    "thm": "1.6",
    "base": [
      {"lo": 0, "hi": 0, "word": [0]},
      {"lo": 0, "hi": 1, "word": [0, 0]},
      {"lo": 0, "hi": 2, "word": [0, 0, 0]},
      {"lo": 0, "hi": 3, "word": [0, 0, 0, 0]},
      {"lo": 0, "hi": 4, "word": [0, 0, 0, 0, 0]},
      {"lo": 0, "hi": 5, "word": [0, 0, 0, 0, 0, 0]},
      {"lo": 0, "hi": 6, "word": [0, 0, 0, 0, 0, 0, 0]},
      {"lo": 0, "hi": 7, "word": [0, 0, 0, 0, 0, 0, 0, 0]},
      {"lo": 0, "hi": 8, "word": [0, 0, 0, 0, 0, 0, 0, 0, 0]},
      {"lo": 0, "hi": 9, "word": [0, 0, 0, 0, 0, 0, 0, 0, 0, 0]},
      {"lo": 0, "hi": 10, "word": [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]},
      {"lo": 0, "hi": 11, "word": [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]}
    ]
  }
})json";

}  // namespace

Json fixture_catalog() {
    static const Json catalog = Json::parse(kFixtures);
    return catalog;
}

Json fixture_config(const std::string& name) {
    const Json catalog = fixture_catalog();
    const auto it = catalog.find(name);
    if (it == catalog.end()) {
        std::string names;
        for (const auto& [k, v] : catalog.items()) {
            if (!names.empty()) names += ", ";
            names += k;
        }
        throw ConfigError("unknown fixture '" + name + "' (have: " + names + ")");
    }
    return *it;
}

}  // namespace gbc
