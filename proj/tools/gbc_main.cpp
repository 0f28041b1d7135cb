#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gbc/errors.hpp"
#include "gbc/experiments.hpp"
#include "gbc/log.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct Options {
    std::string config_path;
    std::string fixture;
    std::string thm;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

gbc::Json load_config(const std::string& kind, const Options& o) {
    using gbc::ConfigError;
    const int sources = (o.config_path.empty() ? 0 : 1) + (o.fixture.empty() ? 0 : 1) +
                        (o.thm.empty() ? 0 : 1);
    if (sources > 1)
        throw ConfigError(kind + ": pass only one of --config, --fixture, --thm");
    if (!o.thm.empty()) {
        if (o.thm == "2.2") return gbc::fixture_config("thm22");
        if (o.thm == "2.3") return gbc::fixture_config("thm23");
        if (o.thm == "1.6") return gbc::fixture_config("prop16");
        throw ConfigError(kind + ": unknown --thm '" + o.thm + "' (have 2.2, 2.3, 1.6)");
    }
    if (!o.fixture.empty()) return gbc::fixture_config(o.fixture);
    if (o.config_path.empty())
        throw ConfigError(kind + ": need --config or --fixture");
    std::ifstream in(o.config_path);
    if (!in) throw ConfigError(kind + ": cannot open config '" + o.config_path + "'");
    try {
        return gbc::Json::parse(in);
    } catch (const gbc::Json::exception& e) {
        throw ConfigError(kind + ": config is not valid JSON (" + e.what() + ")");
    }
}

std::string iso_utc_now() {
    const std::time_t t =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int run(const std::string& kind, const Options& o) {
    gbc::Json config = load_config(kind, o);
    if (config.value("kind", "") != kind)
        throw gbc::ConfigError(kind + ": config has kind '" + config.value("kind", "") + "'");
    if (o.seed) config["seed"] = *o.seed;
    if (o.workers) config["workers"] = *o.workers;

    const auto t0 = std::chrono::steady_clock::now();
    const gbc::RunArtifacts art = gbc::run_experiment(config);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    namespace fs = std::filesystem;
    const fs::path dir(o.out);
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "results.csv", std::ios::binary);
        f << art.csv;
    }
    {
        std::ofstream f(dir / "summary.json");
        f << art.summary.dump(2) << '\n';
    }
    const gbc::Json meta{{"kind", art.kind},
                         {"tool_version", kToolVersion},
                         {"config_hash", art.hash},
                         {"wall_time_s", wall},
                         {"timestamp", iso_utc_now()}};
    {
        std::ofstream f(dir / "meta.json");
        f << meta.dump(2) << '\n';
    }
    gbc::log::info("artifacts in " + dir.string());

    std::string line = art.kind + ": wrote " + (dir / "results.csv").string();
    if (art.summary.contains("verdict") && art.summary["verdict"].is_string())
        line += " (verdict: " + art.summary["verdict"].get<std::string>() + ")";
    std::printf("%s\n", line.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Borel-Cantelli experiments on Gibbs shifts, toral automorphisms and the baker map"};
    app.require_subcommand(1);

    Options o;
    const std::vector<std::string> kinds{"measure",  "sp-check", "counterexample",
                                         "simulate", "toral",    "baker"};
    for (const auto& kind : kinds) {
        auto* sub = app.add_subcommand(kind, "run a '" + kind + "' experiment");
        sub->add_option("--config", o.config_path, "config JSON path");
        sub->add_option("--fixture", o.fixture, "bundled fixture name (see 'fixtures')");
        if (kind == "counterexample")
            sub->add_option("--thm", o.thm, "fixture shorthand: 2.2, 2.3 or 1.6");
        sub->add_option("--seed", o.seed, "seed override");
        sub->add_option("--workers", o.workers,
                        "worker threads; results are identical for any count");
        sub->add_option("--out", o.out, "output directory (default .)");
    }
    auto* fixtures_cmd = app.add_subcommand("fixtures", "print the bundled fixture catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and friends exit 0; every usage mistake is a validation failure
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (fixtures_cmd->parsed()) {
            std::printf("%s\n", gbc::fixture_catalog().dump(2).c_str());
            return 0;
        }
        for (const auto& kind : kinds)
            if (app.get_subcommand(kind)->parsed()) return run(kind, o);
        return 0;
    } catch (const gbc::NumericError& e) {
        gbc::log::error(e.what());
        return 3;
    } catch (const gbc::ValidationError& e) {
        gbc::log::error(e.what());
        return 2;
    } catch (const gbc::Json::exception& e) {
        gbc::log::error(e.what());
        return 2;
    } catch (const std::exception& e) {
        gbc::log::error(e.what());
        return 3;
    }
}
