// End-to-end coverage for the experiment driver: fixture catalog, config
// hashing, artifact shapes, and the installed binary's exit-code contract.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "gbc/errors.hpp"
#include "gbc/experiments.hpp"
#include "gbc/json_io.hpp"

using namespace gbc;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::string line;
    std::istringstream ss(text);
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

std::vector<std::string> fields_of(const std::string& line) {
    std::vector<std::string> out;
    std::string f;
    std::istringstream ss(line);
    while (std::getline(ss, f, ',')) out.push_back(f);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

// Scratch directory for one test case, wiped on entry so reruns are clean.
fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("gbc_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

// Runs the real binary, returns its exit code; stdout/stderr land in files
// under dir so assertions can read them back.
int run_cli(const std::string& args, const fs::path& dir) {
    const std::string cmd = std::string(GBC_BIN) + " " + args + " > " +
                            (dir / "stdout.txt").string() + " 2> " +
                            (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("fixture catalog is stable and round-trips") {
    const Json catalog = fixture_catalog();
    const std::vector<std::string> names = {"bernoulli2", "golden-mean-parry", "cat-map",
                                            "baker",      "thm22",             "thm23",
                                            "prop16"};
    REQUIRE(catalog.is_object());
    CHECK(catalog.size() == names.size());
    for (const auto& name : names) {
        REQUIRE(catalog.contains(name));
        CHECK(catalog.at(name).contains("kind"));
        CHECK(catalog.at(name).contains("seed"));
    }

    CHECK(Json::parse(catalog.dump()) == catalog);
    CHECK(fixture_catalog() == catalog);
    CHECK(fixture_config("bernoulli2") == catalog.at("bernoulli2"));
    CHECK_THROWS_AS(fixture_config("no-such-fixture"), ConfigError);
}

TEST_CASE("config hashes ignore placement knobs") {
    Json cfg = fixture_config("bernoulli2");
    const std::string h = config_hash(cfg);
    REQUIRE(h.size() == 16);
    for (const char c : h) CHECK(((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')));

    Json decorated = cfg;
    decorated["out"] = "/somewhere/else";
    decorated["workers"] = 7;
    CHECK(config_hash(decorated) == h);

    Json reseeded = cfg;
    reseeded["seed"] = 999;
    CHECK(config_hash(reseeded) != h);
}

TEST_CASE("measure run reproduces hand-computable weights") {
    const Json cfg = fixture_config("bernoulli2");
    const RunArtifacts art = run_experiment(cfg);
    CHECK(art.kind == "measure");
    CHECK(art.hash == config_hash(cfg));
    CHECK(art.summary.at("config_hash") == art.hash);

    // iid(0.3, 0.7) weights: the three catalog cylinders and the lag-3 joint
    // factorize into plain products.
    const auto& mus = art.summary.at("cylinder_measures");
    REQUIRE(mus.size() == 3);
    CHECK(mus[0].get<double>() == doctest::Approx(0.21).epsilon(1e-12));
    CHECK(mus[1].get<double>() == doctest::Approx(0.147).epsilon(1e-12));
    CHECK(mus[2].get<double>() == doctest::Approx(0.3).epsilon(1e-12));
    const auto& joints = art.summary.at("joint_measures");
    REQUIRE(joints.size() == 1);
    CHECK(joints[0].at("value").get<double>() == doctest::Approx(0.21 * 0.3).epsilon(1e-12));
    CHECK(art.summary.at("theta3").get<double>() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(art.summary.at("lambda").get<double>() == doctest::Approx(1.0).epsilon(1e-12));

    const auto lines = lines_of(art.csv);
    REQUIRE(lines.size() == 1 + 3 + 1);
    CHECK(lines[0] == "kind,config_hash,item,i,j,lag,value");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = fields_of(lines[i]);
        REQUIRE(f.size() == 7);
        CHECK(f[0] == "measure");
        CHECK(f[1] == art.hash);
    }
    CHECK(fields_of(lines[1])[6] == "0.21");
    CHECK(fields_of(lines[4])[2] == "joint");
    CHECK(art.csv.find('\r') == std::string::npos);
}

TEST_CASE("sp-check fixture reports a bounded sequence") {
    const RunArtifacts art = run_experiment(fixture_config("golden-mean-parry"));
    CHECK(art.kind == "sp-check");
    CHECK(art.summary.at("verdict") == "bounded");
    CHECK(art.summary.at("sup_ratio").get<double>() > 0.0);
    CHECK(art.summary.at("cells").get<std::int64_t>() > 0);

    const auto lines = lines_of(art.csv);
    REQUIRE(lines.size() >= 2);
    CHECK(lines[0] == "kind,config_hash,M,N,sumR,sumMu,ratio");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = fields_of(lines[i]);
        REQUIRE(f.size() == 7);
        CHECK(f[0] == "sp-check");
        CHECK(f[1] == art.hash);
    }
}

TEST_CASE("counterexample fixture grows monotonically") {
    const RunArtifacts art = run_experiment(fixture_config("thm22"));
    CHECK(art.kind == "counterexample");
    CHECK(art.summary.at("verdict") == "growing");
    CHECK(art.summary.at("thm") == "2.2");
    CHECK(art.summary.at("K").get<std::int64_t>() == 60);

    const auto lines = lines_of(art.csv);
    REQUIRE(lines.size() == 1 + 60);  // K <= 512 keeps every k
    CHECK(lines[0] == "kind,config_hash,k,l_k,word_len,mu_base,s_k,cum_base,cum_derived,ratio");
    double prev = -1.0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = fields_of(lines[i]);
        REQUIRE(f.size() == 10);
        CHECK(f[2] == std::to_string(i));  // k column
        CHECK(f[3] == std::to_string(i));  // l_k = k on this fixture
        REQUIRE(!f[9].empty());            // horizons stay below the cell cap
        const double ratio = std::stod(f[9]);
        CHECK(ratio > prev);
        prev = ratio;
    }
    CHECK(prev == doctest::Approx(art.summary.at("sup_ratio").get<double>()).epsilon(0.5));
}

TEST_CASE("malformed experiment configs are rejected") {
    CHECK_THROWS_AS(run_experiment(Json{{"seed", 1}}), ConfigError);
    CHECK_THROWS_AS(run_experiment(Json{{"kind", "banana"}, {"seed", 1}}), ConfigError);

    Json no_seed = fixture_config("bernoulli2");
    no_seed.erase("seed");
    CHECK_THROWS_AS(run_experiment(no_seed), ConfigError);

    Json bad_workers = fixture_config("bernoulli2");
    bad_workers["workers"] = 0;
    CHECK_THROWS_AS(run_experiment(bad_workers), ConfigError);
}

TEST_CASE("binary writes artifacts and reruns byte-identically") {
    const fs::path dir = fresh_dir("rerun");
    const fs::path a = dir / "a", b = dir / "b";
    REQUIRE(run_cli("measure --fixture bernoulli2 --out " + a.string(), dir) == 0);
    REQUIRE(run_cli("measure --fixture bernoulli2 --out " + b.string(), dir) == 0);

    for (const char* f : {"results.csv", "summary.json", "meta.json"}) {
        CHECK(fs::exists(a / f));
        CHECK(fs::exists(b / f));
    }
    CHECK(read_file(a / "results.csv") == read_file(b / "results.csv"));
    CHECK(read_file(a / "summary.json") == read_file(b / "summary.json"));

    const Json meta = Json::parse(read_file(a / "meta.json"));
    CHECK(meta.at("kind") == "measure");
    CHECK(meta.at("tool_version") == "0.1.0");
    CHECK(meta.at("config_hash") == config_hash(fixture_config("bernoulli2")));
    CHECK(meta.at("wall_time_s").get<double>() >= 0.0);
    const std::string ts = meta.at("timestamp");
    REQUIRE(ts.size() == 20);
    CHECK(ts[10] == 'T');
    CHECK(ts.back() == 'Z');

    const std::string out = read_file(dir / "stdout.txt");
    CHECK(out.find("measure: wrote") != std::string::npos);
}

TEST_CASE("binary worker count does not change results") {
    const fs::path dir = fresh_dir("workers");
    const fs::path a = dir / "w1", b = dir / "w3";
    REQUIRE(run_cli("sp-check --fixture golden-mean-parry --workers 1 --out " + a.string(),
                    dir) == 0);
    REQUIRE(run_cli("sp-check --fixture golden-mean-parry --workers 3 --out " + b.string(),
                    dir) == 0);
    CHECK(read_file(a / "results.csv") == read_file(b / "results.csv"));
    CHECK(read_file(dir / "stdout.txt").find("verdict: bounded") != std::string::npos);
}

TEST_CASE("binary rejects bad invocations with exit 2 and no artifacts") {
    const fs::path dir = fresh_dir("badinput");

    const fs::path broken = dir / "broken.json";
    std::ofstream(broken) << "{ \"kind\": \"measure\", ";
    const fs::path never = dir / "never";
    CHECK(run_cli("measure --config " + broken.string() + " --out " + never.string(), dir) == 2);
    CHECK(!fs::exists(never));

    CHECK(run_cli("simulate --fixture thm22 --out " + never.string(), dir) == 2);  // kind mismatch
    CHECK(run_cli("measure --fixture no-such --out " + never.string(), dir) == 2);
    CHECK(run_cli("counterexample --thm 9.9 --out " + never.string(), dir) == 2);
    CHECK(run_cli("counterexample --thm 2.2 --fixture thm22 --out " + never.string(), dir) == 2);
    CHECK(run_cli("measure --config " + (dir / "missing.json").string() + " --out " +
                      never.string(),
                  dir) == 2);
    CHECK(!fs::exists(never));

    CHECK(run_cli("no-such-subcommand", dir) == 2);
    CHECK(run_cli("sp-check --no-such-flag", dir) == 2);
    CHECK(run_cli("--help", dir) == 0);
}

TEST_CASE("binary thm shorthand mirrors the named fixture") {
    const fs::path dir = fresh_dir("thm");
    const fs::path a = dir / "shorthand", b = dir / "named";
    REQUIRE(run_cli("counterexample --thm 2.2 --out " + a.string(), dir) == 0);
    REQUIRE(run_cli("counterexample --fixture thm22 --out " + b.string(), dir) == 0);
    CHECK(read_file(a / "results.csv") == read_file(b / "results.csv"));
    CHECK(read_file(dir / "stdout.txt").find("verdict: growing") != std::string::npos);
}

TEST_CASE("binary seed override changes the sampled run") {
    const fs::path dir = fresh_dir("seed");
    const fs::path a = dir / "default", b = dir / "reseeded";
    REQUIRE(run_cli("sp-check --fixture golden-mean-parry --out " + a.string(), dir) == 0);
    REQUIRE(run_cli("sp-check --fixture golden-mean-parry --seed 7 --out " + b.string(), dir) ==
            0);
    CHECK(read_file(a / "results.csv") != read_file(b / "results.csv"));

    const Json ma = Json::parse(read_file(a / "meta.json"));
    const Json mb = Json::parse(read_file(b / "meta.json"));
    CHECK(ma.at("config_hash") != mb.at("config_hash"));
}

TEST_CASE("binary prints the catalog as parseable JSON") {
    const fs::path dir = fresh_dir("catalog");
    REQUIRE(run_cli("fixtures", dir) == 0);
    const Json printed = Json::parse(read_file(dir / "stdout.txt"));
    CHECK(printed == fixture_catalog());
}
