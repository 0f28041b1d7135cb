#pragma once

#include <string>

#include "gbc/json_io.hpp"

namespace gbc {

// In-memory artifacts of one experiment run: everything the CLI writes to
// disk except meta.json timing, which belongs to the caller.
struct RunArtifacts {
    std::string kind;
    std::string hash;  // config hash, also stamped on every CSV row
    std::string csv;   // results.csv content, LF endings, header row first
    Json summary;      // summary.json content
};

// Dispatches on config["kind"]: measure | sp-check | counterexample |
// simulate | toral | baker. The seed must be explicit in the config; the
// worker count ("workers", default 1) never changes the results.
RunArtifacts run_experiment(const Json& config);

// Bundled fixtures, name -> full runnable config. Stable across runs.
Json fixture_catalog();
Json fixture_config(const std::string& name);

}  // namespace gbc
