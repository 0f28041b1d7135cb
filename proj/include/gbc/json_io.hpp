#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

#include "gbc/baker.hpp"
#include "gbc/bc_lab.hpp"
#include "gbc/gibbs.hpp"
#include "gbc/shift_space.hpp"
#include "gbc/toral.hpp"

namespace gbc {

using Json = nlohmann::json;

// Config parsers. Shape violations throw ConfigError with the offending key;
// semantic violations surface as the module's own validation errors.
TransitionMatrix matrix_from_json(const Json& j);
Potential potential_from_json(const TransitionMatrix& a, const Json& j);
MarkovGibbs chain_from_json(const Json& j);
Cylinder cylinder_from_json(const TransitionMatrix& a, const Json& j);

// One of: {"direct": [cyl...]}, {"derive": {"base": [cyl...], "lengths":
// [...]}}, {"random": {"n", "jitter", "cap", "scale"}}, {"thm22": {"base",
// "K"}}, {"thm23": {"eps", "K"}}, {"prop16": {"base": [cyl...]}}. The seed
// feeds the randomized generator only.
CylinderSequence sequence_from_json(const MarkovGibbs& g, const Json& j, std::uint64_t seed);

Eigen::Matrix2i matrix2i_from_json(const Json& j);
Rectangle rectangle_from_json(const Json& j);

// One of: {"list": [rect...]}, {"fixed": rect}, {"shrinking": {"center",
// "cap", "scale"}}, {"drifting": rect}.
TorusTargets torus_targets_from_json(const Json& j);

// One of: {"fixed": {"center", "radius"}}, {"shrinking": {"center", "cap",
// "scale"}}.
BakerTargets baker_targets_from_json(const Json& j);

std::uint64_t fnv1a64(std::string_view s);

// Hash of the effective experiment config: plumbing-only fields (out,
// workers) are dropped and keys serialize in sorted order, so the same
// experiment hashes the same no matter where it writes or how many threads
// ran it.
std::string config_hash(Json config);

// Shortest round-trip decimal form, '.' decimal point, locale-independent.
std::string format_double(double v);

}  // namespace gbc
