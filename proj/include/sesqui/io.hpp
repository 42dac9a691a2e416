#pragma once

#include <string>

#include "json.hpp"
#include "sesqui/family.hpp"
#include "sesqui/pmf.hpp"

namespace sesqui {

using ordered_json = nlohmann::ordered_json;

/// PMF forms: {"entries": [[k, l, p], ...], "normalize": false}
/// or {"family": "product_poisson", "mu": .., "nu": .., "tail_tol": ..}.
BivariatePMF pmf_from_json(const ordered_json& j);
ordered_json pmf_to_json(const BivariatePMF& pmf);

/// {"offspring": <pmf>, "initial": <pmf>}.
ProcessSpec spec_from_json(const ordered_json& j);
ordered_json spec_to_json(const ProcessSpec& spec);

/// {"interval": [lo, hi], "offspring": [[k, l, [c0, c1, ...]], ...],
///  "initial": [...], "class_R": ..} or
/// {"builtin": "poisson_t", "interval": [lo, hi], "nu": .., "tail_tol": ..,
///  "initial": [...], "class_R": ..}.
FamilySpec family_from_json(const ordered_json& j);
ordered_json family_to_json(const FamilySpec& family);

ProcessSpec load_spec_file(const std::string& path);
FamilySpec load_family_file(const std::string& path);
ordered_json load_json_file(const std::string& path);

/// Canonical double formatting for CSV output (shortest round-trip form).
std::string format_double(double v);

/// Rejects keys outside the allowed set; the json must be an object.
void reject_unknown_keys(const ordered_json& j,
                         const std::vector<std::string>& allowed,
                         const std::string& where);

}  // namespace sesqui
