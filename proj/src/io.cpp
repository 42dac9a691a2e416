#include "sesqui/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sesqui {

namespace {

double require_number(const ordered_json& j, const std::string& where) {
  if (!j.is_number())
    fail(ErrorCode::ConfigError, where + ": expected a number");
  return j.get<double>();
}

int require_int(const ordered_json& j, const std::string& where) {
  if (!j.is_number_integer())
    fail(ErrorCode::ConfigError, where + ": expected an integer");
  return j.get<int>();
}

std::vector<PolyEntry> poly_entries_from_json(const ordered_json& j,
                                              const std::string& where) {
  if (!j.is_array()) fail(ErrorCode::ConfigError, where + ": expected array");
  std::vector<PolyEntry> out;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != 3)
      fail(ErrorCode::ConfigError, where + ": entry must be [k, l, coeffs]");
    PolyEntry e;
    e.k = require_int(row[0], where);
    e.l = require_int(row[1], where);
    if (!row[2].is_array())
      fail(ErrorCode::ConfigError, where + ": coeffs must be an array");
    for (const auto& c : row[2])
      e.coeffs.push_back(require_number(c, where));
    out.push_back(std::move(e));
  }
  return out;
}

ordered_json poly_entries_to_json(const std::vector<PolyEntry>& entries) {
  ordered_json out = ordered_json::array();
  for (const PolyEntry& e : entries) {
    ordered_json coeffs = ordered_json::array();
    for (double c : e.coeffs) coeffs.push_back(c);
    out.push_back(ordered_json::array({e.k, e.l, coeffs}));
  }
  return out;
}

}  // namespace

void reject_unknown_keys(const ordered_json& j,
                         const std::vector<std::string>& allowed,
                         const std::string& where) {
  if (!j.is_object())
    fail(ErrorCode::ConfigError, where + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const std::string& k : allowed)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      fail(ErrorCode::ConfigError, where + ": unknown key '" + item.key() + "'");
  }
}

BivariatePMF pmf_from_json(const ordered_json& j) {
  if (!j.is_object())
    fail(ErrorCode::ConfigError, "pmf: expected a JSON object");
  if (j.contains("family")) {
    reject_unknown_keys(j, {"family", "mu", "nu", "tail_tol"}, "pmf");
    const std::string family = j.at("family").get<std::string>();
    if (family != "product_poisson")
      fail(ErrorCode::ConfigError, "pmf: unknown family '" + family + "'");
    const double mu = require_number(j.at("mu"), "pmf.mu");
    const double nu = require_number(j.at("nu"), "pmf.nu");
    const double tol = j.contains("tail_tol")
                           ? require_number(j.at("tail_tol"), "pmf.tail_tol")
                           : 1e-15;
    return pmf_from_product_poisson(mu, nu, tol);
  }
  reject_unknown_keys(j, {"entries", "normalize"}, "pmf");
  if (!j.contains("entries"))
    fail(ErrorCode::ConfigError, "pmf: missing 'entries' or 'family'");
  std::vector<Entry> entries;
  for (const auto& row : j.at("entries")) {
    if (!row.is_array() || row.size() != 3)
      fail(ErrorCode::ConfigError, "pmf: entry must be [k, l, p]");
    entries.push_back({require_int(row[0], "pmf.entries"),
                       require_int(row[1], "pmf.entries"),
                       require_number(row[2], "pmf.entries")});
  }
  const bool normalize =
      j.contains("normalize") && j.at("normalize").get<bool>();
  return pmf_from_entries(entries, normalize);
}

ordered_json pmf_to_json(const BivariatePMF& pmf) {
  ordered_json entries = ordered_json::array();
  for (int k = 0; k <= pmf.kmax(); ++k)
    for (int l = 0; l <= pmf.lmax(); ++l)
      if (pmf.prob(k, l) != 0.0)
        entries.push_back(ordered_json::array({k, l, pmf.prob(k, l)}));
  ordered_json out;
  out["entries"] = std::move(entries);
  return out;
}

ProcessSpec spec_from_json(const ordered_json& j) {
  reject_unknown_keys(j, {"offspring", "initial"}, "spec");
  if (!j.contains("offspring") || !j.contains("initial"))
    fail(ErrorCode::ConfigError, "spec: needs 'offspring' and 'initial'");
  return ProcessSpec{pmf_from_json(j.at("offspring")),
                     pmf_from_json(j.at("initial"))};
}

ordered_json spec_to_json(const ProcessSpec& spec) {
  ordered_json out;
  out["offspring"] = pmf_to_json(spec.offspring);
  out["initial"] = pmf_to_json(spec.initial);
  return out;
}

FamilySpec family_from_json(const ordered_json& j) {
  if (!j.is_object())
    fail(ErrorCode::ConfigError, "family: expected a JSON object");
  if (!j.contains("interval") || !j.at("interval").is_array() ||
      j.at("interval").size() != 2)
    fail(ErrorCode::ConfigError, "family: 'interval' must be [lo, hi]");
  const double lo = require_number(j.at("interval")[0], "family.interval");
  const double hi = require_number(j.at("interval")[1], "family.interval");
  const double class_R =
      j.contains("class_R") ? require_number(j.at("class_R"), "family.class_R")
                            : 2.0;
  if (j.contains("builtin")) {
    reject_unknown_keys(
        j, {"builtin", "interval", "nu", "tail_tol", "initial", "class_R"},
        "family");
    const std::string builtin = j.at("builtin").get<std::string>();
    if (builtin != "poisson_t")
      fail(ErrorCode::ConfigError, "family: unknown builtin '" + builtin + "'");
    const double nu = require_number(j.at("nu"), "family.nu");
    const double tol =
        j.contains("tail_tol")
            ? require_number(j.at("tail_tol"), "family.tail_tol")
            : 1e-15;
    return FamilySpec::poisson_t(
        lo, hi, nu, poly_entries_from_json(j.at("initial"), "family.initial"),
        tol, class_R);
  }
  reject_unknown_keys(j, {"interval", "offspring", "initial", "class_R"},
                      "family");
  return FamilySpec::polynomial(
      lo, hi, poly_entries_from_json(j.at("offspring"), "family.offspring"),
      poly_entries_from_json(j.at("initial"), "family.initial"), class_R);
}

ordered_json family_to_json(const FamilySpec& family) {
  ordered_json out;
  if (family.kind() == FamilySpec::Kind::PoissonT) {
    out["builtin"] = "poisson_t";
    out["interval"] = ordered_json::array({family.t_lo(), family.t_hi()});
    out["nu"] = family.nu();
    out["tail_tol"] = family.tail_tol();
    out["initial"] = poly_entries_to_json(family.initial_entries());
  } else {
    out["interval"] = ordered_json::array({family.t_lo(), family.t_hi()});
    out["offspring"] = poly_entries_to_json(family.offspring_entries());
    out["initial"] = poly_entries_to_json(family.initial_entries());
  }
  out["class_R"] = family.class_R();
  return out;
}

ordered_json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot open file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, path + ": " + e.what());
  }
  return j;
}

ProcessSpec load_spec_file(const std::string& path) {
  return spec_from_json(load_json_file(path));
}

FamilySpec load_family_file(const std::string& path) {
  return family_from_json(load_json_file(path));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace sesqui
