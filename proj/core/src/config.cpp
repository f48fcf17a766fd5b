#include "torusdyn/config.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

namespace torusdyn {

namespace {

using Json = nlohmann::ordered_json;

// Strict object access: every present key must be known, so typos surface as
// errors instead of silently falling back to defaults.
void require_keys(const Json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object())
    throw InvalidArgument("config: " + where + " must be a JSON object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw InvalidArgument("config: unknown key \"" + item.key() + "\" in " +
                            where);
}

double get_number(const Json& obj, const std::string& where,
                  const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number())
    throw InvalidArgument("config: " + where + "." + key + " must be a number");
  return v.get<double>();
}

int get_int(const Json& obj, const std::string& where, const std::string& key,
            int fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number_integer())
    throw InvalidArgument("config: " + where + "." + key +
                          " must be an integer");
  return v.get<int>();
}

std::pair<int, int> get_range(const Json& obj, const std::string& where,
                              const std::string& key,
                              std::pair<int, int> fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
      !v[1].is_number_integer())
    throw InvalidArgument("config: " + where + "." + key +
                          " must be a two-integer array [lo, hi]");
  std::pair<int, int> r{v[0].get<int>(), v[1].get<int>()};
  if (r.first > r.second)
    throw InvalidArgument("config: " + where + "." + key +
                          " must satisfy lo <= hi");
  return r;
}

void check_positive(double value, const std::string& field) {
  if (!(value > 0.0))
    throw InvalidArgument("config: " + field + " must be positive");
}

SystemConfig parse_system(const Json& j) {
  require_keys(j, "system", {"dimension", "matrix", "modes", "budget"});
  if (!j.contains("matrix"))
    throw InvalidArgument("config: system.matrix is required");

  SystemConfig out;
  const Json& m = j.at("matrix");
  if (!m.is_array() || m.empty())
    throw InvalidArgument("config: system.matrix must be a non-empty array of "
                          "integer rows");
  const int d = static_cast<int>(m.size());
  out.matrix.resize(d, d);
  for (int i = 0; i < d; ++i) {
    const Json& row = m[i];
    if (!row.is_array() || static_cast<int>(row.size()) != d)
      throw InvalidArgument("config: system.matrix must be square");
    for (int k = 0; k < d; ++k) {
      if (!row[k].is_number_integer())
        throw InvalidArgument("config: system.matrix entries must be integers");
      out.matrix(i, k) = row[k].get<std::int64_t>();
    }
  }
  out.dimension = get_int(j, "system", "dimension", d);
  if (out.dimension != d)
    throw InvalidArgument("config: system.dimension disagrees with the matrix "
                          "size");

  if (j.contains("modes")) {
    const Json& modes = j.at("modes");
    if (!modes.is_array())
      throw InvalidArgument("config: system.modes must be an array");
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const std::string where = "system.modes[" + std::to_string(i) + "]";
      const Json& jm = modes[i];
      require_keys(jm, where, {"amplitude", "target", "k", "phase"});
      Mode mode;
      mode.amplitude = get_number(jm, where, "amplitude", 0.0);
      mode.target = get_int(jm, where, "target", 0);
      mode.phase = get_number(jm, where, "phase", 0.0);
      if (!jm.contains("k") || !jm.at("k").is_array() ||
          static_cast<int>(jm.at("k").size()) != d)
        throw InvalidArgument("config: " + where +
                              ".k must be an integer array of length " +
                              std::to_string(d));
      for (const Json& e : jm.at("k")) {
        if (!e.is_number_integer())
          throw InvalidArgument("config: " + where + ".k entries must be "
                                "integers");
        mode.k.push_back(e.get<std::int64_t>());
      }
      out.modes.push_back(std::move(mode));
    }
  }
  out.budget = get_number(j, "system", "budget", out.budget);
  check_positive(out.budget, "system.budget");
  return out;
}

std::optional<std::uint64_t> parse_seed_field(const Json& j,
                                              const std::string& where) {
  if (!j.contains("seed")) return std::nullopt;
  const Json& v = j.at("seed");
  if (!v.is_number_unsigned() && !v.is_number_integer())
    throw InvalidArgument("config: " + where + ".seed must be a non-negative "
                          "integer");
  if (v.is_number_integer() && v.get<std::int64_t>() < 0)
    throw InvalidArgument("config: " + where + ".seed must be non-negative");
  return v.get<std::uint64_t>();
}

Json range_json(std::pair<int, int> r) { return Json::array({r.first, r.second}); }

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{
      "theorem1", "theorem2", "ordering", "corollary1", "lemma_d"};
  return names;
}

CampaignConfig parse_campaign_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("config: JSON parse error: ") + e.what());
  }
  require_keys(j, "top level",
               {"schema_version", "system", "unstable", "growth", "entropy",
                "cs_exponent", "lemma_d", "tolerances", "theorem1_form",
                "checks", "seed"});
  if (!j.contains("schema_version") ||
      !j.at("schema_version").is_number_integer() ||
      j.at("schema_version").get<int>() != 1)
    throw InvalidArgument("config: schema_version must be present and equal 1");
  if (!j.contains("system"))
    throw InvalidArgument("config: system block is required");

  CampaignConfig cfg;
  cfg.system = parse_system(j.at("system"));

  if (j.contains("unstable")) {
    const Json& u = j.at("unstable");
    require_keys(u, "unstable", {"n_settle", "residual"});
    cfg.unstable.n_settle = get_int(u, "unstable", "n_settle",
                                    cfg.unstable.n_settle);
    cfg.unstable.residual = get_number(u, "unstable", "residual",
                                       cfg.unstable.residual);
    if (cfg.unstable.n_settle < 1)
      throw InvalidArgument("config: unstable.n_settle must be >= 1");
    check_positive(cfg.unstable.residual, "unstable.residual");
  }

  if (j.contains("growth")) {
    const Json& g = j.at("growth");
    require_keys(g, "growth",
                 {"n_samples", "k_disks", "n_range", "leaf_radius",
                  "transverse_radius_min", "m_converge", "quad_tol", "seed"});
    GrowthConfig& gc = cfg.growth;
    gc.n_samples = get_int(g, "growth", "n_samples", gc.n_samples);
    gc.k_disks = get_int(g, "growth", "k_disks", gc.k_disks);
    gc.n_range = get_range(g, "growth", "n_range", gc.n_range);
    gc.leaf_radius = get_number(g, "growth", "leaf_radius", gc.leaf_radius);
    gc.transverse_radius_min = get_number(g, "growth", "transverse_radius_min",
                                          gc.transverse_radius_min);
    gc.m_converge = get_int(g, "growth", "m_converge", gc.m_converge);
    gc.quad_tol = get_number(g, "growth", "quad_tol", gc.quad_tol);
    gc.seed = parse_seed_field(g, "growth");
    if (gc.n_samples < 1)
      throw InvalidArgument("config: growth.n_samples must be >= 1");
    if (gc.k_disks < 1)
      throw InvalidArgument("config: growth.k_disks must be >= 1");
    check_positive(gc.leaf_radius, "growth.leaf_radius");
    check_positive(gc.transverse_radius_min, "growth.transverse_radius_min");
    if (gc.m_converge < 0)
      throw InvalidArgument("config: growth.m_converge must be >= 0");
    check_positive(gc.quad_tol, "growth.quad_tol");
  }

  if (j.contains("entropy")) {
    const Json& e = j.at("entropy");
    require_keys(e, "entropy",
                 {"sampler", "burn_in", "n_samples", "ladder", "n_range",
                  "seed"});
    EntropyConfig& ec = cfg.entropy;
    if (e.contains("sampler")) {
      if (!e.at("sampler").is_string())
        throw InvalidArgument("config: entropy.sampler must be a string");
      ec.sampler = e.at("sampler").get<std::string>();
    }
    if (ec.sampler != "lebesgue" && ec.sampler != "pushforward")
      throw InvalidArgument("config: entropy.sampler must be \"lebesgue\" or "
                            "\"pushforward\"");
    ec.burn_in = get_int(e, "entropy", "burn_in", ec.burn_in);
    ec.n_samples = get_int(e, "entropy", "n_samples", ec.n_samples);
    if (e.contains("ladder")) {
      const Json& l = e.at("ladder");
      if (!l.is_array() || l.empty())
        throw InvalidArgument("config: entropy.ladder must be a non-empty "
                              "array of numbers");
      ec.ladder.clear();
      for (const Json& v : l) {
        if (!v.is_number())
          throw InvalidArgument("config: entropy.ladder entries must be "
                                "numbers");
        ec.ladder.push_back(v.get<double>());
      }
    }
    ec.n_range = get_range(e, "entropy", "n_range", ec.n_range);
    ec.seed = parse_seed_field(e, "entropy");
    if (ec.burn_in < 0)
      throw InvalidArgument("config: entropy.burn_in must be >= 0");
    if (ec.n_samples < 100)
      throw InvalidArgument("config: entropy.n_samples must be >= 100");
    for (std::size_t i = 0; i < ec.ladder.size(); ++i) {
      check_positive(ec.ladder[i], "entropy.ladder entries");
      if (i > 0 && ec.ladder[i] >= ec.ladder[i - 1])
        throw InvalidArgument("config: entropy.ladder must be strictly "
                              "decreasing");
    }
    if (ec.n_range.first < 0)
      throw InvalidArgument("config: entropy.n_range must be non-negative");
  }

  if (j.contains("cs_exponent")) {
    const Json& c = j.at("cs_exponent");
    require_keys(c, "cs_exponent", {"n", "sample_points"});
    cfg.cs_exponent.n = get_int(c, "cs_exponent", "n", cfg.cs_exponent.n);
    cfg.cs_exponent.sample_points =
        get_int(c, "cs_exponent", "sample_points", cfg.cs_exponent.sample_points);
    if (cfg.cs_exponent.n < 1)
      throw InvalidArgument("config: cs_exponent.n must be >= 1");
    if (cfg.cs_exponent.sample_points < 1)
      throw InvalidArgument("config: cs_exponent.sample_points must be >= 1");
  }

  if (j.contains("lemma_d")) {
    const Json& l = j.at("lemma_d");
    require_keys(l, "lemma_d", {"n_range"});
    cfg.lemma_d.n_range = get_range(l, "lemma_d", "n_range", cfg.lemma_d.n_range);
    if (cfg.lemma_d.n_range.first < 0)
      throw InvalidArgument("config: lemma_d.n_range must be non-negative");
  }

  if (j.contains("tolerances")) {
    const Json& t = j.at("tolerances");
    require_keys(t, "tolerances",
                 {"theorem2", "ordering", "corollary1", "lemma_d",
                  "theorem1_entropy", "theorem1_growth", "theorem1_exponent"});
    ToleranceConfig& tc = cfg.tolerances;
    tc.theorem2 = get_number(t, "tolerances", "theorem2", tc.theorem2);
    tc.ordering = get_number(t, "tolerances", "ordering", tc.ordering);
    tc.corollary1 = get_number(t, "tolerances", "corollary1", tc.corollary1);
    tc.lemma_d = get_number(t, "tolerances", "lemma_d", tc.lemma_d);
    tc.theorem1_entropy =
        get_number(t, "tolerances", "theorem1_entropy", tc.theorem1_entropy);
    tc.theorem1_growth =
        get_number(t, "tolerances", "theorem1_growth", tc.theorem1_growth);
    tc.theorem1_exponent =
        get_number(t, "tolerances", "theorem1_exponent", tc.theorem1_exponent);
    check_positive(tc.theorem2, "tolerances.theorem2");
    check_positive(tc.ordering, "tolerances.ordering");
    check_positive(tc.corollary1, "tolerances.corollary1");
    check_positive(tc.lemma_d, "tolerances.lemma_d");
    check_positive(tc.theorem1_entropy, "tolerances.theorem1_entropy");
    check_positive(tc.theorem1_growth, "tolerances.theorem1_growth");
    check_positive(tc.theorem1_exponent, "tolerances.theorem1_exponent");
  }

  if (j.contains("theorem1_form")) {
    if (!j.at("theorem1_form").is_string())
      throw InvalidArgument("config: theorem1_form must be a string");
    cfg.theorem1_form = j.at("theorem1_form").get<std::string>();
  }
  if (cfg.theorem1_form != "literal" && cfg.theorem1_form != "clamped")
    throw InvalidArgument("config: theorem1_form must be \"literal\" or "
                          "\"clamped\"");

  if (j.contains("checks")) {
    const Json& c = j.at("checks");
    if (!c.is_array())
      throw InvalidArgument("config: checks must be an array of check names");
    cfg.checks.clear();
    for (const Json& v : c) {
      if (!v.is_string())
        throw InvalidArgument("config: checks entries must be strings");
      const std::string name = v.get<std::string>();
      const auto& known = known_checks();
      if (std::find(known.begin(), known.end(), name) == known.end())
        throw InvalidArgument("config: unknown check \"" + name + "\"");
      if (std::find(cfg.checks.begin(), cfg.checks.end(), name) !=
          cfg.checks.end())
        throw InvalidArgument("config: duplicate check \"" + name + "\"");
      cfg.checks.push_back(name);
    }
  } else {
    cfg.checks = known_checks();  // absent means the full suite
  }

  if (j.contains("seed")) {
    const auto s = parse_seed_field(j, "top level");
    cfg.seed = s.value_or(cfg.seed);
  }
  return cfg;
}

std::string campaign_config_json(const CampaignConfig& cfg) {
  Json j;
  j["schema_version"] = cfg.schema_version;

  Json sys;
  sys["dimension"] = cfg.system.dimension;
  Json rows = Json::array();
  for (int i = 0; i < cfg.system.matrix.rows(); ++i) {
    Json row = Json::array();
    for (int k = 0; k < cfg.system.matrix.cols(); ++k)
      row.push_back(cfg.system.matrix(i, k));
    rows.push_back(std::move(row));
  }
  sys["matrix"] = std::move(rows);
  Json modes = Json::array();
  for (const Mode& m : cfg.system.modes) {
    Json jm;
    jm["amplitude"] = m.amplitude;
    jm["target"] = m.target;
    jm["k"] = m.k;
    jm["phase"] = m.phase;
    modes.push_back(std::move(jm));
  }
  sys["modes"] = std::move(modes);
  sys["budget"] = cfg.system.budget;
  j["system"] = std::move(sys);

  j["unstable"] = {{"n_settle", cfg.unstable.n_settle},
                   {"residual", cfg.unstable.residual}};

  Json growth;
  growth["n_samples"] = cfg.growth.n_samples;
  growth["k_disks"] = cfg.growth.k_disks;
  growth["n_range"] = range_json(cfg.growth.n_range);
  growth["leaf_radius"] = cfg.growth.leaf_radius;
  growth["transverse_radius_min"] = cfg.growth.transverse_radius_min;
  growth["m_converge"] = cfg.growth.m_converge;
  growth["quad_tol"] = cfg.growth.quad_tol;
  if (cfg.growth.seed) growth["seed"] = *cfg.growth.seed;
  j["growth"] = std::move(growth);

  Json entropy;
  entropy["sampler"] = cfg.entropy.sampler;
  entropy["burn_in"] = cfg.entropy.burn_in;
  entropy["n_samples"] = cfg.entropy.n_samples;
  entropy["ladder"] = cfg.entropy.ladder;
  entropy["n_range"] = range_json(cfg.entropy.n_range);
  if (cfg.entropy.seed) entropy["seed"] = *cfg.entropy.seed;
  j["entropy"] = std::move(entropy);

  j["cs_exponent"] = {{"n", cfg.cs_exponent.n},
                      {"sample_points", cfg.cs_exponent.sample_points}};
  j["lemma_d"] = {{"n_range", range_json(cfg.lemma_d.n_range)}};

  Json tol;
  tol["theorem2"] = cfg.tolerances.theorem2;
  tol["ordering"] = cfg.tolerances.ordering;
  tol["corollary1"] = cfg.tolerances.corollary1;
  tol["lemma_d"] = cfg.tolerances.lemma_d;
  tol["theorem1_entropy"] = cfg.tolerances.theorem1_entropy;
  tol["theorem1_growth"] = cfg.tolerances.theorem1_growth;
  tol["theorem1_exponent"] = cfg.tolerances.theorem1_exponent;
  j["tolerances"] = std::move(tol);

  j["theorem1_form"] = cfg.theorem1_form;
  j["checks"] = cfg.checks;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

TorusMap build_system(const SystemConfig& cfg) {
  if (cfg.modes.empty()) return TorusMap::linear(cfg.matrix);
  return TorusMap::perturbed(cfg.matrix, cfg.modes, cfg.budget, true);
}

}  // namespace torusdyn
