// torusdyn: estimator runs, verification campaigns, and exact cohomological
// quantities for diffeomorphisms of the d-torus, driven by a JSON config.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "torusdyn/bundles.hpp"
#include "torusdyn/campaign.hpp"
#include "torusdyn/cohomology.hpp"
#include "torusdyn/rng.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;
using namespace torusdyn;

int emit_error(const std::string& code, const std::string& message) {
  ordered_json j;
  j["error"] = {{"code", code}, {"message", message}};
  std::printf("%s\n", j.dump(2).c_str());
  return 2;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read file \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::vector<std::string> checks;
};

CampaignConfig load_config(const std::string& path, const Overrides& ov) {
  CampaignConfig cfg = parse_campaign_config(read_file(path));
  if (ov.seed) cfg.seed = *ov.seed;
  if (!ov.checks.empty()) {
    const auto& known = known_checks();
    for (const std::string& c : ov.checks) {
      if (std::find(known.begin(), known.end(), c) == known.end())
        throw InvalidArgument("unknown check \"" + c + "\"");
      if (std::count(ov.checks.begin(), ov.checks.end(), c) > 1)
        throw InvalidArgument("check \"" + c + "\" requested twice");
    }
    cfg.checks = ov.checks;
  }
  return cfg;
}

ordered_json matrix_json(const IMat& a) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < a.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(row);
  }
  return rows;
}

// ---- invariants: the quick per-system estimators in one shot ----

int cmd_invariants(const std::string& config_path, const Overrides& ov,
                   bool as_json) {
  CampaignConfig cfg;
  try {
    cfg = load_config(config_path, ov);
  } catch (const std::exception& e) {
    return emit_error("config", e.what());
  }
  const TorusMap f = build_system(cfg.system);
  const int d = f.dimension();
  const ModuliLadder ladder = eigenvalue_moduli(f.matrix());
  const int u = ladder.unstable;

  ordered_json out;
  out["dimension"] = d;
  out["map"] = f.is_linear() ? "linear" : "perturbed";
  out["matrix"] = matrix_json(f.matrix());
  out["log_moduli"] = ladder.log_moduli;
  out["unstable_dimension"] = ladder.unstable;
  out["center_dimension"] = ladder.center;
  out["stable_dimension"] = ladder.stable;

  Rng rng(mix_seed(cfg.seed, 7));
  const Point x = Point::canonical(rng.point(d));
  const LyapunovSpectrum sp =
      lyapunov_spectrum(f, x, 2000, mix_seed(cfg.seed, 8));
  out["lyapunov"] = {{"exponents", sp.exponents},
                     {"sum", sp.sum()},
                     {"orbit_length", sp.orbit_length}};

  if (u >= 1 && u < d) {
    Rng prng(mix_seed(cfg.seed, 9));
    std::vector<Point> sample;
    for (int i = 0; i < cfg.cs_exponent.sample_points; ++i)
      sample.push_back(Point::canonical(prng.point(d)));
    try {
      const DominationCheck dom = check_domination(
          f, sample, u, cfg.unstable.n_settle, mix_seed(cfg.seed, 10));
      out["domination"] = {{"dominated", dom.dominated},
                           {"margin", dom.margin},
                           {"weak_margin", dom.weak_margin}};
    } catch (const std::exception& e) {
      out["domination"] = {{"error", e.what()}};
    }
    out["theorem2_rhs"] = theorem2_rhs(f.matrix(), u);
    out["u_form_gap"] = u_form_gap(f.matrix(), u);
  }

  if (as_json) {
    std::printf("%s\n", out.dump(2).c_str());
    return 0;
  }
  std::printf("dimension          %d (%s)\n", d, f.is_linear() ? "linear" : "perturbed");
  std::printf("splitting u/c/s    %d / %d / %d\n", ladder.unstable,
              ladder.center, ladder.stable);
  std::printf("log moduli        ");
  for (double m : ladder.log_moduli) std::printf(" %.6f", m);
  std::printf("\nlyapunov          ");
  for (double l : sp.exponents) std::printf(" %.6f", l);
  std::printf("   (sum %.2e, n=%d)\n", sp.sum(), sp.orbit_length);
  if (out.contains("domination")) {
    if (out["domination"].contains("error"))
      std::printf("domination         error: %s\n",
                  out["domination"]["error"].get<std::string>().c_str());
    else
      std::printf("domination         %s (margin %.4f)\n",
                  out["domination"]["dominated"].get<bool>() ? "yes" : "no",
                  out["domination"]["margin"].get<double>());
  }
  if (out.contains("theorem2_rhs"))
    std::printf("theorem2 rhs       %.10f (u-form gap %.4f)\n",
                out["theorem2_rhs"].get<double>(),
                out["u_form_gap"].get<double>());
  return 0;
}

// ---- cohomology: exact quantities only, no dynamics ----

int cmd_cohomology(const std::string& config_path, const Overrides& ov,
                   bool as_json) {
  CampaignConfig cfg;
  try {
    cfg = load_config(config_path, ov);
  } catch (const std::exception& e) {
    return emit_error("config", e.what());
  }
  const IMat a = cfg.system.matrix;
  const int d = static_cast<int>(a.rows());
  const ModuliLadder ladder = eigenvalue_moduli(a);
  const int u = ladder.unstable;

  ordered_json out;
  out["matrix"] = matrix_json(a);
  out["log_moduli"] = ladder.log_moduli;
  out["unstable_dimension"] = u;
  ordered_json degrees = ordered_json::array();
  for (int k = 1; k <= d; ++k) {
    const CohomologyAction act = induced_action(a, k);
    degrees.push_back({{"degree", k},
                       {"dimension", act.action.rows()},
                       {"log_spec", act.log_spec}});
  }
  out["degrees"] = std::move(degrees);
  if (u >= 1) {
    out["theorem2_rhs"] = theorem2_rhs(a, u);
    out["u_form_gap"] = u_form_gap(a, u);
  }

  if (as_json) {
    std::printf("%s\n", out.dump(2).c_str());
    return 0;
  }
  std::printf("log moduli        ");
  for (double m : ladder.log_moduli) std::printf(" %.6f", m);
  std::printf("\nsplitting u/c/s    %d / %d / %d\n", ladder.unstable,
              ladder.center, ladder.stable);
  for (const auto& row : out["degrees"])
    std::printf("degree %d           dim %3d   log spec %.10f\n",
                row["degree"].get<int>(), row["dimension"].get<int>(),
                row["log_spec"].get<double>());
  if (u >= 1)
    std::printf("theorem2 rhs       %.10f (u-form gap %.4f)\n",
                out["theorem2_rhs"].get<double>(),
                out["u_form_gap"].get<double>());
  return 0;
}

// ---- verify: full campaign ----

int cmd_verify(const std::string& config_path, const Overrides& ov,
               const std::string& out_dir, bool as_json, bool as_csv) {
  CampaignConfig cfg;
  try {
    cfg = load_config(config_path, ov);
  } catch (const std::exception& e) {
    return emit_error("config", e.what());
  }
  TorusMap f = build_system(cfg.system);
  const VerificationReport rep = run_campaign(f, cfg);

  if (!out_dir.empty()) {
    try {
      write_report(rep, out_dir);
    } catch (const std::exception& e) {
      return emit_error("io", e.what());
    }
  }

  if (as_json) {
    std::fputs(report_json(rep).c_str(), stdout);
  } else {
    for (const CheckRecord& c : rep.checks) {
      if (c.status == CheckStatus::pass || c.status == CheckStatus::fail)
        std::printf("%-11s %-14s slack=%+.4f  tol=%.4f\n", c.name.c_str(),
                    status_name(c.status), c.slack, c.tolerance);
      else
        std::printf("%-11s %-14s %s\n", c.name.c_str(), status_name(c.status),
                    c.reason.c_str());
    }
  }
  if (as_csv) {
    for (const CheckRecord& c : rep.checks)
      for (const SeriesTable& t : c.series) {
        std::printf("# %s.csv\n%s\n", t.name.c_str(), t.header.c_str());
        for (const std::string& row : t.rows) std::printf("%s\n", row.c_str());
      }
  }
  return report_exit_code(rep);
}

// ---- report: pretty-print an existing report.json ----

int cmd_report(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const std::exception& e) {
    return emit_error("io", e.what());
  }
  std::printf("torusdyn %s  seed %llu  %s\n",
              j.value("version", std::string("?")).c_str(),
              static_cast<unsigned long long>(j.value("seed", 0ull)),
              j.contains("timing")
                  ? j["timing"].value("timestamp", std::string("?")).c_str()
                  : "?");
  for (const auto& c : j.value("checks", ordered_json::array())) {
    const std::string name = c.value("name", std::string("?"));
    const std::string status = c.value("status", std::string("?"));
    if (c.contains("slack"))
      std::printf("\n%-11s %-14s slack=%+.4f  tol=%.4f\n", name.c_str(),
                  status.c_str(), c["slack"].get<double>(),
                  c.value("tolerance", 0.0));
    else
      std::printf("\n%-11s %-14s %s\n", name.c_str(), status.c_str(),
                  c.value("reason", std::string()).c_str());
    for (const auto& kv : c.value("quantities", ordered_json::object()).items())
      std::printf("    %-44s %.10g\n", kv.key().c_str(),
                  kv.value().get<double>());
    for (const auto& cav : c.value("caveats", ordered_json::array()))
      std::printf("    caveat: %s\n", cav.get<std::string>().c_str());
  }
  if (j.contains("timing") && j["timing"].contains("wall_seconds"))
    std::printf("\ntotal %.1f s\n",
                j["timing"]["wall_seconds"].value("total", 0.0));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamical invariants of torus diffeomorphisms"};
  app.require_subcommand(1);

  std::string config_path, out_dir, report_path;
  Overrides ov;
  std::uint64_t seed_value = 0;
  bool as_json = false, as_csv = false;

  const auto add_common = [&](CLI::App* sub, bool with_campaign_flags) {
    sub->add_option("--config", config_path, "JSON campaign config")
        ->required();
    sub->add_option("--seed", seed_value, "override the config seed")
        ->each([&](const std::string&) { ov.seed = seed_value; });
    sub->add_flag("--json", as_json, "emit JSON on stdout");
    if (with_campaign_flags) {
      sub->add_option("--check", ov.checks,
                      "run only this check (repeatable)");
      sub->add_option("--out", out_dir, "directory for report.json and series/");
      sub->add_flag("--csv", as_csv, "emit series CSV on stdout");
    }
  };

  CLI::App* inv = app.add_subcommand("invariants", "one-off estimator runs");
  add_common(inv, false);
  CLI::App* ver = app.add_subcommand("verify", "run a verification campaign");
  add_common(ver, true);
  CLI::App* coh =
      app.add_subcommand("cohomology", "exact induced-action quantities");
  add_common(coh, false);
  CLI::App* repc =
      app.add_subcommand("report", "pretty-print a report.json file");
  repc->add_option("path", report_path, "report.json to print")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (inv->parsed()) return cmd_invariants(config_path, ov, as_json);
    if (ver->parsed())
      return cmd_verify(config_path, ov, out_dir, as_json, as_csv);
    if (coh->parsed()) return cmd_cohomology(config_path, ov, as_json);
    if (repc->parsed()) return cmd_report(report_path);
  } catch (const std::exception& e) {
    return emit_error("internal", e.what());
  }
  return 2;
}
