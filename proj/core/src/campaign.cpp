#include "torusdyn/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>

#include <nlohmann/json.hpp>

#include "torusdyn/cohomology.hpp"

namespace torusdyn {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool wants_suite(const std::string& check) {
  return check == "theorem2" || check == "ordering";
}

ordered_json check_json(const CheckRecord& c) {
  ordered_json j;
  j["name"] = c.name;
  j["status"] = status_name(c.status);
  if (!c.reason.empty()) j["reason"] = c.reason;
  if (c.status == CheckStatus::pass || c.status == CheckStatus::fail) {
    j["slack"] = c.slack;
    j["tolerance"] = c.tolerance;
  }
  ordered_json q = ordered_json::object();
  for (const auto& kv : c.quantities) q[kv.first] = kv.second;
  j["quantities"] = std::move(q);
  if (!c.caveats.empty()) j["caveats"] = c.caveats;
  if (!c.series.empty()) {
    std::vector<std::string> files;
    for (const SeriesTable& t : c.series)
      files.push_back("series/" + t.name + ".csv");
    j["series"] = files;
  }
  return j;
}

}  // namespace

VerificationReport run_campaign(const TorusMap& f, const CampaignConfig& cfg) {
  VerificationReport rep;
  rep.config = cfg;
  rep.timestamp = utc_timestamp();

  // Share one growth suite between the equality and ordering checks; the
  // build dominates their cost and the estimates are identical either way.
  // Its wall time lands on the first check that asks for it.
  const int u = unstable_dimension(f.matrix());
  const bool suite_possible = u >= 1 && u <= 2;
  std::optional<GrowthSuite> suite;
  bool suite_tried = false;

  const auto t0 = std::chrono::steady_clock::now();
  for (const std::string& name : cfg.checks) {
    const auto c0 = std::chrono::steady_clock::now();
    if (wants_suite(name) && suite_possible && !suite_tried) {
      suite_tried = true;
      try {
        suite = compute_growth_suite(f, u, cfg);
      } catch (const std::exception&) {
        // Leave the suite empty; the check recomputes and reports the
        // failure itself with the proper status and reason.
      }
    }
    CheckRecord rec = run_check(name, f, cfg, suite ? &*suite : nullptr);
    const auto c1 = std::chrono::steady_clock::now();
    rec.wall_seconds = std::chrono::duration<double>(c1 - c0).count();
    rep.checks.push_back(std::move(rec));
  }
  const auto t1 = std::chrono::steady_clock::now();
  rep.total_seconds = std::chrono::duration<double>(t1 - t0).count();
  return rep;
}

std::string report_json(const VerificationReport& r) {
  ordered_json j;
  j["schema_version"] = r.config.schema_version;
  j["version"] = kVersion;
  j["seed"] = r.config.seed;
  j["config"] = ordered_json::parse(campaign_config_json(r.config));
  j["checks"] = ordered_json::array();
  for (const CheckRecord& c : r.checks) j["checks"].push_back(check_json(c));

  ordered_json wall = ordered_json::object();
  for (const CheckRecord& c : r.checks) wall[c.name] = c.wall_seconds;
  wall["total"] = r.total_seconds;
  j["timing"] = {{"timestamp", r.timestamp}, {"wall_seconds", std::move(wall)}};
  return j.dump(2) + "\n";
}

void write_report(const VerificationReport& r, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  fs::create_directories(root);

  std::ofstream out(root / "report.json", std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + (root / "report.json").string());
  out << report_json(r);
  out.close();

  bool any_series = false;
  for (const CheckRecord& c : r.checks) any_series |= !c.series.empty();
  if (!any_series) return;
  fs::create_directories(root / "series");
  for (const CheckRecord& c : r.checks) {
    for (const SeriesTable& t : c.series) {
      std::ofstream csv(root / "series" / (t.name + ".csv"), std::ios::binary);
      if (!csv)
        throw InvalidArgument("cannot write series file " + t.name + ".csv");
      csv << t.header << "\n";
      for (const std::string& row : t.rows) csv << row << "\n";
    }
  }
}

int report_exit_code(const VerificationReport& r) {
  bool any_fail = false, any_other = false;
  for (const CheckRecord& c : r.checks) {
    any_fail |= c.status == CheckStatus::fail;
    any_other |= c.status == CheckStatus::error ||
                 c.status == CheckStatus::indeterminate;
  }
  if (any_fail) return 1;
  if (any_other) return 2;
  return 0;
}

}  // namespace torusdyn
