#pragma once

// Campaign runner: executes the configured checks in declared order against
// one system, times them, and serializes the result. Reports are
// reproducible: the same config and seed give byte-identical JSON except for
// the timing block, which is isolated in one top-level object.

#include <string>
#include <vector>

#include "torusdyn/checks.hpp"
#include "torusdyn/config.hpp"

namespace torusdyn {

struct VerificationReport {
  CampaignConfig config;  // echoed into the report
  std::vector<CheckRecord> checks;
  std::string timestamp;  // UTC, ISO 8601
  double total_seconds = 0.0;
};

// Runs cfg.checks in declared order with the single-seed fan-out. The growth
// suite is computed once and shared when both the equality and ordering
// checks want it. A crash inside one check becomes an "error" record; the
// remaining checks still run.
VerificationReport run_campaign(const TorusMap& f, const CampaignConfig& cfg);

// Two-space-indented JSON. All wall-clock data lives under the top-level
// "timing" key; everything else is a pure function of config and seed.
std::string report_json(const VerificationReport& r);

// Writes out_dir/report.json plus out_dir/series/<name>.csv for every series
// table attached to the checks. Creates directories as needed.
void write_report(const VerificationReport& r, const std::string& out_dir);

// 0 when every check passed or was skipped, 1 when any failed, 2 when any
// came out error or indeterminate (failures take precedence).
int report_exit_code(const VerificationReport& r);

}  // namespace torusdyn
