#pragma once

// Verification checks. Each check gathers the estimates one statement needs,
// grades them at the configured tolerance, and returns a structured record;
// nothing here writes files or prints. A check whose upstream estimates fail
// to converge reports "indeterminate", never "pass".

#include <map>
#include <string>
#include <vector>

#include "torusdyn/config.hpp"
#include "torusdyn/growth.hpp"

namespace torusdyn {

enum class CheckStatus { pass, fail, skip, indeterminate, error };
const char* status_name(CheckStatus s);

// One exportable data series, preformatted as CSV lines.
struct SeriesTable {
  std::string name;               // file stem, e.g. "theorem2_growth"
  std::string header;             // comma-joined column names
  std::vector<std::string> rows;  // formatted data lines
};

struct CheckRecord {
  std::string name;
  CheckStatus status = CheckStatus::error;
  std::string reason;  // why it skipped, erred, or came out indeterminate
  std::map<std::string, double> quantities;
  // Margin before tolerance: how far inside the asserted bound the data sits
  // (negative means the bound is violated by that much). pass/fail compares
  // slack against -tolerance.
  double slack = 0.0;
  double tolerance = 0.0;
  std::vector<std::string> caveats;
  std::vector<SeriesTable> series;
  double wall_seconds = 0.0;  // filled by the campaign runner
};

// The five growth estimates of one system, computed with the campaign seed
// fan-out. Shared between the equality and ordering checks so the disk
// meshes are built once; passing the same suite to both changes nothing in
// the records (the estimates are identical either way).
struct GrowthSuite {
  int u = 0;
  GrowthEstimate integrated;
  GrowthEstimate leaf_disk;   // sup over disks of per-disk rates
  GrowthEstimate leaf_sup;    // rate of the per-n sup
  GrowthEstimate trans_disk;
  GrowthEstimate trans_sup;
};
GrowthSuite compute_growth_suite(const TorusMap& f, int u,
                                 const CampaignConfig& cfg);

// Entropy vs unstable growth plus the center-stable correction, in both the
// as-stated form (exponent possibly negative) and the clamped form (floored
// at zero); cfg.theorem1_form picks which one grades the record.
CheckRecord verify_theorem1(const TorusMap& f, const CampaignConfig& cfg);

// All five growth estimates against the log spectral radius of the induced
// degree-u cohomology action; perturbed systems are graded against the rhs of
// their linear part.
CheckRecord verify_theorem2(const TorusMap& f, const CampaignConfig& cfg,
                            const GrowthSuite* suite = nullptr);

// The inequality chain between the five growth flavors, with slack.
CheckRecord verify_ordering(const TorusMap& f, const CampaignConfig& cfg,
                            const GrowthSuite* suite = nullptr);

// Assertion core of the ordering check on precomputed rates; exposed so a
// constructed violation can be fed through the exact grading path.
CheckRecord ordering_chain(const std::map<GrowthEstimator, double>& rates,
                           double tol);

// Entropy against the larger of the forward and inverse unstable growth
// rates; requires center dimension one, skips otherwise.
CheckRecord verify_corollary1(const TorusMap& f, const CampaignConfig& cfg);

// Decay of the boundary-to-volume ratio of an unstable leaf disk against the
// smallest unstable log eigenvalue modulus; requires u >= 2, skips otherwise.
CheckRecord verify_lemma_d(const TorusMap& f, const CampaignConfig& cfg);

// Dispatch by check name. Any exception escaping a check is converted into a
// record with status "error" carrying the message, so one crash cannot abort
// a campaign.
CheckRecord run_check(const std::string& name, const TorusMap& f,
                      const CampaignConfig& cfg,
                      const GrowthSuite* suite = nullptr);

}  // namespace torusdyn
