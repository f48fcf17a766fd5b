#pragma once

// Campaign configuration: the system under study plus every estimator
// parameter and tolerance, ingested from a versioned JSON document. All
// fields carry working defaults, so a config only has to name the system and
// whatever it wants to override.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "torusdyn/system.hpp"

namespace torusdyn {

struct UnstableConfig {
  int n_settle = 60;        // bundle settling length
  double residual = 1e-6;   // convergence threshold on the two-seed angle
};

struct GrowthConfig {
  int n_samples = 2000;     // points for the integrated estimate
  int k_disks = 50;         // disks per family for the sampled suprema
  std::pair<int, int> n_range{5, 25};
  double leaf_radius = 1.0;
  double transverse_radius_min = 0.25;
  int m_converge = 20;      // leaf-disk pushforward iterates
  double quad_tol = 1e-3;
  std::optional<std::uint64_t> seed;  // absent: derived from the global seed
};

struct EntropyConfig {
  std::string sampler = "lebesgue";   // "lebesgue" or "pushforward"
  int burn_in = 0;                    // pushforward only
  int n_samples = 4000;
  std::vector<double> ladder{0.2, 0.1, 0.05, 0.02};
  std::pair<int, int> n_range{2, 14};
  std::optional<std::uint64_t> seed;
};

struct CsExponentConfig {
  int n = 300;            // Birkhoff averaging window
  int sample_points = 8;  // orbits averaged
};

struct LemmaDConfig {
  std::pair<int, int> n_range{5, 20};
};

struct ToleranceConfig {
  double theorem2 = 0.03;          // nats, per growth estimate
  double ordering = 0.02;          // nats, per chain comparison
  double corollary1 = 0.1;         // nats, entropy-dominated
  double lemma_d = 0.1;            // relative error on the decay exponent
  double theorem1_entropy = 0.05;  // component budgets, summed for the check
  double theorem1_growth = 0.03;
  double theorem1_exponent = 0.02;
};

struct SystemConfig {
  int dimension = 2;
  IMat matrix;              // integer, |det| = 1
  std::vector<Mode> modes;  // empty: linear automorphism
  double budget = 0.5;      // C1 bound the modes must stay under
};

struct CampaignConfig {
  int schema_version = 1;
  SystemConfig system;
  UnstableConfig unstable;
  GrowthConfig growth;
  EntropyConfig entropy;
  CsExponentConfig cs_exponent;
  LemmaDConfig lemma_d;
  ToleranceConfig tolerances;
  // Theorem 1 pass criterion: "literal" uses the center-stable exponent as
  // estimated (possibly negative); "clamped" floors it at zero. Both numbers
  // are always recorded.
  std::string theorem1_form = "literal";
  std::vector<std::string> checks;  // subset of the known check names
  std::uint64_t seed = 1;
};

// Known check names in canonical execution order.
const std::vector<std::string>& known_checks();

// Parses and validates a JSON campaign document. Unknown keys, a missing or
// wrong schema_version, malformed system matrices, non-positive tolerances,
// and unknown check names all throw InvalidArgument with a message that
// names the offending field.
CampaignConfig parse_campaign_config(const std::string& text);

// Canonical JSON echo of the effective config (defaults filled in). Two
// configs that parse equal echo byte-identically.
std::string campaign_config_json(const CampaignConfig& cfg);

// Instantiates the configured map. Linear when modes is empty.
TorusMap build_system(const SystemConfig& cfg);

}  // namespace torusdyn
