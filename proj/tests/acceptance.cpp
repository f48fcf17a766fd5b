// Acceptance gate: ten criteria, one line per criterion, exit 0 only when
// all ten hold. Tolerances are pinned here, next to the assertion they
// govern; nothing is read from the environment.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "systems.hpp"
#include "torusdyn/bundles.hpp"
#include "torusdyn/campaign.hpp"
#include "torusdyn/cohomology.hpp"
#include "torusdyn/entropy.hpp"
#include "torusdyn/multilinear.hpp"
#include "torusdyn/rng.hpp"

using namespace torusdyn;

namespace {

constexpr double kLogCat = 0.9624236501192069;  // log((3+sqrt 5)/2)

// Expected caveat on literal-form records with a negative center-stable
// exponent; the report must carry this text verbatim.
constexpr const char* kExpectedCaveat =
    "Theorem 1's RHS with negative \xce\xbb\xe2\x81\xba: for Anosov ma"
    "ps (E^cs = E^s, \xce\xbb\xe2\x81\xba < 0) the stated inequality h"
    " \xe2\x89\xa4 v\xcc\x84_u + d_cs\xc2\xb7\xce\xbb"
    "\xe2\x81\xba would force h < v\xcc\x84_u strictly, yet both equal"
    " log \xce\xbb_u for the cat map. Whether the theorem intends "
    "\xce\xbb\xe2\x81\xba as stated (making the cat map a boundary/con"
    "tradiction case) or implicitly nonnegative-center settings is not resol"
    "vable from the text; the harness reports both readings and never assert"
    "s the literal form as a universal invariant.";

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void run_criterion(int id, const char* label,
                   const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  std::printf("criterion %2d: %s  %-56s (%7.1f s)\n", id,
              o.pass ? "pass" : "FAIL", label, secs);
  if (!o.detail.empty()) std::printf("              %s\n", o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

CampaignConfig default_config(const IMat& a) {
  std::ostringstream ss;
  ss << "{ \"schema_version\": 1, \"system\": { \"matrix\": [";
  for (int i = 0; i < a.rows(); ++i) {
    ss << (i ? ",[" : "[");
    for (int j = 0; j < a.cols(); ++j) ss << (j ? "," : "") << a(i, j);
    ss << "]";
  }
  ss << "] } }";
  return parse_campaign_config(ss.str());
}

// Suites computed for the equality criteria, reused by the ordering one.
struct SuiteRun {
  std::string label;
  TorusMap f;
  CampaignConfig cfg;
  GrowthSuite suite;
};
std::vector<SuiteRun> g_suites;

// Random SL(d, Z) element: a product of unit shears, occasionally composed
// with a determinant -1 coordinate flip, so |det| = 1 always.
IMat random_unimodular(int d, Rng& rng) {
  IMat a = IMat::Identity(d, d);
  for (int s = 0; s < 8; ++s) {
    const int i = static_cast<int>(rng.uniform() * d);
    int j = static_cast<int>(rng.uniform() * d);
    if (j == i) j = (j + 1) % d;
    IMat e = IMat::Identity(d, d);
    e(i, j) = rng.uniform() < 0.5 ? 1 : -1;
    a = a * e;
  }
  if (rng.uniform() < 0.5) a.row(0) *= -1;
  return a;
}

// ---------------------------------------------------------------------------

Outcome criterion1_cohomology() {
  const double oracle = std::log(oracles::cat_expansion());
  const double rhs = theorem2_rhs(testsys::cat(), 1);
  if (std::abs(rhs - oracle) >= 1e-9)
    return {false, "cat rhs " + fmt(rhs) + " vs oracle " + fmt(oracle)};

  Rng rng(41);
  for (int t = 0; t < 20; ++t) {
    const int d = 2 + static_cast<int>(rng.uniform() * 3);
    const IMat a = random_unimodular(d, rng);
    if (std::abs(integer_determinant(a)) != 1)
      return {false, "generator produced |det| != 1"};
    const Mat inv_d = a.cast<double>().inverse();
    IMat ainv(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) ainv(i, j) = std::llround(inv_d(i, j));
    if (((a * ainv) - IMat::Identity(d, d)).cwiseAbs().maxCoeff() != 0)
      return {false, "integer inverse reconstruction failed"};
    for (int u = 1; u < d; ++u) {
      const double lhs = theorem2_rhs(a, u);
      const double dual = theorem2_rhs(ainv, d - u);
      if (std::abs(lhs - dual) >= 1e-8)
        return {false, "duality gap " + fmt(lhs - dual) + " at trial " +
                           std::to_string(t) + ", u=" + std::to_string(u)};
    }
  }
  return {true, ""};
}

Outcome criterion2_lyapunov() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::pair<const char*, IMat>> systems{
      {"cat", testsys::cat()},           {"cat^2", testsys::cat_squared()},
      {"cat^-1", testsys::cat_inverse()}, {"a3", testsys::a3()},
      {"a3^-1", testsys::a3_inverse()},  {"u2", testsys::u2()},
      {"shear32", testsys::shear32()},   {"skew23", testsys::skew23()},
      {"t4 cat+cat", testsys::t4_cat_cat()},
      {"t4 cat+rot", testsys::t4_cat_rot()}};

  Rng rng(9);
  for (const auto& [name, a] : systems) {
    const TorusMap f = TorusMap::linear(a);
    const int d = f.dimension();
    // Equal-modulus complex pairs mix under the QR cocycle with a bounded
    // oscillating remainder, so the average needs a long orbit; everything
    // else settles geometrically.
    const int n = (std::string(name) == "u2") ? 4000000 : 50000;
    const LyapunovSpectrum sp =
        lyapunov_spectrum(f, Point::canonical(rng.point(d)), n, 7);
    std::vector<double> truth = eigenvalue_moduli(a).log_moduli;
    std::sort(truth.begin(), truth.end());
    for (int i = 0; i < d; ++i)
      if (std::abs(sp.exponents[i] - truth[i]) >= 1e-6)
        return {false, std::string(name) + " exponent " + std::to_string(i) +
                           " off by " +
                           fmt(std::abs(sp.exponents[i] - truth[i]))};
    if (std::abs(sp.sum()) >= 1e-8)
      return {false, std::string(name) + " sum rule " + fmt(sp.sum())};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (secs >= 10.0) return {false, "runtime " + fmt(secs) + " s >= 10 s"};
  return {true, ""};
}

Outcome criterion3_equality_linear() {
  const std::vector<std::pair<const char*, IMat>> systems{
      {"cat", testsys::cat()}, {"a3", testsys::a3()}, {"u2", testsys::u2()}};
  for (const auto& [name, a] : systems) {
    const auto t0 = std::chrono::steady_clock::now();
    CampaignConfig cfg = default_config(a);
    const TorusMap f = build_system(cfg.system);
    const int u = unstable_dimension(a);
    const GrowthSuite suite = compute_growth_suite(f, u, cfg);
    const CheckRecord rec = verify_theorem2(f, cfg, &suite);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (rec.status != CheckStatus::pass)
      return {false, std::string(name) + " status " +
                         status_name(rec.status) + ", slack " +
                         fmt(rec.slack) + " (tol 0.03): " + rec.reason};
    for (const auto& [key, value] : rec.quantities)
      if (key.size() > 9 && key.substr(key.size() - 9) == "_residual" &&
          value >= 0.05)
        return {false, std::string(name) + " " + key + " = " + fmt(value)};
    if (secs >= 300.0)
      return {false, std::string(name) + " runtime " + fmt(secs) + " s"};
    g_suites.push_back({name, f, cfg, suite});
  }
  return {true, ""};
}

Outcome criterion4_equality_perturbed() {
  for (const double eps : {0.01, 0.02, 0.05}) {
    const auto t0 = std::chrono::steady_clock::now();
    CampaignConfig cfg = default_config(testsys::cat());
    cfg.system.modes = {Mode{eps, 0, {1, 0}, 0.0}};
    cfg.tolerances.theorem2 = 0.05;  // robustness allowance for this criterion
    const TorusMap f = build_system(cfg.system);
    const GrowthSuite suite = compute_growth_suite(f, 1, cfg);
    const CheckRecord rec = verify_theorem2(f, cfg, &suite);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const std::string label = "eps=" + fmt(eps);
    if (rec.status != CheckStatus::pass)
      return {false, label + " status " + status_name(rec.status) +
                         ", slack " + fmt(rec.slack) + ": " + rec.reason};
    if (std::abs(rec.quantities.at("rhs") - kLogCat) > 1e-12)
      return {false, label + " graded against wrong rhs"};
    if (secs >= 600.0) return {false, label + " runtime " + fmt(secs) + " s"};
    g_suites.push_back({label, f, cfg, suite});
  }
  return {true, ""};
}

Outcome criterion5_entropy() {
  MeasureSampler s;
  s.n_samples = 4000;
  s.seed = 12;
  const TorusMap cat = TorusMap::linear(testsys::cat());
  const EntropyEstimate est = katok_entropy(cat, s, {0.2, 0.1, 0.05}, 2, 14);
  if (std::abs(est.extrapolated - kLogCat) >= 0.1 * kLogCat)
    return {false, "cat rate " + fmt(est.extrapolated) + " vs " + fmt(kLogCat)};

  MeasureSampler si;
  si.n_samples = 1000;
  si.seed = 3;
  const TorusMap id = TorusMap::linear(testsys::identity2());
  const EntropyEstimate none = katok_entropy(id, si, {0.2, 0.1}, 2, 10);
  if (!(std::abs(none.extrapolated) < 0.01))
    return {false, "identity rate " + fmt(none.extrapolated)};
  return {true, ""};
}

Outcome criterion6_entropy_bound() {
  // Clamped form on the partially hyperbolic 3-torus system.
  CampaignConfig cfg = default_config(testsys::a3());
  cfg.entropy.n_samples = 16000;
  cfg.entropy.seed = 1;
  cfg.entropy.ladder = {0.5, 0.4};
  cfg.theorem1_form = "clamped";
  const TorusMap a3 = build_system(cfg.system);
  const CheckRecord rec = verify_theorem1(a3, cfg);
  if (rec.status != CheckStatus::pass)
    return {false, std::string("clamped status ") + status_name(rec.status) +
                       ": " + rec.reason};
  if (std::abs(rec.tolerance - 0.1) > 1e-12)
    return {false, "tolerance budget is " + fmt(rec.tolerance) + ", not 0.1"};
  if (rec.slack > 0.15)
    return {false, "slack " + fmt(rec.slack) + " > 0.15"};

  // Literal form on the cat map: the record must carry both readings and the
  // discrepancy caveat verbatim.
  CampaignConfig ccfg = default_config(testsys::cat());
  ccfg.entropy.seed = 12;
  ccfg.entropy.ladder = {0.2, 0.1, 0.05};
  const TorusMap cat = build_system(ccfg.system);
  const CheckRecord lit = verify_theorem1(cat, ccfg);
  if (lit.status != CheckStatus::fail)
    return {false, std::string("literal status ") + status_name(lit.status) +
                       " (the as-stated bound should fail here)"};
  if (std::abs(lit.quantities.at("rhs_clamped") - kLogCat) > 0.05)
    return {false, "clamped rhs " + fmt(lit.quantities.at("rhs_clamped"))};
  if (lit.quantities.at("slack_clamped") <= 0.0)
    return {false, "clamped slack not positive"};
  bool verbatim = false;
  for (const std::string& c : lit.caveats) verbatim |= c == kExpectedCaveat;
  if (!verbatim) return {false, "verbatim discrepancy caveat missing"};
  return {true, ""};
}

Outcome criterion7_ordering() {
  if (g_suites.size() != 6)
    return {false, "growth suites unavailable (earlier criteria failed)"};
  for (const SuiteRun& s : g_suites) {
    const CheckRecord rec = verify_ordering(s.f, s.cfg, &s.suite);
    if (rec.status != CheckStatus::pass)
      return {false, s.label + " status " + status_name(rec.status) +
                         ", slack " + fmt(rec.slack) + " (tol 0.02)"};
  }
  // Self-test: a constructed violation must fail through the same grading.
  const std::map<GrowthEstimator, double> bad{
      {GrowthEstimator::leaf_per_disk, 1.00},
      {GrowthEstimator::leaf_per_n_sup, 1.00},
      {GrowthEstimator::transverse_per_disk, 1.00},
      {GrowthEstimator::transverse_per_n_sup, 0.95},
      {GrowthEstimator::integrated, 0.90}};
  const CheckRecord rec = ordering_chain(bad, 0.02);
  if (rec.status != CheckStatus::fail)
    return {false, "injected violation was not rejected"};
  return {true, ""};
}

Outcome criterion8_boundary_decay() {
  const CampaignConfig cfg = default_config(testsys::u2());
  const TorusMap f = build_system(cfg.system);
  const CheckRecord rec = verify_lemma_d(f, cfg);
  const double oracle = 0.5 * std::log(oracles::cubic_real_root());
  if (rec.status != CheckStatus::pass)
    return {false, std::string("status ") + status_name(rec.status) + ": " +
                       rec.reason};
  if (std::abs(rec.quantities.at("target") - oracle) > 1e-9)
    return {false, "target " + fmt(rec.quantities.at("target")) +
                       " vs oracle " + fmt(oracle)};
  const double exponent = rec.quantities.at("exponent");
  if (std::abs(exponent - oracle) > 0.1 * oracle)
    return {false, "exponent " + fmt(exponent) + " vs oracle " + fmt(oracle)};
  return {true, ""};
}

Outcome criterion9_determinism() {
  CampaignConfig cfg = parse_campaign_config(R"({
    "schema_version": 1,
    "system": { "matrix": [[2, 1], [1, 1]] },
    "growth": { "n_samples": 300, "k_disks": 5, "n_range": [2, 8] },
    "entropy": { "n_samples": 400, "ladder": [0.3, 0.2], "n_range": [2, 8] },
    "cs_exponent": { "n": 150, "sample_points": 2 },
    "theorem1_form": "clamped",
    "seed": 1
  })");
  const TorusMap cat = build_system(cfg.system);
  const VerificationReport r1 = run_campaign(cat, cfg);
  const VerificationReport r2 = run_campaign(cat, cfg);

  const auto strip = [](const std::string& text) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(text);
    j.erase("timing");
    return j.dump(2);
  };
  if (strip(report_json(r1)) != strip(report_json(r2)))
    return {false, "reports differ outside the timing block"};

  namespace fs = std::filesystem;
  const fs::path d1 = fs::temp_directory_path() / "torusdyn_acc_1";
  const fs::path d2 = fs::temp_directory_path() / "torusdyn_acc_2";
  fs::remove_all(d1);
  fs::remove_all(d2);
  write_report(r1, d1.string());
  write_report(r2, d2.string());
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (const auto& e : fs::directory_iterator(d1 / "series")) {
    if (slurp(e.path()) != slurp(d2 / "series" / e.path().filename()))
      return {false, "series bundle differs: " + e.path().filename().string()};
  }
  const bool ok = strip(slurp(d1 / "report.json")) ==
                  strip(slurp(d2 / "report.json"));
  fs::remove_all(d1);
  fs::remove_all(d2);
  if (!ok) return {false, "written reports differ outside the timing block"};
  return {true, ""};
}

Outcome criterion10_property_suites() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);

  // Exterior powers: functoriality and submultiplicativity.
  for (int t = 0; t < 1000; ++t) {
    const int d = 2 + static_cast<int>(rng.uniform() * 3);
    const int k = 1 + static_cast<int>(rng.uniform() * d);
    const Mat a = rng.gaussian_matrix(d, d);
    const Mat b = rng.gaussian_matrix(d, d);
    const Mat lhs = exterior_power((a * b).eval(), k);
    const Mat rhs = (exterior_power(a, k) * exterior_power(b, k)).eval();
    const double scale = rhs.cwiseAbs().maxCoeff() + 1.0;
    if (((lhs - rhs).cwiseAbs().maxCoeff()) >= 1e-10 * scale)
      return {false, "functoriality violated at trial " + std::to_string(t)};
    if (lhs.norm() > exterior_power(a, k).norm() * exterior_power(b, k).norm() *
                         (1.0 + 1e-12))
      return {false, "submultiplicativity violated at trial " +
                         std::to_string(t)};
  }

  // Bowen distances: metric axioms.
  const TorusMap f = testsys::perturbed_cat(0.02);
  for (int t = 0; t < 1000; ++t) {
    const int n = static_cast<int>(rng.uniform() * 12);
    const Point x = Point::canonical(rng.point(2));
    const Point y = Point::canonical(rng.point(2));
    const Point z = Point::canonical(rng.point(2));
    const double dxy = bowen_distance(f, x, y, n);
    const double dyx = bowen_distance(f, y, x, n);
    const double dxz = bowen_distance(f, x, z, n);
    const double dyz = bowen_distance(f, y, z, n);
    if (dxy != dyx) return {false, "symmetry violated"};
    if (bowen_distance(f, x, x, n) != 0.0) return {false, "d(x,x) != 0"};
    if (dxy < 0.0) return {false, "negative distance"};
    if (dxz > dxy + dyz + 1e-12) return {false, "triangle inequality violated"};
  }

  // Separated counts: monotone in n, antitone in delta.
  const TorusMap cat = TorusMap::linear(testsys::cat());
  for (int t = 0; t < 1000; ++t) {
    std::vector<Point> pts;
    for (int i = 0; i < 60; ++i) pts.push_back(Point::canonical(rng.point(2)));
    const int n = static_cast<int>(rng.uniform() * 8);
    const double delta = rng.uniform(0.02, 0.3);
    const int base = separated_count(cat, pts, n, delta);
    if (separated_count(cat, pts, n + 1, delta) < base)
      return {false, "count decreased in n at trial " + std::to_string(t)};
    if (separated_count(cat, pts, n, delta * 1.5) > base)
      return {false, "count increased in delta at trial " + std::to_string(t)};
  }

  // Cocycle volumes: additive over orbit splits.
  const TorusMap u2 = TorusMap::linear(testsys::u2());
  for (int t = 0; t < 1000; ++t) {
    const bool three = rng.uniform() < 0.5;
    const DynSystem& g = three ? static_cast<const DynSystem&>(u2) : f;
    const int d = g.dimension();
    const int rank = 1 + static_cast<int>(rng.uniform() * d);
    const Subspace F = Subspace::from_columns(rng.gaussian_matrix(d, rank));
    const Point x = Point::canonical(rng.point(d));
    const int m = static_cast<int>(rng.uniform() * 8);
    const int n = static_cast<int>(rng.uniform() * 8);
    const double whole = log_cocycle_volume(g, x, F, m + n);
    Mat dfm = Mat::Identity(d, d);
    Point xm = x;
    for (int i = 0; i < m; ++i) {
      dfm = (g.jacobian(xm) * dfm).eval();
      xm = g.apply(xm);
    }
    const double split = log_cocycle_volume(g, x, F, m) +
                         log_cocycle_volume(g, xm, push_subspace(dfm, F), n);
    if (std::abs(whole - split) >= 1e-9 * (1.0 + std::abs(whole)))
      return {false, "additivity violated by " + fmt(whole - split) +
                         " at trial " + std::to_string(t)};
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (secs >= 120.0) return {false, "runtime " + fmt(secs) + " s >= 120 s"};
  return {true, ""};
}

}  // namespace

int main() {
  std::printf("acceptance gate, toolkit %s\n", kVersion);
  run_criterion(1, "exact rhs against root-finding oracle, inverse duality",
                criterion1_cohomology);
  run_criterion(2, "Lyapunov spectra of ten linear systems", criterion2_lyapunov);
  run_criterion(3, "five growth estimates equal exact rhs (linear)",
                criterion3_equality_linear);
  run_criterion(4, "five growth estimates under C1 perturbation",
                criterion4_equality_perturbed);
  run_criterion(5, "separated-count entropy: cat map and identity",
                criterion5_entropy);
  run_criterion(6, "entropy bound: clamped pass, literal record with caveat",
                criterion6_entropy_bound);
  run_criterion(7, "growth-rate ordering chain and injected violation",
                criterion7_ordering);
  run_criterion(8, "leaf-disk boundary decay exponent", criterion8_boundary_decay);
  run_criterion(9, "byte-identical reports modulo timing", criterion9_determinism);
  run_criterion(10, "randomized property suites", criterion10_property_suites);

  if (g_failures == 0) {
    std::printf("acceptance: 10/10 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d/10 criteria FAILED\n", g_failures);
  return 1;
}
