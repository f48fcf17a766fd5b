#pragma once

// Metric entropy estimation from the growth rate of separated-point counts in
// the Bowen metrics d_n(x,y) = max_{0<=i<=n} d(f^i x, f^i y). Counts are taken
// over a finite sample of an invariant (or surrogate) measure, on a ladder of
// scales delta; the reported rate is the fitted slope at the smallest scale
// the sample can support.

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "torusdyn/system.hpp"

namespace torusdyn {

// Sample of the reference measure. Lebesgue is invariant for the linear maps;
// for perturbed maps a finite forward pushforward of Lebesgue stands in for
// the physical measure.
struct MeasureSampler {
  enum class Kind { lebesgue, pushforward };

  Kind kind = Kind::lebesgue;
  int burn_in = 0;  // forward steps applied to each draw (pushforward)
  int n_samples = 4000;
  std::uint64_t seed = 0;
};

std::vector<Point> draw_sample(const DynSystem& f, const MeasureSampler& sampler);

// d_n with an optional cutoff: the scan stops as soon as the running max
// exceeds the cutoff and returns that partial max (a value > cutoff), which
// is all a separation test needs.
double bowen_distance(const DynSystem& f, const Point& x, const Point& y, int n,
                      double cutoff = std::numeric_limits<double>::infinity());

// Size of the greedy maximal subset with pairwise d_n distance > delta.
// Greedy order is sample order, so the count is deterministic; the selected
// set is maximal, hence also (n, delta)-spanning for the sample.
int separated_count(const DynSystem& f, const std::vector<Point>& points, int n,
                    double delta);

// Counts and fit at one scale. The count series stops at the saturation
// point: once a count exceeds a quarter of the sample the greedy set is
// pinned by sample size rather than by dynamics, and further rungs would
// only flatten the fit.
struct ScaleRecord {
  double delta = 0.0;
  std::vector<std::pair<int, int>> counts;  // (n, count), pre-saturation
  double rate = 0.0;      // least-squares slope of log count against n
  double residual = 0.0;  // max |fit - log count| over the window
  bool usable = false;    // at least three rungs before saturation
};

struct EntropyEstimate {
  std::vector<ScaleRecord> records;  // ladder order (decreasing delta)
  double extrapolated = 0.0;         // rate at the smallest usable delta
  std::vector<double> ladder;
};

// Separated-count growth rates over a decreasing ladder of scales. Orbits of
// the sample are computed once and shared across every (delta, n) cell.
// Throws when no ladder entry yields three usable rungs ("sample too small
// for ladder").
EntropyEstimate katok_entropy(const DynSystem& f, const MeasureSampler& sampler,
                              const std::vector<double>& ladder, int n_lo,
                              int n_hi);

}  // namespace torusdyn
