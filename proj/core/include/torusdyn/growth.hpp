#pragma once

// Unstable volume growth. Five estimators of the exponential growth rate of
// u-dimensional volume under iteration: a Monte-Carlo integral of the tangent
// cocycle over the whole torus, and per-disk / per-iterate suprema over
// sampled families of leaf-tangent and uniformly transverse disks. Disk
// volumes are computed by pulled-back adaptive quadrature of the tangent
// cocycle, never by forward meshes, so expansion cannot shear the mesh
// degenerate. Also provides the boundary-to-volume decay ratio used to relate
// the absolute and relative growth flavors.

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "torusdyn/bundles.hpp"
#include "torusdyn/multilinear.hpp"
#include "torusdyn/system.hpp"

namespace torusdyn {

enum class DiskFamily { leaf, transverse };

struct DiskSpec {
  Point base;           // disk center on the torus
  Subspace tangent;     // tangent plane at the center, rank u
  double radius = 1.0;  // radius in lift units
  DiskFamily family = DiskFamily::transverse;
  double tilt = 0.0;  // angle to the estimated unstable plane at the center
};

// One cached quadrature sample: chart parameters, the current orbit point and
// pushed tangent plane, and the accumulated log volume expansion after every
// iterate so far (logj[k] after k steps, logj[0] = 0).
struct DiskNode {
  double a = 0.0;
  double b = 0.0;
  Point point;
  Subspace tangent;
  std::vector<double> logj;
};

// Leaf cell of the adaptive parameter mesh. Rank 1: an interval [a0,a1] in
// [-1,1], center node at the midpoint, probe nodes at the endpoints. Rank 2:
// a polar rectangle [a0,a1] x [b0,b1] in (rho^2/2, angle) coordinates, where
// cell area is exact, with a center node and four corner probes.
struct DiskCell {
  double a0 = 0.0, a1 = 0.0;
  double b0 = 0.0, b1 = 0.0;
  double weight = 0.0;  // exact chart volume of the cell times radius^u
  int center = -1;
  std::array<int, 4> probes{-1, -1, -1, -1};
  int probe_count = 0;
};

// Adaptive quadrature state for one disk. The chart is the flat disk the
// construction started from; for leaf disks, `preroll` pushforward iterates
// are baked into every node (graph-transform surrogate), and volume depth n
// means chart depth preroll + n. Refinement nodes are always iterated from
// the chart from scratch, so every cached value is a genuine depth-k cocycle.
struct ParamDisk {
  DiskSpec spec;
  Vec origin;       // chart center, canonical coordinates
  Mat chart;        // d x u orthonormal chart frame
  double chart_radius = 1.0;
  int preroll = 0;
  int depth = 0;  // largest iterate depth the node cache has reached
  std::vector<DiskNode> nodes;
  std::vector<DiskCell> cells;
  std::map<std::pair<double, double>, int> pool;  // parameters -> node index

  int rank() const { return static_cast<int>(chart.cols()); }
  // Sum of cell weights; equals the u-ball volume times radius^u exactly.
  double weight_sum() const;
};

// Flat disk: spec.base plus spec.tangent as the chart. Rank 1 or 2 only.
ParamDisk make_flat_disk(const DynSystem& f, const DiskSpec& spec);

// Leaf-disk surrogate at x: a flat disk tangent to the unstable plane at
// f^{-m}(x), shrunk by the measured per-direction growth along that path so
// that m pushforwards restore radius r, then pushed those m steps. One radius
// correction pass pins the induced volume at the target. The tangency defect
// at the center is recorded in spec.tilt; a defect >= 1e-6 demotes the disk
// to the transverse family. Requires an invertible system.
ParamDisk make_leaf_disk(const DynSystem& f, const Point& x, int u, double r,
                         int m_converge, int n_settle, std::uint64_t seed);

// Log of the u-volume expansion of the n-step cocycle on the plane F pushed
// along the orbit of x. Log-space accumulation, no overflow for any n.
double log_cocycle_volume(const DynSystem& f, const Point& x, const Subspace& F,
                          int n);

// log vol(f^n(D)) by adaptive quadrature of the pulled-back tangent cocycle:
// cells split until the center value and the probe average agree within
// log(1 + tol). Mutates the disk's cache in place; successive calls at
// growing n reuse all previous work. Throws ConvergenceError carrying the
// partial estimate when the node budget (1e6) is exhausted.
double log_disk_volume(const DynSystem& f, ParamDisk& disk, int n, double tol);
// Convenience wrapper, exp of the above.
double disk_volume(const DynSystem& f, ParamDisk& disk, int n, double tol);

enum class GrowthEstimator {
  integrated,            // Lebesgue integral of the unstable cocycle norm
  leaf_per_disk,         // max over leaf disks of each disk's fitted rate
  leaf_per_n_sup,        // fit of the per-n max over leaf disks
  transverse_per_disk,   // max over transverse disks of fitted rates
  transverse_per_n_sup,  // fit of the per-n max over transverse disks
};
const char* estimator_name(GrowthEstimator e);

struct GrowthEstimate {
  GrowthEstimator tag = GrowthEstimator::integrated;
  std::vector<std::pair<int, double>> series;  // (n, log volume or integral)
  double rate = 0.0;      // nats per iterate, least squares over the window
  double residual = 0.0;  // max |fit - data| over the window
  std::pair<int, int> window{0, 0};
};

// Least-squares slope and max absolute residual of the points of `series`
// whose n lies in the window. Requires at least three such points.
std::pair<double, double> fit_rate(
    const std::vector<std::pair<int, double>>& series, std::pair<int, int> window);

struct GrowthOptions {
  double quad_tol = 1e-3;             // per-cell refinement tolerance
  int m_converge = 20;                // leaf-disk pushforward iterates
  int n_settle = 60;                  // bundle settling length
  double leaf_radius = 1.0;           // radius of leaf-family disks
  double transverse_radius_min = 0.25;  // transverse radii drawn in [min, 1]
  double cone_fraction = 0.5;   // cone width as a fraction of the measured
                                // minimal angle between the bundles
  int cone_sample = 1000;       // points used to measure that angle
};

// Minimal angle between the estimated unstable and center-stable planes over
// a uniform sample of points; the transverse cone width is a fraction of it.
// Returns pi/2 when u equals the dimension (empty center-stable).
double transversality_angle(const DynSystem& f, int u, int n_points,
                            int n_settle, std::uint64_t seed);

// Integrated growth: the n-step cocycle volume on the estimated unstable
// plane, averaged over uniform points by log-sum-exp, fitted over n_range.
// Aborts when more than 1% of the sample has an unconverged bundle estimate.
GrowthEstimate integrated_growth(const DynSystem& f, int u, int n_samples,
                                 std::pair<int, int> n_range, std::uint64_t seed,
                                 const GrowthOptions& opt = {});

enum class SupMode { per_disk, per_n_sup };

// Sampled supremum of disk volume growth over k_disks random disks of the
// given family. per_disk fits each disk's series and takes the largest rate;
// per_n_sup takes the per-n max of log volumes and fits that. Both are lower
// bounds of the true supremum over the infinite family.
GrowthEstimate growth_rate_family(const DynSystem& f, int u, DiskFamily family,
                                  SupMode mode, int k_disks,
                                  std::pair<int, int> n_range,
                                  std::uint64_t seed,
                                  const GrowthOptions& opt = {});

// Both sup modes of one family from a single disk build; identical to two
// growth_rate_family calls with the same seed at half the cost.
std::pair<GrowthEstimate, GrowthEstimate> family_rates(
    const DynSystem& f, int u, DiskFamily family, int k_disks,
    std::pair<int, int> n_range, std::uint64_t seed,
    const GrowthOptions& opt = {});

struct BoundaryDecay {
  std::vector<std::pair<int, double>> series;  // (n, boundary/volume ratio)
  double exponent = 0.0;  // fitted decay rate of the ratio, nats per iterate
  double residual = 0.0;  // fit residual on log ratio
};

// Ratio of the iterated boundary (u-1)-volume to the iterated disk u-volume
// over n_range, with the fitted decay exponent (positive means the boundary
// becomes negligible). Requires rank >= 2: a rank-1 disk has a two-point
// boundary whose "ratio" is just the reciprocal length, which carries no
// boundary-collapse information.
BoundaryDecay boundary_ratio(const DynSystem& f, ParamDisk& disk,
                             std::pair<int, int> n_range, double tol = 1e-3);

}  // namespace torusdyn
