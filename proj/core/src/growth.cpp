#include "torusdyn/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "torusdyn/rng.hpp"

namespace torusdyn {

namespace {

constexpr int kNodeBudget = 1000000;

// Aliasing noise in the total shrinks like one over the square root of the
// cell count, so chasing it below the tolerance can cost arbitrarily many
// nodes at deep iterates.  Past this mesh size the stabilized total is
// accepted as-is; the hard budget above stays as a safety valve.
constexpr int kSoftNodeCap = 200000;

double ball_volume(int u) { return u == 1 ? 2.0 : M_PI; }

double log_sum_exp(const std::vector<double>& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// Chart embedding of a parameter pair. Rank 1: a in [-1,1] along the frame.
// Rank 2: (a, b) = (rho^2/2, angle) polar coordinates in the unit disk.
Point embed(const ParamDisk& d, double a, double b) {
  Vec x = d.origin;
  if (d.rank() == 1) {
    x += d.chart_radius * a * d.chart.col(0);
  } else {
    const double rho = std::sqrt(2.0 * a);
    x += d.chart_radius * rho *
         (std::cos(b) * d.chart.col(0) + std::sin(b) * d.chart.col(1));
  }
  return Point::canonical(x);
}

void advance_node(const DynSystem& f, DiskNode& nd, int target) {
  while (static_cast<int>(nd.logj.size()) - 1 < target) {
    const PushResult r = push_with_volume(f.jacobian(nd.point), nd.tangent);
    nd.logj.push_back(nd.logj.back() + r.log_volume);
    nd.tangent = r.space;
    nd.point = f.apply(nd.point);
  }
}

int ensure_node(const DynSystem& f, ParamDisk& d, double a, double b) {
  const auto key = std::make_pair(a, b);
  const auto it = d.pool.find(key);
  if (it != d.pool.end()) return it->second;
  DiskNode nd;
  nd.a = a;
  nd.b = b;
  nd.point = embed(d, a, b);
  nd.tangent = Subspace{d.chart};
  nd.logj = {0.0};
  advance_node(f, nd, d.depth);
  d.nodes.push_back(std::move(nd));
  const int idx = static_cast<int>(d.nodes.size()) - 1;
  d.pool.emplace(key, idx);
  return idx;
}

void advance_all(const DynSystem& f, ParamDisk& d, int target) {
  d.depth = std::max(d.depth, target);
  for (DiskNode& nd : d.nodes) advance_node(f, nd, d.depth);
}

double raw_log_volume(const ParamDisk& d, int depth) {
  std::vector<double> terms;
  terms.reserve(d.cells.size());
  for (const DiskCell& c : d.cells)
    terms.push_back(std::log(c.weight) + d.nodes[c.center].logj[depth]);
  return log_sum_exp(terms);
}

bool cell_ok(const ParamDisk& d, const DiskCell& c, int depth, double thresh) {
  const double lc = d.nodes[c.center].logj[depth];
  std::vector<double> ps;
  ps.reserve(c.probe_count);
  for (int i = 0; i < c.probe_count; ++i)
    ps.push_back(d.nodes[c.probes[i]].logj[depth]);
  const double avg = log_sum_exp(ps) - std::log(static_cast<double>(c.probe_count));
  return std::abs(lc - avg) <= thresh;
}

DiskCell make_cell_1d(const DynSystem& f, ParamDisk& d, double a0, double a1) {
  DiskCell c;
  c.a0 = a0;
  c.a1 = a1;
  c.weight = (a1 - a0) * d.chart_radius;
  c.center = ensure_node(f, d, 0.5 * (a0 + a1), 0.0);
  c.probes[0] = ensure_node(f, d, a0, 0.0);
  c.probes[1] = ensure_node(f, d, a1, 0.0);
  c.probe_count = 2;
  return c;
}

DiskCell make_cell_2d(const DynSystem& f, ParamDisk& d, double a0, double a1,
                      double b0, double b1) {
  DiskCell c;
  c.a0 = a0;
  c.a1 = a1;
  c.b0 = b0;
  c.b1 = b1;
  c.weight = (a1 - a0) * (b1 - b0) * d.chart_radius * d.chart_radius;
  c.center = ensure_node(f, d, 0.5 * (a0 + a1), 0.5 * (b0 + b1));
  c.probes[0] = ensure_node(f, d, a0, b0);
  c.probes[1] = ensure_node(f, d, a0, b1);
  c.probes[2] = ensure_node(f, d, a1, b0);
  c.probes[3] = ensure_node(f, d, a1, b1);
  c.probe_count = 4;
  return c;
}

void split_cell(const DynSystem& f, ParamDisk& d, const DiskCell c,
                std::vector<DiskCell>& out) {
  if (d.rank() == 1) {
    const double am = 0.5 * (c.a0 + c.a1);
    out.push_back(make_cell_1d(f, d, c.a0, am));
    out.push_back(make_cell_1d(f, d, am, c.a1));
    return;
  }
  // Split whichever physical extent is longer: radial rho_1 - rho_0 against
  // the arc rho_mid * (b1 - b0).
  const double radial = std::sqrt(2.0 * c.a1) - std::sqrt(2.0 * c.a0);
  const double arc = std::sqrt(c.a0 + c.a1) * (c.b1 - c.b0);
  if (radial >= arc) {
    const double am = 0.5 * (c.a0 + c.a1);
    out.push_back(make_cell_2d(f, d, c.a0, am, c.b0, c.b1));
    out.push_back(make_cell_2d(f, d, am, c.a1, c.b0, c.b1));
  } else {
    const double bm = 0.5 * (c.b0 + c.b1);
    out.push_back(make_cell_2d(f, d, c.a0, c.a1, c.b0, bm));
    out.push_back(make_cell_2d(f, d, c.a0, c.a1, bm, c.b1));
  }
}

void refine_to_depth(const DynSystem& f, ParamDisk& d, int target, double tol) {
  advance_all(f, d, target);
  const double thresh = std::log1p(tol);
  // The midpoint test decides where to split, but the stopping rule is
  // global: the pushed integrand picks up frequency content that grows with
  // the expansion rate, so insisting that every cell pass locally can cost a
  // number of nodes exponential in `target`.  Components finer than the mesh
  // alias to noise that only shrinks like one over the square root of the
  // cell count, so the accumulated log volume settles long before the local
  // tests do.  Stop once two consecutive splitting sweeps each move the total
  // by no more than the tolerance, or, past a minimal mesh size, once the
  // per-sweep change stops contracting: the midpoint rule converges
  // geometrically on anything it can resolve, so a stalled change means the
  // remaining motion is aliasing noise that further splitting cannot beat.
  double prev = raw_log_volume(d, target);
  double last_delta = std::numeric_limits<double>::infinity();
  int stable = 0, stalled = 0;
  while (static_cast<int>(d.nodes.size()) < kSoftNodeCap) {
    bool changed = false;
    std::vector<DiskCell> next;
    next.reserve(d.cells.size());
    for (std::size_t i = 0; i < d.cells.size(); ++i) {
      const DiskCell c = d.cells[i];
      if (cell_ok(d, c, target, thresh)) {
        next.push_back(c);
        continue;
      }
      split_cell(f, d, c, next);
      changed = true;
      if (static_cast<int>(d.nodes.size()) > kNodeBudget) {
        for (std::size_t j = i + 1; j < d.cells.size(); ++j)
          next.push_back(d.cells[j]);
        d.cells = std::move(next);
        throw ConvergenceError(
            "log_disk_volume: refinement budget of 1e6 nodes exhausted before "
            "reaching the requested tolerance",
            raw_log_volume(d, target));
      }
    }
    d.cells = std::move(next);
    if (!changed) break;
    const double cur = raw_log_volume(d, target);
    const double delta = std::abs(cur - prev);
    prev = cur;
    stable = delta <= thresh ? stable + 1 : 0;
    if (d.nodes.size() >= 512)
      stalled = delta > 0.6 * last_delta ? stalled + 1 : 0;
    last_delta = delta;
    if (stable >= 2 || stalled >= 2) break;
  }
}

// Geometry-only constructor: chart at `origin` spanned by `frame`, flat mesh
// at depth 0. Spec fields are the caller's responsibility.
ParamDisk flat_chart(const DynSystem& f, const Vec& origin, const Mat& frame,
                     double radius) {
  ParamDisk d;
  d.origin = origin;
  d.chart = frame;
  d.chart_radius = radius;
  const int u = d.rank();
  if (u == 1) {
    d.cells.push_back(make_cell_1d(f, d, -1.0, 0.0));
    d.cells.push_back(make_cell_1d(f, d, 0.0, 1.0));
  } else {
    const double s[3] = {0.0, 0.25, 0.5};
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 4; ++k)
        d.cells.push_back(make_cell_2d(f, d, s[i], s[i + 1], k * (M_PI / 2.0),
                                       (k + 1) * (M_PI / 2.0)));
  }
  return d;
}

}  // namespace

double ParamDisk::weight_sum() const {
  double s = 0.0;
  for (const DiskCell& c : cells) s += c.weight;
  return s;
}

ParamDisk make_flat_disk(const DynSystem& f, const DiskSpec& spec) {
  const int u = spec.tangent.rank();
  if (u < 1 || u > 2)
    throw InvalidArgument("make_flat_disk: disk rank must be 1 or 2");
  if (spec.tangent.ambient_dimension() != f.dimension())
    throw InvalidArgument("make_flat_disk: tangent dimension mismatch");
  if (!(spec.radius > 0.0))
    throw InvalidArgument("make_flat_disk: disk radius must be positive");
  ParamDisk d = flat_chart(f, spec.base.coords, spec.tangent.frame, spec.radius);
  d.spec = spec;
  return d;
}

double log_cocycle_volume(const DynSystem& f, const Point& x, const Subspace& F,
                          int n) {
  if (n < 0) throw InvalidArgument("log_cocycle_volume: n must be >= 0");
  if (F.ambient_dimension() != f.dimension())
    throw InvalidArgument("log_cocycle_volume: subspace dimension mismatch");
  Point p = x;
  Subspace s = F;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const PushResult r = push_with_volume(f.jacobian(p), s);
    acc += r.log_volume;
    s = r.space;
    p = f.apply(p);
  }
  return acc;
}

double log_disk_volume(const DynSystem& f, ParamDisk& disk, int n, double tol) {
  if (n < 0) throw InvalidArgument("log_disk_volume: n must be >= 0");
  if (!(tol > 0.0)) throw InvalidArgument("log_disk_volume: tol must be positive");
  const int target = disk.preroll + n;
  refine_to_depth(f, disk, target, tol);
  return raw_log_volume(disk, target);
}

double disk_volume(const DynSystem& f, ParamDisk& disk, int n, double tol) {
  return std::exp(log_disk_volume(f, disk, n, tol));
}

ParamDisk make_leaf_disk(const DynSystem& f, const Point& x, int u, double r,
                         int m_converge, int n_settle, std::uint64_t seed) {
  if (u < 1 || u > 2)
    throw InvalidArgument("make_leaf_disk: disk rank must be 1 or 2");
  if (!(r > 0.0))
    throw InvalidArgument("make_leaf_disk: disk radius must be positive");
  if (m_converge < 0)
    throw InvalidArgument("make_leaf_disk: m_converge must be >= 0");

  const Point y = iterate(f, x, -m_converge);  // needs an inverse when m > 0
  const BundleEstimate ey = estimate_unstable(f, y, u, n_settle, mix_seed(seed, 0));
  if (!ey.converged)
    throw ConvergenceError(
        "make_leaf_disk: unstable estimate unconverged at the disk pre-image",
        ey.residual);

  // Per-direction expansion along the exact pre-roll path; the initial flat
  // disk shrinks by it so the pushforward restores radius r.
  const double rate =
      m_converge > 0
          ? log_cocycle_volume(f, y, ey.frame, m_converge) / (m_converge * u)
          : 0.0;
  double chart_r = r * std::exp(-m_converge * rate);
  const double target = std::log(ball_volume(u)) + u * std::log(r);

  // Newton iteration in log radius: measure the induced volume after the
  // pre-roll (refined quadrature) and rescale the chart until it hits the
  // target. Linear maps land exactly on the first pass.
  ParamDisk d;
  for (int pass = 0; pass < 6; ++pass) {
    d = flat_chart(f, y.coords, ey.frame.frame, chart_r);
    refine_to_depth(f, d, m_converge, 1e-3);
    d.preroll = m_converge;
    const double got = raw_log_volume(d, m_converge);
    if (std::abs(got - target) < 1e-9) break;
    chart_r *= std::exp((target - got) / u);
  }

  // Grade the result where the disk actually sits: the pushed centre can
  // drift from x by the inverse rounding times the accumulated expansion, and
  // the tilt should compare the transported tangent with the bundle at the
  // same point.
  const int center = ensure_node(f, d, 0.0, 0.0);
  const Point& landed = d.nodes[center].point;
  const BundleEstimate ex =
      estimate_unstable(f, landed, u, n_settle, mix_seed(seed, 1));
  const Subspace center_tangent = d.nodes[center].tangent;
  const double tilt =
      ex.converged ? subspace_angle(center_tangent, ex.frame) : M_PI / 2.0;

  d.spec.base = d.nodes[center].point;
  d.spec.tangent = center_tangent;
  d.spec.radius = r;
  d.spec.family = tilt < 1e-6 ? DiskFamily::leaf : DiskFamily::transverse;
  d.spec.tilt = tilt;
  return d;
}

const char* estimator_name(GrowthEstimator e) {
  switch (e) {
    case GrowthEstimator::integrated: return "integrated";
    case GrowthEstimator::leaf_per_disk: return "leaf_per_disk";
    case GrowthEstimator::leaf_per_n_sup: return "leaf_per_n_sup";
    case GrowthEstimator::transverse_per_disk: return "transverse_per_disk";
    case GrowthEstimator::transverse_per_n_sup: return "transverse_per_n_sup";
  }
  return "unknown";
}

std::pair<double, double> fit_rate(
    const std::vector<std::pair<int, double>>& series,
    std::pair<int, int> window) {
  std::vector<std::pair<int, double>> pts;
  for (const auto& p : series)
    if (p.first >= window.first && p.first <= window.second) pts.push_back(p);
  if (pts.size() < 3)
    throw InvalidArgument("fit_rate: need at least three points in the window");
  double nbar = 0.0, ybar = 0.0;
  for (const auto& p : pts) {
    nbar += p.first;
    ybar += p.second;
  }
  nbar /= static_cast<double>(pts.size());
  ybar /= static_cast<double>(pts.size());
  double cov = 0.0, var = 0.0;
  for (const auto& p : pts) {
    cov += (p.first - nbar) * (p.second - ybar);
    var += (p.first - nbar) * (p.first - nbar);
  }
  if (var == 0.0)
    throw InvalidArgument("fit_rate: window must span distinct n values");
  const double slope = cov / var;
  double residual = 0.0;
  for (const auto& p : pts)
    residual = std::max(residual,
                        std::abs(p.second - (ybar + slope * (p.first - nbar))));
  return {slope, residual};
}

double transversality_angle(const DynSystem& f, int u, int n_points,
                            int n_settle, std::uint64_t seed) {
  const int d = f.dimension();
  if (u < 1 || u > d) throw InvalidArgument("transversality_angle: bad rank");
  if (n_points < 1)
    throw InvalidArgument("transversality_angle: need at least one point");
  if (u == d) return M_PI / 2.0;
  Rng rng(mix_seed(seed, 0));
  double best = M_PI / 2.0;
  int bad = 0;
  for (int i = 0; i < n_points; ++i) {
    const Point x = Point::canonical(rng.point(d));
    const SplittingEstimate sp =
        estimate_splitting(f, x, u, n_settle, mix_seed(seed, 1 + i));
    if (!sp.converged) {
      ++bad;
      continue;
    }
    best = std::min(best, minimal_angle(sp.unstable, sp.center_stable));
  }
  if (bad * 10 > n_points)
    throw ConvergenceError(
        "transversality_angle: splitting unconverged at " + std::to_string(bad) +
            " of " + std::to_string(n_points) + " sample points",
        best);
  return best;
}

GrowthEstimate integrated_growth(const DynSystem& f, int u, int n_samples,
                                 std::pair<int, int> n_range, std::uint64_t seed,
                                 const GrowthOptions& opt) {
  const int d = f.dimension();
  const int lo = n_range.first, hi = n_range.second;
  if (u < 1 || u > d) throw InvalidArgument("integrated_growth: bad rank");
  if (n_samples < 10)
    throw InvalidArgument("integrated_growth: need at least 10 samples");
  if (lo < 0 || hi < lo || hi - lo + 1 < 3)
    throw InvalidArgument("integrated_growth: window needs >= 3 iterate counts");

  Rng rng(mix_seed(seed, 0));
  std::vector<std::vector<double>> rows;
  rows.reserve(n_samples);
  int bad = 0;
  for (int i = 0; i < n_samples; ++i) {
    const Point x = Point::canonical(rng.point(d));
    const BundleEstimate e =
        estimate_unstable(f, x, u, opt.n_settle, mix_seed(seed, 1 + i));
    if (!e.converged) {
      ++bad;
      continue;
    }
    Point p = e.base;
    Subspace s = e.frame;
    double acc = 0.0;
    std::vector<double> row(hi - lo + 1);
    for (int n = 0; n <= hi; ++n) {
      if (n >= lo) row[n - lo] = acc;
      if (n == hi) break;
      const PushResult r = push_with_volume(f.jacobian(p), s);
      acc += r.log_volume;
      s = r.space;
      p = f.apply(p);
    }
    rows.push_back(std::move(row));
  }
  if (bad * 100 > n_samples)
    throw ConvergenceError(
        "integrated_growth: unstable bundle unconverged at " +
            std::to_string(bad) + " of " + std::to_string(n_samples) +
            " sample points (over 1%)",
        static_cast<double>(bad) / n_samples);

  const double log_m = std::log(static_cast<double>(rows.size()));
  GrowthEstimate est;
  est.tag = GrowthEstimator::integrated;
  est.window = {lo, hi};
  std::vector<double> col(rows.size());
  for (int n = lo; n <= hi; ++n) {
    for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i][n - lo];
    est.series.emplace_back(n, log_sum_exp(col) - log_m);
  }
  std::tie(est.rate, est.residual) = fit_rate(est.series, est.window);
  return est;
}

namespace {

// A tilted copy of the unstable plane: the first frame direction is rotated
// by `theta` toward a random center-stable direction, then the frame is
// re-orthonormalized. The achieved angle is close to but not exactly theta,
// so callers re-measure and shrink until it fits the cone.
Subspace tilt_toward(const Subspace& unstable, const Subspace& cs, double theta,
                     Rng& rng) {
  if (theta <= 0.0 || cs.rank() == 0) return unstable;
  Vec g(cs.rank());
  for (int i = 0; i < cs.rank(); ++i) g[i] = rng.gaussian();
  const Vec dir = (cs.frame * g).normalized();
  Mat cols = unstable.frame;
  cols.col(0) = std::cos(theta) * cols.col(0) + std::sin(theta) * dir;
  return Subspace::from_columns(cols);
}

}  // namespace

namespace {

// Builds the random disk family and returns one (n, log volume) series per
// usable disk. Shared between the single-mode and both-modes entry points so
// the expensive disk meshes are built once.
std::vector<std::vector<std::pair<int, double>>> family_series(
    const DynSystem& f, int u, DiskFamily family, int k_disks,
    std::pair<int, int> n_range, std::uint64_t seed, const GrowthOptions& opt) {
  const int d = f.dimension();
  const int lo = n_range.first, hi = n_range.second;
  if (u < 1 || u > 2)
    throw InvalidArgument("growth_rate_family: disk rank must be 1 or 2");
  if (k_disks < 1)
    throw InvalidArgument("growth_rate_family: need at least one disk");
  if (lo < 0 || hi < lo || hi - lo + 1 < 3)
    throw InvalidArgument("growth_rate_family: window needs >= 3 iterate counts");

  double cone = 0.0;
  if (family == DiskFamily::transverse && u < d)
    cone = opt.cone_fraction *
           transversality_angle(f, u, opt.cone_sample, opt.n_settle,
                                mix_seed(seed, 0xA11));

  Rng rng(mix_seed(seed, 0));
  std::vector<ParamDisk> disks;
  disks.reserve(k_disks);
  int dropped = 0;
  for (int i = 0; i < k_disks; ++i) {
    const Point x = Point::canonical(rng.point(d));
    if (family == DiskFamily::leaf) {
      try {
        ParamDisk dsk = make_leaf_disk(f, x, u, opt.leaf_radius, opt.m_converge,
                                       opt.n_settle, mix_seed(seed, 100 + i));
        if (dsk.spec.family != DiskFamily::leaf) {
          ++dropped;  // tangency defect demoted it; not a leaf representative
          continue;
        }
        disks.push_back(std::move(dsk));
      } catch (const ConvergenceError&) {
        ++dropped;  // bundle did not settle at this base point
      }
    } else {
      const double radius = rng.uniform(opt.transverse_radius_min, 1.0);
      DiskSpec spec;
      spec.base = x;
      spec.radius = radius;
      spec.family = DiskFamily::transverse;
      if (u == d) {
        const BundleEstimate e =
            estimate_unstable(f, x, u, opt.n_settle, mix_seed(seed, 100 + i));
        if (!e.converged) {
          ++dropped;
          continue;
        }
        spec.tangent = e.frame;
        spec.tilt = 0.0;
      } else {
        const SplittingEstimate sp =
            estimate_splitting(f, x, u, opt.n_settle, mix_seed(seed, 100 + i));
        if (!sp.converged) {
          ++dropped;
          continue;
        }
        double theta = rng.uniform(0.0, cone);
        Subspace tangent = tilt_toward(sp.unstable, sp.center_stable, theta, rng);
        double tilt = subspace_angle(tangent, sp.unstable);
        for (int tries = 0; tilt >= cone && cone > 0.0 && tries < 64; ++tries) {
          theta *= 0.5;
          tangent = tilt_toward(sp.unstable, sp.center_stable, theta, rng);
          tilt = subspace_angle(tangent, sp.unstable);
        }
        spec.tangent = tangent;
        spec.tilt = tilt;
      }
      disks.push_back(make_flat_disk(f, spec));
    }
  }
  if (static_cast<int>(disks.size()) * 2 < k_disks)
    throw ConvergenceError(
        "growth_rate_family: only " + std::to_string(disks.size()) + " of " +
            std::to_string(k_disks) + " disks were usable",
        static_cast<double>(disks.size()));

  std::vector<std::vector<std::pair<int, double>>> series(disks.size());
  for (std::size_t i = 0; i < disks.size(); ++i)
    for (int n = lo; n <= hi; ++n)
      series[i].emplace_back(n, log_disk_volume(f, disks[i], n, opt.quad_tol));
  return series;
}

GrowthEstimate sup_fit(
    const std::vector<std::vector<std::pair<int, double>>>& series,
    DiskFamily family, SupMode mode, std::pair<int, int> window) {
  const int lo = window.first, hi = window.second;
  GrowthEstimate est;
  est.window = window;
  if (family == DiskFamily::leaf)
    est.tag = mode == SupMode::per_disk ? GrowthEstimator::leaf_per_disk
                                        : GrowthEstimator::leaf_per_n_sup;
  else
    est.tag = mode == SupMode::per_disk ? GrowthEstimator::transverse_per_disk
                                        : GrowthEstimator::transverse_per_n_sup;

  if (mode == SupMode::per_disk) {
    int best = -1;
    double best_rate = -std::numeric_limits<double>::infinity();
    double best_res = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
      const auto [rate, res] = fit_rate(series[i], est.window);
      if (rate > best_rate) {
        best_rate = rate;
        best_res = res;
        best = static_cast<int>(i);
      }
    }
    est.series = series[best];
    est.rate = best_rate;
    est.residual = best_res;
  } else {
    for (int n = lo; n <= hi; ++n) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < series.size(); ++i)
        m = std::max(m, series[i][n - lo].second);
      est.series.emplace_back(n, m);
    }
    std::tie(est.rate, est.residual) = fit_rate(est.series, est.window);
  }
  return est;
}

}  // namespace

GrowthEstimate growth_rate_family(const DynSystem& f, int u, DiskFamily family,
                                  SupMode mode, int k_disks,
                                  std::pair<int, int> n_range,
                                  std::uint64_t seed, const GrowthOptions& opt) {
  const auto series = family_series(f, u, family, k_disks, n_range, seed, opt);
  return sup_fit(series, family, mode, n_range);
}

std::pair<GrowthEstimate, GrowthEstimate> family_rates(
    const DynSystem& f, int u, DiskFamily family, int k_disks,
    std::pair<int, int> n_range, std::uint64_t seed, const GrowthOptions& opt) {
  const auto series = family_series(f, u, family, k_disks, n_range, seed, opt);
  return {sup_fit(series, family, SupMode::per_disk, n_range),
          sup_fit(series, family, SupMode::per_n_sup, n_range)};
}

namespace {

struct RingCell {
  double t0 = 0.0, t1 = 0.0;
  double weight = 0.0;
  int center = -1;
  int probes[2] = {-1, -1};
};

struct Ring {
  const ParamDisk* disk = nullptr;
  int depth = 0;
  std::vector<DiskNode> nodes;
  std::vector<RingCell> cells;
  std::map<double, int> pool;
};

int ring_ensure(const DynSystem& f, Ring& r, double t) {
  const auto it = r.pool.find(t);
  if (it != r.pool.end()) return it->second;
  const ParamDisk& d = *r.disk;
  DiskNode nd;
  nd.a = t;
  Vec x = d.origin + d.chart_radius * (std::cos(t) * d.chart.col(0) +
                                       std::sin(t) * d.chart.col(1));
  nd.point = Point::canonical(x);
  const Vec tau = -std::sin(t) * d.chart.col(0) + std::cos(t) * d.chart.col(1);
  nd.tangent = Subspace::span(tau);
  nd.logj = {0.0};
  advance_node(f, nd, r.depth);
  r.nodes.push_back(std::move(nd));
  const int idx = static_cast<int>(r.nodes.size()) - 1;
  r.pool.emplace(t, idx);
  return idx;
}

RingCell ring_cell(const DynSystem& f, Ring& r, double t0, double t1) {
  RingCell c;
  c.t0 = t0;
  c.t1 = t1;
  c.weight = (t1 - t0) * r.disk->chart_radius;
  c.center = ring_ensure(f, r, 0.5 * (t0 + t1));
  c.probes[0] = ring_ensure(f, r, t0);
  c.probes[1] = ring_ensure(f, r, t1);
  return c;
}

double ring_total(const Ring& r, int target) {
  std::vector<double> terms;
  terms.reserve(r.cells.size());
  for (const RingCell& c : r.cells)
    terms.push_back(std::log(c.weight) + r.nodes[c.center].logj[target]);
  return log_sum_exp(terms);
}

double ring_log_length(const DynSystem& f, Ring& r, int target, double tol) {
  r.depth = std::max(r.depth, target);
  for (DiskNode& nd : r.nodes) advance_node(f, nd, r.depth);
  const double thresh = std::log1p(tol);
  // Same stopping rule as the disk refinement: split where the midpoint test
  // fails, stop once two consecutive sweeps leave the total unchanged up to
  // the tolerance, or once the per-sweep change stops contracting past a
  // minimal mesh size.
  double prev = ring_total(r, target);
  double last_delta = std::numeric_limits<double>::infinity();
  int stable = 0, stalled = 0;
  while (static_cast<int>(r.nodes.size()) < kSoftNodeCap) {
    bool changed = false;
    std::vector<RingCell> next;
    next.reserve(r.cells.size());
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
      const RingCell c = r.cells[i];
      const double lc = r.nodes[c.center].logj[target];
      const double avg = log_sum_exp({r.nodes[c.probes[0]].logj[target],
                                      r.nodes[c.probes[1]].logj[target]}) -
                         std::log(2.0);
      if (std::abs(lc - avg) <= thresh) {
        next.push_back(c);
        continue;
      }
      const double tm = 0.5 * (c.t0 + c.t1);
      next.push_back(ring_cell(f, r, c.t0, tm));
      next.push_back(ring_cell(f, r, tm, c.t1));
      changed = true;
      if (static_cast<int>(r.nodes.size()) > kNodeBudget) {
        throw ConvergenceError(
            "boundary_ratio: refinement budget of 1e6 nodes exhausted", 0.0);
      }
    }
    r.cells = std::move(next);
    if (!changed) break;
    const double cur = ring_total(r, target);
    const double delta = std::abs(cur - prev);
    prev = cur;
    stable = delta <= thresh ? stable + 1 : 0;
    if (r.nodes.size() >= 512)
      stalled = delta > 0.6 * last_delta ? stalled + 1 : 0;
    last_delta = delta;
    if (stable >= 2 || stalled >= 2) break;
  }
  return ring_total(r, target);
}

}  // namespace

BoundaryDecay boundary_ratio(const DynSystem& f, ParamDisk& disk,
                             std::pair<int, int> n_range, double tol) {
  if (disk.rank() < 2)
    throw InvalidArgument(
        "boundary_ratio: rank-1 disks have a two-point boundary, whose size "
        "carries no boundary-collapse information; rank >= 2 required");
  const int lo = n_range.first, hi = n_range.second;
  if (lo < 0 || hi < lo || hi - lo + 1 < 3)
    throw InvalidArgument("boundary_ratio: window needs >= 3 iterate counts");
  if (!(tol > 0.0)) throw InvalidArgument("boundary_ratio: tol must be positive");

  Ring ring;
  ring.disk = &disk;
  for (int k = 0; k < 8; ++k)
    ring.cells.push_back(
        ring_cell(f, ring, k * (M_PI / 4.0), (k + 1) * (M_PI / 4.0)));
  // The boundary of a pre-rolled leaf disk is the pushed chart boundary.
  ring_log_length(f, ring, disk.preroll, tol);

  BoundaryDecay out;
  std::vector<std::pair<int, double>> log_series;
  for (int n = lo; n <= hi; ++n) {
    const double lb = ring_log_length(f, ring, disk.preroll + n, tol);
    const double lv = log_disk_volume(f, disk, n, tol);
    out.series.emplace_back(n, std::exp(lb - lv));
    log_series.emplace_back(n, lb - lv);
  }
  const auto [slope, res] = fit_rate(log_series, n_range);
  out.exponent = -slope;
  out.residual = res;
  return out;
}

}  // namespace torusdyn
