#include <cmath>
#include <utility>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "systems.hpp"
#include "torusdyn/bundles.hpp"
#include "torusdyn/growth.hpp"
#include "torusdyn/rng.hpp"

using namespace torusdyn;
using doctest::Approx;

namespace {

// Torus endomorphism with an arbitrary (not necessarily unimodular) integer
// matrix, for the diagonal-expansion closed forms.
class LinearEndo final : public DynSystem {
 public:
  explicit LinearEndo(Mat a) : a_(std::move(a)) {}
  int dimension() const override { return static_cast<int>(a_.rows()); }
  bool invertible() const override { return false; }
  Point apply(const Point& x) const override {
    const Vec y = a_ * x.coords;
    return Point::canonical(y);
  }
  Point apply_inverse(const Point&) const override {
    throw InvalidArgument("LinearEndo has no inverse");
  }
  Mat jacobian(const Point&) const override { return a_; }

 private:
  Mat a_;
};

Point pt(std::initializer_list<double> xs) {
  Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return Point::canonical(v);
}

Subspace cat_unstable() { return Subspace::span(oracles::cat_unstable_direction()); }

// Invariant expanding plane of the rank-two T^3 system: the annihilator of
// the stable eigenvector of the adjoint, which is (r^2, r, 1) for
// r = 1 / (real root of x^3 - x^2 - 1).
Subspace u2_unstable_plane() {
  const double r = 1.0 / oracles::cubic_real_root();
  Mat cols(3, 2);
  cols << r, 1.0, -r * r, 0.0, 0.0, -r * r;
  return Subspace::from_columns(cols);
}

Subspace t4_unstable_plane() {
  const Vec vu = oracles::cat_unstable_direction();
  Mat cols(4, 2);
  cols << vu[0], 0.0, vu[1], 0.0, 0.0, vu[0], 0.0, vu[1];
  return Subspace::from_columns(cols);
}

// Plain rank-1 cocycle log length: normalize-and-multiply, no library QR.
double brute_log_length(const DynSystem& f, Point x, Vec v, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    v = f.jacobian(x) * v;
    acc += std::log(v.norm());
    v /= v.norm();
    x = f.apply(x);
  }
  return acc;
}

}  // namespace

TEST_CASE("fit_rate on synthetic series") {
  SUBCASE("exact line and constant") {
    std::vector<std::pair<int, double>> line, flat;
    for (int n = 3; n <= 20; ++n) {
      line.emplace_back(n, 0.9624 * n + 1.5);
      flat.emplace_back(n, 4.2);
    }
    auto [r1, e1] = fit_rate(line, {3, 20});
    CHECK(r1 == Approx(0.9624).epsilon(1e-12));
    CHECK(e1 < 1e-10);
    auto [r2, e2] = fit_rate(flat, {3, 20});
    CHECK(std::abs(r2) < 1e-14);
    CHECK(e2 < 1e-14);
  }

  SUBCASE("bounded oscillation around a trend") {
    std::vector<std::pair<int, double>> s;
    for (int n = 5; n <= 25; ++n) s.emplace_back(n, 0.9 * n + std::sin(n));
    auto [rate, res] = fit_rate(s, {5, 25});
    CHECK(std::abs(rate - 0.9) < 0.02);
    // The fitted line tilts slightly into the oscillation, so the largest
    // residual can edge past the sine amplitude.
    CHECK(res <= 1.1);
  }

  SUBCASE("window filtering ignores outside points") {
    std::vector<std::pair<int, double>> s;
    for (int n = 0; n <= 30; ++n) s.emplace_back(n, (n >= 5 && n <= 25) ? 2.0 * n : 999.0);
    auto [rate, res] = fit_rate(s, {5, 25});
    CHECK(rate == Approx(2.0).epsilon(1e-12));
    CHECK(res < 1e-10);
  }

  SUBCASE("validation") {
    std::vector<std::pair<int, double>> two = {{1, 1.0}, {2, 2.0}};
    CHECK_THROWS_AS(fit_rate(two, {1, 2}), InvalidArgument);
    std::vector<std::pair<int, double>> same = {{4, 1.0}, {4, 2.0}, {4, 3.0}};
    CHECK_THROWS_AS(fit_rate(same, {0, 10}), InvalidArgument);
  }
}

TEST_CASE("cocycle volume logs on closed-form systems") {
  const TorusMap cat = TorusMap::linear(testsys::cat());
  const TorusMap id = TorusMap::linear(testsys::identity2());

  SUBCASE("unstable line of the cat map grows at the top eigenvalue") {
    const double expect = 10.0 * std::log(oracles::cat_expansion());
    CHECK(log_cocycle_volume(cat, pt({0.3, 0.7}), cat_unstable(), 10) ==
          Approx(expect).epsilon(1e-12));
  }

  SUBCASE("identity accumulates nothing") {
    for (int n : {0, 1, 17})
      CHECK(std::abs(log_cocycle_volume(id, pt({0.2, 0.9}),
                                        Subspace::axes(2, {0}), n)) < 1e-14);
  }

  SUBCASE("diagonal expanding endomorphism: plane volume is the minor product") {
    Mat a = Mat::Zero(3, 3);
    a.diagonal() << 3.0, 2.0, 1.0;
    const LinearEndo f(a);
    const double got =
        log_cocycle_volume(f, pt({0.1, 0.2, 0.3}), Subspace::axes(3, {0, 1}), 5);
    CHECK(got == Approx(5.0 * std::log(6.0)).epsilon(1e-13));
  }

  SUBCASE("additivity over path splits") {
    const TorusMap pc = testsys::perturbed_cat(0.05);
    const TorusMap u2 = TorusMap::linear(testsys::u2());
    Rng rng(7);
    for (int t = 0; t < 20; ++t) {
      const bool three = t % 2;
      const DynSystem& f = three ? static_cast<const DynSystem&>(u2) : pc;
      const int d = f.dimension();
      const int u = three ? 2 : 1;
      const Point x = Point::canonical(rng.point(d));
      const Subspace F = Subspace::from_columns(rng.gaussian_matrix(d, u));
      const int m = 3 + t % 5, n = 2 + t % 7;
      // Mirror the internal path: push m steps to get the mid frame.
      Point p = x;
      Subspace s = F;
      for (int i = 0; i < m; ++i) {
        s = push_subspace(f.jacobian(p), s);
        p = f.apply(p);
      }
      const double whole = log_cocycle_volume(f, x, F, m + n);
      const double split =
          log_cocycle_volume(f, x, F, m) + log_cocycle_volume(f, p, s, n);
      CHECK(whole == Approx(split).epsilon(1e-10));
    }
  }

  SUBCASE("validation") {
    CHECK_THROWS_AS(log_cocycle_volume(cat, pt({0, 0}), cat_unstable(), -1),
                    InvalidArgument);
    CHECK_THROWS_AS(log_cocycle_volume(cat, pt({0, 0}), Subspace::axes(3, {0}), 2),
                    InvalidArgument);
  }
}

TEST_CASE("flat disks: exact weights and zero-iterate volumes") {
  const TorusMap cat = TorusMap::linear(testsys::cat());
  const TorusMap id = TorusMap::linear(testsys::identity2());
  const TorusMap u2 = TorusMap::linear(testsys::u2());

  SUBCASE("interval weights sum to the segment length") {
    DiskSpec spec{pt({0.2, 0.5}), cat_unstable(), 0.7, DiskFamily::transverse, 0.0};
    ParamDisk d = make_flat_disk(cat, spec);
    CHECK(d.weight_sum() == Approx(2.0 * 0.7).epsilon(1e-12));
    CHECK(disk_volume(cat, d, 0, 1e-3) == Approx(2.0 * 0.7).epsilon(1e-12));
  }

  SUBCASE("polar cell weights sum to the disk area") {
    DiskSpec spec{pt({0.2, 0.5, 0.8}), u2_unstable_plane(), 0.8,
                  DiskFamily::transverse, 0.0};
    ParamDisk d = make_flat_disk(u2, spec);
    CHECK(d.weight_sum() == Approx(M_PI * 0.64).epsilon(1e-10));
    CHECK(disk_volume(u2, d, 0, 1e-3) == Approx(M_PI * 0.64).epsilon(1e-10));
  }

  SUBCASE("identity keeps every disk volume constant") {
    DiskSpec spec{pt({0.4, 0.1}), Subspace::axes(2, {0, 1}), 0.5,
                  DiskFamily::transverse, 0.0};
    ParamDisk d = make_flat_disk(id, spec);
    const double v0 = disk_volume(id, d, 0, 1e-3);
    CHECK(v0 == Approx(M_PI * 0.25).epsilon(1e-10));
    for (int n : {3, 7}) CHECK(disk_volume(id, d, n, 1e-3) == Approx(v0).epsilon(1e-12));
  }

  SUBCASE("validation") {
    CHECK_THROWS_AS(
        make_flat_disk(cat, DiskSpec{pt({0, 0}), cat_unstable(), 0.0,
                                     DiskFamily::transverse, 0.0}),
        InvalidArgument);
    CHECK_THROWS_AS(
        make_flat_disk(cat, DiskSpec{pt({0, 0}), Subspace::axes(3, {0}), 1.0,
                                     DiskFamily::transverse, 0.0}),
        InvalidArgument);
    const TorusMap t4 = TorusMap::linear(testsys::t4_cat_cat());
    CHECK_THROWS_AS(
        make_flat_disk(t4, DiskSpec{pt({0, 0, 0, 0}), Subspace::axes(4, {0, 1, 2}),
                                    1.0, DiskFamily::transverse, 0.0}),
        InvalidArgument);
  }
}

TEST_CASE("iterated disk volumes of linear maps hit the closed forms") {
  SUBCASE("cat segment: length times the top eigenvalue power") {
    const TorusMap cat = TorusMap::linear(testsys::cat());
    DiskSpec spec{pt({0.1, 0.8}), cat_unstable(), 1.0, DiskFamily::leaf, 0.0};
    ParamDisk d = make_flat_disk(cat, spec);
    const double expect = 2.0 * std::exp(10.0 * std::log(oracles::cat_expansion()));
    CHECK(disk_volume(cat, d, 10, 1e-3) == Approx(expect).epsilon(1e-9));
    // Constant integrand: the initial five-node mesh never refines.
    CHECK(d.nodes.size() == 5);
  }

  SUBCASE("rank-two plane: area times the invariant-plane determinant power") {
    const TorusMap u2 = TorusMap::linear(testsys::u2());
    DiskSpec spec{pt({0.3, 0.6, 0.9}), u2_unstable_plane(), 0.7,
                  DiskFamily::transverse, 0.0};
    ParamDisk d = make_flat_disk(u2, spec);
    // Per-step area expansion on the invariant plane is |det| restricted to
    // it: the product of the complex pair moduli, i.e. the cubic real root.
    const double expect = M_PI * 0.49 * std::pow(oracles::cubic_real_root(), 8.0);
    CHECK(disk_volume(u2, d, 8, 1e-3) == Approx(expect).epsilon(1e-9));
  }

  SUBCASE("product of two cat blocks: area grows at twice the rate") {
    const TorusMap t4 = TorusMap::linear(testsys::t4_cat_cat());
    DiskSpec spec{pt({0.1, 0.2, 0.3, 0.4}), t4_unstable_plane(), 0.5,
                  DiskFamily::transverse, 0.0};
    ParamDisk d = make_flat_disk(t4, spec);
    const double lam = oracles::cat_expansion();
    const double expect = M_PI * 0.25 * std::pow(lam, 2.0 * 6.0);
    CHECK(disk_volume(t4, d, 6, 1e-3) == Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("adaptive quadrature against a dense Riemann oracle") {
  const TorusMap f = testsys::perturbed_cat(0.05);
  const Point x = pt({0.37, 0.81});
  const BundleEstimate e = estimate_unstable(f, x, 1, 60, 5);
  REQUIRE(e.converged);
  DiskSpec spec{x, e.frame, 1.0, DiskFamily::transverse, 0.0};

  SUBCASE("matches a 4001-point midpoint sum") {
    ParamDisk d = make_flat_disk(f, spec);
    const int n = 10;
    const double got = log_disk_volume(f, d, n, 1e-3);
    // Dense flat-mesh oracle: midpoints of 4001 equal cells, plain
    // normalize-and-multiply length cocycle, naive summation in plain space
    // after factoring out the largest term.
    const int m_cells = 4001;
    std::vector<double> logs(m_cells);
    double peak = -1e300;
    for (int i = 0; i < m_cells; ++i) {
      const double t = -1.0 + (2.0 * i + 1.0) / m_cells;
      Vec p0 = x.coords + t * e.frame.frame.col(0);
      logs[i] = brute_log_length(f, Point::canonical(p0), e.frame.frame.col(0), n);
      peak = std::max(peak, logs[i]);
    }
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - peak);
    const double oracle = peak + std::log(acc * 2.0 / m_cells);
    // Both sides resolve the low-frequency bulk; what remains on each side is
    // aliasing noise from the fastest oscillations, so compare loosely.
    CHECK(std::abs(got - oracle) < 0.02);
    CHECK(d.nodes.size() > 5);  // the varying integrand forced refinement
  }

  SUBCASE("tightening the tolerance is self-consistent") {
    // Two iterates keep the pushed integrand smooth enough to resolve
    // pointwise, so tightening the tolerance must reproduce the value to the
    // coarse tolerance.
    ParamDisk coarse2 = make_flat_disk(f, spec);
    ParamDisk fine2 = make_flat_disk(f, spec);
    const double c2 = log_disk_volume(f, coarse2, 2, 1e-3);
    const double f2 = log_disk_volume(f, fine2, 2, 1e-5);
    CHECK(std::abs(c2 - f2) < 1e-3);
    CHECK(fine2.nodes.size() > coarse2.nodes.size());
    // Ten iterates push frequencies beyond any affordable mesh; the
    // stabilized totals at different tolerances still agree loosely.
    ParamDisk coarse10 = make_flat_disk(f, spec);
    ParamDisk fine10 = make_flat_disk(f, spec);
    const double c10 = log_disk_volume(f, coarse10, 10, 1e-2);
    const double f10 = log_disk_volume(f, fine10, 10, 1e-3);
    CHECK(std::abs(c10 - f10) < 0.05);
  }

  SUBCASE("validation") {
    ParamDisk d = make_flat_disk(f, spec);
    CHECK_THROWS_AS(log_disk_volume(f, d, -1, 1e-3), InvalidArgument);
    CHECK_THROWS_AS(log_disk_volume(f, d, 3, 0.0), InvalidArgument);
  }
}

TEST_CASE("leaf disks land on the unstable foliation") {
  SUBCASE("linear leaves are straight: zero tilt, exact radius") {
    const TorusMap cat = TorusMap::linear(testsys::cat());
    const Point x = pt({0.25, 0.65});
    ParamDisk d = make_leaf_disk(cat, x, 1, 1.0, 20, 60, 3);
    CHECK(d.spec.family == DiskFamily::leaf);
    CHECK(d.spec.tilt < 1e-9);
    // The centre returns to x up to the expansion-amplified rounding of the
    // integer-inverse pre-roll.
    CHECK(torus_distance(d.spec.base, x) < 1e-6);
    CHECK(subspace_angle(d.spec.tangent, cat_unstable()) < 1e-9);
    CHECK(disk_volume(cat, d, 0, 1e-3) == Approx(2.0).epsilon(1e-9));
    // and it still grows at the eigenvalue rate from its pre-rolled state
    const double lam = oracles::cat_expansion();
    CHECK(log_disk_volume(cat, d, 12, 1e-3) - log_disk_volume(cat, d, 0, 1e-3) ==
          Approx(12.0 * std::log(lam)).epsilon(1e-9));
  }

  SUBCASE("graph transform converges on the perturbed map") {
    const TorusMap f = testsys::perturbed_cat(0.05);
    const Point x = pt({0.7, 0.15});
    ParamDisk d = make_leaf_disk(f, x, 1, 1.0, 20, 60, 9);
    CHECK(d.spec.family == DiskFamily::leaf);
    CHECK(d.spec.tilt < 1e-6);
    // Newton-inverse rounding amplified by twenty steps of expansion.
    CHECK(torus_distance(d.spec.base, x) < 1e-4);
    CHECK(std::abs(std::log(disk_volume(f, d, 0, 1e-3) / 2.0)) < 1e-6);
  }

  SUBCASE("rank-two leaf disk on the conformal system") {
    const TorusMap u2 = TorusMap::linear(testsys::u2());
    const Point x = pt({0.2, 0.4, 0.6});
    ParamDisk d = make_leaf_disk(u2, x, 2, 0.8, 20, 60, 4);
    CHECK(d.spec.family == DiskFamily::leaf);
    CHECK(subspace_angle(d.spec.tangent, u2_unstable_plane()) < 1e-9);
    CHECK(disk_volume(u2, d, 0, 1e-3) == Approx(M_PI * 0.64).epsilon(1e-9));
  }

  SUBCASE("validation and inverse requirement") {
    const TorusMap cat = TorusMap::linear(testsys::cat());
    CHECK_THROWS_AS(make_leaf_disk(cat, pt({0, 0}), 1, 0.0, 20, 60, 1),
                    InvalidArgument);
    const TorusMap no_inv = TorusMap::perturbed(
        testsys::cat(), {Mode{0.1, 0, {1, 0}, 0.0}}, 0.8, false);
    CHECK_THROWS_AS(make_leaf_disk(no_inv, pt({0.5, 0.5}), 1, 1.0, 20, 60, 1),
                    InvalidArgument);
  }
}

TEST_CASE("integrated growth equals the unstable eigenvalue rate") {
  const double lam = std::log(oracles::cat_expansion());

  SUBCASE("cat map: constant cocycle, exactly linear series") {
    const TorusMap cat = TorusMap::linear(testsys::cat());
    const GrowthEstimate est = integrated_growth(cat, 1, 200, {5, 25}, 11);
    CHECK(est.tag == GrowthEstimator::integrated);
    CHECK(est.window == std::pair<int, int>{5, 25});
    CHECK(est.rate == Approx(lam).epsilon(1e-9));
    CHECK(est.residual < 1e-9);
    CHECK(est.series.size() == 21);
  }

  SUBCASE("three-torus block system, unstable line") {
    const TorusMap a3 = TorusMap::linear(testsys::a3());
    const GrowthEstimate est = integrated_growth(a3, 1, 100, {5, 25}, 2);
    CHECK(est.rate == Approx(lam).epsilon(1e-9));
  }

  SUBCASE("three-torus rank-two plane") {
    const TorusMap u2 = TorusMap::linear(testsys::u2());
    const GrowthEstimate est = integrated_growth(u2, 2, 100, {5, 25}, 2);
    CHECK(est.rate == Approx(std::log(oracles::cubic_real_root())).epsilon(1e-8));
    CHECK(est.residual < 1e-6);
  }

  SUBCASE("seed stability on the perturbed map") {
    const TorusMap f = testsys::perturbed_cat(0.05);
    const GrowthEstimate a = integrated_growth(f, 1, 300, {5, 25}, 101);
    const GrowthEstimate b = integrated_growth(f, 1, 300, {5, 25}, 707);
    CHECK(std::abs(a.rate - b.rate) < 0.01);
  }

  SUBCASE("isometric systems cannot settle a fastest direction") {
    const TorusMap id = TorusMap::linear(testsys::identity2());
    CHECK_THROWS_AS(integrated_growth(id, 1, 100, {5, 25}, 1), ConvergenceError);
  }

  SUBCASE("validation") {
    const TorusMap cat = TorusMap::linear(testsys::cat());
    CHECK_THROWS_AS(integrated_growth(cat, 0, 100, {5, 25}, 1), InvalidArgument);
    CHECK_THROWS_AS(integrated_growth(cat, 1, 5, {5, 25}, 1), InvalidArgument);
    CHECK_THROWS_AS(integrated_growth(cat, 1, 100, {5, 6}, 1), InvalidArgument);
  }
}

TEST_CASE("family growth rates on linear systems") {
  const double lam = std::log(oracles::cat_expansion());
  GrowthOptions opt;
  opt.cone_sample = 200;

  SUBCASE("cat map: every family and mode sees the eigenvalue rate") {
    const TorusMap cat = TorusMap::linear(testsys::cat());
    for (DiskFamily fam : {DiskFamily::leaf, DiskFamily::transverse})
      for (SupMode mode : {SupMode::per_disk, SupMode::per_n_sup}) {
        const GrowthEstimate est =
            growth_rate_family(cat, 1, fam, mode, 6, {5, 20}, 17, opt);
        CAPTURE(estimator_name(est.tag));
        CHECK(est.rate == Approx(lam).epsilon(1e-6));
        CHECK(est.residual < 1e-4);
        CHECK(est.window == std::pair<int, int>{5, 20});
      }
  }

  SUBCASE("estimator tags name the family and mode") {
    const TorusMap cat = TorusMap::linear(testsys::cat());
    const GrowthEstimate a = growth_rate_family(cat, 1, DiskFamily::leaf,
                                                SupMode::per_disk, 3, {5, 15}, 1, opt);
    CHECK(a.tag == GrowthEstimator::leaf_per_disk);
    CHECK(std::string(estimator_name(a.tag)) == "leaf_per_disk");
    const GrowthEstimate b =
        growth_rate_family(cat, 1, DiskFamily::transverse, SupMode::per_n_sup, 3,
                           {5, 15}, 1, opt);
    CHECK(b.tag == GrowthEstimator::transverse_per_n_sup);
  }

  SUBCASE("rank-two conformal plane") {
    const TorusMap u2 = TorusMap::linear(testsys::u2());
    const double expect = std::log(oracles::cubic_real_root());
    const GrowthEstimate leaf = growth_rate_family(u2, 2, DiskFamily::leaf,
                                                   SupMode::per_disk, 4, {5, 20},
                                                   23, opt);
    CHECK(leaf.rate == Approx(expect).epsilon(1e-6));
    const GrowthEstimate trans =
        growth_rate_family(u2, 2, DiskFamily::transverse, SupMode::per_n_sup, 4,
                           {5, 20}, 23, opt);
    CHECK(trans.rate == Approx(expect).epsilon(1e-4));
  }

  SUBCASE("partially hyperbolic block system") {
    const TorusMap a3 = TorusMap::linear(testsys::a3());
    const GrowthEstimate leaf = growth_rate_family(a3, 1, DiskFamily::leaf,
                                                   SupMode::per_n_sup, 4, {5, 20},
                                                   31, opt);
    CHECK(leaf.rate == Approx(lam).epsilon(1e-6));
    const GrowthEstimate trans =
        growth_rate_family(a3, 1, DiskFamily::transverse, SupMode::per_disk, 4,
                           {5, 20}, 31, opt);
    CHECK(trans.rate == Approx(lam).epsilon(1e-4));
  }

  SUBCASE("determinism and validation") {
    const TorusMap cat = TorusMap::linear(testsys::cat());
    const GrowthEstimate a = growth_rate_family(cat, 1, DiskFamily::transverse,
                                                SupMode::per_disk, 4, {5, 15}, 77, opt);
    const GrowthEstimate b = growth_rate_family(cat, 1, DiskFamily::transverse,
                                                SupMode::per_disk, 4, {5, 15}, 77, opt);
    CHECK(a.rate == b.rate);
    CHECK(a.series == b.series);
    CHECK_THROWS_AS(growth_rate_family(cat, 1, DiskFamily::leaf, SupMode::per_disk,
                                       0, {5, 15}, 1, opt),
                    InvalidArgument);
  }
}

TEST_CASE("estimator ordering holds on a perturbed system") {
  // Sampled sups can only grow when the family widens or the max moves
  // inside the fit; 0.02 absorbs estimator noise.
  const TorusMap f = testsys::perturbed_cat(0.05);
  GrowthOptions opt;
  opt.cone_sample = 200;
  const std::pair<int, int> w{5, 20};
  const double vbar = integrated_growth(f, 1, 300, w, 5, opt).rate;
  const double v_leaf =
      growth_rate_family(f, 1, DiskFamily::leaf, SupMode::per_disk, 8, w, 5, opt).rate;
  const double v_leaf_sup =
      growth_rate_family(f, 1, DiskFamily::leaf, SupMode::per_n_sup, 8, w, 5, opt).rate;
  const double v_trans =
      growth_rate_family(f, 1, DiskFamily::transverse, SupMode::per_disk, 8, w, 5, opt)
          .rate;
  const double v_trans_sup =
      growth_rate_family(f, 1, DiskFamily::transverse, SupMode::per_n_sup, 8, w, 5, opt)
          .rate;
  CHECK(v_leaf <= v_leaf_sup + 0.02);
  CHECK(v_leaf <= v_trans + 0.02);
  CHECK(v_leaf_sup <= v_trans_sup + 0.02);
  CHECK(v_trans <= v_trans_sup + 0.02);
  // All five cluster near the unperturbed rate at this small amplitude.
  const double lam = std::log(oracles::cat_expansion());
  for (double r : {vbar, v_leaf, v_leaf_sup, v_trans, v_trans_sup})
    CHECK(std::abs(r - lam) < 0.05);
}

TEST_CASE("boundary to volume ratios") {
  SUBCASE("identity: flat circle over flat disk, no decay") {
    const TorusMap id = TorusMap::linear(testsys::identity2());
    DiskSpec spec{pt({0.3, 0.3}), Subspace::axes(2, {0, 1}), 0.8,
                  DiskFamily::transverse, 0.0};
    ParamDisk d = make_flat_disk(id, spec);
    const BoundaryDecay bd = boundary_ratio(id, d, {0, 6});
    CHECK(std::abs(bd.exponent) < 1e-10);
    for (const auto& [n, ratio] : bd.series)
      CHECK(ratio == Approx(2.0 / 0.8).epsilon(1e-10));
  }

  SUBCASE("conformal rank-two system: decay at the per-direction rate") {
    const TorusMap u2 = TorusMap::linear(testsys::u2());
    DiskSpec spec{pt({0.25, 0.5, 0.75}), u2_unstable_plane(), 1.0,
                  DiskFamily::transverse, 0.0};
    ParamDisk d = make_flat_disk(u2, spec);
    const BoundaryDecay bd = boundary_ratio(u2, d, {5, 20});
    const double expect = 0.5 * std::log(oracles::cubic_real_root());
    CHECK(std::abs(bd.exponent - expect) < 0.1 * expect);
    // monotone decay once the transient has passed
    for (std::size_t i = 1; i < bd.series.size(); ++i)
      CHECK(bd.series[i].second < bd.series[i - 1].second);
  }

  SUBCASE("product of cat blocks: boundary loses one eigenvalue factor") {
    const TorusMap t4 = TorusMap::linear(testsys::t4_cat_cat());
    DiskSpec spec{pt({0.1, 0.6, 0.2, 0.7}), t4_unstable_plane(), 1.0,
                  DiskFamily::transverse, 0.0};
    ParamDisk d = make_flat_disk(t4, spec);
    const BoundaryDecay bd = boundary_ratio(t4, d, {5, 18});
    const double expect = std::log(oracles::cat_expansion());
    CHECK(std::abs(bd.exponent - expect) < 0.1 * expect);
  }

  SUBCASE("rank-one disks are rejected with an explanation") {
    const TorusMap cat = TorusMap::linear(testsys::cat());
    DiskSpec spec{pt({0.1, 0.1}), cat_unstable(), 1.0, DiskFamily::leaf, 0.0};
    ParamDisk d = make_flat_disk(cat, spec);
    CHECK_THROWS_WITH_AS(boundary_ratio(cat, d, {0, 6}),
                         doctest::Contains("rank-1"), InvalidArgument);
  }
}

TEST_CASE("transversality angles against eigenvector geometry") {
  SUBCASE("cat map: symmetric matrix, orthogonal splitting") {
    const TorusMap cat = TorusMap::linear(testsys::cat());
    CHECK(transversality_angle(cat, 1, 50, 60, 3) == Approx(M_PI / 2).epsilon(1e-9));
  }

  SUBCASE("non-normal shear: the angle between the eigenvectors") {
    // skew23 eigenvectors (sqrt 3, 1) and (sqrt 3, -1): cos angle = 1/2.
    const TorusMap sk = TorusMap::linear(testsys::skew23());
    CHECK(transversality_angle(sk, 1, 50, 60, 3) == Approx(M_PI / 3).epsilon(1e-9));
  }

  SUBCASE("full-rank unstable has no center-stable to collide with") {
    const TorusMap cat = TorusMap::linear(testsys::cat());
    CHECK(transversality_angle(cat, 2, 10, 60, 3) == Approx(M_PI / 2));
  }

  SUBCASE("validation") {
    const TorusMap cat = TorusMap::linear(testsys::cat());
    CHECK_THROWS_AS(transversality_angle(cat, 1, 0, 60, 3), InvalidArgument);
    CHECK_THROWS_AS(transversality_angle(cat, 5, 10, 60, 3), InvalidArgument);
  }
}
