#pragma once

// Phase space and map families: the flat d-torus, linear toral automorphisms,
// and trigonometric C1-small perturbations of them. Geometry within a disk or
// Bowen ball is done on lifts in R^d; only cross-sample comparisons reduce
// mod 1, so lengths and areas never see wrap-around artifacts.

#include <cstdint>
#include <optional>
#include <vector>

#include "torusdyn/common.hpp"

namespace torusdyn {

// A torus point: canonical coordinates in [0,1)^d, plus an optional lift
// carrying the unreduced representative for within-patch geometry.
struct Point {
  Vec coords;
  std::optional<Vec> lift;

  int dim() const { return static_cast<int>(coords.size()); }

  // Wraps x into [0,1)^d, discarding lift information.
  static Point canonical(const Vec& x);
  // Keeps x as the lift and stores its wrapped representative.
  static Point lifted(const Vec& x);
};

// Componentwise reduction into [0,1)^d.
Vec wrap_unit(const Vec& x);
// Minimal representative of a-b with each component in [-1/2, 1/2].
Vec torus_displacement(const Vec& a, const Vec& b);
// Euclidean length of the minimal representative of x-y. Bounded by sqrt(d)/2.
double torus_distance(const Point& x, const Point& y);

// One trigonometric perturbation mode: amplitude * sin(2 pi <k,x> + phase)
// added to coordinate `target`.
struct Mode {
  double amplitude = 0.0;
  int target = 0;
  std::vector<std::int64_t> k;
  double phase = 0.0;
};

// Abstract dynamical system on T^d. Implementations are immutable after
// construction and safe for concurrent evaluation.
class DynSystem {
 public:
  virtual ~DynSystem() = default;
  virtual int dimension() const = 0;
  virtual bool invertible() const = 0;
  virtual Point apply(const Point& x) const = 0;
  virtual Point apply_inverse(const Point& y) const = 0;
  virtual Mat jacobian(const Point& x) const = 0;
};

// f(x) = A x + sum_m amplitude_m sin(2 pi <k_m, x> + phase_m) e_{target_m}
// with A an integer matrix, |det A| = 1.
class TorusMap final : public DynSystem {
 public:
  // Linear toral automorphism. Rejects non-square or non-unimodular A.
  static TorusMap linear(const IMat& a);

  // Perturbed automorphism. The total C1 perturbation bound
  // sum |amplitude| * 2 pi * ||k||_2 must be strictly below `budget`.
  // The inverse is available when requested and certified: the bound must
  // also be below the smallest singular value of A so that Newton iteration
  // from the linear inverse provably converges.
  static TorusMap perturbed(const IMat& a, std::vector<Mode> modes, double budget,
                            bool enable_inverse = true);

  int dimension() const override { return static_cast<int>(a_.rows()); }
  bool invertible() const override { return has_inverse_; }
  Point apply(const Point& x) const override;
  Point apply_inverse(const Point& y) const override;
  Mat jacobian(const Point& x) const override;

  bool is_linear() const { return modes_.empty(); }
  const IMat& matrix() const { return a_; }
  const std::vector<Mode>& modes() const { return modes_; }
  // sum |amplitude| * 2 pi * ||k||_2, an upper bound for ||Df - A||.
  double c1_perturbation_bound() const { return c1_bound_; }
  double budget() const { return budget_; }

 private:
  TorusMap(IMat a, std::vector<Mode> modes, double budget, bool enable_inverse);

  Vec lift_image(const Vec& x) const;

  IMat a_;
  Mat a_real_, a_inv_real_;
  std::vector<Mode> modes_;
  std::vector<Vec> mode_k_;  // k vectors as doubles, precomputed
  double budget_ = 0.0;
  double c1_bound_ = 0.0;
  bool has_inverse_ = false;
};

// View of the inverse system f^{-1}. Holds a reference; the base system must
// outlive it. Jacobian of f^{-1} at x is [Df(f^{-1}(x))]^{-1}.
class InverseMap final : public DynSystem {
 public:
  explicit InverseMap(const DynSystem& base);

  int dimension() const override { return base_.dimension(); }
  bool invertible() const override { return true; }
  Point apply(const Point& x) const override { return base_.apply_inverse(x); }
  Point apply_inverse(const Point& y) const override { return base_.apply(y); }
  Mat jacobian(const Point& x) const override;

 private:
  const DynSystem& base_;
};

// f^n(x) for n >= 0, f^{-|n|}(x) for n < 0.
Point iterate(const DynSystem& f, Point x, int n);
// x, f(x), ..., f^n(x); n+1 points.
std::vector<Point> orbit(const DynSystem& f, const Point& x, int n);

}  // namespace torusdyn
