#include "torusdyn/system.hpp"

#include <cmath>

#include "torusdyn/multilinear.hpp"

namespace torusdyn {

Vec wrap_unit(const Vec& x) {
  Vec y(x.size());
  for (int i = 0; i < x.size(); ++i) {
    double v = x[i] - std::floor(x[i]);
    if (v >= 1.0) v = 0.0;  // guard against floor rounding at the seam
    y[i] = v;
  }
  return y;
}

Point Point::canonical(const Vec& x) {
  if (!x.allFinite()) throw InvalidArgument("Point: non-finite coordinates");
  return Point{wrap_unit(x), std::nullopt};
}

Point Point::lifted(const Vec& x) {
  if (!x.allFinite()) throw InvalidArgument("Point: non-finite coordinates");
  return Point{wrap_unit(x), x};
}

Vec torus_displacement(const Vec& a, const Vec& b) {
  Vec d(a.size());
  for (int i = 0; i < a.size(); ++i) {
    double v = a[i] - b[i];
    v -= std::round(v);
    d[i] = v;
  }
  return d;
}

double torus_distance(const Point& x, const Point& y) {
  if (x.dim() != y.dim())
    throw InvalidArgument("torus_distance: dimensions differ");
  return torus_displacement(x.coords, y.coords).norm();
}

TorusMap TorusMap::linear(const IMat& a) {
  return TorusMap(a, {}, 0.0, true);
}

TorusMap TorusMap::perturbed(const IMat& a, std::vector<Mode> modes, double budget,
                             bool enable_inverse) {
  return TorusMap(a, std::move(modes), budget, enable_inverse);
}

TorusMap::TorusMap(IMat a, std::vector<Mode> modes, double budget, bool enable_inverse)
    : a_(std::move(a)), modes_(std::move(modes)), budget_(budget) {
  if (a_.rows() != a_.cols() || a_.rows() < 1)
    throw InvalidArgument("TorusMap: square matrix of positive size required");
  const std::int64_t det = integer_determinant(a_);
  if (det != 1 && det != -1)
    throw InvalidArgument("TorusMap: |det| = 1 required, got det = " +
                          std::to_string(det));
  const int d = dimension();
  a_real_ = a_.cast<double>();
  a_inv_real_ = integer_inverse(a_).cast<double>();

  for (const auto& m : modes_) {
    if (m.target < 0 || m.target >= d)
      throw InvalidArgument("TorusMap: mode target out of range");
    if (static_cast<int>(m.k.size()) != d)
      throw InvalidArgument("TorusMap: mode frequency vector has wrong dimension");
    if (!std::isfinite(m.amplitude) || !std::isfinite(m.phase))
      throw InvalidArgument("TorusMap: non-finite mode parameters");
    Vec kd(d);
    for (int i = 0; i < d; ++i) kd[i] = static_cast<double>(m.k[i]);
    mode_k_.push_back(kd);
    c1_bound_ += std::abs(m.amplitude) * 2.0 * M_PI * kd.norm();
  }

  if (!modes_.empty() && !(c1_bound_ < budget_))
    throw InvalidArgument(
        "TorusMap: C1 perturbation bound " + std::to_string(c1_bound_) +
        " exceeds budget " + std::to_string(budget_));

  if (modes_.empty()) {
    has_inverse_ = true;
  } else if (enable_inverse) {
    // Certify Newton: f = A(x + A^{-1} p(x)) is invertible when
    // ||A^{-1}|| ||p'|| < 1, i.e. the perturbation bound stays below the
    // smallest singular value of A.
    Eigen::JacobiSVD<Mat> svd(a_real_);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(c1_bound_ < smin))
      throw InvalidArgument(
          "TorusMap: inverse requested but not certified (perturbation bound " +
          std::to_string(c1_bound_) + " >= smallest singular value " +
          std::to_string(smin) + ")");
    has_inverse_ = true;
  } else {
    has_inverse_ = false;
  }
}

Vec TorusMap::lift_image(const Vec& x) const {
  Vec y = a_real_ * x;
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    const double arg = 2.0 * M_PI * mode_k_[m].dot(x) + modes_[m].phase;
    y[modes_[m].target] += modes_[m].amplitude * std::sin(arg);
  }
  return y;
}

Point TorusMap::apply(const Point& x) const {
  if (x.dim() != dimension()) throw InvalidArgument("apply: dimension mismatch");
  const Vec& rep = x.lift ? *x.lift : x.coords;
  const Vec img = lift_image(rep);
  if (x.lift) return Point{wrap_unit(img), img};
  return Point{wrap_unit(img), std::nullopt};
}

Mat TorusMap::jacobian(const Point& x) const {
  if (x.dim() != dimension()) throw InvalidArgument("jacobian: dimension mismatch");
  Mat j = a_real_;
  const Vec& rep = x.lift ? *x.lift : x.coords;
  for (std::size_t m = 0; m < modes_.size(); ++m) {
    const double arg = 2.0 * M_PI * mode_k_[m].dot(rep) + modes_[m].phase;
    const double c = 2.0 * M_PI * modes_[m].amplitude * std::cos(arg);
    j.row(modes_[m].target) += c * mode_k_[m].transpose();
  }
  return j;
}

Point TorusMap::apply_inverse(const Point& y) const {
  if (y.dim() != dimension()) throw InvalidArgument("apply_inverse: dimension mismatch");
  if (!has_inverse_) throw InvalidArgument("apply_inverse: inverse not available");
  const Vec& target = y.lift ? *y.lift : y.coords;
  Vec x = a_inv_real_ * target;
  if (!modes_.empty()) {
    // Damped Newton from the linear inverse, solving f(x) = target in lifts.
    constexpr double kTol = 1e-12;
    constexpr int kMaxIter = 50;
    double rnorm = (lift_image(x) - target).norm();
    bool ok = rnorm <= kTol;
    for (int it = 0; it < kMaxIter && !ok; ++it) {
      const Vec r = lift_image(x) - target;
      const Mat j = jacobian(Point{wrap_unit(x), x});
      Vec step = j.partialPivLu().solve(r);
      double t = 1.0;
      Vec xn = x - step;
      double rn = (lift_image(xn) - target).norm();
      for (int h = 0; h < 30 && rn > rnorm; ++h) {
        t *= 0.5;
        xn = x - t * step;
        rn = (lift_image(xn) - target).norm();
      }
      x = xn;
      rnorm = rn;
      ok = rnorm <= kTol;
    }
    if (!ok)
      throw ConvergenceError("apply_inverse: Newton did not reach tolerance", rnorm);
  }
  if (y.lift) return Point{wrap_unit(x), x};
  return Point{wrap_unit(x), std::nullopt};
}

InverseMap::InverseMap(const DynSystem& base) : base_(base) {
  if (!base.invertible())
    throw InvalidArgument("InverseMap: base system has no inverse");
}

Mat InverseMap::jacobian(const Point& x) const {
  const Point pre = base_.apply_inverse(x);
  return base_.jacobian(pre).inverse();
}

Point iterate(const DynSystem& f, Point x, int n) {
  if (n >= 0) {
    for (int i = 0; i < n; ++i) x = f.apply(x);
  } else {
    for (int i = 0; i < -n; ++i) x = f.apply_inverse(x);
  }
  return x;
}

std::vector<Point> orbit(const DynSystem& f, const Point& x, int n) {
  if (n < 0) throw InvalidArgument("orbit: n >= 0 required");
  std::vector<Point> out;
  out.reserve(n + 1);
  out.push_back(x);
  for (int i = 0; i < n; ++i) out.push_back(f.apply(out.back()));
  return out;
}

}  // namespace torusdyn
