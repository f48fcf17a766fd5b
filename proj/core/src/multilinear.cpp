#include "torusdyn/multilinear.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "torusdyn/rng.hpp"

namespace torusdyn {

namespace {

void require_square(const Mat& a, const char* who) {
  if (a.rows() != a.cols())
    throw InvalidArgument(std::string(who) + ": square matrix required");
  if (!a.allFinite())
    throw InvalidArgument(std::string(who) + ": non-finite entries");
}

}  // namespace

Subspace Subspace::from_columns(const Mat& columns) {
  return Subspace{qr(columns).Q};
}

Subspace Subspace::span(const Vec& v) {
  const double n = v.norm();
  if (n <= 0.0 || !v.allFinite())
    throw DegeneracyError("span: zero or non-finite vector");
  Mat f(v.size(), 1);
  f.col(0) = v / n;
  return Subspace{f};
}

Subspace Subspace::axes(int d, const std::vector<int>& which) {
  Mat f = Mat::Zero(d, static_cast<int>(which.size()));
  for (std::size_t j = 0; j < which.size(); ++j) {
    if (which[j] < 0 || which[j] >= d)
      throw InvalidArgument("axes: index out of range");
    f(which[j], static_cast<int>(j)) = 1.0;
  }
  return Subspace{f};
}

bool Subspace::is_orthonormal(double tol) const {
  const int k = rank();
  const Mat g = frame.transpose() * frame;
  return (g - Mat::Identity(k, k)).cwiseAbs().maxCoeff() <= tol;
}

QRResult qr(const Mat& m) {
  const int d = static_cast<int>(m.rows());
  const int k = static_cast<int>(m.cols());
  if (k == 0 || d < k)
    throw InvalidArgument("qr: need 1 <= cols <= rows");
  if (!m.allFinite()) throw DegeneracyError("qr: non-finite input");

  Eigen::HouseholderQR<Mat> fac(m);
  Mat q = fac.householderQ() * Mat::Identity(d, k);
  Mat r = fac.matrixQR().topRows(k).triangularView<Eigen::Upper>();

  // Fix the sign convention: strictly positive diagonal.
  for (int j = 0; j < k; ++j) {
    if (r(j, j) < 0.0) {
      r.row(j) = -r.row(j);
      q.col(j) = -q.col(j);
    }
  }

  double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < k; ++j) {
    dmax = std::max(dmax, r(j, j));
    dmin = std::min(dmin, r(j, j));
  }
  if (!(dmax > 0.0) || dmin <= 1e-13 * dmax)
    throw DegeneracyError("qr: numerically rank-deficient columns");
  return {std::move(q), std::move(r)};
}

std::vector<std::vector<int>> k_subsets(int d, int k) {
  if (k < 0 || k > d) throw InvalidArgument("k_subsets: need 0 <= k <= d");
  std::vector<std::vector<int>> out;
  std::vector<int> cur(k);
  for (int i = 0; i < k; ++i) cur[i] = i;
  if (k == 0) {
    out.push_back({});
    return out;
  }
  while (true) {
    out.push_back(cur);
    // advance to the next subset in lexicographic order
    int i = k - 1;
    while (i >= 0 && cur[i] == d - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

Mat exterior_power(const Mat& a, int k) {
  require_square(a, "exterior_power");
  const int d = static_cast<int>(a.rows());
  if (k < 1 || k > d) throw InvalidArgument("exterior_power: need 1 <= k <= d");
  const auto subsets = k_subsets(d, k);
  const int m = static_cast<int>(subsets.size());
  Mat out(m, m);
  Mat sub(k, k);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) sub(i, j) = a(subsets[r][i], subsets[c][j]);
      out(r, c) = sub.determinant();
    }
  }
  return out;
}

namespace {

// Overflow-checked 128-bit arithmetic. Exact integer polynomial work bails
// out (and the caller falls back to floating point) instead of wrapping.
struct IntOverflow {};

__int128 mul_ck(__int128 a, __int128 b) {
  __int128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw IntOverflow{};
  return r;
}

__int128 add_ck(__int128 a, __int128 b) {
  __int128 r;
  if (__builtin_add_overflow(a, b, &r)) throw IntOverflow{};
  return r;
}

// Fraction-free elimination; every intermediate quantity is an exact minor.
__int128 bareiss_det(std::vector<std::vector<__int128>>& m) {
  const int n = static_cast<int>(m.size());
  if (n == 0) return 1;
  __int128 prev = 1;
  int sign = 1;
  for (int k = 0; k + 1 < n; ++k) {
    if (m[k][k] == 0) {
      int r = -1;
      for (int i = k + 1; i < n; ++i)
        if (m[i][k] != 0) {
          r = i;
          break;
        }
      if (r < 0) return 0;
      std::swap(m[k], m[r]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

std::int64_t checked_int64(__int128 v, const char* who) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min())
    throw InvalidArgument(std::string(who) + ": integer overflow");
  return static_cast<std::int64_t>(v);
}

std::int64_t integer_minor(const IMat& a, const std::vector<int>& rows,
                           const std::vector<int>& cols) {
  const int k = static_cast<int>(rows.size());
  std::vector<std::vector<__int128>> sub(k, std::vector<__int128>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) sub[i][j] = a(rows[i], cols[j]);
  return checked_int64(bareiss_det(sub), "integer_minor");
}

}  // namespace

IMat exterior_power(const IMat& a, int k) {
  if (a.rows() != a.cols())
    throw InvalidArgument("exterior_power: square matrix required");
  const int d = static_cast<int>(a.rows());
  if (k < 1 || k > d) throw InvalidArgument("exterior_power: need 1 <= k <= d");
  const auto subsets = k_subsets(d, k);
  const int m = static_cast<int>(subsets.size());
  IMat out(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) out(r, c) = integer_minor(a, subsets[r], subsets[c]);
  return out;
}

std::int64_t integer_determinant(const IMat& a) {
  if (a.rows() != a.cols())
    throw InvalidArgument("integer_determinant: square matrix required");
  const int n = static_cast<int>(a.rows());
  std::vector<std::vector<__int128>> m(n, std::vector<__int128>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = a(i, j);
  return checked_int64(bareiss_det(m), "integer_determinant");
}

std::vector<std::int64_t> integer_char_poly(const IMat& a) {
  if (a.rows() != a.cols())
    throw InvalidArgument("integer_char_poly: square matrix required");
  const int n = static_cast<int>(a.rows());
  // Faddeev-LeVerrier stays in integers for integer input; the trace/k
  // division is exact at every step. All arithmetic is overflow checked.
  try {
    std::vector<std::vector<__int128>> m(n, std::vector<__int128>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m[i][j] = a(i, j);
    std::vector<__int128> c(n + 1, 0);
    c[n] = 1;
    auto trace = [&]() {
      __int128 t = 0;
      for (int i = 0; i < n; ++i) t = add_ck(t, m[i][i]);
      return t;
    };
    c[n - 1] = -trace();
    for (int k = 2; k <= n; ++k) {
      for (int i = 0; i < n; ++i) m[i][i] = add_ck(m[i][i], c[n - k + 1]);
      std::vector<std::vector<__int128>> next(n, std::vector<__int128>(n, 0));
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) {
          const __int128 ail = a(i, l);
          if (ail == 0) continue;
          for (int j = 0; j < n; ++j)
            next[i][j] = add_ck(next[i][j], mul_ck(ail, m[l][j]));
        }
      m = std::move(next);
      c[n - k] = -trace() / k;
    }
    std::vector<std::int64_t> out(n + 1);
    for (int i = 0; i <= n; ++i) out[i] = checked_int64(c[i], "integer_char_poly");
    return out;
  } catch (const IntOverflow&) {
    throw InvalidArgument("integer_char_poly: integer overflow");
  }
}

IMat integer_inverse(const IMat& a) {
  if (a.rows() != a.cols())
    throw InvalidArgument("integer_inverse: square matrix required");
  const int n = static_cast<int>(a.rows());
  const std::int64_t det = integer_determinant(a);
  if (det != 1 && det != -1)
    throw InvalidArgument("integer_inverse: matrix is not unimodular");
  IMat inv(n, n);
  std::vector<int> rows, cols;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      rows.clear();
      cols.clear();
      for (int r = 0; r < n; ++r)
        if (r != j) rows.push_back(r);
      for (int c = 0; c < n; ++c)
        if (c != i) cols.push_back(c);
      const std::int64_t cof = ((i + j) % 2 == 0 ? 1 : -1) * integer_minor(a, rows, cols);
      inv(i, j) = cof * det;  // det is +-1, so division is multiplication
    }
  }
  return inv;
}

double restricted_expansion(const Mat& a, const Subspace& f) {
  const Mat m = a * f.frame;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double co_expansion(const Mat& a, const Subspace& f) {
  const Mat m = a * f.frame;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1);
}

double log_volume_expansion(const Mat& a, const Subspace& f) {
  const QRResult r = qr(a * f.frame);
  double s = 0.0;
  for (int j = 0; j < r.R.cols(); ++j) s += std::log(r.R(j, j));
  return s;
}

double volume_expansion(const Mat& a, const Subspace& f) {
  return std::exp(log_volume_expansion(a, f));
}

Subspace push_subspace(const Mat& a, const Subspace& f) {
  return Subspace{qr(a * f.frame).Q};
}

PushResult push_with_volume(const Mat& a, const Subspace& f) {
  QRResult r = qr(a * f.frame);
  double s = 0.0;
  for (int j = 0; j < r.R.cols(); ++j) s += std::log(r.R(j, j));
  return {Subspace{std::move(r.Q)}, s};
}

Subspace orthogonal_complement(const Subspace& f) {
  const int d = f.ambient_dimension();
  const int k = f.rank();
  if (k == 0) return Subspace{Mat::Identity(d, d)};
  if (k == d) return Subspace{Mat(d, 0)};
  Eigen::HouseholderQR<Mat> fac(f.frame);
  const Mat qfull = fac.householderQ() * Mat::Identity(d, d);
  return Subspace{qfull.rightCols(d - k)};
}

// Principal angles are recovered from the cosine data sigma_j(F^T G) and the
// sine data sigma_j(G - F F^T G) jointly: for orthonormal frames the two
// singular spectra pair up as cos/sin of the same angles, and atan2 of a pair
// is accurate at both ends of [0, pi/2]. A pure acos route cannot resolve
// angles below sqrt(eps).

double subspace_angle(const Subspace& f, const Subspace& g) {
  if (f.rank() != g.rank())
    throw InvalidArgument("subspace_angle: equal ranks required");
  if (f.ambient_dimension() != g.ambient_dimension())
    throw InvalidArgument("subspace_angle: ambient dimensions differ");
  if (f.rank() == 0) return 0.0;
  const Mat m = f.frame.transpose() * g.frame;
  const Mat perp = g.frame - f.frame * m;
  Eigen::JacobiSVD<Mat> cos_svd(m);
  Eigen::JacobiSVD<Mat> sin_svd(perp);
  const auto& cs = cos_svd.singularValues();
  const double c = std::clamp(cs(cs.size() - 1), 0.0, 1.0);  // cos of largest angle
  const double s = std::clamp(sin_svd.singularValues()(0), 0.0, 1.0);
  return std::atan2(s, c);
}

double minimal_angle(const Subspace& f, const Subspace& g) {
  if (f.ambient_dimension() != g.ambient_dimension())
    throw InvalidArgument("minimal_angle: ambient dimensions differ");
  if (f.rank() == 0 || g.rank() == 0) return M_PI / 2.0;
  const Mat m = f.frame.transpose() * g.frame;
  const Mat perp = g.frame - f.frame * m;
  Eigen::JacobiSVD<Mat> cos_svd(m);
  Eigen::JacobiSVD<Mat> sin_svd(perp);
  const double c = std::clamp(cos_svd.singularValues()(0), 0.0, 1.0);
  const auto& ss = sin_svd.singularValues();
  const double s = std::clamp(ss(ss.size() - 1), 0.0, 1.0);  // sin of smallest angle
  return std::atan2(s, c);
}

namespace {

// Monic characteristic polynomial coefficients by the Faddeev-LeVerrier
// recurrence; adequate for the small projected blocks and the dense fallback.
std::vector<double> char_poly(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<double> c(n + 1, 0.0);
  c[n] = 1.0;
  if (n == 0) return c;
  Mat mk = a;
  c[n - 1] = -mk.trace();
  for (int k = 2; k <= n; ++k) {
    mk = a * (mk + c[n - k + 1] * Mat::Identity(n, n));
    c[n - k] = -mk.trace() / static_cast<double>(k);
  }
  return c;
}

std::complex<double> horner(const std::vector<double>& c, std::complex<double> z) {
  std::complex<double> r(1.0, 0.0);
  for (int i = static_cast<int>(c.size()) - 2; i >= 0; --i) r = r * z + c[i];
  return r;
}

}  // namespace

std::vector<std::complex<double>> monic_roots(const std::vector<double>& coeffs) {
  if (coeffs.empty() || coeffs.back() != 1.0)
    throw InvalidArgument("monic_roots: monic coefficient vector required");
  const int n = static_cast<int>(coeffs.size()) - 1;
  std::vector<std::complex<double>> z(n);
  if (n == 0) return z;
  // Seed on a spiral whose radius tracks the Cauchy root bound.
  double cmax = 0.0;
  for (int i = 0; i < n; ++i) cmax = std::max(cmax, std::abs(coeffs[i]));
  const double r0 = 0.5 + std::pow(std::max(cmax, 1e-12), 1.0 / n);
  const std::complex<double> w(0.4, 0.9);
  std::complex<double> p(1.0, 0.0);
  for (int j = 0; j < n; ++j) {
    p *= w;
    z[j] = r0 * p / std::abs(p);
  }
  for (int it = 0; it < 1000; ++it) {
    double step = 0.0, scale = 1.0;
    for (int j = 0; j < n; ++j) {
      std::complex<double> den(1.0, 0.0);
      for (int k = 0; k < n; ++k)
        if (k != j) den *= z[j] - z[k];
      if (std::abs(den) < 1e-300) den = 1e-300;
      const std::complex<double> delta = horner(coeffs, z[j]) / den;
      z[j] -= delta;
      step = std::max(step, std::abs(delta));
      scale = std::max(scale, std::abs(z[j]));
    }
    if (step <= 1e-14 * scale) break;
  }
  return z;
}

double monic_root_certificate(const std::vector<double>& coeffs,
                              const std::vector<std::complex<double>>& roots) {
  if (coeffs.empty() || coeffs.back() != 1.0)
    throw InvalidArgument("monic_root_certificate: monic coefficient vector required");
  const int n = static_cast<int>(coeffs.size()) - 1;
  const double eps = std::numeric_limits<double>::epsilon();
  double worst = 0.0;
  for (const auto& z : roots) {
    std::complex<double> p(coeffs[n], 0.0), dp(0.0, 0.0);
    double mag = std::abs(coeffs[n]);  // running bound sum |c_i| |z|^i
    for (int i = n - 1; i >= 0; --i) {
      dp = dp * z + p;
      p = p * z + coeffs[i];
      mag = mag * std::abs(z) + std::abs(coeffs[i]);
    }
    // Near a multiple root the Horner value of p is pure cancellation noise,
    // so it cannot certify anything below the evaluation error floor.
    const double noise = 2.0 * (n + 1) * eps * mag;
    const double denom = std::max(std::abs(dp), 1e-30);
    worst = std::max(worst, (std::abs(p) + noise) / denom / std::max(1.0, std::abs(z)));
  }
  return worst;
}

namespace {

// --- Exact integer polynomial helpers (ascending coefficients, zero = {0}).
// Used to strip repeated factors from integer characteristic polynomials so
// the root finder only ever sees simple roots. Any overflow aborts the exact
// path via IntOverflow and the caller falls back to floating point.

using IPoly = std::vector<__int128>;

int ip_degree(const IPoly& p) { return static_cast<int>(p.size()) - 1; }

bool ip_zero(const IPoly& p) { return p.size() == 1 && p[0] == 0; }

void ip_trim(IPoly& p) {
  while (p.size() > 1 && p.back() == 0) p.pop_back();
}

IPoly ip_derivative(const IPoly& p) {
  if (p.size() <= 1) return IPoly{0};
  IPoly d(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i)
    d[i - 1] = mul_ck(p[i], static_cast<__int128>(i));
  ip_trim(d);
  return d;
}

__int128 ip_gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// Divides out the coefficient gcd and normalizes the leading sign positive.
IPoly ip_primitive(IPoly p) {
  ip_trim(p);
  if (ip_zero(p)) return p;
  __int128 g = 0;
  for (const auto& c : p) g = ip_gcd128(g, c);
  if (p.back() < 0) g = -g;
  for (auto& c : p) c /= g;
  return p;
}

// Primitive pseudo-remainder of p modulo q (deg q >= 0, q nonzero). The
// content is stripped after every elimination step to tame growth.
IPoly ip_prem_primitive(IPoly p, const IPoly& q) {
  const int dq = ip_degree(q);
  const __int128 lq = q.back();
  ip_trim(p);
  while (!ip_zero(p) && ip_degree(p) >= dq) {
    const int dp = ip_degree(p);
    const __int128 lp = p.back();
    IPoly np(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) np[i] = mul_ck(p[i], lq);
    for (int i = 0; i <= dq; ++i)
      np[i + dp - dq] = add_ck(np[i + dp - dq], -mul_ck(q[i], lp));
    np.pop_back();  // the leading coefficient cancels exactly
    if (np.empty()) np.push_back(0);
    p = ip_primitive(std::move(np));
  }
  return p;
}

IPoly ip_gcd(IPoly a, IPoly b) {
  a = ip_primitive(std::move(a));
  b = ip_primitive(std::move(b));
  if (ip_zero(a)) return b;
  if (ip_zero(b)) return a;
  if (ip_degree(a) < ip_degree(b)) std::swap(a, b);
  while (!ip_zero(b)) {
    IPoly r = ip_prem_primitive(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

// Exact division p / d for a known divisor (Gauss: a primitive divisor of a
// primitive polynomial divides it over the integers). Inexactness signals a
// broken precondition and aborts the exact path.
IPoly ip_divide_exact(const IPoly& p, const IPoly& d) {
  const int dd = ip_degree(d);
  const int dp = ip_degree(p);
  if (dp < dd) throw IntOverflow{};
  IPoly rem = p;
  IPoly out(dp - dd + 1, 0);
  for (int k = dp - dd; k >= 0; --k) {
    const __int128 lead = rem[k + dd];
    if (lead % d.back() != 0) throw IntOverflow{};
    const __int128 c = lead / d.back();
    out[k] = c;
    for (int i = 0; i <= dd; ++i)
      rem[k + i] = add_ck(rem[k + i], -mul_ck(c, d[i]));
  }
  for (const auto& c : rem)
    if (c != 0) throw IntOverflow{};
  return out;
}

// Gelfand limit rho = lim ||A^m||^(1/m) along m = 2^k, with Frobenius
// renormalization each squaring. Mathematically this converges for every
// matrix, but in floating point the iterate of a defective dominant block
// degenerates into cancellation noise once the subdominant component drops
// below roundoff, which caps the attainable accuracy near 1e-5. It therefore
// serves as the best-effort bound carried by ConvergenceError, never as a
// certified result.
double gelfand_radius(const Mat& a) {
  const double n0 = a.norm();
  if (n0 == 0.0) return 0.0;
  // Invariant: A^(2^k) = cur * exp(t), with ||cur|| = 1 and t in log space.
  Mat cur = a / n0;
  double t = std::log(n0);
  double weight = 1.0;  // 2^k
  for (int k = 0; k < 60; ++k) {
    Mat sq = cur * cur;
    const double nk = sq.norm();
    if (nk == 0.0) return 0.0;  // nilpotent: the true radius is zero
    if (!std::isfinite(nk)) break;
    cur = std::move(sq);
    cur /= nk;
    t = 2.0 * t + std::log(nk);
    weight *= 2.0;
  }
  return std::exp(t / weight);
}

}  // namespace

double spectral_radius(const Mat& a) {
  require_square(a, "spectral_radius");
  const int n = static_cast<int>(a.rows());
  if (n == 0) throw InvalidArgument("spectral_radius: empty matrix");
  if (n == 1) return std::abs(a(0, 0));
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;

  // Triangular matrices expose their spectrum on the diagonal; read it off
  // exactly instead of iterating (this also settles nilpotent inputs).
  for (int lower = 0; lower < 2; ++lower) {
    bool triangular = true;
    for (int i = 0; i < n && triangular; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double v = lower ? a(i, j) : a(j, i);
        if (v != 0.0) {
          triangular = false;
          break;
        }
      }
    if (triangular) return a.diagonal().cwiseAbs().maxCoeff();
  }

  const Mat b = a / scale;

  // Stage 1..k: block iteration with growing block size, strictly smaller
  // than the ambient dimension (a full basis is trivially invariant and
  // certifies nothing). A dominant simple eigenvalue converges at p=1; a
  // complex pair needs p=2; equal-modulus clusters up to 8 are captured by
  // the larger blocks. The residual certifies near-invariance of the block;
  // the radius of the projected block is extracted by root finding and only
  // trusted when every root carries a tight Newton certificate, which a
  // defective (Jordan) block never grants.
  double best_est = 0.0;
  double best_resid = std::numeric_limits<double>::infinity();
  constexpr int kMaxIter = 3000;
  for (int p : {1, 2, 4, 8}) {
    if (p >= n) break;
    Rng rng(0x7d5a5a17u + 64u * static_cast<unsigned>(p));
    Mat v;
    try {
      v = qr(rng.gaussian_matrix(n, p)).Q;
    } catch (const DegeneracyError&) {
      continue;
    }
    double prev = -1.0;
    int stable = 0;
    for (int it = 0; it < kMaxIter; ++it) {
      Mat z = b * v;
      QRResult f;
      try {
        f = qr(z);
      } catch (const DegeneracyError&) {
        break;  // image collapsed: this block size cannot track the cluster
      }
      v = std::move(f.Q);
      const Mat bv = b * v;
      const Mat proj = v.transpose() * bv;
      double est;
      if (p == 1) {
        est = std::abs(proj(0, 0));
      } else {
        const auto pc = char_poly(proj);
        const auto roots = monic_roots(pc);
        if (monic_root_certificate(pc, roots) > 1e-10)
          break;  // defective projected block: this stage cannot certify
        est = 0.0;
        for (const auto& r : roots) est = std::max(est, std::abs(r));
      }
      const double resid =
          (bv - v * proj).norm() / std::max(proj.norm(), 1e-300);
      if (resid < best_resid) {
        best_resid = resid;
        best_est = est;
      }
      if (resid <= 3e-11 && std::abs(est - prev) <= 1e-12 * std::max(est, 1e-300)) {
        if (++stable >= 3) return est * scale;
      } else {
        stable = 0;
      }
      prev = est;
    }
  }

  // Dense characteristic polynomial fallback for complex dominant pairs and
  // other stubborn but well-separated spectra. Only trusted on small blocks
  // where double-precision Faddeev-LeVerrier is reliable, and only when the
  // root set passes both the trace cross-check and the Newton certificates;
  // clustered (multiple) roots fail the certificate and fall through.
  if (n <= 12) {
    const auto coeffs = char_poly(b);
    const auto roots = monic_roots(coeffs);
    std::complex<double> sum(0.0, 0.0);
    double radius = 0.0;
    for (const auto& r : roots) {
      sum += r;
      radius = std::max(radius, std::abs(r));
    }
    const double tr = b.trace();
    const bool trace_ok =
        std::abs(sum - std::complex<double>(tr, 0.0)) <= 1e-7 * std::max(1.0, std::abs(tr));
    if (trace_ok && monic_root_certificate(coeffs, roots) <= 1e-10)
      return radius * scale;
  }

  // Nothing certified: report the norm-limit bound, which is accurate to
  // roughly 1e-5 even for defective spectra, as the best estimate. Integer
  // matrices never land here; the exact overload strips repeated factors
  // before root finding.
  const double g = gelfand_radius(b);
  throw ConvergenceError(
      "spectral_radius: defective or tightly clustered dominant spectrum; no "
      "stage certified, norm-limit estimate carried as best",
      (std::isfinite(g) ? g : best_est) * scale);
}

double spectral_radius(const IMat& a) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw InvalidArgument("spectral_radius: square matrix required");
  const int n = static_cast<int>(a.rows());
  if (n == 1) return std::abs(static_cast<double>(a(0, 0)));

  // Exact path: integer characteristic polynomial, repeated factors stripped
  // by an exact gcd so every root the finder sees is simple. This keeps full
  // accuracy for parabolic (defective) spectra where floating point methods
  // saturate. Overflow at any step falls back to the floating point route.
  try {
    const auto ic = integer_char_poly(a);
    IPoly p(ic.begin(), ic.end());
    const IPoly g = ip_gcd(p, ip_derivative(p));
    const IPoly sf = (ip_degree(g) == 0) ? p : ip_divide_exact(p, g);
    const double lead = static_cast<double>(sf.back());
    std::vector<double> coeffs(sf.size());
    for (std::size_t i = 0; i < sf.size(); ++i)
      coeffs[i] = static_cast<double>(sf[i]) / lead;
    coeffs.back() = 1.0;
    const auto roots = monic_roots(coeffs);
    if (monic_root_certificate(coeffs, roots) <= 1e-10) {
      double radius = 0.0;
      for (const auto& r : roots) radius = std::max(radius, std::abs(r));
      return radius;
    }
  } catch (const IntOverflow&) {
    // fall through
  } catch (const InvalidArgument&) {
    // char poly overflow: fall through
  }
  const Mat ad = a.cast<double>();
  return spectral_radius(ad);
}

}  // namespace torusdyn
