#include "torusdyn/cohomology.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "torusdyn/multilinear.hpp"

namespace torusdyn {

namespace {

void require_toral(const IMat& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw InvalidArgument(std::string(who) + ": square matrix required");
  const std::int64_t det = integer_determinant(a);
  if (det != 1 && det != -1)
    throw InvalidArgument(std::string(who) + ": |det| = 1 required, got det = " +
                          std::to_string(det));
}

}  // namespace

CohomologyAction induced_action(const IMat& a, int u) {
  require_toral(a, "induced_action");
  const int d = static_cast<int>(a.rows());
  if (u < 1 || u > d)
    throw InvalidArgument("induced_action: need 1 <= u <= d");
  const IMat at = a.transpose();
  IMat action = exterior_power(at, u);
  const double rho = spectral_radius(action);
  return CohomologyAction{a, u, std::move(action), std::log(rho)};
}

ModuliLadder eigenvalue_moduli(const IMat& a) {
  require_toral(a, "eigenvalue_moduli");
  const int d = static_cast<int>(a.rows());
  ModuliLadder out;
  out.log_moduli.resize(d);
  double prev = 0.0;
  for (int k = 1; k <= d; ++k) {
    const double s = std::log(spectral_radius(exterior_power(a, k)));
    out.log_moduli[k - 1] = s - prev;
    prev = s;
  }
  constexpr double kBand = 1e-9;
  for (double m : out.log_moduli) {
    if (m > kBand)
      ++out.unstable;
    else if (m >= -kBand)
      ++out.center;
    else
      ++out.stable;
  }
  return out;
}

int unstable_dimension(const IMat& a) { return eigenvalue_moduli(a).unstable; }

double theorem2_rhs(const IMat& a, int u) {
  const CohomologyAction act = induced_action(a, u);
  const int d = static_cast<int>(a.rows());

  // Independent path: sum of the u largest log moduli from the roots of the
  // exact characteristic polynomial.
  const auto ic = integer_char_poly(a);
  std::vector<double> coeffs(ic.size());
  for (std::size_t i = 0; i < ic.size(); ++i)
    coeffs[i] = static_cast<double>(ic[i]);
  const auto roots = monic_roots(coeffs);
  std::vector<double> logs;
  for (const auto& root : roots) logs.push_back(std::log(std::abs(root)));
  std::sort(logs.begin(), logs.end(), std::greater<>());
  double check = 0.0;
  for (int i = 0; i < u; ++i) check += logs[i];

  // Multiple eigenvalues (parabolic blocks) limit the root finder to roughly
  // the cluster radius per root; widen the comparison band accordingly so the
  // check stays honest without false alarms. Genuine indexing or transpose
  // bugs produce order-one discrepancies and are still caught.
  const double cert = monic_root_certificate(coeffs, roots);
  const double tol =
      1e-8 * std::max(1.0, std::abs(check)) + 10.0 * d * d * cert;
  if (std::abs(act.log_spec - check) > tol)
    throw ConvergenceError(
        "theorem2_rhs: minor-matrix spectral radius disagrees with the "
        "characteristic polynomial root product",
        act.log_spec);
  return act.log_spec;
}

double u_form_gap(const IMat& a, int u) {
  require_toral(a, "u_form_gap");
  const int d = static_cast<int>(a.rows());
  if (u < 1 || u > d) throw InvalidArgument("u_form_gap: need 1 <= u <= d");
  if (u == d) return std::numeric_limits<double>::infinity();
  const ModuliLadder ladder = eigenvalue_moduli(a);
  return ladder.log_moduli[u - 1] - ladder.log_moduli[u];
}

}  // namespace torusdyn
