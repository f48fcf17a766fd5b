#pragma once

// Induced action on degree-u real cohomology of the d-torus for integer toral
// maps, and its log spectral radius. On T^d, H^u is the u-th exterior power
// of H^1 and the action of x -> Ax is by u x u minors of A^T; the minor
// matrix is computed in exact integer arithmetic.

#include <cstdint>
#include <vector>

#include "torusdyn/common.hpp"

namespace torusdyn {

struct CohomologyAction {
  IMat base;      // the defining integer matrix A
  int degree;     // u
  IMat action;    // exact integer minor matrix of A^T, lexicographic indexing
  double log_spec;
};

// Exact action matrix plus its log spectral radius. Requires |det A| = 1 and
// 1 <= u <= d. The transpose convention is fixed here once; it does not
// affect spectra.
CohomologyAction induced_action(const IMat& a, int u);

// Log eigenvalue moduli of A, descending, recovered from the exterior power
// ladder: log rho(Lambda^k A) is the sum of the k largest log moduli, so
// consecutive differences give the moduli themselves. Also counts the
// expanding / center / contracting directions with a 1e-9 band around
// modulus one.
struct ModuliLadder {
  std::vector<double> log_moduli;  // size d, descending
  int unstable = 0;                // moduli > 1 + 1e-9
  int center = 0;                  // moduli within 1e-9 of 1
  int stable = 0;                  // the rest
};
ModuliLadder eigenvalue_moduli(const IMat& a);

// Number of eigenvalue moduli above 1 + 1e-9.
int unstable_dimension(const IMat& a);

// log spec of the degree-u action. Cross-checked internally against the sum
// of the u largest log moduli obtained by root-finding on the exact integer
// characteristic polynomial; disagreement beyond 1e-8 throws.
double theorem2_rhs(const IMat& a, int u);

// Certificate margin for the existence of a closed non-degenerate u-form on
// the unstable bundle: the gap (u-th minus (u+1)-th log modulus). Positive
// means the top u-fold eigenvalue product strictly dominates every other,
// which is exactly the non-degeneracy condition for the constant dual form.
// Returns +infinity for u = d.
double u_form_gap(const IMat& a, int u);

}  // namespace torusdyn
