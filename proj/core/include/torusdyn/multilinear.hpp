#pragma once

// Small dense linear algebra used by every estimator: QR with a fixed sign
// convention, exterior powers as minor matrices, restricted norms on
// subspaces, Grassmannian pushforward, and a spectral radius routine.
// Everything is deterministic: same inputs, same bits.

#include <cstdint>
#include <vector>

#include "torusdyn/common.hpp"

namespace torusdyn {

// Orthonormal k-frame in R^d. Frames, not projectors: restricted norms,
// exterior norms, and principal angles all read directly off the frame, and
// QR renormalization keeps cocycle iterations conditioned.
struct Subspace {
  Mat frame;  // d x k, orthonormal columns

  int ambient_dimension() const { return static_cast<int>(frame.rows()); }
  int rank() const { return static_cast<int>(frame.cols()); }

  // Orthonormalizes arbitrary full-rank columns into a frame.
  static Subspace from_columns(const Mat& columns);
  static Subspace span(const Vec& v);
  // Coordinate subspace spanned by the given axes.
  static Subspace axes(int d, const std::vector<int>& which);

  bool is_orthonormal(double tol = 1e-10) const;
};

struct QRResult {
  Mat Q;  // d x k, orthonormal columns
  Mat R;  // k x k, upper triangular, strictly positive diagonal
};

// Thin QR with positive diagonal. Throws DegeneracyError when the columns are
// numerically rank deficient (diagonal ratio below 1e-13).
QRResult qr(const Mat& m);

// Lexicographically ordered k-element subsets of {0,...,d-1}; the row/column
// index convention for exterior powers.
std::vector<std::vector<int>> k_subsets(int d, int k);

// k-th exterior power: entry (S,T) is the minor of A with rows S, columns T.
// Functorial: exterior_power(A*B,k) = exterior_power(A,k)*exterior_power(B,k).
Mat exterior_power(const Mat& a, int k);
// Exact integer version (fraction-free elimination), for cohomology actions.
IMat exterior_power(const IMat& a, int k);

// Largest singular value of A restricted to F: ||A|_F||.
double restricted_expansion(const Mat& a, const Subspace& f);
// Smallest singular value of A restricted to F (the co-norm m(A|_F)).
double co_expansion(const Mat& a, const Subspace& f);

// k-volume expansion factor of A on F: product of singular values of A*Q_F,
// equivalently sqrt(det Gram) of the image columns. The log form accumulates
// exactly along cocycles and never overflows.
double volume_expansion(const Mat& a, const Subspace& f);
double log_volume_expansion(const Mat& a, const Subspace& f);

// Image subspace A(F), renormalized.
Subspace push_subspace(const Mat& a, const Subspace& f);

// One cocycle step: image subspace plus the log volume expansion factor,
// sharing a single QR so the two are exactly consistent.
struct PushResult {
  Subspace space;
  double log_volume;
};
PushResult push_with_volume(const Mat& a, const Subspace& f);

// Orthogonal complement of F in its ambient space.
Subspace orthogonal_complement(const Subspace& f);

// Largest principal angle between equal-rank subspaces, in [0, pi/2].
double subspace_angle(const Subspace& f, const Subspace& g);
// Smallest angle between any pair of unit vectors from F and G (ranks may
// differ); the quantity a transversality cone width is measured against.
double minimal_angle(const Subspace& f, const Subspace& g);

// Largest eigenvalue modulus. Power iteration with Rayleigh tracking,
// escalating to block (subspace) iteration for equal-modulus clusters, with
// a dense characteristic polynomial fallback for small stubborn blocks.
// Every returned value is certified (residual plus root certificates) to
// relative accuracy 1e-9 for sizes up to 70. If no stage certifies (e.g. a
// defective dominant eigenvalue of a general real matrix), throws
// ConvergenceError carrying the norm-limit bound lim ||A^m||^(1/m), which is
// accurate to roughly 1e-5.
double spectral_radius(const Mat& a);

// Exact-polynomial overload for integer matrices: repeated characteristic
// factors are stripped by an exact integer gcd before root finding, so
// defective spectra (parabolic blocks) keep full accuracy. Falls back to the
// floating point route if the exact arithmetic overflows.
double spectral_radius(const IMat& a);

// Exact integer determinant (Bareiss fraction-free elimination).
std::int64_t integer_determinant(const IMat& a);
// Exact monic characteristic polynomial of an integer matrix:
// coefficient i multiplies x^i, the leading (x^d) coefficient is 1.
std::vector<std::int64_t> integer_char_poly(const IMat& a);
// Exact inverse for unimodular matrices (|det| = 1); throws otherwise.
IMat integer_inverse(const IMat& a);

// Roots of a monic real polynomial c[0] + c[1] x + ... + c[n-1] x^(n-1) + x^n
// (Durand-Kerner). Exposed for oracle use in spectra cross-checks.
std::vector<std::complex<double>> monic_roots(const std::vector<double>& coeffs);

// Accuracy certificate for monic_roots output: the worst Newton correction
// |p(z)/p'(z)| / max(1,|z|) over the computed roots. Around 1e-15 for
// converged simple roots; a j-fold root cluster inflates it to roughly the
// cluster radius (~eps^(1/j)), signalling that individual moduli read off the
// roots carry that much error.
double monic_root_certificate(const std::vector<double>& coeffs,
                              const std::vector<std::complex<double>>& roots);

}  // namespace torusdyn
