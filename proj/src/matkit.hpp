// Dense complex matrix kit: Jordan forms with verified clustering and
// minimum-norm commutator (gauge) solves.  All downstream modules funnel
// their linear algebra through the types and routines collected here.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace okb {

using Cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Shared tolerance bundle.  All thresholds are interpreted relative to the
// scale of the data they gate: a residual test on a matrix M of norm ||M||
// compares against `residual * max(1, ||M||)`.
struct Tolerances {
    double cluster = 1e-8;   // eigenvalue clustering / separation scale
    double residual = 1e-8;  // verification residuals (reconstruction, gauge)
    double fdStep = 1e-5;    // finite-difference step for derivative probes
};

// ---------------------------------------------------------------------------
// Jordan block inventory: (eigenvalue, size) pairs ordered by decreasing
// size, ties broken by (Re, Im) lexicographic order of the eigenvalue.
struct JordanBlock {
    Cplx eigenvalue;
    int size = 0;
};

struct JordanSpec {
    std::vector<JordanBlock> blocks;

    int dimension() const;
    // Same block sizes in order and eigenvalues matching within `tol`.
    bool sameShape(const JordanSpec& other, double tol) const;
    // Block sizes only, e.g. "[2,1,1]"; eigenvalues ignored.
    std::string sizeSignature() const;
    // Number of distinct eigenvalues at separation `tol`.
    int distinctEigenvalues(double tol) const;
};

// Assemble the block-diagonal Jordan matrix realizing `spec` (superdiagonal
// ones inside each block).
CMatrix jordanMatrix(const JordanSpec& spec);

struct JordanizeResult {
    CMatrix P;          // columns are Jordan chains; P^{-1} M P = J
    JordanSpec spec;
    double condition = 0.0;  // spectral condition number of P
    double residual = 0.0;   // || P J P^{-1} - M || / max(1, ||M||)
};

// Errors ---------------------------------------------------------------------
struct ClusterAmbiguity : std::runtime_error {
    explicit ClusterAmbiguity(const std::string& m) : std::runtime_error(m) {}
};
struct SingularFrame : std::runtime_error {
    explicit SingularFrame(const std::string& m) : std::runtime_error(m) {}
};
struct Inconsistent : std::runtime_error {
    explicit Inconsistent(const std::string& m) : std::runtime_error(m) {}
};

// ---------------------------------------------------------------------------
// Compute a Jordan decomposition M = P J P^{-1} with verified eigenvalue
// clustering: candidate cluster partitions are scanned from finest to
// coarsest (single-linkage merge order) and the first partition whose chain
// construction reproduces M within `tol.residual * max(1, ||M||)` is
// accepted.  Throws SingularFrame when no partition verifies and
// ClusterAmbiguity when the accepted clusters are separated by less than
// `tol.cluster * max(1, ||M||)`.
JordanizeResult jordanize(const CMatrix& M, const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Minimum-Frobenius-norm solution X of the commutator equation
//     X T - T X = R,
// computed through a complete orthogonal decomposition of the vectorized
// operator ad_T.  The returned X is orthogonal to ker(ad_T).  Throws
// Inconsistent when R is not in the range of ad_T within
// `tol.residual * max(1, ||R||)`.
CMatrix solve_sylvester_gauge(const CMatrix& T, const CMatrix& R,
                              const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Small helpers shared across modules.

inline CMatrix commutator(const CMatrix& A, const CMatrix& B) {
    return A * B - B * A;
}

// Relative residual scale: max(1, ||M||).
inline double normScale(double norm) { return norm > 1.0 ? norm : 1.0; }

// Spectral condition number via SVD.
double conditionNumber(const CMatrix& M);

// Orthonormal basis of the (numerical) kernel of M: right singular vectors
// whose singular values fall below `cutoff * sigma_max` (absolute floor
// `cutoff` when M vanishes).
CMatrix kernelBasis(const CMatrix& M, double cutoff);

// Throws std::invalid_argument when any entry is non-finite.
void requireFinite(const CMatrix& M, const std::string& where);

}  // namespace okb
