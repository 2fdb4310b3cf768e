// Flat coordinates and potential vector fields extracted from extended
// Okubo frames.  A frame whose bottom P-row meets every block's leading
// column carries a distinguished coordinate system t_1, ..., t_N (read off
// the last row of the normalized structure matrix), pointwise-commuting
// Higgs matrices with a unit element, and a vector potential g whose second
// derivatives reproduce the Higgs entries.  This module computes those
// data, reports the residuals of the defining identities (associativity,
// unit, symmetry, homogeneity), classifies structure matrices by Jordan
// shape, checks the leading-column criterion, runs the whole construction
// from an initial matrix pair, and validates sampled potentials by finite
// differences.
#pragma once

#include "okubo.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace okb {

// Errors ---------------------------------------------------------------------
// The linearization from canonical coordinates to flat candidates is too
// ill-conditioned to invert (condition number above 1/tol.cluster).
struct JacobianDegenerate : std::runtime_error {
    explicit JacobianDegenerate(const std::string& m) : std::runtime_error(m) {}
};

// ---------------------------------------------------------------------------
// Coordinate weights w_j = lambda_j - lambda_N + 1.  The last weight is 1
// identically, and pairwise differences repeat those of lambda, so the
// spacing condition (differences away from nonzero integers) transfers
// verbatim from the exponent vector.
struct Weights {
    CVector w;

    int size() const { return static_cast<int>(w.size()); }
};

// Build weights from an exponent vector; throws Resonant when a pairwise
// difference sits within `tol` of a nonzero integer (exact coincidence of
// two entries is allowed).
Weights weightsFromExponents(const CVector& lambda, double tol = 1e-8);

// ---------------------------------------------------------------------------
// Flat data at one point of a deformation: coordinates t, the normalized
// structure matrix C with entries C_ij = -T_ij / (1 + w_j - w_i), the
// Higgs matrices Phi_1, ..., Phi_N expressed in the flat directions
// (Phi_N is the identity), and the potential values g_1, ..., g_N with
// g_j = (sum_i w_i t_i C_ij) / (1 + w_j).  The structure matrix T is
// retained so residual reports can cross-check C against its source.
struct SaitoFrame {
    Weights weights;
    CVector t;                  // flat coordinates, t_j = C(N-1, j)
    CMatrix Cmat;               // normalized structure matrix
    CMatrix Tmat;               // structure matrix the frame came from
    std::vector<CMatrix> higgs; // flat-direction multiplication matrices
    CVector g;                  // potential vector field values
    double jacobianCond = 0.0;  // condition of the coordinate Jacobian
};

// Residuals of the defining identities at a single frame.  All are absolute
// Frobenius/entry magnitudes scaled against max(1, data norm).
struct WdvvReport {
    double maxCommutator = 0.0;   // pairwise ||[Phi_k, Phi_l]||
    double unitDefect = 0.0;      // ||Phi_N - I||
    double maxSymmetry = 0.0;     // max |(Phi_m)_ij - (Phi_i)_mj|
    double maxHomogeneity = 0.0;  // max |T_ij + (1 + w_j - w_i) C_ij|
    double maxOverall() const;
};

// Jordan classification of a structure matrix.  `regular` means every
// distinct eigenvalue occupies a single block (minimal polynomial equals
// characteristic polynomial); `ambiguous` is set instead of guessing when
// eigenvalue clustering cannot separate groups at the requested tolerance,
// in which case `spec` and the flags derived from it are not populated.
struct RegularityReport {
    JordanSpec spec;
    std::string partition;  // block-size signature, e.g. "[3,1]"
    int distinct = 0;       // distinct eigenvalues at tol.cluster
    bool regular = false;
    bool ambiguous = false;
    std::string note;       // diagnostic detail for the ambiguous case
};

// Values of the bottom P-row at each block's leading column, and whether
// they all clear the tolerance.  Nonvanishing of exactly these entries is
// equivalent to invertibility of the coordinate Jacobian.
struct PrimitiveCheck {
    bool ok = false;
    std::vector<Cplx> values;  // one entry per block
};

// Residuals of a sampled potential checked by central differences.
struct PotentialReport {
    double maxAssociativity = 0.0;  // pairwise Higgs commutators
    double unitDefect = 0.0;        // ||Phi_N - I||
    double maxSymmetry = 0.0;       // max |(Phi_m)_ij - (Phi_i)_mj|
    double maxHomogeneity = 0.0;    // Euler scaling of g against weights
    double step = 0.0;              // base stencil step actually used
    double maxOverall() const;
};

// A sampled potential: maps a flat coordinate vector to the vector of
// potential values at that point.
using PotentialSampler = std::function<CVector(const CVector&)>;

// Operations -----------------------------------------------------------------

// Extract the flat data carried by one frame.  The coordinate Jacobian has
// rows indexed by the canonical directions (k,l) in flat order and columns
// by j, with entry the bottom row of the direction's one-form value; its
// inversion converts the canonical-direction one-forms into the flat-
// direction Higgs matrices.  Throws JacobianDegenerate when the condition
// number exceeds 1/tol.cluster, and Resonant when a normalizing denominator
// 1 + w_j - w_i falls below `tol.cluster` in magnitude.
SaitoFrame flat_frame(const ExtOkuboFrame& frame, const Tolerances& tol = {});

// Residuals of the multiplication identities at one frame.
WdvvReport wdvv_residuals(const SaitoFrame& sf);

// Jordan classification of the system's structure matrix.  Never throws on
// clustering trouble: ambiguity is reported in the result instead.
RegularityReport regularity_class(const GOkuboSystem& sys,
                                  const Tolerances& tol = {});
RegularityReport regularity_class(const ExtOkuboFrame& frame,
                                  const Tolerances& tol = {});

// Read the designated row of the frame matrix P at each block's leading
// column and compare against tol.cluster * max(1, ||P||).  `row` is
// zero-based; the construction above always uses the last row.
PrimitiveCheck primitive_section_check(const ExtOkuboFrame& frame, int row,
                                       const Tolerances& tol = {});

// Run the whole construction from an initial pair: S is the prospective
// structure matrix in an arbitrary gauge, R a diagonalizable matrix whose
// eigenvalues obey the spacing condition, and v an eigenvector of R singled
// out to become the last basis direction.  A gauge G with last column v
// diagonalizes R; the system (G^{-1} S G, spec(R) with v's eigenvalue last)
// is framed, deformed along the straight coordinate segment to targetZ,
// and the flat data is extracted at every accepted step.  Different
// eigenvector choices generally produce genuinely different flat data.
// Propagates NotRegular, Resonant, JacobianDegenerate, and PoleHit from the
// stages involved.
std::vector<SaitoFrame> saito_from_initial(const CMatrix& S, const CMatrix& R,
                                           const CVector& v,
                                           const std::vector<Cplx>& targetZ,
                                           const Tolerances& tol = {});

// Check a sampled potential at one base point: first derivatives give the
// normalized structure matrix, second derivatives the Higgs matrices, both
// by second-order central differences with per-coordinate step
// 1e-4 * max(1, |t_i|).  Every mixed stencil is evaluated independently per
// ordered direction pair so inconsistent samplers surface in the symmetry
// residual.  The homogeneity residual compares the Euler combination
// sum_k w_k t_k dg_j/dt_k against (1 + w_j) g_j.
PotentialReport verify_potential(const PotentialSampler& gFunc,
                                 const CVector& tBase, const Weights& weights,
                                 const Tolerances& tol = {});

}  // namespace okb
