// Generalized Okubo systems (z - T) dY/dz = -B_inf Y, their extended
// Pfaffian frames over the deformation space of canonical coordinates,
// integrability residual reports, deformation transport, the Euler twist of
// the exponent matrix, the confluence frame construction, and reduction of
// an N-dimensional system to an m-dimensional rational connection.
#pragma once

#include "matkit.hpp"

#include <string>
#include <utility>
#include <vector>

namespace okb {

// Errors --------------------------------------------------------------------
struct NotRegular : std::runtime_error {
    explicit NotRegular(const std::string& m) : std::runtime_error(m) {}
};
struct Degenerate : std::runtime_error {
    explicit Degenerate(const std::string& m) : std::runtime_error(m) {}
};
struct IndexOutOfRange : std::runtime_error {
    explicit IndexOutOfRange(const std::string& m) : std::runtime_error(m) {}
};
struct PoleHit : std::runtime_error {
    explicit PoleHit(const std::string& m) : std::runtime_error(m) {}
};
struct StepFailure : std::runtime_error {
    explicit StepFailure(const std::string& m) : std::runtime_error(m) {}
};
struct Resonant : std::runtime_error {
    explicit Resonant(const std::string& m) : std::runtime_error(m) {}
};
struct ZeroSubdiagonal : std::runtime_error {
    explicit ZeroSubdiagonal(const std::string& m) : std::runtime_error(m) {}
};
struct BadSpectrum : std::runtime_error {
    explicit BadSpectrum(const std::string& m) : std::runtime_error(m) {}
};

// ---------------------------------------------------------------------------
// A generalized Okubo system (z I - T) dY/dz = -B_inf Y with diagonal
// exponent matrix B_inf = diag(lambda).  The struct itself is a plain value;
// operations that need the non-resonance condition (pairwise differences of
// lambda entries away from nonzero integers) check it on entry.
struct GOkuboSystem {
    CMatrix T;
    CVector lambda;

    int size() const { return static_cast<int>(T.rows()); }
    CMatrix binfinity() const { return CMatrix(lambda.asDiagonal()); }
};

// True when all pairwise differences of entries stay at least `tol` away
// from every nonzero integer.
bool nonResonant(const CVector& lambda, double tol = 1e-8);

// ---------------------------------------------------------------------------
// Extended frame: P puts T into the canonical block-Toeplitz form
// Z_1 + ... + Z_n, with Z_k = sum_l z_{k,l} Lambda_k^l determined by the
// canonical coordinates z (stored flat in (k,l) row-major order).
struct ExtOkuboFrame {
    GOkuboSystem sys;
    CMatrix P;
    std::vector<int> blocks;
    std::vector<Cplx> z;

    int blockCount() const { return static_cast<int>(blocks.size()); }
    int coordOffset(int k) const;      // index of z_{k,0} in the flat list
    Cplx coord(int k, int l) const;    // z_{k,l} with range checking
    CMatrix assembleZ() const;         // Z_1 + ... + Z_n from zCoords
    // Product over block pairs of the squared leading-coordinate gaps
    // (vanishes exactly at the coalescence locus).
    Cplx discriminant() const;
};

// Upper shift matrix Lambda of the given size (ones on the superdiagonal).
CMatrix shiftMatrix(int m);

// Block-diagonal assembly of sum_l z_{k,l} Lambda_k^l from flat coordinates.
CMatrix assembleBlockToeplitz(const std::vector<int>& blocks,
                              const std::vector<Cplx>& z);

// Basis direction E_{k,l}: block-diagonal with Lambda_k^l in block k.
CMatrix directionMatrix(const std::vector<int>& blocks, int k, int l);

// Validate the frame invariants (Z reconstruction, finite entries,
// coordinate gap) and return the frame; used by all frame producers.
ExtOkuboFrame makeFrame(GOkuboSystem sys, CMatrix P, std::vector<int> blocks,
                        std::vector<Cplx> z, const Tolerances& tol);

// ---------------------------------------------------------------------------
// Value of the one-forms on a canonical coordinate direction: omegaTilde is
// the matrix of the deformation form on d/dz_{k,l}, and dT the matching
// value of dT, related entrywise by dT_ij = -(1 + lambda_j - lambda_i) *
// omegaTilde_ij.
struct DirectionData {
    CMatrix omegaTilde;
    CMatrix dT;
};

// ---------------------------------------------------------------------------
// Residual report rows: `direction` labels a canonical direction "(k,l)", a
// direction pair "(k,l)x(k',l')", or the path tangent "path".  `condition`
// is the condition number of the frame at the sample.
struct ResidualRow {
    int sample = 0;
    std::string direction;
    double condition = 0.0;
    double residual = 0.0;
};

struct ResidualReport {
    std::vector<ResidualRow> rows;
    double maxCommute = 0.0;    // ||[T, omegaTilde_dir]||
    double maxWedge = 0.0;      // pairwise direction commutators
    double maxCurl = 0.0;       // finite-difference closedness along the path
    double maxStructure = 0.0;  // ||dT + omegaTilde + [omegaTilde, B_inf]||
    double maxOverall() const;
};

// ---------------------------------------------------------------------------
// Rational connection dW/dz = (sum_k sum_l A_k^{(l)} / (z - a_k)^{l+1}) W
// with a regular singular point at infinity whose residue -sum_k A_k^{(0)}
// is required (by the realization machinery) to be diagonal.
struct RationalPole {
    Cplx a;
    int r = 0;                  // highest extra order: coefficients l = 0..r
    std::vector<CMatrix> A;     // A[l] multiplies (z - a)^{-(l+1)}
};

struct RationalConnection {
    int m = 0;
    std::vector<RationalPole> poles;

    CMatrix evaluate(Cplx zp) const;  // sum of the partial fractions at zp
    CMatrix rtilde() const;           // -sum_k A_k^{(0)}
};

// ---------------------------------------------------------------------------
// Operations.

// Jordan frame of a regular T with canonical coordinates read off the first
// row of each block.  Throws NotRegular when an eigenvalue occupies two
// blocks, Degenerate when the coordinate discriminant collapses.
ExtOkuboFrame canonical_frame(const GOkuboSystem& sys, const Tolerances& tol = {});

// One-form values on the canonical direction (k,l) of the given frame.
DirectionData direction_data(const ExtOkuboFrame& frame, int k, int l);

// Residuals of the integrability structure along a sampled deformation
// path: algebraic commutator and wedge families at every sample, and
// central finite-difference curl/structure families at interior samples.
ResidualReport integrability_residuals(const std::vector<ExtOkuboFrame>& path,
                                       const Tolerances& tol = {});

// Transport the frame along the straight coordinate segment to targetZ by
// integrating dP = X P, [X, T] = [-omegaTilde(v), B_inf] (minimum-norm X).
// Returns the frames at every accepted integrator step, endpoint last.
std::vector<ExtOkuboFrame> extend_deformation(const ExtOkuboFrame& start,
                                              const std::vector<Cplx>& targetZ,
                                              const Tolerances& tol = {});

// Euler twist: shift every exponent by lam (T untouched).  Throws Resonant
// when the shifted exponents violate the non-resonance condition.
GOkuboSystem euler_shift(const GOkuboSystem& sys, Cplx lam);

// Confluence frame for one block: P_k = sum_l a_{k,l} Lambda^l with the
// recursive coefficients a_{k,0} = 1, a_{k,l} = (sum_{j<l} a_{k,j}
// z_{k,l-j}) / (l eps z_{k,1}), and the split diagonal
// Z_k(eps) = diag(z_{k,0} + j z_{k,1} eps).  P_k Z_k(eps) P_k^{-1} -> Z_k
// at rate O(eps).
std::pair<CMatrix, CMatrix> confluence_frame(const std::vector<Cplx>& zBlock,
                                             Cplx eps);

// Reduce an N-dimensional system whose last N-m exponents vanish to the
// m-dimensional rational connection -B (z - S)^{-1} C expanded in closed
// form at the poles (the canonical coordinates of T).
RationalConnection rank_reduce(const GOkuboSystem& sys, const Tolerances& tol = {});

}  // namespace okb
