// Explicit machinery for the six Painleve equations: Hamiltonians with
// hand-differentiated gradients, Hamiltonian flows over complex time
// polylines, the 2x2 linear problems with their Moebius/twist preprocessing,
// builders for the associated Okubo data (direct frames for II/III/I,
// eigen-gauge 3x3 routes for IV/V, realization route for VI), deformation
// tangent fitting, and the coalescence classification driver.  The first
// equation enters solely as the regularity-failure witness.
#pragma once

#include "realize.hpp"

#include <array>
#include <cstdint>

namespace okb {

// Errors --------------------------------------------------------------------
struct DivisionByZeroTime : std::runtime_error {
    explicit DivisionByZeroTime(const std::string& m) : std::runtime_error(m) {}
};
struct NoNonzeroTwist : std::runtime_error {
    explicit NoNonzeroTwist(const std::string& m) : std::runtime_error(m) {}
};
struct DetNonzero : std::runtime_error {
    explicit DetNonzero(const std::string& m) : std::runtime_error(m) {}
};
struct ResonantSpectrum : std::runtime_error {
    explicit ResonantSpectrum(const std::string& m) : std::runtime_error(m) {}
};
struct NotDiagonalizable : std::runtime_error {
    explicit NotDiagonalizable(const std::string& m) : std::runtime_error(m) {}
};
struct MismatchedPattern : std::runtime_error {
    MismatchedPattern(const std::string& m, JordanSpec expectedSpec,
                      JordanSpec observedSpec)
        : std::runtime_error(m),
          expected(std::move(expectedSpec)),
          observed(std::move(observedSpec)) {}
    JordanSpec expected;
    JordanSpec observed;
};

// ---------------------------------------------------------------------------
enum class PKind { I, II, III, IV, V, VI };

std::string kindName(PKind kind);          // "I" .. "VI"
PKind kindFromName(const std::string& s);  // accepts "II", "ii", "pii", "p2", "2"

// Named parameters; which entries matter depends on the kind:
//   II: thetaInf2.  III: thetaInf1, thetaInf2.  IV: thetaInf1, thetaInf2
//   (the Hamiltonian also reads theta0).  V: all four, constrained to sum to
//   zero.  I and VI ignore the thetas (their twist data live elsewhere).
struct PainleveTheta {
    Cplx theta0{0.0, 0.0};
    Cplx theta1{0.0, 0.0};
    Cplx thetaInf1{0.0, 0.0};
    Cplx thetaInf2{0.0, 0.0};
};

struct PainleveState {
    PKind kind = PKind::II;
    PainleveTheta theta;
    Cplx u{1.0, 0.0};            // gauge scalar, never zero
    Cplx q{0.0, 0.0};
    Cplx p{0.0, 0.0};
    Cplx t{0.0, 0.0};
    Cplx t2{0.0, 0.0};           // auxiliary second time (VI, rank-4 routes)
    Cplx lambdaTwist{0.0, 0.0};  // twist exponent (I; VI computes its own)
};

// Validate and return the state: u nonzero, all entries finite, and for V
// the constraint theta0 + theta1 + thetaInf1 + thetaInf2 = 0 within
// 1e-12 * max(1, sum |theta|).
PainleveState makeState(PKind kind, const PainleveTheta& theta, Cplx u, Cplx q,
                        Cplx p, Cplx t, Cplx t2 = Cplx(0.0, 0.0),
                        Cplx lambdaTwist = Cplx(0.0, 0.0));

// ---------------------------------------------------------------------------
// Okubo data {S, G, B_inf}: S is the Jordan-form component, G the frame with
// T = G^{-1} S G, and lambda the diagonal of B_inf.
struct OkuboData {
    CMatrix S;
    CMatrix G;
    CVector lambda;

    GOkuboSystem system() const;  // {G^{-1} S G, lambda}
};

struct HamiltonianGradient {
    Cplx dHdq;
    Cplx dHdp;
    Cplx dHdt;
};

// Scalar Hamiltonian exactly as printed (III and V are stated as t*H; the
// returned value is H itself).  Kinds II, III, IV, V, I; `kind` must agree
// with state.kind.  Throws DivisionByZeroTime for III/V at t = 0.
Cplx hamiltonian(PKind kind, const PainleveState& state);

// Closed-form partial derivatives of the Hamiltonian; same kinds and errors.
HamiltonianGradient hamiltonianGradient(PKind kind, const PainleveState& state);

// Hamilton's equations dq/dt = dH/dp, dp/dt = -dH/dq integrated through the
// polyline of time waypoints; returns one state per waypoint (an empty path
// returns {state0}).  Kinds II, III, IV, V.  Segments that pass within
// 1e-12 of t = 0 throw DivisionByZeroTime for III/V; |q| or |p| crossing
// 1e8 throws PoleHit; integrator breakdown surfaces as StepFailure.
std::vector<PainleveState> flow(PKind kind, const PainleveState& state0,
                                const std::vector<Cplx>& tPath,
                                const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// 2x2 linear problems.  The coefficients are the printed matrices; II and
// III are returned in the twisted variable so the residue at infinity is
// diagonal, IV and V are emitted directly, and I applies its twist with the
// state's lambdaTwist (NoNonzeroTwist when that is zero).
RationalConnection linear_problem(PKind kind, const PainleveState& state);

// Three rank-one residue matrices for the VI problem.
struct VIResidues {
    CMatrix A1;
    CMatrix A2;
    CMatrix A3;
};

// VI linear problem: four simple poles {0, 1, t1, t2} with
// t1 = t*t2/(t+t2-1) and residue lambda*I at infinity, where lambda is the
// larger-modulus root (ties by larger real part) of
// det(-A1-A2-A3 - lambda I) = 0.  Throws DetNonzero when a residue is not
// rank one, NoNonzeroTwist when both roots vanish, and rejects degenerate
// placements (t or t2 in {0,1}, coinciding poles).
RationalConnection linear_problem(const VIResidues& res, Cplx t, Cplx t2,
                                  const Tolerances& tol = {});

// The lambda described above, without building the connection.
Cplx vi_twist_exponent(const VIResidues& res);

// Plumbing: deterministic rank-one residues A_i with trace traces[i]
// (eigenvalues {traces[i], 0}), directions drawn from the seeded generator.
VIResidues rank_one_residues(const std::array<Cplx, 3>& traces,
                             std::uint64_t seed);

// Rank-4 preprocessing for V and IV: a Moebius substitution that keeps the
// finite singularities in place and moves infinity to t2, followed by the
// twist (xi - t2)^{-lambda} with lambda in {thetaInf1, thetaInf2} chosen by
// the larger-modulus rule.  V substitutes z = xi(t2-1)/(t2-xi) on the
// explicit coefficients; IV substitutes z = xi t2/(t2-xi) on the corrected
// coefficients {A2, A1 + diag(0,-2t), A0} (the frame reduced from the 3x3
// residue matrix, whose local data has the block-Hankel rank three that a
// four-dimensional realization requires; the explicit frame has rank five).
// The new pole at t2 carries the rank-one residue
// diag(thetaInf1, thetaInf2) - lambda*I.  Throws NoNonzeroTwist when both
// thetas vanish and Degenerate for t2 in {0,1} or thetaInf1 = thetaInf2.
RationalConnection rank4_connection(PKind kind, const PainleveState& state);

// The lambda chosen by rank4_connection.
Cplx rank4_twist_exponent(const PainleveTheta& theta);

// ---------------------------------------------------------------------------
// Okubo data per kind: II, III, I return the explicit {S, G, B_inf} frames;
// IV and V diagonalize the 3x3 residue matrix (G := eigenvector matrix with
// columns ordered so lambda = -spectrum descends by real part with the
// designated nearest-zero eigenvalue last, each column scaled so its
// largest-modulus entry is 1).  Throws ResonantSpectrum / NotDiagonalizable
// on the eigen routes.
OkuboData okubo_data(PKind kind, const PainleveState& state,
                     const Tolerances& tol = {});

// VI route: realization of the VI linear problem compressed to minimal size.
OkuboData okubo_data(const VIResidues& res, Cplx t, Cplx t2,
                     const Tolerances& tol = {});

// Extended deformation frame for the flow kinds: II {4}, III {2,2} from the
// explicit frames; IV {3}, V {2,1} from the eigen-gauge route.
ExtOkuboFrame okubo_frame(PKind kind, const PainleveState& state,
                          const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Least-squares decomposition of a T-derivative into canonical deformation
// directions plus an infinitesimal exponent-preserving gauge:
//     dT  ~=  sum_l velocity[l] * dT(direction l)  +  [T, stabilizer],
// where l runs over the frame's flat (k,l) coordinates and the stabilizer
// ranges over the block-diagonal commutant of B_inf.  relResidual is the
// fit residual over max(1, ||dT||).
struct SectionFit {
    CVector velocity;
    CMatrix stabilizer;
    double relResidual = 0.0;
};

SectionFit section_tangent(const ExtOkuboFrame& frame, const CMatrix& dT,
                           const Tolerances& tol = {});

// PV parameter dictionary on the eigen-gauge data: with B = -G B_inf G^{-1}
// and canonical coordinates (z10, z11, z20) = (1, 1, 0), recovers
// t = z11 * B21 / (z10 - z20) and reports (does not assert) the theta
// identifications theta0 = B33, theta1 = B11 + B22.
struct DictionaryReport {
    Cplx tRecovered;
    Cplx theta0Reported;
    Cplx theta1Reported;
};

DictionaryReport pv_dictionary(const OkuboData& data);

// ---------------------------------------------------------------------------
// Coalescence classification: Jordan data of the 4x4 component per kind,
// checked against the expected degeneration patterns
//     VI: four distinct 1x1;  V: [(1,2),(0,1),(t2,1)];  IV: [(0,3),(t2,1)];
//     III: [(0,2),(1,2)];     II: [(0,4)].
// II and III use their direct frames; IV, V, VI realize and minimize the
// rank-4 connections.  Throws MismatchedPattern (with both specs attached)
// on any disagreement at tol.cluster.
struct CoalescenceRow {
    PKind kind = PKind::II;
    std::string route;  // "direct" or "realized"
    JordanSpec expected;
    JordanSpec observed;
};

struct CoalescenceReport {
    std::vector<CoalescenceRow> rows;
};

// `states` holds exactly one state per kind II..VI (any order); the VI row
// additionally needs the residue triple.
CoalescenceReport coalescence_table(const std::vector<PainleveState>& states,
                                    const VIResidues& viResidues,
                                    const Tolerances& tol = {});

}  // namespace okb
