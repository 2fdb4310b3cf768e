// Forward construction of a generalized Okubo system {S, G, B_inf} from a
// rational connection with a regular singular point at infinity, size
// minimization of the realization, and the conversion to a GOkuboSystem.
#pragma once

#include "okubo.hpp"

namespace okb {

struct SingularRtilde : std::runtime_error {
    explicit SingularRtilde(const std::string& m) : std::runtime_error(m) {}
};
struct CompletionFailure : std::runtime_error {
    explicit CompletionFailure(const std::string& m) : std::runtime_error(m) {}
};
struct RankAmbiguity : std::runtime_error {
    explicit RankAmbiguity(const std::string& m) : std::runtime_error(m) {}
};

// ---------------------------------------------------------------------------
// A realization of a rational connection: -B (z - S)^{-1} C reproduces the
// connection pointwise, G = (C Rtilde^{-1} | Ctilde) is the frame whose
// inverse starts with the rows of B, and lambdaOut carries the diagonal of
// Rtilde followed by zeros.
struct Realization {
    CMatrix S;          // N x N
    CMatrix B;          // m x N
    CMatrix C;          // N x m
    CMatrix G;          // N x N
    CVector lambdaOut;  // N entries
    bool minimal = false;

    int size() const { return static_cast<int>(S.rows()); }
    int msize() const { return static_cast<int>(B.rows()); }
    CMatrix evaluate(Cplx z) const;  // -B (z - S)^{-1} C
};

// Block-companion realization: per pole a_k of extra order r_k, a tower of
// m (r_k+1) states.  Always valid, generally not minimal.
Realization realize(const RationalConnection& conn);

// Compress to a minimal realization by restricting to the reachable span of
// C under S and factoring out the unobservable kernel of the B tower, then
// put S into Jordan form.  Already-minimal input is returned unchanged.
Realization minimize(const Realization& real, const Tolerances& tol = {});

// T = G^{-1} S G with the lambdaOut exponents.
GOkuboSystem to_okubo(const Realization& real);

}  // namespace okb
