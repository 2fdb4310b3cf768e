#include "realize.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>

namespace okb {

namespace {

// Validate the connection shape and return Rtilde = -sum_k A_k^{(0)},
// which must be diagonal with nonzero entries.
CMatrix rtildeOf(const RationalConnection& conn) {
    if (conn.m < 1 || conn.poles.empty())
        throw std::invalid_argument("realize: empty connection");
    for (size_t k = 0; k < conn.poles.size(); ++k) {
        const RationalPole& p = conn.poles[k];
        if (p.r < 0 || static_cast<int>(p.A.size()) != p.r + 1)
            throw std::invalid_argument("realize: coefficient count does not match pole order");
        for (const CMatrix& A : p.A)
            if (A.rows() != conn.m || A.cols() != conn.m)
                throw std::invalid_argument("realize: coefficient size mismatch");
        for (size_t l = k + 1; l < conn.poles.size(); ++l)
            if (std::abs(p.a - conn.poles[l].a) < 1e-10)
                throw std::invalid_argument("realize: poles must be pairwise distinct");
    }
    CMatrix Rt = CMatrix::Zero(conn.m, conn.m);
    for (const RationalPole& p : conn.poles) Rt -= p.A[0];
    const double scale = normScale(Rt.norm());
    for (int i = 0; i < conn.m; ++i) {
        for (int j = 0; j < conn.m; ++j) {
            if (i != j && std::abs(Rt(i, j)) > 1e-10 * scale)
                throw std::invalid_argument("realize: residue sum at infinity is not diagonal");
        }
        if (std::abs(Rt(i, i)) <= 1e-10)
            throw SingularRtilde("realize: zero diagonal entry in the residue at infinity");
    }
    return Rt;
}

// G = (C Rtilde^{-1} | Ctilde) with Ctilde an orthonormal kernel basis of B.
CMatrix completeFrame(const CMatrix& B, const CMatrix& C, const CMatrix& Rt) {
    const int N = static_cast<int>(C.rows());
    const int m = static_cast<int>(C.cols());
    CMatrix CR = C;
    for (int j = 0; j < m; ++j) CR.col(j) /= Rt(j, j);

    Eigen::JacobiSVD<CMatrix> svd(B);
    const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    const CMatrix K = kernelBasis(B, 1e-10 * std::max(smax, 1.0));
    if (static_cast<int>(K.cols()) != N - m)
        throw CompletionFailure("realize: kernel of B has the wrong dimension");

    CMatrix G(N, N);
    G.leftCols(m) = CR;
    G.rightCols(N - m) = K;

    const CMatrix Ginv = Eigen::PartialPivLU<CMatrix>(G).solve(CMatrix::Identity(N, N));
    if ((G * Ginv - CMatrix::Identity(N, N)).norm() > 1e-8 * normScale(G.norm()))
        throw CompletionFailure("realize: frame completion is numerically singular");
    return G;
}

CVector lambdaFrom(const CMatrix& Rt, int N) {
    const int m = static_cast<int>(Rt.rows());
    CVector lam = CVector::Zero(N);
    for (int i = 0; i < m; ++i) lam(i) = Rt(i, i);
    return lam;
}

// Orthonormal basis of the column span of M, with a relative singular-value
// cutoff and an ambiguity band around it.
CMatrix rangeBasis(const CMatrix& M, const Tolerances& tol) {
    Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0)
        throw CompletionFailure("realize: degenerate span in minimization");
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        const double ratio = sv(i) / sv(0);
        if (ratio > tol.cluster / 30.0 && ratio < tol.cluster * 30.0)
            throw RankAmbiguity("realize: singular value at the rank cutoff");
        if (ratio > tol.cluster) ++rank;
    }
    return svd.matrixU().leftCols(rank);
}

CMatrix krylov(const CMatrix& S, const CMatrix& C) {
    const int N = static_cast<int>(S.rows());
    const int m = static_cast<int>(C.cols());
    CMatrix K(N, N * m);
    CMatrix cur = C;
    for (int j = 0; j < N; ++j) {
        K.middleCols(j * m, m) = cur;
        cur = S * cur;
        // Keep all powers on one scale so the relative rank cutoff is fair.
        const double nn = cur.norm();
        if (nn > 1.0) cur /= nn;
    }
    return K;
}

}  // namespace

CMatrix Realization::evaluate(Cplx z) const {
    const int N = size();
    const CMatrix M = z * CMatrix::Identity(N, N) - S;
    return -B * Eigen::PartialPivLU<CMatrix>(M).solve(C);
}

Realization realize(const RationalConnection& conn) {
    const CMatrix Rt = rtildeOf(conn);
    const int m = conn.m;

    int N = 0;
    for (const RationalPole& p : conn.poles) N += m * (p.r + 1);

    Realization real;
    real.S = CMatrix::Zero(N, N);
    real.B = CMatrix::Zero(m, N);
    real.C = CMatrix::Zero(N, m);
    int off = 0;
    for (const RationalPole& p : conn.poles) {
        const int layers = p.r + 1;
        for (int i = 0; i < m * layers; ++i) real.S(off + i, off + i) = p.a;
        // Lower block shift: layer j feeds layer j+1, so the j-th power of
        // the nilpotent part carries C's identity layer in front of A^{(j)}.
        for (int j = 1; j < layers; ++j)
            for (int i = 0; i < m; ++i) real.S(off + j * m + i, off + (j - 1) * m + i) = 1.0;
        real.C.middleRows(off, m) = CMatrix::Identity(m, m);
        for (int j = 0; j < layers; ++j)
            real.B.middleCols(off + j * m, m) = -p.A[static_cast<size_t>(j)];
        off += m * layers;
    }

    real.G = completeFrame(real.B, real.C, Rt);
    real.lambdaOut = lambdaFrom(Rt, N);
    real.minimal = false;
    return real;
}

Realization minimize(const Realization& real, const Tolerances& tol) {
    const int N = real.size();
    const CMatrix Rt = real.B * real.C;

    // Restrict to the reachable span of C under S.
    const CMatrix V = rangeBasis(krylov(real.S, real.C), tol);
    const CMatrix S1 = V.adjoint() * real.S * V;
    const CMatrix B1 = real.B * V;
    const CMatrix C1 = V.adjoint() * real.C;

    // Factor out the unobservable part: restrict to the span of the
    // adjoint Krylov tower of B.
    const CMatrix W = rangeBasis(krylov(S1.adjoint(), B1.adjoint()), tol);
    if (static_cast<int>(V.cols()) == N && static_cast<int>(W.cols()) == N) {
        Realization out = real;
        out.minimal = true;
        return out;
    }
    const CMatrix S2 = W.adjoint() * S1 * W;
    const CMatrix B2 = B1 * W;
    const CMatrix C2 = W.adjoint() * C1;

    // Canonical shape: conjugate the compressed S into Jordan form.
    const JordanizeResult jr = jordanize(S2, tol);
    const int n2 = static_cast<int>(S2.rows());
    const CMatrix Pinv = Eigen::PartialPivLU<CMatrix>(jr.P).solve(CMatrix::Identity(n2, n2));

    Realization out;
    out.S = Pinv * S2 * jr.P;
    out.B = B2 * jr.P;
    out.C = Pinv * C2;
    if ((out.B * out.C - Rt).norm() > 1e-8 * normScale(Rt.norm()))
        throw CompletionFailure("realize: minimization failed to preserve the residue at infinity");
    out.G = completeFrame(out.B, out.C, Rt);
    out.lambdaOut = lambdaFrom(Rt, n2);
    out.minimal = true;
    return out;
}

GOkuboSystem to_okubo(const Realization& real) {
    const CMatrix T = Eigen::PartialPivLU<CMatrix>(real.G).solve(real.S * real.G);
    return GOkuboSystem{T, real.lambdaOut};
}

}  // namespace okb
