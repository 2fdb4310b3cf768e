#include "saito.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace okb {
namespace {

// Sort indices by descending real part, ties by descending imaginary part.
std::vector<int> sortedByValue(const CVector& vals, const std::vector<int>& idx) {
    std::vector<int> out = idx;
    std::sort(out.begin(), out.end(), [&](int a, int b) {
        const Cplx va = vals(a), vb = vals(b);
        if (va.real() != vb.real()) return va.real() > vb.real();
        return va.imag() > vb.imag();
    });
    return out;
}

// Scale a column so its largest-modulus entry becomes exactly 1.
CVector normalizeColumn(const CVector& col, const std::string& where) {
    int best = 0;
    for (int i = 1; i < col.size(); ++i)
        if (std::abs(col(i)) > std::abs(col(best))) best = i;
    if (std::abs(col(best)) == 0.0) throw SingularFrame(where + ": zero eigenvector column");
    return col / col(best);
}

std::string fmtReal(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

}  // namespace

double WdvvReport::maxOverall() const {
    return std::max(std::max(maxCommutator, unitDefect),
                    std::max(maxSymmetry, maxHomogeneity));
}

double PotentialReport::maxOverall() const {
    return std::max(std::max(maxAssociativity, unitDefect),
                    std::max(maxSymmetry, maxHomogeneity));
}

Weights weightsFromExponents(const CVector& lambda, double tol) {
    if (lambda.size() < 1)
        throw Inconsistent("weightsFromExponents: empty exponent vector");
    if (!lambda.allFinite())
        throw Inconsistent("weightsFromExponents: non-finite exponents");
    if (!nonResonant(lambda, tol))
        throw Resonant(
            "weightsFromExponents: an exponent difference sits within " + fmtReal(tol) +
            " of a nonzero integer, so a normalizing denominator degenerates");
    const int N = static_cast<int>(lambda.size());
    Weights wts;
    wts.w = CVector(N);
    for (int j = 0; j < N; ++j) wts.w(j) = lambda(j) - lambda(N - 1) + Cplx(1.0, 0.0);
    return wts;
}

SaitoFrame flat_frame(const ExtOkuboFrame& frame, const Tolerances& tol) {
    const int N = frame.sys.size();
    SaitoFrame sf;
    sf.weights = weightsFromExponents(frame.sys.lambda, tol.cluster);
    const CVector& w = sf.weights.w;
    sf.Tmat = frame.sys.T;

    // Normalized structure matrix and the flat coordinate candidates on its
    // last row (the last denominator column is w_j itself since w_N = 1).
    sf.Cmat = CMatrix(N, N);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            const Cplx den = Cplx(1.0, 0.0) + w(j) - w(i);
            if (std::abs(den) < tol.cluster)
                throw Resonant("flat_frame: normalizing denominator vanishes at (" +
                               std::to_string(i) + "," + std::to_string(j) + ")");
            sf.Cmat(i, j) = -sf.Tmat(i, j) / den;
        }
    }
    requireFinite(sf.Cmat, "flat_frame normalized structure matrix");
    sf.t = sf.Cmat.row(N - 1).transpose();

    // Coordinate Jacobian: row per canonical direction in flat order, column
    // per flat candidate; the entry is the bottom row of the direction's
    // one-form value, which is exactly the canonical derivative of t_j.
    std::vector<CMatrix> omega;
    omega.reserve(static_cast<size_t>(N));
    for (int k = 0; k < frame.blockCount(); ++k)
        for (int l = 0; l < frame.blocks[static_cast<size_t>(k)]; ++l)
            omega.push_back(direction_data(frame, k, l).omegaTilde);
    if (static_cast<int>(omega.size()) != N)
        throw Inconsistent("flat_frame: block sizes do not sum to the dimension");

    CMatrix J(N, N);
    for (int d = 0; d < N; ++d)
        for (int j = 0; j < N; ++j) J(d, j) = omega[static_cast<size_t>(d)](N - 1, j);
    sf.jacobianCond = conditionNumber(J);
    if (!(sf.jacobianCond < 1.0 / tol.cluster))
        throw JacobianDegenerate(
            "flat_frame: coordinate Jacobian condition " + fmtReal(sf.jacobianCond) +
            " exceeds " + fmtReal(1.0 / tol.cluster) +
            "; the bottom frame row misses a block's leading column");

    // Higgs matrices in the flat directions by inverting the Jacobian: the
    // canonical-direction values are the omegaTilde matrices themselves.
    const CMatrix Jinv = J.partialPivLu().inverse();
    sf.higgs.assign(static_cast<size_t>(N), CMatrix::Zero(N, N));
    for (int m = 0; m < N; ++m) {
        for (int d = 0; d < N; ++d)
            sf.higgs[static_cast<size_t>(m)] += Jinv(m, d) * omega[static_cast<size_t>(d)];
        requireFinite(sf.higgs[static_cast<size_t>(m)], "flat_frame Higgs matrix");
    }

    // Potential values from the weighted contraction of C against t.
    sf.g = CVector(N);
    for (int j = 0; j < N; ++j) {
        Cplx acc(0.0, 0.0);
        for (int i = 0; i < N; ++i) acc += w(i) * sf.t(i) * sf.Cmat(i, j);
        sf.g(j) = acc / (Cplx(1.0, 0.0) + w(j));
    }
    return sf;
}

WdvvReport wdvv_residuals(const SaitoFrame& sf) {
    const int N = static_cast<int>(sf.t.size());
    if (N == 0 || static_cast<int>(sf.higgs.size()) != N)
        throw Inconsistent("wdvv_residuals: frame carries no Higgs data");
    WdvvReport rep;
    for (int k = 0; k < N; ++k)
        for (int l = k + 1; l < N; ++l)
            rep.maxCommutator =
                std::max(rep.maxCommutator, commutator(sf.higgs[static_cast<size_t>(k)],
                                                       sf.higgs[static_cast<size_t>(l)])
                                                .norm());
    rep.unitDefect =
        (sf.higgs[static_cast<size_t>(N - 1)] - CMatrix::Identity(N, N)).norm();
    for (int m = 0; m < N; ++m)
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                rep.maxSymmetry = std::max(
                    rep.maxSymmetry, std::abs(sf.higgs[static_cast<size_t>(m)](i, j) -
                                              sf.higgs[static_cast<size_t>(i)](m, j)));
    const CVector& w = sf.weights.w;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            rep.maxHomogeneity = std::max(
                rep.maxHomogeneity,
                std::abs(sf.Tmat(i, j) +
                         (Cplx(1.0, 0.0) + w(j) - w(i)) * sf.Cmat(i, j)));
    return rep;
}

RegularityReport regularity_class(const GOkuboSystem& sys, const Tolerances& tol) {
    RegularityReport rep;
    try {
        rep.spec = jordanize(sys.T, tol).spec;
    } catch (const ClusterAmbiguity& e) {
        rep.ambiguous = true;
        rep.note = e.what();
        return rep;
    }
    rep.partition = rep.spec.sizeSignature();
    rep.distinct = rep.spec.distinctEigenvalues(tol.cluster * normScale(sys.T.norm()));
    rep.regular = rep.distinct == static_cast<int>(rep.spec.blocks.size());
    return rep;
}

RegularityReport regularity_class(const ExtOkuboFrame& frame, const Tolerances& tol) {
    return regularity_class(frame.sys, tol);
}

PrimitiveCheck primitive_section_check(const ExtOkuboFrame& frame, int row,
                                       const Tolerances& tol) {
    const int N = frame.sys.size();
    if (row < 0 || row >= N)
        throw IndexOutOfRange("primitive_section_check: row " + std::to_string(row) +
                              " outside dimension " + std::to_string(N));
    PrimitiveCheck check;
    const double cutoff = tol.cluster * normScale(frame.P.norm());
    check.ok = true;
    for (int k = 0; k < frame.blockCount(); ++k) {
        const Cplx v = frame.P(row, frame.coordOffset(k));
        check.values.push_back(v);
        if (!(std::abs(v) > cutoff)) check.ok = false;
    }
    return check;
}

std::vector<SaitoFrame> saito_from_initial(const CMatrix& S, const CMatrix& R,
                                           const CVector& v,
                                           const std::vector<Cplx>& targetZ,
                                           const Tolerances& tol) {
    const int N = static_cast<int>(S.rows());
    if (S.cols() != N || R.rows() != N || R.cols() != N || v.size() != N)
        throw Inconsistent("saito_from_initial: mismatched input sizes");
    requireFinite(S, "saito_from_initial S");
    requireFinite(R, "saito_from_initial R");
    if (!v.allFinite() || v.norm() == 0.0)
        throw Inconsistent("saito_from_initial: designated eigenvector is zero or non-finite");

    // Eigenvalue carried by v, checked as an actual eigenpair of R.
    const double rScale = normScale(R.norm());
    const Cplx mu = v.dot(R * v) / Cplx(v.squaredNorm(), 0.0);
    if ((R * v - mu * v).norm() > tol.residual * rScale * v.norm())
        throw Inconsistent("saito_from_initial: v is not an eigenvector of R at tolerance");

    Eigen::ComplexEigenSolver<CMatrix> es(R);
    if (es.info() != Eigen::Success)
        throw Inconsistent("saito_from_initial: eigensolver failed on R");
    const CVector evals = es.eigenvalues();

    // Drop one member of v's eigenvalue cluster (the one its direction
    // overlaps most) and keep the rest in descending spectral order.
    std::vector<int> cluster;
    for (int i = 0; i < N; ++i)
        if (std::abs(evals(i) - mu) <= tol.cluster * rScale) cluster.push_back(i);
    if (cluster.empty())
        throw Inconsistent("saito_from_initial: v's eigenvalue missing from spec(R)");
    int drop = cluster.front();
    double bestOverlap = -1.0;
    for (int i : cluster) {
        const double overlap = std::abs(es.eigenvectors().col(i).dot(v)) / v.norm();
        if (overlap > bestOverlap) {
            bestOverlap = overlap;
            drop = i;
        }
    }
    std::vector<int> rest;
    for (int i = 0; i < N; ++i)
        if (i != drop) rest.push_back(i);
    rest = sortedByValue(evals, rest);

    // Gauge with v last; remaining eigenvector columns are scaled so their
    // largest-modulus entry is 1.
    CMatrix G(N, N);
    CVector lambdaOut(N);
    for (int c = 0; c < N - 1; ++c) {
        const int i = rest[static_cast<size_t>(c)];
        G.col(c) = normalizeColumn(es.eigenvectors().col(i), "saito_from_initial");
        lambdaOut(c) = evals(i);
    }
    G.col(N - 1) = v;
    lambdaOut(N - 1) = mu;
    const double gCond = conditionNumber(G);
    if (!(gCond < 1.0 / tol.cluster))
        throw SingularFrame("saito_from_initial: eigenvector gauge is singular (condition " +
                            fmtReal(gCond) + ")");
    const auto lu = G.partialPivLu();
    const CMatrix D = lu.solve(R * G);
    CMatrix offdiag = D;
    offdiag.diagonal().setZero();
    if (offdiag.norm() > tol.residual * rScale * std::max(1.0, gCond))
        throw Inconsistent("saito_from_initial: gauge does not diagonalize R");

    GOkuboSystem sys;
    sys.T = lu.solve(S * G);
    sys.lambda = lambdaOut;
    requireFinite(sys.T, "saito_from_initial structure matrix");

    ExtOkuboFrame start = canonical_frame(sys, tol);
    std::vector<ExtOkuboFrame> path;
    if (targetZ.empty())
        path.push_back(start);
    else
        path = extend_deformation(start, targetZ, tol);

    std::vector<SaitoFrame> out;
    out.reserve(path.size());
    for (const ExtOkuboFrame& f : path) out.push_back(flat_frame(f, tol));
    return out;
}

PotentialReport verify_potential(const PotentialSampler& gFunc, const CVector& tBase,
                                 const Weights& weights, const Tolerances&) {
    const int N = weights.size();
    if (tBase.size() != N)
        throw Inconsistent("verify_potential: base point size does not match weights");

    const auto sample = [&](const CVector& tpt) {
        CVector g = gFunc(tpt);
        if (g.size() != N)
            throw Inconsistent("verify_potential: sampler returned wrong dimension");
        if (!g.allFinite())
            throw Inconsistent("verify_potential: sampler returned non-finite values");
        return g;
    };
    const double baseStep = 1e-4;
    RVector h(N);
    for (int i = 0; i < N; ++i) h(i) = baseStep * std::max(1.0, std::abs(tBase(i)));

    const CVector g0 = sample(tBase);

    // First derivatives: C_ij = dg_j/dt_i by central differences.
    CMatrix C(N, N);
    for (int i = 0; i < N; ++i) {
        CVector tp = tBase, tm = tBase;
        tp(i) += h(i);
        tm(i) -= h(i);
        C.row(i) = ((sample(tp) - sample(tm)) / Cplx(2.0 * h(i), 0.0)).transpose();
    }

    // Second derivatives: each ordered pair gets its own four-point stencil
    // so a sampler inconsistent between passes shows up as asymmetry.
    std::vector<CMatrix> higgs(static_cast<size_t>(N), CMatrix(N, N));
    for (int k = 0; k < N; ++k) {
        for (int i = 0; i < N; ++i) {
            CVector tpp = tBase, tpm = tBase, tmp = tBase, tmm = tBase;
            tpp(k) += h(k), tpp(i) += h(i);
            tpm(k) += h(k), tpm(i) -= h(i);
            tmp(k) -= h(k), tmp(i) += h(i);
            tmm(k) -= h(k), tmm(i) -= h(i);
            const CVector row = (sample(tpp) - sample(tpm) - sample(tmp) + sample(tmm)) /
                                Cplx(4.0 * h(k) * h(i), 0.0);
            higgs[static_cast<size_t>(k)].row(i) = row.transpose();
        }
    }

    PotentialReport rep;
    rep.step = baseStep;
    for (int k = 0; k < N; ++k)
        for (int l = k + 1; l < N; ++l)
            rep.maxAssociativity =
                std::max(rep.maxAssociativity, commutator(higgs[static_cast<size_t>(k)],
                                                          higgs[static_cast<size_t>(l)])
                                                   .norm());
    rep.unitDefect =
        (higgs[static_cast<size_t>(N - 1)] - CMatrix::Identity(N, N)).norm();
    for (int m = 0; m < N; ++m)
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                rep.maxSymmetry = std::max(
                    rep.maxSymmetry, std::abs(higgs[static_cast<size_t>(m)](i, j) -
                                              higgs[static_cast<size_t>(i)](m, j)));
    const CVector& w = weights.w;
    for (int j = 0; j < N; ++j) {
        Cplx euler(0.0, 0.0);
        for (int k = 0; k < N; ++k) euler += w(k) * tBase(k) * C(k, j);
        rep.maxHomogeneity = std::max(
            rep.maxHomogeneity, std::abs(euler - (Cplx(1.0, 0.0) + w(j)) * g0(j)));
    }
    return rep;
}

}  // namespace okb
