#include "okubo.hpp"

#include "ode.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

namespace okb {

namespace {

std::string dirLabel(int k, int l) {
    std::ostringstream os;
    os << "(" << k << "," << l << ")";
    return os.str();
}

// Flat coordinate index of z_{k,l} for the given block sizes.
int flatIndex(const std::vector<int>& blocks, int k, int l) {
    int off = 0;
    for (int j = 0; j < k; ++j) off += blocks[j];
    return off + l;
}

CMatrix inverseOf(const CMatrix& P) {
    const int n = static_cast<int>(P.rows());
    Eigen::PartialPivLU<CMatrix> lu(P);
    return lu.solve(CMatrix::Identity(n, n));
}

}  // namespace

bool nonResonant(const CVector& lambda, double tol) {
    const int n = static_cast<int>(lambda.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const Cplx d = lambda(i) - lambda(j);
            const long nearest = std::lround(d.real());
            for (long c : {nearest - 1, nearest, nearest + 1}) {
                if (c == 0) continue;
                if (std::abs(d - Cplx(static_cast<double>(c), 0.0)) < tol) return false;
            }
        }
    }
    return true;
}

int ExtOkuboFrame::coordOffset(int k) const {
    if (k < 0 || k >= blockCount())
        throw IndexOutOfRange("okubo::coordOffset: block index out of range");
    return flatIndex(blocks, k, 0);
}

Cplx ExtOkuboFrame::coord(int k, int l) const {
    if (k < 0 || k >= blockCount() || l < 0 || l >= blocks[static_cast<size_t>(k)])
        throw IndexOutOfRange("okubo::coord: coordinate index out of range");
    return z[static_cast<size_t>(flatIndex(blocks, k, l))];
}

CMatrix ExtOkuboFrame::assembleZ() const { return assembleBlockToeplitz(blocks, z); }

Cplx ExtOkuboFrame::discriminant() const {
    Cplx delta(1.0, 0.0);
    for (int k = 0; k < blockCount(); ++k) {
        for (int l = k + 1; l < blockCount(); ++l) {
            const Cplx gap = coord(k, 0) - coord(l, 0);
            delta *= gap * gap;
        }
    }
    return delta;
}

CMatrix shiftMatrix(int m) {
    CMatrix L = CMatrix::Zero(m, m);
    for (int i = 0; i + 1 < m; ++i) L(i, i + 1) = Cplx(1.0, 0.0);
    return L;
}

CMatrix assembleBlockToeplitz(const std::vector<int>& blocks, const std::vector<Cplx>& z) {
    int n = 0;
    for (int b : blocks) n += b;
    if (static_cast<int>(z.size()) != n)
        throw IndexOutOfRange("okubo::assembleBlockToeplitz: coordinate count mismatch");
    CMatrix Z = CMatrix::Zero(n, n);
    int off = 0;
    for (int b : blocks) {
        for (int l = 0; l < b; ++l) {
            const Cplx c = z[static_cast<size_t>(off + l)];
            for (int i = 0; i + l < b; ++i) Z(off + i, off + i + l) = c;
        }
        off += b;
    }
    return Z;
}

CMatrix directionMatrix(const std::vector<int>& blocks, int k, int l) {
    if (k < 0 || k >= static_cast<int>(blocks.size()))
        throw IndexOutOfRange("okubo::directionMatrix: block index out of range");
    if (l < 0 || l >= blocks[static_cast<size_t>(k)])
        throw IndexOutOfRange("okubo::directionMatrix: power index out of range");
    int n = 0;
    for (int b : blocks) n += b;
    CMatrix E = CMatrix::Zero(n, n);
    const int off = flatIndex(blocks, k, 0);
    const int b = blocks[static_cast<size_t>(k)];
    for (int i = 0; i + l < b; ++i) E(off + i, off + i + l) = Cplx(1.0, 0.0);
    return E;
}

ExtOkuboFrame makeFrame(GOkuboSystem sys, CMatrix P, std::vector<int> blocks,
                        std::vector<Cplx> z, const Tolerances& tol) {
    const int n = sys.size();
    int bsum = 0;
    for (int b : blocks) bsum += b;
    if (bsum != n || static_cast<int>(z.size()) != n || P.rows() != n || P.cols() != n ||
        static_cast<int>(sys.lambda.size()) != n)
        throw IndexOutOfRange("okubo::makeFrame: inconsistent dimensions");
    requireFinite(sys.T, "okubo::makeFrame");
    requireFinite(P, "okubo::makeFrame");

    ExtOkuboFrame frame{std::move(sys), std::move(P), std::move(blocks), std::move(z)};

    // Reconstruction invariant, measured in the T metric so that it stays
    // meaningful for moderately conditioned frames.
    const CMatrix Z = frame.assembleZ();
    const CMatrix R = frame.sys.T * frame.P - frame.P * Z;
    const double scale = normScale(frame.sys.T.norm()) * normScale(frame.P.norm());
    if (R.norm() > tol.residual * scale * std::max(1.0, conditionNumber(frame.P)))
        throw Inconsistent("okubo::makeFrame: frame does not reproduce T");
    return frame;
}

double ResidualReport::maxOverall() const {
    return std::max(std::max(maxCommute, maxWedge), std::max(maxCurl, maxStructure));
}

CMatrix RationalConnection::evaluate(Cplx zp) const {
    CMatrix out = CMatrix::Zero(m, m);
    for (const RationalPole& p : poles) {
        Cplx w = zp - p.a;
        Cplx pw = w;
        for (int l = 0; l <= p.r; ++l) {
            out += p.A[static_cast<size_t>(l)] / pw;
            pw *= w;
        }
    }
    return out;
}

CMatrix RationalConnection::rtilde() const {
    CMatrix out = CMatrix::Zero(m, m);
    for (const RationalPole& p : poles) out -= p.A[0];
    return out;
}

ExtOkuboFrame canonical_frame(const GOkuboSystem& sys, const Tolerances& tol) {
    requireFinite(sys.T, "okubo::canonical_frame");
    const double scale = normScale(sys.T.norm());
    JordanizeResult jr = jordanize(sys.T, tol);

    // Regularity: every eigenvalue must own exactly one block.
    const int nblocks = static_cast<int>(jr.spec.blocks.size());
    if (jr.spec.distinctEigenvalues(tol.cluster * scale) < nblocks)
        throw NotRegular("okubo::canonical_frame: an eigenvalue occupies two blocks");

    std::vector<int> blocks;
    blocks.reserve(static_cast<size_t>(nblocks));
    for (const JordanBlock& b : jr.spec.blocks) blocks.push_back(b.size);

    // Canonical coordinates are the first row of each block of P^{-1} T P.
    const CMatrix Z = Eigen::PartialPivLU<CMatrix>(jr.P).solve(sys.T * jr.P);
    std::vector<Cplx> z(static_cast<size_t>(sys.size()));
    int off = 0;
    for (int b : blocks) {
        for (int l = 0; l < b; ++l) z[static_cast<size_t>(off + l)] = Z(off, off + l);
        off += b;
    }

    // Coalescence gate: product of squared leading-coordinate gaps.
    Cplx delta(1.0, 0.0);
    for (int k = 0; k < nblocks; ++k) {
        for (int l = k + 1; l < nblocks; ++l) {
            const Cplx gap = z[static_cast<size_t>(flatIndex(blocks, k, 0))] -
                             z[static_cast<size_t>(flatIndex(blocks, l, 0))];
            delta *= gap * gap;
        }
    }
    if (std::abs(delta) < tol.cluster)
        throw Degenerate("okubo::canonical_frame: coordinate discriminant collapsed");

    return makeFrame(sys, jr.P, std::move(blocks), std::move(z), tol);
}

DirectionData direction_data(const ExtOkuboFrame& frame, int k, int l) {
    if (k < 0 || k >= frame.blockCount() || l < 0 ||
        l >= frame.blocks[static_cast<size_t>(k)])
        throw IndexOutOfRange("okubo::direction_data: direction index out of range");
    const CMatrix E = directionMatrix(frame.blocks, k, l);
    const CMatrix omega = -(frame.P * E) * inverseOf(frame.P);
    const int n = frame.sys.size();
    CMatrix dT(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            dT(i, j) = -(Cplx(1.0, 0.0) + frame.sys.lambda(j) - frame.sys.lambda(i)) * omega(i, j);
    return {omega, dT};
}

ResidualReport integrability_residuals(const std::vector<ExtOkuboFrame>& path,
                                       const Tolerances&) {
    ResidualReport report;
    if (path.empty()) return report;

    const std::vector<int>& blocks = path.front().blocks;
    for (const ExtOkuboFrame& f : path)
        if (f.blocks != blocks)
            throw Inconsistent("okubo::integrability_residuals: mixed block shapes in path");

    // Direction index -> (k, l) labels, fixed along the path.
    std::vector<std::pair<int, int>> dirs;
    for (int k = 0; k < static_cast<int>(blocks.size()); ++k)
        for (int l = 0; l < blocks[static_cast<size_t>(k)]; ++l) dirs.emplace_back(k, l);

    const int ns = static_cast<int>(path.size());
    std::vector<double> cond(static_cast<size_t>(ns));
    std::vector<std::vector<CMatrix>> omegas(static_cast<size_t>(ns));
    std::vector<CMatrix> pinv(static_cast<size_t>(ns));
    for (int i = 0; i < ns; ++i) {
        cond[static_cast<size_t>(i)] = conditionNumber(path[static_cast<size_t>(i)].P);
        pinv[static_cast<size_t>(i)] = inverseOf(path[static_cast<size_t>(i)].P);
        omegas[static_cast<size_t>(i)].reserve(dirs.size());
        for (const auto& [k, l] : dirs) {
            const CMatrix E = directionMatrix(blocks, k, l);
            omegas[static_cast<size_t>(i)].push_back(
                -(path[static_cast<size_t>(i)].P * E) * pinv[static_cast<size_t>(i)]);
        }
    }

    // Algebraic families at every sample.
    for (int i = 0; i < ns; ++i) {
        const ExtOkuboFrame& f = path[static_cast<size_t>(i)];
        for (size_t d = 0; d < dirs.size(); ++d) {
            const double r = commutator(f.sys.T, omegas[static_cast<size_t>(i)][d]).norm();
            report.maxCommute = std::max(report.maxCommute, r);
            report.rows.push_back({i, "commute:" + dirLabel(dirs[d].first, dirs[d].second),
                                   cond[static_cast<size_t>(i)], r});
        }
        for (size_t d = 0; d < dirs.size(); ++d) {
            for (size_t e = d + 1; e < dirs.size(); ++e) {
                const double r = commutator(omegas[static_cast<size_t>(i)][d],
                                            omegas[static_cast<size_t>(i)][e])
                                     .norm();
                report.maxWedge = std::max(report.maxWedge, r);
                report.rows.push_back({i,
                                       "wedge:" + dirLabel(dirs[d].first, dirs[d].second) + "x" +
                                           dirLabel(dirs[e].first, dirs[e].second),
                                       cond[static_cast<size_t>(i)], r});
            }
        }
    }

    // Finite-difference families at interior samples (centered, with the
    // path index as the parameter; both sides of each identity carry the
    // same parametrization factor, so none is divided out).
    const CMatrix Binf = path.front().sys.binfinity();
    for (int i = 1; i + 1 < ns; ++i) {
        const ExtOkuboFrame& fm = path[static_cast<size_t>(i - 1)];
        const ExtOkuboFrame& f0 = path[static_cast<size_t>(i)];
        const ExtOkuboFrame& fp = path[static_cast<size_t>(i + 1)];

        CMatrix omegaDot = CMatrix::Zero(f0.sys.size(), f0.sys.size());
        for (size_t d = 0; d < dirs.size(); ++d) {
            const Cplx zdot = (fp.z[d] - fm.z[d]) * 0.5;
            omegaDot += zdot * omegas[static_cast<size_t>(i)][d];
        }
        const CMatrix dT = (fp.sys.T - fm.sys.T) * 0.5;
        const double rs = (dT + omegaDot + commutator(omegaDot, Binf)).norm();
        report.maxStructure = std::max(report.maxStructure, rs);
        report.rows.push_back({i, "structure:path", cond[static_cast<size_t>(i)], rs});

        const CMatrix As = ((fp.P - fm.P) * 0.5) * pinv[static_cast<size_t>(i)];
        for (size_t d = 0; d < dirs.size(); ++d) {
            const CMatrix dOmega = (omegas[static_cast<size_t>(i + 1)][d] -
                                    omegas[static_cast<size_t>(i - 1)][d]) *
                                   0.5;
            const double rc = (dOmega - commutator(As, omegas[static_cast<size_t>(i)][d])).norm();
            report.maxCurl = std::max(report.maxCurl, rc);
            report.rows.push_back({i, "curl:" + dirLabel(dirs[d].first, dirs[d].second),
                                   cond[static_cast<size_t>(i)], rc});
        }
    }

    return report;
}

std::vector<ExtOkuboFrame> extend_deformation(const ExtOkuboFrame& start,
                                              const std::vector<Cplx>& targetZ,
                                              const Tolerances& tol) {
    const int n = start.sys.size();
    if (static_cast<int>(targetZ.size()) != n)
        throw IndexOutOfRange("okubo::extend_deformation: target coordinate count mismatch");

    // Straight segment z(s) = z0 + s v.  Scan the leading-coordinate gaps for
    // a collision anywhere on [0, 1] before integrating.
    double coordScale = 1.0;
    for (const Cplx& c : start.z) coordScale = std::max(coordScale, std::abs(c));
    for (const Cplx& c : targetZ) coordScale = std::max(coordScale, std::abs(c));
    const double poleGap = tol.cluster * coordScale;

    const int nblocks = start.blockCount();
    std::vector<Cplx> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = targetZ[static_cast<size_t>(i)] - start.z[static_cast<size_t>(i)];
    for (int k = 0; k < nblocks; ++k) {
        for (int l = k + 1; l < nblocks; ++l) {
            const int ik = flatIndex(start.blocks, k, 0);
            const int il = flatIndex(start.blocks, l, 0);
            const Cplx a = start.z[static_cast<size_t>(ik)] - start.z[static_cast<size_t>(il)];
            const Cplx b = v[static_cast<size_t>(ik)] - v[static_cast<size_t>(il)];
            double smin = 0.0;
            const double bb = std::norm(b);
            if (bb > 0.0) smin = std::clamp(-(std::conj(b) * a).real() / bb, 0.0, 1.0);
            if (std::abs(a + smin * b) < poleGap)
                throw PoleHit("okubo::extend_deformation: leading coordinates collide on the segment");
        }
    }

    const CMatrix Ev = assembleBlockToeplitz(start.blocks, v);
    const CMatrix Binf = start.sys.binfinity();
    const CVector lambda = start.sys.lambda;
    const std::vector<int> blocks = start.blocks;
    const std::vector<Cplx> z0 = start.z;

    auto coordsAt = [&](double s) {
        std::vector<Cplx> z(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            z[static_cast<size_t>(i)] = z0[static_cast<size_t>(i)] + s * v[static_cast<size_t>(i)];
        return z;
    };

    auto rhs = [&](double s, const CVector& y) -> CVector {
        CMatrix P = Eigen::Map<const CMatrix>(y.data(), n, n);
        requireFinite(P, "okubo::extend_deformation");
        const CMatrix Pinv = inverseOf(P);
        const CMatrix Z = assembleBlockToeplitz(blocks, coordsAt(s));
        const CMatrix T = P * Z * Pinv;
        const CMatrix W = P * Ev * Pinv;
        const CMatrix X = solve_sylvester_gauge(T, commutator(W, Binf), tol);
        const CMatrix dP = X * P;
        return Eigen::Map<const CVector>(dP.data(), n * n);
    };

    double vnorm = 0.0;
    for (const Cplx& c : v) vnorm = std::max(vnorm, std::abs(c));
    if (vnorm == 0.0) return {makeFrame(start.sys, start.P, blocks, z0, tol)};

    std::vector<ExtOkuboFrame> out;
    auto record = [&](double s, const CVector& y) {
        CMatrix P = Eigen::Map<const CMatrix>(y.data(), n, n);
        const CMatrix Pinv = inverseOf(P);
        std::vector<Cplx> z = coordsAt(s);
        const CMatrix T = P * assembleBlockToeplitz(blocks, z) * Pinv;
        out.push_back(makeFrame(GOkuboSystem{T, lambda}, std::move(P), blocks, std::move(z), tol));
    };

    // Dense uniform sampling: fine enough that centered differences over
    // consecutive returned frames resolve the structure identities.
    const int chunks = 200;
    CVector y = Eigen::Map<const CVector>(start.P.data(), n * n);
    try {
        record(0.0, y);
        for (int j = 0; j < chunks; ++j) {
            const double s0 = static_cast<double>(j) / chunks;
            const double s1 = static_cast<double>(j + 1) / chunks;
            y = integrateOde(rhs, s0, s1, y, OdeOptions{});
            record(s1, y);
        }
    } catch (const OdeFailure& e) {
        throw StepFailure(std::string("okubo::extend_deformation: ") + e.what());
    } catch (const Inconsistent& e) {
        throw StepFailure(std::string("okubo::extend_deformation: direction left the integrable cone: ") + e.what());
    }
    return out;
}

GOkuboSystem euler_shift(const GOkuboSystem& sys, Cplx lam) {
    CVector shifted = sys.lambda;
    for (int i = 0; i < shifted.size(); ++i) shifted(i) += lam;
    if (!nonResonant(shifted))
        throw Resonant("okubo::euler_shift: shifted exponents are resonant");
    return GOkuboSystem{sys.T, shifted};
}

std::pair<CMatrix, CMatrix> confluence_frame(const std::vector<Cplx>& zBlock, Cplx eps) {
    const int m = static_cast<int>(zBlock.size());
    if (m < 1) throw IndexOutOfRange("okubo::confluence_frame: empty coordinate block");
    if (std::abs(eps) == 0.0)
        throw std::invalid_argument("okubo::confluence_frame: eps must be nonzero");
    if (m >= 2 && std::abs(zBlock[1]) == 0.0)
        throw ZeroSubdiagonal("okubo::confluence_frame: vanishing z_{k,1}");

    std::vector<Cplx> a(static_cast<size_t>(m));
    a[0] = Cplx(1.0, 0.0);
    for (int l = 1; l < m; ++l) {
        Cplx acc(0.0, 0.0);
        for (int j = 0; j < l; ++j) acc += a[static_cast<size_t>(j)] * zBlock[static_cast<size_t>(l - j)];
        a[static_cast<size_t>(l)] = acc / (static_cast<double>(l) * eps * zBlock[1]);
    }

    CMatrix P = CMatrix::Zero(m, m);
    for (int l = 0; l < m; ++l)
        for (int i = 0; i + l < m; ++i) P(i, i + l) = a[static_cast<size_t>(l)];

    CMatrix Zeps = CMatrix::Zero(m, m);
    for (int j = 0; j < m; ++j) Zeps(j, j) = zBlock[0] + static_cast<double>(j) * zBlock[1] * eps;
    return {P, Zeps};
}

RationalConnection rank_reduce(const GOkuboSystem& sys, const Tolerances& tol) {
    const int n = sys.size();
    const double zeroTol = 1e-10;
    int m = n;
    while (m > 0 && std::abs(sys.lambda(m - 1)) <= zeroTol) --m;
    if (m == 0)
        throw BadSpectrum("okubo::rank_reduce: all exponents vanish");
    for (int i = 0; i < m; ++i)
        if (std::abs(sys.lambda(i)) <= zeroTol)
            throw BadSpectrum("okubo::rank_reduce: zero exponent inside the leading block");

    // Only a Jordanizing frame is needed here, so eigenvalues occupying
    // several blocks are fine; their contributions merge into one pole.
    requireFinite(sys.T, "okubo::rank_reduce");
    const JordanizeResult jr = jordanize(sys.T, tol);
    const double scale = normScale(sys.T.norm());
    const CMatrix Pinv = inverseOf(jr.P);

    // T = G^{-1} S G with G = P^{-1}: the reduction data are the first m rows
    // of P and the first m columns of P^{-1} scaled by the nonzero exponents.
    const CMatrix Rt = CMatrix(sys.lambda.head(m).asDiagonal());
    const CMatrix B = jr.P.topRows(m);
    const CMatrix C = Pinv.leftCols(m) * Rt;

    RationalConnection conn;
    conn.m = m;
    int off = 0;
    for (size_t k = 0; k < jr.spec.blocks.size(); ++k) {
        const int bk = jr.spec.blocks[k].size;
        const Cplx a = jr.spec.blocks[k].eigenvalue;

        // Merge into an existing pole when the eigenvalue repeats.
        RationalPole* pole = nullptr;
        for (RationalPole& p : conn.poles)
            if (std::abs(p.a - a) < tol.cluster * scale) pole = &p;
        if (pole == nullptr) {
            conn.poles.push_back(RationalPole{a, -1, {}});
            pole = &conn.poles.back();
        }

        const CMatrix Bk = B.middleCols(off, bk);
        const CMatrix Ck = C.middleRows(off, bk);
        const CMatrix Nk = shiftMatrix(bk);
        CMatrix Npow = CMatrix::Identity(bk, bk);
        for (int l = 0; l < bk; ++l) {
            if (l > pole->r) {
                pole->A.push_back(CMatrix::Zero(m, m));
                pole->r = l;
            }
            pole->A[static_cast<size_t>(l)] -= Bk * Npow * Ck;
            Npow = Npow * Nk;
        }
        off += bk;
    }
    return conn;
}

}  // namespace okb
