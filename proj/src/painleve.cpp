#include "painleve.hpp"

#include "ode.hpp"
#include "painleve_data.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <random>
#include <sstream>

namespace okb {
namespace {

std::string describe(Cplx z) {
    std::ostringstream os;
    os << "(" << z.real() << ", " << z.imag() << ")";
    return os.str();
}

void requireKind(PKind kind, const PainleveState& state, const char* fn) {
    if (kind != state.kind) {
        throw std::invalid_argument(std::string("painleve::") + fn +
                                    ": kind argument disagrees with state.kind");
    }
}

void requireFiniteScalar(Cplx z, const char* fn, const char* what) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw std::invalid_argument(std::string("painleve::") + fn + ": " +
                                    what + " is not finite");
    }
}

double thetaScale(const PainleveTheta& th) {
    return std::abs(th.theta0) + std::abs(th.theta1) + std::abs(th.thetaInf1) +
           std::abs(th.thetaInf2);
}

// Larger-modulus root, ties broken by larger real part.
Cplx largerModulusRoot(Cplx a, Cplx b) {
    const double ma = std::abs(a);
    const double mb = std::abs(b);
    const double gap = 1e-12 * normScale(ma > mb ? ma : mb);
    if (ma > mb + gap) return a;
    if (mb > ma + gap) return b;
    return a.real() >= b.real() ? a : b;
}

// Shortest distance from the segment [ta, tb] to the origin.
double segmentDistanceToZero(Cplx ta, Cplx tb) {
    const Cplx d = tb - ta;
    const double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(ta);
    double s = -(std::conj(d) * ta).real() / len2;
    s = std::clamp(s, 0.0, 1.0);
    return std::abs(ta + s * d);
}

CMatrix identity2(Cplx scale) {
    CMatrix m = CMatrix::Identity(2, 2);
    return CMatrix(scale * m);
}

Cplx det2(const CMatrix& m) {
    return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
}

// Canonical order for Jordan blocks: decreasing size, ties by (Re, Im).
JordanSpec canonicalSpec(std::vector<JordanBlock> blocks) {
    std::sort(blocks.begin(), blocks.end(),
              [](const JordanBlock& a, const JordanBlock& b) {
                  if (a.size != b.size) return a.size > b.size;
                  if (a.eigenvalue.real() != b.eigenvalue.real())
                      return a.eigenvalue.real() < b.eigenvalue.real();
                  return a.eigenvalue.imag() < b.eigenvalue.imag();
              });
    JordanSpec spec;
    spec.blocks = std::move(blocks);
    return spec;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string kindName(PKind kind) {
    switch (kind) {
        case PKind::I: return "I";
        case PKind::II: return "II";
        case PKind::III: return "III";
        case PKind::IV: return "IV";
        case PKind::V: return "V";
        case PKind::VI: return "VI";
    }
    throw std::invalid_argument("painleve::kindName: unknown kind");
}

PKind kindFromName(const std::string& s) {
    std::string key;
    for (char c : s) key.push_back(static_cast<char>(std::tolower(c)));
    if (!key.empty() && key.front() == 'p') key.erase(key.begin());
    if (key == "i" || key == "1") return PKind::I;
    if (key == "ii" || key == "2") return PKind::II;
    if (key == "iii" || key == "3") return PKind::III;
    if (key == "iv" || key == "4") return PKind::IV;
    if (key == "v" || key == "5") return PKind::V;
    if (key == "vi" || key == "6") return PKind::VI;
    throw std::invalid_argument("painleve::kindFromName: unrecognized kind \"" +
                                s + "\"");
}

PainleveState makeState(PKind kind, const PainleveTheta& theta, Cplx u, Cplx q,
                        Cplx p, Cplx t, Cplx t2, Cplx lambdaTwist) {
    requireFiniteScalar(theta.theta0, "makeState", "theta0");
    requireFiniteScalar(theta.theta1, "makeState", "theta1");
    requireFiniteScalar(theta.thetaInf1, "makeState", "thetaInf1");
    requireFiniteScalar(theta.thetaInf2, "makeState", "thetaInf2");
    requireFiniteScalar(u, "makeState", "u");
    requireFiniteScalar(q, "makeState", "q");
    requireFiniteScalar(p, "makeState", "p");
    requireFiniteScalar(t, "makeState", "t");
    requireFiniteScalar(t2, "makeState", "t2");
    requireFiniteScalar(lambdaTwist, "makeState", "lambdaTwist");
    if (std::abs(u) == 0.0) {
        throw std::invalid_argument(
            "painleve::makeState: gauge scalar u must be nonzero");
    }
    if (kind == PKind::V) {
        const Cplx sum =
            theta.theta0 + theta.theta1 + theta.thetaInf1 + theta.thetaInf2;
        if (std::abs(sum) > 1e-12 * normScale(thetaScale(theta))) {
            throw std::invalid_argument(
                "painleve::makeState: V parameters must satisfy theta0 + "
                "theta1 + thetaInf1 + thetaInf2 = 0; got sum " +
                describe(sum));
        }
    }
    PainleveState s;
    s.kind = kind;
    s.theta = theta;
    s.u = u;
    s.q = q;
    s.p = p;
    s.t = t;
    s.t2 = t2;
    s.lambdaTwist = lambdaTwist;
    return s;
}

GOkuboSystem OkuboData::system() const {
    GOkuboSystem sys;
    sys.T = G.fullPivLu().solve(S * G);
    sys.lambda = lambda;
    return sys;
}

// Hamiltonians ---------------------------------------------------------------

Cplx hamiltonian(PKind kind, const PainleveState& state) {
    requireKind(kind, state, "hamiltonian");
    const Cplx q = state.q;
    const Cplx p = state.p;
    const Cplx t = state.t;
    const PainleveTheta& th = state.theta;
    switch (kind) {
        case PKind::II:
            return p * p - (q * q + t) * p + th.thetaInf2 * q;
        case PKind::III: {
            if (std::abs(t) == 0.0) {
                throw DivisionByZeroTime(
                    "painleve::hamiltonian: III divides by t = 0");
            }
            return (p * p * q * q -
                    (q * q - (th.thetaInf1 - th.thetaInf2) * q - t) * p +
                    th.thetaInf2 * q) /
                   t;
        }
        case PKind::IV:
            return p * q * (p - q - t) + (th.thetaInf2 - th.thetaInf1) * p -
                   (th.theta0 + th.thetaInf2) * q;
        case PKind::V: {
            if (std::abs(t) == 0.0) {
                throw DivisionByZeroTime(
                    "painleve::hamiltonian: V divides by t = 0");
            }
            const Cplx c1 = th.theta0 + th.thetaInf1 - th.thetaInf2;
            return (p * (p + t) * q * (q - 1.0) + c1 * q * p +
                    (th.thetaInf2 - th.thetaInf1) * p -
                    th.thetaInf2 * t * q) /
                   t;
        }
        case PKind::I:
            return p * p - q * q * q - t * q;
        case PKind::VI:
            break;
    }
    throw std::invalid_argument(
        "painleve::hamiltonian: no scalar Hamiltonian is available for VI");
}

HamiltonianGradient hamiltonianGradient(PKind kind,
                                        const PainleveState& state) {
    requireKind(kind, state, "hamiltonianGradient");
    const Cplx q = state.q;
    const Cplx p = state.p;
    const Cplx t = state.t;
    const PainleveTheta& th = state.theta;
    HamiltonianGradient g;
    switch (kind) {
        case PKind::II:
            g.dHdq = -2.0 * q * p + th.thetaInf2;
            g.dHdp = 2.0 * p - q * q - t;
            g.dHdt = -p;
            return g;
        case PKind::III: {
            if (std::abs(t) == 0.0) {
                throw DivisionByZeroTime(
                    "painleve::hamiltonianGradient: III divides by t = 0");
            }
            const Cplx d = th.thetaInf1 - th.thetaInf2;
            g.dHdq =
                (2.0 * p * p * q - 2.0 * p * q + d * p + th.thetaInf2) / t;
            g.dHdp = (2.0 * p * q * q - q * q + d * q + t) / t;
            g.dHdt = (p - hamiltonian(kind, state)) / t;
            return g;
        }
        case PKind::IV:
            g.dHdq = p * (p - 2.0 * q - t) - (th.theta0 + th.thetaInf2);
            g.dHdp = q * (2.0 * p - q - t) + th.thetaInf2 - th.thetaInf1;
            g.dHdt = -p * q;
            return g;
        case PKind::V: {
            if (std::abs(t) == 0.0) {
                throw DivisionByZeroTime(
                    "painleve::hamiltonianGradient: V divides by t = 0");
            }
            const Cplx c1 = th.theta0 + th.thetaInf1 - th.thetaInf2;
            g.dHdq = (p * (p + t) * (2.0 * q - 1.0) + c1 * p -
                      th.thetaInf2 * t) /
                     t;
            g.dHdp = ((2.0 * p + t) * q * (q - 1.0) + c1 * q +
                      th.thetaInf2 - th.thetaInf1) /
                     t;
            g.dHdt = (p * q * (q - 1.0) - th.thetaInf2 * q -
                      hamiltonian(kind, state)) /
                     t;
            return g;
        }
        case PKind::I:
            g.dHdq = -3.0 * q * q - t;
            g.dHdp = 2.0 * p;
            g.dHdt = -q;
            return g;
        case PKind::VI:
            break;
    }
    throw std::invalid_argument(
        "painleve::hamiltonianGradient: no scalar Hamiltonian for VI");
}

// Flows ----------------------------------------------------------------------

std::vector<PainleveState> flow(PKind kind, const PainleveState& state0,
                                const std::vector<Cplx>& tPath,
                                const Tolerances& tol) {
    requireKind(kind, state0, "flow");
    if (kind == PKind::VI) {
        throw std::invalid_argument(
            "painleve::flow: VI has no scalar Hamiltonian to integrate");
    }
    if (kind == PKind::I) {
        throw std::invalid_argument(
            "painleve::flow: I dynamics are outside the deformation "
            "framework; only its linear data are provided");
    }
    std::vector<PainleveState> out;
    if (tPath.empty()) {
        out.push_back(state0);
        return out;
    }
    const bool timeSingular = (kind == PKind::III || kind == PKind::V);
    PainleveState cur = state0;
    for (Cplx target : tPath) {
        const Cplx ta = cur.t;
        const Cplx tb = target;
        if (timeSingular) {
            const double reach =
                std::abs(ta) > std::abs(tb) ? std::abs(ta) : std::abs(tb);
            if (segmentDistanceToZero(ta, tb) < 1e-12 * normScale(reach)) {
                throw DivisionByZeroTime(
                    "painleve::flow: time segment passes through t = 0 "
                    "(kinds III and V are singular there)");
            }
        }
        if (std::abs(tb - ta) == 0.0) {
            cur.t = tb;
            out.push_back(cur);
            continue;
        }
        const Cplx span = tb - ta;
        PainleveState probe = cur;
        auto rhs = [&](double s, const CVector& y) {
            probe.q = y(0);
            probe.p = y(1);
            probe.t = ta + s * span;
            const HamiltonianGradient g = hamiltonianGradient(kind, probe);
            CVector dy(2);
            dy << span * g.dHdp, -span * g.dHdq;
            return dy;
        };
        auto monitor = [&](double, const CVector& y) {
            if (std::abs(y(0)) > 1e8 || std::abs(y(1)) > 1e8) {
                throw PoleHit(
                    "painleve::flow: trajectory left the 1e8 ball "
                    "(movable pole) near t = " +
                    describe(probe.t));
            }
        };
        CVector y(2);
        y << cur.q, cur.p;
        try {
            y = integrateOde(rhs, 0.0, 1.0, y, OdeOptions{}, monitor);
        } catch (const OdeFailure& e) {
            throw StepFailure(std::string("painleve::flow: ") + e.what());
        }
        cur.q = y(0);
        cur.p = y(1);
        cur.t = tb;
        out.push_back(cur);
    }
    (void)tol;
    return out;
}

// Linear problems ------------------------------------------------------------

RationalConnection linear_problem(PKind kind, const PainleveState& state) {
    requireKind(kind, state, "linear_problem");
    const Cplx q = state.q;
    const Cplx p = state.p;
    const Cplx u = state.u;
    const Cplx t = state.t;
    const PainleveTheta& th = state.theta;
    RationalConnection conn;
    conn.m = 2;
    switch (kind) {
        case PKind::II: {
            const data::Coeffs2 c = data::coeffsII(q, p, u, t, th.thetaInf2);
            RationalPole pole;
            pole.a = Cplx(0.0, 0.0);
            pole.r = 3;
            pole.A = {identity2(th.thetaInf2), CMatrix(-c.A2), CMatrix(-c.A1),
                      CMatrix(-c.A0)};
            conn.poles.push_back(std::move(pole));
            return conn;
        }
        case PKind::III: {
            const data::Coeffs2 c =
                data::coeffsIII(q, p, u, t, th.thetaInf1, th.thetaInf2);
            RationalPole p0;
            p0.a = Cplx(0.0, 0.0);
            p0.r = 1;
            p0.A = {c.A1, CMatrix(-c.A2)};
            RationalPole p1;
            p1.a = Cplx(1.0, 0.0);
            p1.r = 1;
            p1.A = {CMatrix(-(c.A1 + identity2(th.thetaInf2))),
                    CMatrix(-c.A0)};
            conn.poles = {std::move(p0), std::move(p1)};
            return conn;
        }
        case PKind::IV: {
            if (std::abs(th.thetaInf1 - th.thetaInf2) <
                1e-12 * normScale(thetaScale(th))) {
                throw Degenerate(
                    "painleve::linear_problem: IV coefficients divide by "
                    "thetaInf1 - thetaInf2 = 0");
            }
            const data::Coeffs2 c =
                data::coeffsIV(q, p, u, t, th.thetaInf1, th.thetaInf2);
            RationalPole pole;
            pole.a = Cplx(0.0, 0.0);
            pole.r = 2;
            pole.A = {c.A2, c.A1, c.A0};
            conn.poles.push_back(std::move(pole));
            return conn;
        }
        case PKind::V: {
            if (std::abs(th.thetaInf1 - th.thetaInf2) <
                1e-12 * normScale(thetaScale(th))) {
                throw Degenerate(
                    "painleve::linear_problem: V coefficients divide by "
                    "thetaInf1 - thetaInf2 = 0");
            }
            const data::Coeffs2 c = data::coeffsV(q, p, u, t, th.theta0,
                                                  th.thetaInf1, th.thetaInf2);
            RationalPole p0;
            p0.a = Cplx(0.0, 0.0);
            p0.r = 0;
            p0.A = {c.A0};
            RationalPole p1;
            p1.a = Cplx(1.0, 0.0);
            p1.r = 1;
            p1.A = {c.A2, c.A1};
            conn.poles = {std::move(p0), std::move(p1)};
            return conn;
        }
        case PKind::I: {
            const Cplx lam = state.lambdaTwist;
            if (std::abs(lam) == 0.0) {
                throw NoNonzeroTwist(
                    "painleve::linear_problem: I needs a nonzero twist "
                    "exponent lambdaTwist");
            }
            const data::Coeffs2 c = data::coeffsI(q, p, t);
            RationalPole pole;
            pole.a = Cplx(0.0, 0.0);
            pole.r = 3;
            pole.A = {identity2(-lam), CMatrix(-c.A2), CMatrix(-c.A1),
                      CMatrix(-c.A0)};
            conn.poles.push_back(std::move(pole));
            return conn;
        }
        case PKind::VI:
            break;
    }
    throw std::invalid_argument(
        "painleve::linear_problem: VI takes the residue-triple overload");
}

Cplx vi_twist_exponent(const VIResidues& res) {
    const CMatrix sum = res.A1 + res.A2 + res.A3;
    const CMatrix m = -sum;
    const Cplx tr = m(0, 0) + m(1, 1);
    const Cplx det = det2(m);
    const Cplx disc = tr * tr - 4.0 * det;
    const Cplx root = std::sqrt(disc);
    return largerModulusRoot((tr + root) / 2.0, (tr - root) / 2.0);
}

RationalConnection linear_problem(const VIResidues& res, Cplx t, Cplx t2,
                                  const Tolerances& tol) {
    const CMatrix* mats[3] = {&res.A1, &res.A2, &res.A3};
    for (int i = 0; i < 3; ++i) {
        const CMatrix& a = *mats[i];
        if (a.rows() != 2 || a.cols() != 2) {
            throw std::invalid_argument(
                "painleve::linear_problem: VI residues must be 2x2");
        }
        requireFinite(a, "painleve::linear_problem VI residue");
        const double scale = normScale(a.norm());
        if (std::abs(det2(a)) > tol.residual * scale * scale) {
            throw DetNonzero("painleve::linear_problem: VI residue " +
                             std::to_string(i + 1) +
                             " is not rank one (det = " +
                             describe(det2(a)) + ")");
        }
    }
    const CMatrix sum = res.A1 + res.A2 + res.A3;
    const Cplx lam = vi_twist_exponent(res);
    if (std::abs(lam) <= tol.cluster * normScale(sum.norm())) {
        throw NoNonzeroTwist(
            "painleve::linear_problem: both twist-exponent roots vanish");
    }
    const Cplx denom = t + t2 - 1.0;
    if (std::abs(denom) < tol.cluster * normScale(std::abs(t) + std::abs(t2))) {
        throw Degenerate(
            "painleve::linear_problem: t + t2 - 1 = 0 degenerates the "
            "fourth pole position");
    }
    const Cplx t1 = t * t2 / denom;
    const Cplx positions[4] = {Cplx(0.0, 0.0), Cplx(1.0, 0.0), t1, t2};
    const double sep =
        tol.cluster * normScale(std::abs(t1) > std::abs(t2) ? std::abs(t1)
                                                            : std::abs(t2));
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            if (std::abs(positions[i] - positions[j]) < sep) {
                throw Degenerate(
                    "painleve::linear_problem: VI pole positions collide "
                    "(need 0, 1, t*t2/(t+t2-1), t2 pairwise distinct)");
            }
        }
    }
    RationalConnection conn;
    conn.m = 2;
    const CMatrix fourth = -sum - identity2(lam);
    const CMatrix* residues[4] = {&res.A1, &res.A2, &res.A3, &fourth};
    for (int i = 0; i < 4; ++i) {
        RationalPole pole;
        pole.a = positions[i];
        pole.r = 0;
        pole.A = {*residues[i]};
        conn.poles.push_back(std::move(pole));
    }
    return conn;
}

VIResidues rank_one_residues(const std::array<Cplx, 3>& traces,
                             std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    auto draw = [&] { return Cplx(dist(gen), dist(gen)); };
    auto make = [&](Cplx trace) {
        for (;;) {
            const Cplx c0 = draw();
            const Cplx c1 = draw();
            const Cplx r0 = draw();
            const Cplx r1 = draw();
            const Cplx inner = r0 * c0 + r1 * c1;
            const double size = std::sqrt(std::norm(c0) + std::norm(c1)) *
                                std::sqrt(std::norm(r0) + std::norm(r1));
            if (std::abs(inner) < 0.3 * size) continue;
            const Cplx s = trace / inner;
            CMatrix a(2, 2);
            a << s * (c0 * r0), s * (c0 * r1),
                 s * (c1 * r0), s * (c1 * r1);
            return a;
        }
    };
    VIResidues res;
    res.A1 = make(traces[0]);
    res.A2 = make(traces[1]);
    res.A3 = make(traces[2]);
    return res;
}

Cplx rank4_twist_exponent(const PainleveTheta& theta) {
    return largerModulusRoot(theta.thetaInf1, theta.thetaInf2);
}

RationalConnection rank4_connection(PKind kind, const PainleveState& state) {
    requireKind(kind, state, "rank4_connection");
    if (kind != PKind::V && kind != PKind::IV) {
        throw std::invalid_argument(
            "painleve::rank4_connection: only V and IV have the "
            "Moebius/twist preprocessing (VI is already rank four)");
    }
    const PainleveTheta& th = state.theta;
    const Cplx t2 = state.t2;
    const double scale = normScale(std::abs(t2));
    if (std::abs(t2) < 1e-8 * scale || std::abs(t2 - 1.0) < 1e-8 * scale) {
        throw Degenerate(
            "painleve::rank4_connection: t2 must avoid the existing "
            "singularities {0, 1}");
    }
    const Cplx lam = rank4_twist_exponent(th);
    if (std::abs(lam) == 0.0) {
        throw NoNonzeroTwist(
            "painleve::rank4_connection: both candidate twist exponents "
            "vanish (thetaInf1 = thetaInf2 = 0)");
    }
    if (std::abs(th.thetaInf1 - th.thetaInf2) <
        1e-8 * normScale(thetaScale(th))) {
        throw Degenerate(
            "painleve::rank4_connection: thetaInf1 = thetaInf2 collapses "
            "the rank-one residue at t2");
    }
    RationalConnection conn;
    conn.m = 2;
    if (kind == PKind::V) {
        const data::Coeffs2 c = data::coeffsV(
            state.q, state.p, state.u, state.t, th.theta0, th.thetaInf1,
            th.thetaInf2);
        RationalPole p0;
        p0.a = Cplx(0.0, 0.0);
        p0.r = 0;
        p0.A = {c.A0};
        RationalPole p1;
        p1.a = Cplx(1.0, 0.0);
        p1.r = 1;
        p1.A = {c.A2, CMatrix((t2 - 1.0) / t2 * c.A1)};
        RationalPole pt;
        pt.a = t2;
        pt.r = 0;
        pt.A = {CMatrix(-c.A0 - c.A2 - identity2(lam))};
        conn.poles = {std::move(p0), std::move(p1), std::move(pt)};
    } else {
        const data::Coeffs2 c = data::coeffsIV(
            state.q, state.p, state.u, state.t, th.thetaInf1, th.thetaInf2);
        // The explicit second-order coefficient describes the equation in a
        // frame whose local data at z = 0 has block-Hankel rank five, which
        // can never realize through a four-dimensional structure matrix.
        // The frame reduced from the 3x3 residue matrix (equal up to a
        // constant diagonal conjugation) shifts it by diag(0, -2t) and has
        // rank three, as a J3(0) + J1(t2) realization requires.  The
        // substitution z = xi t2/(t2 - xi) then fixes 0, sends infinity to
        // t2 with unit derivative at 0, so the coefficients degenerate back
        // to the three-pole data as t2 grows.
        CMatrix corrected = c.A1;
        corrected(1, 1) -= 2.0 * state.t;
        RationalPole p0;
        p0.a = Cplx(0.0, 0.0);
        p0.r = 2;
        p0.A = {c.A2, CMatrix(corrected - c.A0 / t2), c.A0};
        RationalPole pt;
        pt.a = t2;
        pt.r = 0;
        pt.A = {CMatrix(-c.A2 - identity2(lam))};
        conn.poles = {std::move(p0), std::move(pt)};
    }
    return conn;
}

// Okubo data -----------------------------------------------------------------

namespace {

// Eigen-gauge route for the 3x3 residue matrices: order the eigenvalue list
// lambda = -spec(C) descending by real part (ties: descending imaginary
// part) with the nearest-zero member last, and scale each eigenvector
// column so its largest-modulus entry (lowest index on near-ties) is 1.
OkuboData eigenGaugeData(const CMatrix& C, const CMatrix& S,
                         const char* label, const Tolerances& tol) {
    requireFinite(C, std::string("painleve::okubo_data ") + label);
    Eigen::ComplexEigenSolver<CMatrix> es(C);
    if (es.info() != Eigen::Success) {
        throw NotDiagonalizable(std::string("painleve::okubo_data: ") + label +
                                " eigensolver failed to converge");
    }
    const int n = static_cast<int>(C.rows());
    CVector ev = es.eigenvalues();
    CMatrix vec = es.eigenvectors();
    const double scale = normScale(C.norm());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(ev(i) - ev(j)) < tol.cluster * scale) {
                throw NotDiagonalizable(
                    std::string("painleve::okubo_data: ") + label +
                    " spectrum clusters; the residue matrix is (numerically)"
                    " defective");
            }
        }
    }
    int designated = 0;
    for (int i = 1; i < n; ++i) {
        if (std::abs(ev(i)) < std::abs(ev(designated))) designated = i;
    }
    std::vector<int> order;
    for (int i = 0; i < n; ++i) {
        if (i != designated) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const Cplx la = -ev(a);
        const Cplx lb = -ev(b);
        if (la.real() != lb.real()) return la.real() > lb.real();
        return la.imag() > lb.imag();
    });
    order.push_back(designated);

    OkuboData out;
    out.S = S;
    out.G = CMatrix(n, n);
    out.lambda = CVector(n);
    for (int j = 0; j < n; ++j) {
        const int src = order[j];
        CVector col = vec.col(src);
        int k = 0;
        for (int i = 1; i < n; ++i) {
            if (std::abs(col(i)) > std::abs(col(k)) * (1.0 + 1e-14)) k = i;
        }
        out.G.col(j) = col / col(k);
        out.lambda(j) = -ev(src);
    }
    const CMatrix recon =
        out.G * out.lambda.asDiagonal() * out.G.fullPivLu().inverse();
    if ((recon - CMatrix(-C)).norm() > 1e-6 * scale) {
        throw NotDiagonalizable(
            std::string("painleve::okubo_data: ") + label +
            " eigenvector frame fails to reconstruct the residue matrix");
    }
    if (!nonResonant(out.lambda, tol.cluster)) {
        throw ResonantSpectrum(
            std::string("painleve::okubo_data: ") + label +
            " exponents are resonant (difference within " +
            std::to_string(tol.cluster) + " of a nonzero integer)");
    }
    return out;
}

void requireInvertibleFrame(const CMatrix& G, const char* label) {
    requireFinite(G, std::string("painleve::okubo_data ") + label);
    Eigen::FullPivLU<CMatrix> lu(G);
    if (!lu.isInvertible()) {
        throw SingularFrame(std::string("painleve::okubo_data: ") + label +
                            " frame is singular at this state");
    }
}

}  // namespace

OkuboData okubo_data(PKind kind, const PainleveState& state,
                     const Tolerances& tol) {
    requireKind(kind, state, "okubo_data");
    const Cplx q = state.q;
    const Cplx p = state.p;
    const Cplx u = state.u;
    const Cplx t = state.t;
    const PainleveTheta& th = state.theta;
    switch (kind) {
        case PKind::II: {
            if (std::abs(th.thetaInf2) == 0.0) {
                throw Degenerate(
                    "painleve::okubo_data: II frame divides by thetaInf2 = 0");
            }
            OkuboData out;
            out.S = data::structureII();
            out.G = data::frameII(q, p, u, t, th.thetaInf2);
            out.lambda = data::exponentsII(th.thetaInf2);
            requireInvertibleFrame(out.G, "II");
            return out;
        }
        case PKind::III: {
            if (std::abs(t) == 0.0) {
                throw DivisionByZeroTime(
                    "painleve::okubo_data: III frame divides by t = 0");
            }
            OkuboData out;
            out.S = data::structureIII();
            out.G = data::frameIII(q, p, u, t, th.thetaInf1, th.thetaInf2);
            out.lambda = data::exponentsIII(th.thetaInf2);
            requireInvertibleFrame(out.G, "III");
            return out;
        }
        case PKind::IV:
            return eigenGaugeData(
                data::residueIV(q, p, t, th.thetaInf1, th.thetaInf2),
                data::structureIV(), "IV", tol);
        case PKind::V: {
            if (std::abs(t) == 0.0) {
                throw DivisionByZeroTime(
                    "painleve::okubo_data: V residue matrix divides by t = 0");
            }
            return eigenGaugeData(
                data::residueV(q, p, t, th.theta0, th.thetaInf1,
                               th.thetaInf2),
                data::structureV(), "V", tol);
        }
        case PKind::I: {
            OkuboData out;
            out.S = data::structureI();
            out.G = data::frameI(q, p, t, state.lambdaTwist);
            out.lambda = data::exponentsI(state.lambdaTwist);
            requireInvertibleFrame(out.G, "I");
            return out;
        }
        case PKind::VI:
            break;
    }
    throw std::invalid_argument(
        "painleve::okubo_data: VI takes the residue-triple overload");
}

OkuboData okubo_data(const VIResidues& res, Cplx t, Cplx t2,
                     const Tolerances& tol) {
    const RationalConnection conn = linear_problem(res, t, t2, tol);
    const Realization real = minimize(realize(conn), tol);
    OkuboData out;
    out.S = real.S;
    out.G = real.G;
    out.lambda = real.lambdaOut;
    return out;
}

ExtOkuboFrame okubo_frame(PKind kind, const PainleveState& state,
                          const Tolerances& tol) {
    requireKind(kind, state, "okubo_frame");
    std::vector<int> blocks;
    std::vector<Cplx> z;
    switch (kind) {
        case PKind::II:
            blocks = {4};
            z = {0.0, 1.0, 0.0, 0.0};
            break;
        case PKind::III:
            blocks = {2, 2};
            z = {0.0, 1.0, 1.0, 1.0};
            break;
        case PKind::IV:
            blocks = {3};
            z = {0.0, 1.0, 0.0};
            break;
        case PKind::V:
            blocks = {2, 1};
            z = {1.0, 1.0, 0.0};
            break;
        default:
            throw std::invalid_argument(
                "painleve::okubo_frame: deformation frames exist for the "
                "flow kinds II, III, IV, V only");
    }
    const OkuboData dat = okubo_data(kind, state, tol);
    GOkuboSystem sys = dat.system();
    CMatrix P = dat.G.fullPivLu().inverse();
    return makeFrame(std::move(sys), std::move(P), std::move(blocks),
                     std::move(z), tol);
}

// Section fitting ------------------------------------------------------------

SectionFit section_tangent(const ExtOkuboFrame& frame, const CMatrix& dT,
                           const Tolerances& tol) {
    const int n = frame.sys.size();
    if (dT.rows() != n || dT.cols() != n) {
        throw std::invalid_argument(
            "painleve::section_tangent: dT size disagrees with the frame");
    }
    const int coords = static_cast<int>(frame.z.size());

    std::vector<CMatrix> columns;
    columns.reserve(coords + n);
    for (int k = 0; k < frame.blockCount(); ++k) {
        for (int l = 0; l < frame.blocks[k]; ++l) {
            columns.push_back(direction_data(frame, k, l).dT);
        }
    }

    // Commutant of B_inf: one elementary matrix per (i, j) pair inside each
    // group of equal exponents.
    const CVector& lam = frame.sys.lambda;
    double lamMax = 0.0;
    for (int i = 0; i < n; ++i) lamMax = std::max(lamMax, std::abs(lam(i)));
    const double gap = tol.cluster * normScale(lamMax);
    std::vector<std::pair<int, int>> stabPairs;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (std::abs(lam(i) - lam(j)) <= gap) stabPairs.emplace_back(i, j);
        }
    }
    const CMatrix& T = frame.sys.T;
    for (const auto& [i, j] : stabPairs) {
        CMatrix basis = CMatrix::Zero(n, n);
        basis(i, j) = 1.0;
        columns.push_back(commutator(T, basis));
    }

    const int m = static_cast<int>(columns.size());
    CMatrix A(n * n, m);
    for (int c = 0; c < m; ++c) {
        A.col(c) = columns[c].reshaped();
    }
    const CVector b = dT.reshaped();
    Eigen::BDCSVD<CMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const CVector x = svd.solve(b);

    SectionFit fit;
    fit.velocity = x.head(coords);
    fit.stabilizer = CMatrix::Zero(n, n);
    for (int s = 0; s < static_cast<int>(stabPairs.size()); ++s) {
        fit.stabilizer(stabPairs[s].first, stabPairs[s].second) +=
            x(coords + s);
    }
    fit.relResidual = (A * x - b).norm() / normScale(b.norm());
    return fit;
}

DictionaryReport pv_dictionary(const OkuboData& dat) {
    if (dat.G.rows() != 3) {
        throw std::invalid_argument(
            "painleve::pv_dictionary: expects the 3x3 eigen-gauge data");
    }
    const CMatrix D = dat.lambda.asDiagonal();
    const CMatrix B = -(dat.G * D) * dat.G.fullPivLu().inverse();
    DictionaryReport rep;
    rep.tRecovered = B(1, 0);
    rep.theta0Reported = B(2, 2);
    rep.theta1Reported = B(0, 0) + B(1, 1);
    return rep;
}

// Coalescence classification -------------------------------------------------

namespace {

JordanSpec observedSpec(const CMatrix& M, const Tolerances& tol) {
    return jordanize(M, tol).spec;
}

void checkPattern(PKind kind, const JordanSpec& expected,
                  const JordanSpec& observed, const Tolerances& tol) {
    double scale = 1.0;
    for (const JordanBlock& b : expected.blocks) {
        scale = std::max(scale, std::abs(b.eigenvalue));
    }
    if (!observed.sameShape(expected, tol.cluster * scale)) {
        throw MismatchedPattern(
            "painleve::coalescence_table: kind " + kindName(kind) +
            " produced Jordan data " + observed.sizeSignature() +
            " where " + expected.sizeSignature() + " was expected",
            expected, observed);
    }
}

}  // namespace

CoalescenceReport coalescence_table(const std::vector<PainleveState>& states,
                                    const VIResidues& viResidues,
                                    const Tolerances& tol) {
    std::map<PKind, const PainleveState*> byKind;
    for (const PainleveState& s : states) {
        if (s.kind == PKind::I) {
            throw std::invalid_argument(
                "painleve::coalescence_table: I does not enter the "
                "degeneration scheme");
        }
        if (!byKind.emplace(s.kind, &s).second) {
            throw std::invalid_argument(
                "painleve::coalescence_table: duplicate state for kind " +
                kindName(s.kind));
        }
    }
    for (PKind k : {PKind::II, PKind::III, PKind::IV, PKind::V, PKind::VI}) {
        if (byKind.find(k) == byKind.end()) {
            throw std::invalid_argument(
                "painleve::coalescence_table: missing state for kind " +
                kindName(k));
        }
    }

    CoalescenceReport report;

    {  // II: direct frame, J4 at 0.
        const PainleveState& s = *byKind[PKind::II];
        CoalescenceRow row;
        row.kind = PKind::II;
        row.route = "direct";
        row.expected = canonicalSpec({{Cplx(0.0, 0.0), 4}});
        row.observed =
            observedSpec(okubo_data(PKind::II, s, tol).system().T, tol);
        checkPattern(row.kind, row.expected, row.observed, tol);
        report.rows.push_back(std::move(row));
    }
    {  // III: direct frame, J2(0) + J2(1).
        const PainleveState& s = *byKind[PKind::III];
        CoalescenceRow row;
        row.kind = PKind::III;
        row.route = "direct";
        row.expected =
            canonicalSpec({{Cplx(0.0, 0.0), 2}, {Cplx(1.0, 0.0), 2}});
        row.observed =
            observedSpec(okubo_data(PKind::III, s, tol).system().T, tol);
        checkPattern(row.kind, row.expected, row.observed, tol);
        report.rows.push_back(std::move(row));
    }
    {  // IV: realized rank-4 route, J3(0) + J1(t2).
        const PainleveState& s = *byKind[PKind::IV];
        CoalescenceRow row;
        row.kind = PKind::IV;
        row.route = "realized";
        row.expected = canonicalSpec({{Cplx(0.0, 0.0), 3}, {s.t2, 1}});
        const Realization real =
            minimize(realize(rank4_connection(PKind::IV, s)), tol);
        row.observed = observedSpec(real.S, tol);
        checkPattern(row.kind, row.expected, row.observed, tol);
        report.rows.push_back(std::move(row));
    }
    {  // V: realized rank-4 route, J2(1) + J1(0) + J1(t2).
        const PainleveState& s = *byKind[PKind::V];
        CoalescenceRow row;
        row.kind = PKind::V;
        row.route = "realized";
        row.expected = canonicalSpec(
            {{Cplx(1.0, 0.0), 2}, {Cplx(0.0, 0.0), 1}, {s.t2, 1}});
        const Realization real =
            minimize(realize(rank4_connection(PKind::V, s)), tol);
        row.observed = observedSpec(real.S, tol);
        checkPattern(row.kind, row.expected, row.observed, tol);
        report.rows.push_back(std::move(row));
    }
    {  // VI: realized route, four distinct simple eigenvalues.
        const PainleveState& s = *byKind[PKind::VI];
        CoalescenceRow row;
        row.kind = PKind::VI;
        row.route = "realized";
        const Cplx t1 = s.t * s.t2 / (s.t + s.t2 - 1.0);
        row.expected = canonicalSpec({{Cplx(0.0, 0.0), 1},
                                      {Cplx(1.0, 0.0), 1},
                                      {t1, 1},
                                      {s.t2, 1}});
        const Realization real = minimize(
            realize(linear_problem(viResidues, s.t, s.t2, tol)), tol);
        row.observed = observedSpec(real.S, tol);
        checkPattern(row.kind, row.expected, row.observed, tol);
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace okb
