// The transcription tables.  Every matrix entry below is copied from the
// published formulas; no derived logic lives here.  The companion rendering
// test evaluates these tables at a fixed reference state and diffs the
// output against an independently generated golden file, so any edit that
// changes a value will fail loudly.
#include "painleve_data.hpp"

namespace okb::data {
namespace {

// Conjugation by diag(u, 1), written entrywise.
CMatrix conjU(Cplx u, const CMatrix& M) {
    CMatrix out(2, 2);
    out << M(0, 0), M(0, 1) / u,
           M(1, 0) * u, M(1, 1);
    return out;
}

CMatrix mat2(Cplx a, Cplx b, Cplx c, Cplx d) {
    CMatrix out(2, 2);
    out << a, b, c, d;
    return out;
}

}  // namespace

// Second equation ------------------------------------------------------------

Coeffs2 coeffsII(Cplx q, Cplx p, Cplx u, Cplx t, Cplx thetaInf2) {
    Coeffs2 c;
    c.A0 = mat2(0.0, 0.0,
                0.0, 1.0);
    c.A1 = conjU(u, mat2(0.0, 1.0,
                         p, 0.0));
    c.A2 = conjU(u, mat2(p, -q,
                         p * q - thetaInf2, -p + t));
    return c;
}

CMatrix frameII(Cplx q, Cplx p, Cplx u, Cplx t, Cplx thetaInf2) {
    const Cplx th2 = thetaInf2;
    CMatrix g(4, 4);
    g << -q * u, (q / th2) * (q * q - p + t) + 1.0, 0.0, q * (p - q * q - t),
         u, (p - q * q - t) / th2, 0.0, q * q - p + t,
         -p * u / th2, q / th2, 1.0, 0.0,
         0.0, -1.0 / th2, 0.0, 1.0;
    return g;
}

CMatrix structureII() {
    CMatrix s(4, 4);
    s << 0.0, 1.0, 0.0, 0.0,
         0.0, 0.0, 1.0, 0.0,
         0.0, 0.0, 0.0, 1.0,
         0.0, 0.0, 0.0, 0.0;
    return s;
}

CVector exponentsII(Cplx thetaInf2) {
    CVector lam(4);
    lam << -thetaInf2, -thetaInf2, 0.0, 0.0;
    return lam;
}

// Third equation -------------------------------------------------------------

Coeffs2 coeffsIII(Cplx q, Cplx p, Cplx u, Cplx t, Cplx thetaInf1,
                  Cplx thetaInf2) {
    const Cplx th1 = thetaInf1;
    const Cplx th2 = thetaInf2;
    Coeffs2 c;
    c.A0 = mat2(-1.0, 0.0,
                0.0, 0.0);
    const Cplx r = (p * q - th2) * (p - 1.0) + th1 * p;
    c.A1 = conjU(u, mat2(-th1, -q,
                         -r, -th2));
    c.A2 = conjU(u, mat2(1.0 * (t * (1.0 - p)), 1.0 * t,
                         p * (t * (1.0 - p)), p * t));
    return c;
}

CMatrix frameIII(Cplx q, Cplx p, Cplx u, Cplx t, Cplx thetaInf1,
                 Cplx thetaInf2) {
    const Cplx th1 = thetaInf1;
    const Cplx th2 = thetaInf2;
    CMatrix g(4, 4);
    g << th1 * u, q, -p * q - th1 + th2, q * (p * q - th2) / t,
         (1.0 - p) * t * u, t, -t, p * q,
         0.0, q / u, -p * q / u, q * (p * q - th2) / (t * u),
         1.0, 0.0, -1.0 / u, 0.0;
    return g;
}

CMatrix structureIII() {
    CMatrix s(4, 4);
    s << 0.0, 1.0, 0.0, 0.0,
         0.0, 0.0, 0.0, 0.0,
         0.0, 0.0, 1.0, 1.0,
         0.0, 0.0, 0.0, 1.0;
    return s;
}

CVector exponentsIII(Cplx thetaInf2) {
    CVector lam(4);
    lam << thetaInf2, thetaInf2, 0.0, 0.0;
    return lam;
}

// Fourth equation ------------------------------------------------------------

Coeffs2 coeffsIV(Cplx q, Cplx p, Cplx u, Cplx t, Cplx thetaInf1,
                 Cplx thetaInf2) {
    const Cplx th1 = thetaInf1;
    const Cplx th2 = thetaInf2;
    const Cplx th12 = th1 - th2;
    const Cplx s = 1.0 / th12;
    Coeffs2 c;
    c.A0 = conjU(u, mat2(s * (p * q), s * (p * 1.0),
                         s * ((-p * q + th12) * q), s * ((-p * q + th12) * 1.0)));
    const Cplx in11 = p * q * (p - q - t) - th12 * p + th1 * q;
    const Cplx in21 =
        (p * q - th12) * (-p * q + t * q + th12) + (p * q - th1) * q * q;
    c.A1 = conjU(u, mat2(s * in11, s * (p * (p - q - t) + th1),
                         s * in21, s * (th12 * t - in11)));
    c.A2 = mat2(-th1, 0.0,
                0.0, -th2);
    return c;
}

CMatrix residueIV(Cplx q, Cplx p, Cplx t, Cplx thetaInf1, Cplx thetaInf2) {
    const Cplx th1 = thetaInf1;
    const Cplx th2 = thetaInf2;
    CMatrix c(3, 3);
    c << 0.0, (q + t) * (p * q - th1), -p * (q + t) * (p * q - th1 + th2),
         0.0, p * q - th1, -p * (p * q - th1 + th2),
         1.0, -t, -p * q - th2;
    return c;
}

CMatrix structureIV() {
    CMatrix s(3, 3);
    s << 0.0, 1.0, 0.0,
         0.0, 0.0, 1.0,
         0.0, 0.0, 0.0;
    return s;
}

// Fifth equation -------------------------------------------------------------

Coeffs2 coeffsV(Cplx q, Cplx p, Cplx u, Cplx t, Cplx theta0, Cplx thetaInf1,
                Cplx thetaInf2) {
    const Cplx th0 = theta0;
    const Cplx th1i = thetaInf1;
    const Cplx th2i = thetaInf2;
    const Cplx th12 = th1i - th2i;
    const Cplx s = 1.0 / th12;
    Coeffs2 c;
    const Cplx col00 = p * q + th12;
    const Cplx col01 = -p;
    const Cplx row00 = p * (q - 1.0) + th0;
    const Cplx row01 = (p * q + th12) * (q - 1.0) + th0 * q;
    c.A0 = conjU(u, mat2(s * (col00 * row00), s * (col00 * row01),
                         s * (col01 * row00), s * (col01 * row01)));
    const Cplx m = -(t / th12);
    const Cplx col10 = (p * q - th2i) * (q - 1.0) - th1i;
    const Cplx col11 = p * (1.0 - q) + th2i;
    c.A1 = conjU(u, mat2(m * (col10 * 1.0), m * (col10 * q),
                         m * (col11 * 1.0), m * (col11 * q)));
    c.A2 = mat2(-1.0 * c.A0(0, 0) - th1i, -1.0 * c.A0(0, 1) + 0.0,
                -1.0 * c.A0(1, 0) + 0.0, -1.0 * c.A0(1, 1) - th2i);
    return c;
}

CMatrix residueV(Cplx q, Cplx p, Cplx t, Cplx theta0, Cplx thetaInf1,
                 Cplx thetaInf2) {
    const Cplx th0 = theta0;
    const Cplx th1i = thetaInf1;
    const Cplx th2i = thetaInf2;
    const Cplx th1 = -th0 - th1i - th2i;
    const CMatrix a2 = coeffsV(q, p, 1.0, t, th0, th1i, th2i).A2;
    const Cplx det2 = a2(0, 0) * a2(1, 1) - a2(0, 1) * a2(1, 0);
    const Cplx c32 =
        (q - 1.0) * (q * (q - 1.0) * p * p
                     + (th2i - th1i - (th1 + 2.0 * th2i) * q) * p
                     + th2i * (th1 + th2i));
    CMatrix c(3, 3);
    c << th1, -det2 / t, -(p * q - th1 - th2i) / t,
         t, 0.0, 1.0,
         t * (p * q * (q - 1.0) - th1 - th1i - th2i * q), c32, th0;
    return c;
}

CMatrix structureV() {
    CMatrix s(3, 3);
    s << 1.0, 1.0, 0.0,
         0.0, 1.0, 0.0,
         0.0, 0.0, 0.0;
    return s;
}

// First equation -------------------------------------------------------------

Coeffs2 coeffsI(Cplx q, Cplx p, Cplx t) {
    Coeffs2 c;
    c.A0 = mat2(0.0, 1.0,
                0.0, 0.0);
    c.A1 = mat2(0.0, q,
                1.0, 0.0);
    c.A2 = mat2(-p, q * q + t,
                -q, p);
    return c;
}

CMatrix frameI(Cplx q, Cplx p, Cplx t, Cplx lambda) {
    const Cplx lam = lambda;
    CMatrix g(7, 7);
    g << lam, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
         -p, q * q + t, p, lam, 0.0, -q * q - t, 0.0,
         0.0, q, 0.0, 0.0, lam, -q, 0.0,
         0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0,
         0.0, lam, 0.0, 0.0, 0.0, 0.0, 0.0,
         -q, p, q, 0.0, 0.0, -p, lam,
         1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0;
    return g;
}

CMatrix structureI() {
    CMatrix s = CMatrix::Zero(7, 7);
    s(0, 1) = 1.0;
    s(1, 2) = 1.0;
    s(2, 3) = 1.0;
    s(4, 5) = 1.0;
    s(5, 6) = 1.0;
    return s;
}

CVector exponentsI(Cplx lambda) {
    CVector lam(7);
    lam << lambda, lambda, 0.0, 0.0, 0.0, 0.0, 0.0;
    return lam;
}

}  // namespace okb::data
