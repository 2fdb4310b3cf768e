#include <doctest.h>

#include "matkit.hpp"
#include "ode.hpp"

#include <algorithm>
#include <random>

using namespace okb;

namespace {

CMatrix conjugate(const CMatrix& Q, const CMatrix& J) {
    return Q * J * Q.fullPivLu().solve(CMatrix::Identity(J.rows(), J.cols()));
}

CMatrix randomComplex(int n, std::mt19937_64& rng, double amp) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CMatrix M(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) M(i, j) = Cplx(amp * u(rng), amp * u(rng));
    return M;
}

void sortCanonical(JordanSpec& s) {
    const double tau = 1e-7;  // dead band mirroring the library's ordering
    std::sort(s.blocks.begin(), s.blocks.end(),
              [tau](const JordanBlock& a, const JordanBlock& b) {
                  if (a.size != b.size) return a.size > b.size;
                  const Cplx ea = a.eigenvalue, eb = b.eigenvalue;
                  if (std::abs(ea.real() - eb.real()) > tau)
                      return ea.real() < eb.real();
                  if (std::abs(ea.imag() - eb.imag()) > tau)
                      return ea.imag() < eb.imag();
                  return false;
              });
}

}  // namespace

TEST_SUITE("matkit") {

TEST_CASE("jordanize: diagonal matrix gives unit blocks") {
    CMatrix M = CMatrix::Zero(3, 3);
    M(0, 0) = 1.0;
    M(1, 1) = 2.0;
    M(2, 2) = 5.0;
    auto res = jordanize(M);
    REQUIRE(res.spec.blocks.size() == 3);
    CHECK(res.spec.sizeSignature() == "[1,1,1]");
    CHECK(std::abs(res.spec.blocks[0].eigenvalue - Cplx(1.0)) < 1e-12);
    CHECK(std::abs(res.spec.blocks[1].eigenvalue - Cplx(2.0)) < 1e-12);
    CHECK(std::abs(res.spec.blocks[2].eigenvalue - Cplx(5.0)) < 1e-12);
    CHECK(res.residual < 1e-12);
}

TEST_CASE("jordanize: nilpotent upper shift is one full block") {
    CMatrix M = CMatrix::Zero(4, 4);
    for (int i = 0; i < 3; ++i) M(i, i + 1) = 1.0;
    auto res = jordanize(M);
    REQUIRE(res.spec.blocks.size() == 1);
    CHECK(res.spec.blocks[0].size == 4);
    CHECK(std::abs(res.spec.blocks[0].eigenvalue) < 1e-10);
    CHECK(res.residual < 1e-10);
}

TEST_CASE("jordanize: random similarity recovers the block inventory") {
    std::mt19937_64 rng(421);
    JordanSpec want;
    want.blocks = {{Cplx(1.0, 0.0), 2},
                   {Cplx(-0.5, 0.25), 2},
                   {Cplx(4.0, 0.0), 1}};
    sortCanonical(want);
    CMatrix J = jordanMatrix(want);
    CMatrix Q = CMatrix::Identity(5, 5) + randomComplex(5, rng, 0.3);
    CMatrix M = conjugate(Q, J);
    auto res = jordanize(M);
    CHECK(res.spec.sameShape(want, 1e-6));
    CHECK(res.residual < 1e-8);
    // P itself must reproduce M through its own Jordan matrix.
    CMatrix Jr = jordanMatrix(res.spec);
    CMatrix recon = conjugate(res.P, Jr);
    CHECK((recon - M).norm() / M.norm() < 1e-8);
}

TEST_CASE("jordanize: similarity equivariance across random specs") {
    std::mt19937_64 rng(777);
    std::uniform_int_distribution<int> dimPick(2, 8);
    std::uniform_int_distribution<int> evPick(0, 4);
    for (int trial = 0; trial < 24; ++trial) {
        int N = dimPick(rng);
        JordanSpec spec;
        int rem = N;
        while (rem > 0) {
            std::uniform_int_distribution<int> sz(1, std::min(3, rem));
            int s = sz(rng);
            Cplx ev(static_cast<double>(evPick(rng)) - 2.0,
                    (evPick(rng) % 2) ? 1.0 : 0.0);
            spec.blocks.push_back({ev, s});
            rem -= s;
        }
        sortCanonical(spec);
        CMatrix J = jordanMatrix(spec);
        CMatrix Q = CMatrix::Identity(N, N) + randomComplex(N, rng, 0.25);
        CMatrix M = conjugate(Q, J);
        auto res = jordanize(M);
        CAPTURE(trial);
        CAPTURE(spec.sizeSignature());
        CHECK(res.spec.sameShape(spec, 1e-5));
    }
}

TEST_CASE("jordanize: twin defective pairs with a small gap stay separate") {
    JordanSpec want;
    want.blocks = {{Cplx(0.0), 2}, {Cplx(1e-5), 2}};
    CMatrix J = jordanMatrix(want);
    auto res = jordanize(J);
    CHECK(res.spec.sameShape(want, 1e-9));

    std::mt19937_64 rng(5);
    CMatrix Q = CMatrix::Identity(4, 4) + randomComplex(4, rng, 0.2);
    auto res2 = jordanize(conjugate(Q, J));
    CHECK(res2.spec.sameShape(want, 1e-7));
}

TEST_CASE("jordanize: sub-tolerance eigenvalue gap raises ambiguity") {
    CMatrix M = CMatrix::Zero(3, 3);
    M(0, 0) = 1.0;
    M(1, 1) = 1.0 + 2e-9;
    M(2, 2) = 5.0;
    CHECK_THROWS_AS(jordanize(M), ClusterAmbiguity);
}

TEST_CASE("jordanize: exactly repeated eigenvalues merge without complaint") {
    CMatrix M = CMatrix::Zero(3, 3);
    M(0, 0) = 1.0;
    M(1, 1) = 1.0;
    M(2, 2) = 5.0;
    auto res = jordanize(M);
    CHECK(res.spec.sizeSignature() == "[1,1,1]");
    CHECK(res.spec.distinctEigenvalues(1e-8) == 2);
}

TEST_CASE("jordanize: rejects non-finite input") {
    CMatrix M = CMatrix::Zero(2, 2);
    M(0, 1) = Cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
    CHECK_THROWS_AS(jordanize(M), std::invalid_argument);
}

TEST_CASE("sylvester gauge: diagonal closed form and minimum norm") {
    CMatrix T = CMatrix::Zero(3, 3);
    T(0, 0) = 2.0;
    T(1, 1) = -1.0;
    T(2, 2) = 0.5;
    std::mt19937_64 rng(99);
    CMatrix R = randomComplex(3, rng, 1.0);
    for (int i = 0; i < 3; ++i) R(i, i) = 0.0;  // range of ad_T excludes diag
    CMatrix X = solve_sylvester_gauge(T, R);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (i == j) {
                CHECK(std::abs(X(i, j)) < 1e-10);  // orthogonal to kernel
            } else {
                Cplx expect = R(i, j) / (T(j, j) - T(i, i));
                CHECK(std::abs(X(i, j) - expect) < 1e-10);
            }
        }
}

TEST_CASE("sylvester gauge: inconsistent right-hand side throws") {
    CMatrix T = CMatrix::Zero(2, 2);
    T(0, 0) = 1.0;
    T(1, 1) = 3.0;
    CHECK_THROWS_AS(solve_sylvester_gauge(T, CMatrix::Identity(2, 2)),
                    Inconsistent);
}

TEST_CASE("sylvester gauge: agrees with a dense pseudo-inverse oracle") {
    JordanSpec spec;
    spec.blocks = {{Cplx(0.0), 2}, {Cplx(3.0), 1}};
    CMatrix T = jordanMatrix(spec);
    const int N = 3;

    // Independent oracle: assemble ad_T column by column on basis matrices
    // and solve with an SVD pseudo-inverse (minimum-norm least squares).
    CMatrix K(N * N, N * N);
    for (int a = 0; a < N * N; ++a) {
        CMatrix E = CMatrix::Zero(N, N);
        E(a % N, a / N) = 1.0;
        CMatrix C = E * T - T * E;
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i) K(i + N * j, a) = C(i, j);
    }
    // A right-hand side guaranteed to be in the range of ad_T.
    std::mt19937_64 rng(7);
    CMatrix Y = randomComplex(N, rng, 1.0);
    CMatrix R = Y * T - T * Y;

    Eigen::JacobiSVD<CMatrix> svd(K, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    CVector vecR(N * N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) vecR(i + N * j) = R(i, j);
    CVector x = svd.solve(vecR);
    CMatrix Xoracle(N, N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) Xoracle(i, j) = x(i + N * j);

    CMatrix X = solve_sylvester_gauge(T, R);
    CHECK((X - Xoracle).norm() < 1e-9);

    // Minimum-norm solution is Frobenius-orthogonal to ker(ad_T); for this
    // nonderogatory T the kernel is spanned by {I, T, T^2}.
    for (int p = 0; p < 3; ++p) {
        CMatrix Q = CMatrix::Identity(N, N);
        for (int k = 0; k < p; ++k) Q = Q * T;
        CHECK(std::abs((X.adjoint() * Q).trace()) < 1e-9);
    }
}

TEST_CASE("ode: linear growth and rotation at tight tolerance") {
    auto expFlow = [](double, const CVector& y) { return y; };
    CVector y0(1);
    y0(0) = Cplx(1.0, 0.5);
    CVector y1 = integrateOde(expFlow, 0.0, 1.0, y0);
    CHECK(std::abs(y1(0) - std::exp(1.0) * y0(0)) < 1e-9 * std::abs(y0(0)));

    auto rot = [](double, const CVector& y) {
        return (Cplx(0.0, 1.0) * y.array()).matrix().eval();
    };
    CVector z1 = integrateOde(rot, 0.0, 50.0, y0);
    CHECK(std::abs(std::abs(z1(0)) - std::abs(y0(0))) < 1e-7);
    // Backward integration returns to the start.
    CVector back = integrateOde(rot, 50.0, 0.0, z1);
    CHECK(std::abs(back(0) - y0(0)) < 1e-7);
}

TEST_CASE("ode: monitor can abort the integration") {
    auto f = [](double, const CVector& y) { return y; };
    CVector y0 = CVector::Ones(1);
    auto monitor = [](double, const CVector& y) {
        if (std::abs(y(0)) > 5.0) throw OdeFailure("blown past guard");
    };
    CHECK_THROWS_AS(integrateOde(f, 0.0, 10.0, y0, {}, monitor), OdeFailure);
}

}  // TEST_SUITE
