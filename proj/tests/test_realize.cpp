#include <doctest.h>

#include "realize.hpp"
#include "serialize.hpp"

#include <cmath>
#include <random>

using namespace okb;

namespace {

CMatrix randomComplex(int n, int m, std::mt19937_64& rng, double amp) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CMatrix M(n, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i) M(i, j) = Cplx(amp * u(rng), amp * u(rng));
    return M;
}

// Random m x m connection over the given pole orders, with the residue at
// infinity forced to a diagonal matrix whose entries stay away from zero.
RationalConnection randomConnection(int m, const std::vector<int>& orders,
                                    std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RationalConnection conn;
    conn.m = m;
    for (size_t k = 0; k < orders.size(); ++k) {
        RationalPole p;
        p.a = Cplx(static_cast<double>(2 * k) + 0.4 * u(rng), 0.4 * u(rng));
        p.r = orders[k];
        for (int l = 0; l <= p.r; ++l) p.A.push_back(randomComplex(m, m, rng, 1.0));
        conn.poles.push_back(std::move(p));
    }
    CMatrix D = CMatrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        const double s = u(rng) >= 0.0 ? 1.0 : -1.0;
        D(i, i) = Cplx(s * (0.8 + 0.6 * std::abs(u(rng))), 0.3 * u(rng));
    }
    // Adjust the leading coefficient of the last pole so the residues sum
    // to -D.
    CMatrix acc = CMatrix::Zero(m, m);
    for (size_t k = 0; k + 1 < conn.poles.size(); ++k) acc += conn.poles[k].A[0];
    conn.poles.back().A[0] = -D - acc;
    return conn;
}

CMatrix partialFractions(const RationalConnection& conn, Cplx z) { return conn.evaluate(z); }

std::vector<Cplx> probePoints(const RationalConnection& conn, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Cplx> probes;
    while (probes.size() < 10) {
        const Cplx z(3.0 * u(rng), 3.0 * u(rng));
        bool good = true;
        for (const RationalPole& p : conn.poles)
            if (std::abs(z - p.a) < 0.4) good = false;
        if (good) probes.push_back(z);
    }
    return probes;
}

double maxProbeError(const RationalConnection& conn, const Realization& real,
                     std::mt19937_64& rng) {
    double worst = 0.0;
    for (Cplx z : probePoints(conn, rng)) {
        const CMatrix want = partialFractions(conn, z);
        const double err = (real.evaluate(z) - want).norm() / normScale(want.norm());
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace

TEST_SUITE("realize") {

TEST_CASE("single simple pole has the closed-form realization") {
    RationalConnection conn;
    conn.m = 2;
    RationalPole p;
    p.a = Cplx(1.5, -0.5);
    p.r = 0;
    CMatrix A = CMatrix::Zero(2, 2);
    A(0, 0) = Cplx(2.0);
    A(1, 1) = Cplx(-0.7);
    p.A.push_back(A);
    conn.poles.push_back(p);

    auto real = realize(conn);
    REQUIRE(real.size() == 2);
    CHECK((real.S - p.a * CMatrix::Identity(2, 2)).norm() < 1e-14);
    CHECK((real.B + A).norm() < 1e-14);
    CHECK((real.C - CMatrix::Identity(2, 2)).norm() < 1e-14);
    CHECK(std::abs(real.lambdaOut(0) - Cplx(-2.0)) < 1e-14);
    CHECK(std::abs(real.lambdaOut(1) - Cplx(0.7)) < 1e-14);
}

TEST_CASE("two-pole connection is realized to probe accuracy") {
    std::mt19937_64 rng(314);
    auto conn = randomConnection(2, {1, 0}, rng);
    auto real = realize(conn);
    REQUIRE(real.size() == 6);
    CHECK(maxProbeError(conn, real, rng) < 1e-10);

    // Frame invariants.
    const int N = real.size();
    const CMatrix Ginv =
        real.G.partialPivLu().solve(CMatrix::Identity(N, N));
    CHECK((real.G * Ginv - CMatrix::Identity(N, N)).norm() < 1e-10);
    CHECK((Ginv.topRows(2) - real.B).norm() < 1e-9);
    CMatrix Rt = CMatrix::Zero(2, 2);
    for (const RationalPole& p : conn.poles) Rt -= p.A[0];
    CHECK((real.B * real.C - Rt).norm() < 1e-12);
}

TEST_CASE("zero residue entry at infinity is rejected") {
    RationalConnection conn;
    conn.m = 2;
    RationalPole p;
    p.a = Cplx(0.0);
    p.r = 0;
    CMatrix A = CMatrix::Zero(2, 2);
    A(0, 0) = Cplx(1.3);  // second diagonal entry of Rtilde vanishes
    p.A.push_back(A);
    conn.poles.push_back(p);
    CHECK_THROWS_AS(realize(conn), SingularRtilde);
}

TEST_CASE("minimize leaves a minimal realization unchanged") {
    std::mt19937_64 rng(11);
    auto conn = randomConnection(2, {0}, rng);
    auto real = realize(conn);  // N = m: already minimal
    auto min = minimize(real);
    CHECK(min.size() == real.size());
    CHECK((min.S - real.S).norm() < 1e-14);
    CHECK((min.B - real.B).norm() < 1e-14);
    CHECK(min.minimal);
}

TEST_CASE("padding with unreachable states is undone by minimize") {
    std::mt19937_64 rng(21);
    auto conn = randomConnection(2, {1, 0}, rng);
    auto base = minimize(realize(conn));
    const int N = base.size();

    Realization padded;
    padded.S = CMatrix::Zero(N + 2, N + 2);
    padded.S.topLeftCorner(N, N) = base.S;
    padded.S(N, N) = Cplx(5.5);
    padded.S(N + 1, N + 1) = Cplx(-3.3);
    padded.B = CMatrix::Zero(2, N + 2);
    padded.B.leftCols(N) = base.B;
    padded.C = CMatrix::Zero(N + 2, 2);
    padded.C.topRows(N) = base.C;
    padded.G = CMatrix::Zero(N + 2, N + 2);
    // The padded frame keeps the C-columns first, then the old completion,
    // then the new kernel directions.
    padded.G.topLeftCorner(N, 2) = base.G.leftCols(2);
    padded.G.block(0, 2, N, N - 2) = base.G.rightCols(N - 2);
    padded.G(N, N) = 1.0;
    padded.G(N + 1, N + 1) = 1.0;
    padded.lambdaOut = CVector::Zero(N + 2);
    padded.lambdaOut.head(N) = base.lambdaOut;

    auto min = minimize(padded);
    CHECK(min.size() == N);
    CHECK(maxProbeError(conn, min, rng) < 1e-9);
}

TEST_CASE("rank decision near the cutoff is flagged") {
    std::mt19937_64 rng(31);
    auto conn = randomConnection(2, {0}, rng);
    auto base = realize(conn);
    const int N = base.size();

    // One extra state reachable only at the 1e-8 level: right at the
    // relative rank cutoff.
    Realization padded;
    padded.S = CMatrix::Zero(N + 1, N + 1);
    padded.S.topLeftCorner(N, N) = base.S;
    padded.S(N, N) = Cplx(4.4);
    padded.B = CMatrix::Zero(2, N + 1);
    padded.B.leftCols(N) = base.B;
    padded.C = CMatrix::Zero(N + 1, 2);
    padded.C.topRows(N) = base.C;
    padded.C(N, 0) = Cplx(1e-8);
    padded.G = base.G;  // unused by minimize
    padded.lambdaOut = CVector::Zero(N + 1);
    padded.lambdaOut.head(N) = base.lambdaOut;

    CHECK_THROWS_AS(minimize(padded), RankAmbiguity);
}

TEST_CASE("identity-frame realization converts to T = S") {
    Realization real;
    real.S = CMatrix::Zero(2, 2);
    real.S(0, 0) = Cplx(1.0);
    real.S(1, 1) = Cplx(2.0);
    real.B = CMatrix::Identity(2, 2);
    real.C = CMatrix::Identity(2, 2);
    real.G = CMatrix::Identity(2, 2);
    real.lambdaOut = CVector::Zero(2);
    real.lambdaOut(0) = Cplx(0.5);
    real.lambdaOut(1) = Cplx(-0.5);
    auto sys = to_okubo(real);
    CHECK((sys.T - real.S).norm() < 1e-14);
    CHECK((sys.lambda - real.lambdaOut).norm() < 1e-14);
}

TEST_CASE("realization oracle over random connections") {
    std::mt19937_64 rng(2718);
    const std::vector<std::pair<int, std::vector<int>>> shapes = {
        {1, {0}},    {1, {1}},       {2, {0}},    {2, {1}},
        {2, {0, 0}}, {2, {1, 0}},    {3, {0}},    {3, {1}},
        {2, {0, 1}}, {2, {0, 0, 0}}, {3, {0, 0}}, {3, {2}},
    };
    for (int trial = 0; trial < 100; ++trial) {
        const auto& [m, orders] = shapes[static_cast<size_t>(trial) % shapes.size()];
        auto conn = randomConnection(m, orders, rng);
        auto real = realize(conn);
        CHECK(maxProbeError(conn, real, rng) < 1e-10);

        auto min = minimize(real);
        CHECK(maxProbeError(conn, min, rng) < 1e-9);

        auto again = minimize(min);
        CHECK(again.size() == min.size());

        // Round trip through the Okubo reduction.
        auto conn2 = rank_reduce(to_okubo(real), Tolerances{});
        REQUIRE(conn2.poles.size() == conn.poles.size());
        for (const RationalPole& p : conn.poles) {
            const RationalPole* match = nullptr;
            for (const RationalPole& q : conn2.poles)
                if (std::abs(q.a - p.a) < 1e-7) match = &q;
            REQUIRE(match != nullptr);
            REQUIRE(match->r == p.r);
            for (int l = 0; l <= p.r; ++l) {
                const double err = (match->A[static_cast<size_t>(l)] - p.A[static_cast<size_t>(l)]).norm() /
                                   normScale(p.A[static_cast<size_t>(l)].norm());
                CHECK(err < 1e-9);
            }
        }
    }
}

TEST_CASE("connection and realization JSON round trips are exact") {
    std::mt19937_64 rng(777);
    auto conn = randomConnection(2, {1, 0}, rng);
    auto loaded = connectionFromJson(Json::parse(toJson(conn).dump()));
    REQUIRE(loaded.poles.size() == conn.poles.size());
    for (size_t k = 0; k < conn.poles.size(); ++k) {
        CHECK(loaded.poles[k].a == conn.poles[k].a);
        CHECK(loaded.poles[k].r == conn.poles[k].r);
        for (size_t l = 0; l < conn.poles[k].A.size(); ++l)
            CHECK((loaded.poles[k].A[l] - conn.poles[k].A[l]).norm() == 0.0);
    }

    auto real = realize(conn);
    auto real2 = realizationFromJson(Json::parse(toJson(real).dump()));
    CHECK((real2.S - real.S).norm() == 0.0);
    CHECK((real2.B - real.B).norm() == 0.0);
    CHECK((real2.C - real.C).norm() == 0.0);
    CHECK((real2.G - real.G).norm() == 0.0);
    CHECK((real2.lambdaOut - real.lambdaOut).norm() == 0.0);
    CHECK(real2.minimal == real.minimal);
}

TEST_CASE("two minimizations agree on the Jordan shape") {
    std::mt19937_64 rng(555);
    auto conn = randomConnection(2, {1, 0}, rng);
    auto minA = minimize(realize(conn));
    // Re-realize from the reduced connection and minimize again.
    auto conn2 = rank_reduce(to_okubo(minA), Tolerances{});
    auto minB = minimize(realize(conn2));
    CHECK(minA.size() == minB.size());
    auto specA = jordanize(minA.S).spec;
    auto specB = jordanize(minB.S).spec;
    CHECK(specA.sameShape(specB, 1e-6));
    std::mt19937_64 rng2(556);
    CHECK(maxProbeError(conn, minB, rng2) < 1e-8);
}

}  // TEST_SUITE
