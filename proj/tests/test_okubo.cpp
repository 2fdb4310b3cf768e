#include <doctest.h>

#include "okubo.hpp"
#include "serialize.hpp"

#include <cmath>
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

CVector lambda3() {
    CVector lam(3);
    lam << Cplx(0.4), Cplx(-0.2), Cplx(0.1);
    return lam;
}

// A well-separated two-block frame (sizes 2 and 1) conjugated away from the
// normal form, recovered through canonical_frame.
ExtOkuboFrame sampleFrame() {
    std::mt19937_64 rng(2024);
    const CMatrix Z = assembleBlockToeplitz({2, 1}, {Cplx(0.5), Cplx(1.0), Cplx(-0.8)});
    const CMatrix Q = CMatrix::Identity(3, 3) + randomComplex(3, rng, 0.3);
    return canonical_frame(GOkuboSystem{conjugate(Q, Z), lambda3()});
}

std::vector<Cplx> shiftedTarget(const std::vector<Cplx>& z) {
    std::vector<Cplx> target = z;
    target[0] += Cplx(0.25, 0.15);
    target[1] += Cplx(-0.30, 0.10);
    target[2] += Cplx(0.35, -0.20);
    return target;
}

double fitSlope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const int n = static_cast<int>(xs.size());
    double mx = 0, my = 0;
    for (int i = 0; i < n; ++i) {
        mx += xs[static_cast<size_t>(i)];
        my += ys[static_cast<size_t>(i)];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sxx += (xs[static_cast<size_t>(i)] - mx) * (xs[static_cast<size_t>(i)] - mx);
        sxy += (xs[static_cast<size_t>(i)] - mx) * (ys[static_cast<size_t>(i)] - my);
    }
    return sxy / sxx;
}

}  // namespace

TEST_SUITE("okubo") {

TEST_CASE("canonical frame of a diagonal matrix") {
    CMatrix T = CMatrix::Zero(3, 3);
    T(1, 1) = 1.0;
    T(2, 2) = 5.0;
    auto frame = canonical_frame(GOkuboSystem{T, lambda3()});
    REQUIRE(frame.blocks == std::vector<int>({1, 1, 1}));
    CHECK(std::abs(frame.coord(0, 0) - Cplx(0.0)) < 1e-12);
    CHECK(std::abs(frame.coord(1, 0) - Cplx(1.0)) < 1e-12);
    CHECK(std::abs(frame.coord(2, 0) - Cplx(5.0)) < 1e-12);
    const CMatrix rec = frame.P * frame.assembleZ() * frame.P.fullPivLu().solve(CMatrix::Identity(3, 3));
    CHECK((rec - T).norm() < 1e-10);
}

TEST_CASE("canonical frame of the two-block normal form") {
    const CMatrix T = assembleBlockToeplitz({2, 2}, {Cplx(0.0), Cplx(1.0), Cplx(1.0), Cplx(1.0)});
    CVector lam(4);
    lam << Cplx(0.3), Cplx(0.3), Cplx(0.0), Cplx(0.0);
    auto frame = canonical_frame(GOkuboSystem{T, lam});
    REQUIRE(frame.blocks == std::vector<int>({2, 2}));
    CHECK(std::abs(frame.coord(0, 0) - Cplx(0.0)) < 1e-10);
    CHECK(std::abs(frame.coord(0, 1) - Cplx(1.0)) < 1e-10);
    CHECK(std::abs(frame.coord(1, 0) - Cplx(1.0)) < 1e-10);
    CHECK(std::abs(frame.coord(1, 1) - Cplx(1.0)) < 1e-10);
}

TEST_CASE("canonical frame recovers coordinates through conjugation") {
    std::mt19937_64 rng(99);
    const CMatrix Z = assembleBlockToeplitz({2, 1}, {Cplx(2.0, 1.0), Cplx(1.0), Cplx(-1.0)});
    const CMatrix Q = CMatrix::Identity(3, 3) + randomComplex(3, rng, 0.3);
    auto frame = canonical_frame(GOkuboSystem{conjugate(Q, Z), lambda3()});
    REQUIRE(frame.blocks == std::vector<int>({2, 1}));
    CHECK(std::abs(frame.coord(0, 0) - Cplx(2.0, 1.0)) < 1e-8);
    CHECK(std::abs(frame.coord(0, 1) - Cplx(1.0)) < 1e-8);
    CHECK(std::abs(frame.coord(1, 0) - Cplx(-1.0)) < 1e-8);
}

TEST_CASE("eigenvalue shared by two blocks is rejected") {
    CMatrix T = CMatrix::Zero(2, 2);
    T(0, 0) = 5.0;
    T(1, 1) = 5.0;
    CVector lam(2);
    lam << Cplx(0.25), Cplx(-0.4);
    CHECK_THROWS_AS(canonical_frame(GOkuboSystem{T, lam}), NotRegular);

    // Two nilpotent blocks sharing the eigenvalue zero.
    CMatrix S = CMatrix::Zero(7, 7);
    for (int i = 0; i < 3; ++i) S(i, i + 1) = 1.0;
    for (int i = 4; i < 6; ++i) S(i, i + 1) = 1.0;
    CVector lam7 = CVector::Zero(7);
    for (int i = 0; i < 7; ++i) lam7(i) = Cplx(0.1 * (i + 1));
    CHECK_THROWS_AS(canonical_frame(GOkuboSystem{S, lam7}), NotRegular);
}

TEST_CASE("many close pairs collapse the discriminant") {
    CMatrix T = CMatrix::Zero(4, 4);
    T(1, 1) = 1e-3;
    T(2, 2) = 2e-3;
    T(3, 3) = 1.0;
    CVector lam(4);
    lam << Cplx(0.3), Cplx(-0.2), Cplx(0.15), Cplx(0.45);
    CHECK_THROWS_AS(canonical_frame(GOkuboSystem{T, lam}), Degenerate);
}

TEST_CASE("direction data on a diagonal frame") {
    CMatrix T = CMatrix::Zero(3, 3);
    T(1, 1) = 1.0;
    T(2, 2) = 5.0;
    auto frame = canonical_frame(GOkuboSystem{T, lambda3()});
    auto data = direction_data(frame, 1, 0);
    CMatrix expected = CMatrix::Zero(3, 3);
    expected(1, 1) = -1.0;
    CHECK((data.omegaTilde - expected).norm() < 1e-10);
    // The dT weight on a diagonal entry is 1 + lambda_i - lambda_i = 1.
    CHECK((data.dT + expected).norm() < 1e-10);
    CHECK_THROWS_AS(direction_data(frame, 3, 0), IndexOutOfRange);
    CHECK_THROWS_AS(direction_data(frame, 1, 1), IndexOutOfRange);
}

TEST_CASE("direction data carries the exponent weights") {
    auto frame = sampleFrame();
    auto data = direction_data(frame, 0, 1);
    const CVector lam = frame.sys.lambda;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const Cplx w = Cplx(1.0) + lam(j) - lam(i);
            CHECK(std::abs(data.dT(i, j) + w * data.omegaTilde(i, j)) < 1e-12);
        }
}

TEST_CASE("identity extension returns the input frame") {
    auto frame = sampleFrame();
    auto path = extend_deformation(frame, frame.z);
    REQUIRE(path.size() == 1);
    CHECK((path.front().P - frame.P).norm() < 1e-14);
    CHECK((path.front().sys.T - frame.sys.T).norm() < 1e-12);
}

TEST_CASE("uniform translation of the leading coordinates shifts T by a scalar") {
    auto frame = sampleFrame();
    const Cplx c(0.7, -0.3);
    std::vector<Cplx> target = frame.z;
    target[static_cast<size_t>(frame.coordOffset(0))] += c;
    target[static_cast<size_t>(frame.coordOffset(1))] += c;
    auto path = extend_deformation(frame, target);
    const ExtOkuboFrame& last = path.back();
    CHECK((last.P - frame.P).norm() < 1e-9);
    const CMatrix expected = frame.sys.T + c * CMatrix::Identity(3, 3);
    CHECK((last.sys.T - expected).norm() < 1e-9);
}

TEST_CASE("deformation path satisfies the integrability residuals") {
    auto frame = sampleFrame();
    auto path = extend_deformation(frame, shiftedTarget(frame.z));
    REQUIRE(path.size() > 100);

    // Endpoint hits the requested coordinates.
    const ExtOkuboFrame& last = path.back();
    const std::vector<Cplx> target = shiftedTarget(frame.z);
    for (size_t i = 0; i < target.size(); ++i)
        CHECK(std::abs(last.z[i] - target[i]) < 1e-13);

    auto report = integrability_residuals(path);
    CHECK(report.maxCommute < 1e-10);
    CHECK(report.maxWedge < 1e-10);
    CHECK(report.maxCurl < 1e-6);
    CHECK(report.maxStructure < 1e-6);
    CHECK(!report.rows.empty());
}

TEST_CASE("constant path has vanishing residuals") {
    auto frame = sampleFrame();
    std::vector<ExtOkuboFrame> path{frame, frame, frame};
    auto report = integrability_residuals(path);
    CHECK(report.maxOverall() < 1e-12);
}

TEST_CASE("corrupting one sample is detected") {
    auto frame = sampleFrame();
    auto path = extend_deformation(frame, shiftedTarget(frame.z));
    path[path.size() / 2].sys.T(0, 1) += Cplx(1e-3);
    auto report = integrability_residuals(path);
    CHECK(report.maxOverall() > 1e-4);
}

TEST_CASE("deformation round trip returns to the start") {
    auto frame = sampleFrame();
    auto path = extend_deformation(frame, shiftedTarget(frame.z));
    auto back = extend_deformation(path.back(), frame.z);
    CHECK((back.back().sys.T - frame.sys.T).norm() < 1e-7);
    CHECK((back.back().P - frame.P).norm() < 1e-7);
}

TEST_CASE("pole collision aborts the extension") {
    auto frame = sampleFrame();
    // Drive the leading coordinate of the first block through the second.
    std::vector<Cplx> target = frame.z;
    target[static_cast<size_t>(frame.coordOffset(0))] = Cplx(-2.1);
    CHECK_THROWS_AS(extend_deformation(frame, target), PoleHit);
}

TEST_CASE("euler shift rejects resonant exponents") {
    CMatrix T = CMatrix::Zero(2, 2);
    T(0, 0) = 3.0;
    T(1, 1) = 7.0;
    CVector lam(2);
    lam << Cplx(1.0), Cplx(0.0);
    CHECK_THROWS_AS(euler_shift(GOkuboSystem{T, lam}, Cplx(1.0)), Resonant);
}

TEST_CASE("euler shift leaves the residual report unchanged") {
    auto frame = sampleFrame();
    auto path = extend_deformation(frame, shiftedTarget(frame.z));
    std::vector<ExtOkuboFrame> sub(path.begin() + 99, path.begin() + 102);
    auto before = integrability_residuals(sub);

    const Cplx lamShift(0.37, 0.2);
    std::vector<ExtOkuboFrame> shifted;
    for (const ExtOkuboFrame& f : sub)
        shifted.push_back(makeFrame(euler_shift(f.sys, lamShift), f.P, f.blocks, f.z, Tolerances{}));
    auto after = integrability_residuals(shifted);

    CHECK(std::abs(after.maxCommute - before.maxCommute) < 1e-9);
    CHECK(std::abs(after.maxWedge - before.maxWedge) < 1e-9);
    CHECK(std::abs(after.maxCurl - before.maxCurl) < 1e-9);
    CHECK(std::abs(after.maxStructure - before.maxStructure) < 1e-9);
    CHECK(std::abs(shifted.front().sys.lambda(0) - (lambda3()(0) + lamShift)) < 1e-14);
}

TEST_CASE("confluence frame closed form in size two") {
    const Cplx eps(0.01);
    auto [P, Zeps] = confluence_frame({Cplx(0.7), Cplx(1.3)}, eps);
    CHECK(std::abs(P(0, 0) - Cplx(1.0)) < 1e-14);
    CHECK(std::abs(P(0, 1) - Cplx(1.0) / eps) < 1e-10);
    CHECK(std::abs(P(1, 1) - Cplx(1.0)) < 1e-14);
    CHECK(std::abs(Zeps(0, 0) - Cplx(0.7)) < 1e-14);
    CHECK(std::abs(Zeps(1, 1) - (Cplx(0.7) + Cplx(1.3) * eps)) < 1e-14);
}

TEST_CASE("confluence frame rejects a vanishing subdiagonal coordinate") {
    CHECK_THROWS_AS(confluence_frame({Cplx(0.7), Cplx(0.0)}, Cplx(0.01)), ZeroSubdiagonal);
}

TEST_CASE("confluence frame converges at first order") {
    const std::vector<std::vector<Cplx>> cases = {
        {Cplx(0.7), Cplx(1.3)},
        {Cplx(0.7), Cplx(1.3), Cplx(-0.4)},
    };
    for (const auto& zBlock : cases) {
        const int m = static_cast<int>(zBlock.size());
        const CMatrix Z = assembleBlockToeplitz({m}, zBlock);
        std::vector<double> xs, ys;
        for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
            auto [P, Zeps] = confluence_frame(zBlock, Cplx(eps));
            // P is unit upper triangular; back substitution keeps the
            // inverse accurate even when the frame is badly conditioned.
            const CMatrix approx =
                P * Zeps * P.triangularView<Eigen::Upper>().solve(CMatrix::Identity(m, m));
            xs.push_back(std::log(eps));
            ys.push_back(std::log((approx - Z).norm()));
        }
        const double slope = fitSlope(xs, ys);
        CHECK(slope > 0.9);
        CHECK(slope < 1.1);
    }
}

TEST_CASE("rank reduction of a full-rank diagonal system") {
    CMatrix T = CMatrix::Zero(3, 3);
    T(0, 0) = 1.0;
    T(1, 1) = 2.0;
    T(2, 2) = 5.0;
    CVector lam(3);
    lam << Cplx(0.4), Cplx(0.9), Cplx(-0.3);
    auto conn = rank_reduce(GOkuboSystem{T, lam});
    REQUIRE(conn.m == 3);
    REQUIRE(conn.poles.size() == 3);
    const Cplx zp(0.3, 0.2);
    const CMatrix direct =
        -(zp * CMatrix::Identity(3, 3) - T).fullPivLu().solve(CMatrix(lam.asDiagonal()));
    CHECK((conn.evaluate(zp) - direct).norm() < 1e-12);
    CHECK((conn.rtilde() - CMatrix(lam.asDiagonal())).norm() < 1e-12);
}

TEST_CASE("rank reduction demands trailing zero exponents") {
    CMatrix T = CMatrix::Zero(3, 3);
    T(1, 1) = 1.0;
    T(2, 2) = 5.0;
    CVector lam(3);
    lam << Cplx(1.3), Cplx(0.0), Cplx(2.4);
    CHECK_THROWS_AS(rank_reduce(GOkuboSystem{T, lam}), BadSpectrum);
    CHECK_THROWS_AS(rank_reduce(GOkuboSystem{T, CVector::Zero(3)}), BadSpectrum);
}

TEST_CASE("rank reduction matches the resolvent formula on a defective frame") {
    auto frame = sampleFrame();
    CVector lam(3);
    lam << Cplx(0.6), Cplx(-0.9), Cplx(0.0);
    GOkuboSystem sys{frame.sys.T, lam};
    auto conn = rank_reduce(sys);
    REQUIRE(conn.m == 2);
    REQUIRE(conn.poles.size() == 2);

    // Independent route: -B (z - S)^{-1} C by direct linear solve.
    auto check = canonical_frame(sys);
    const CMatrix Pinv = check.P.fullPivLu().solve(CMatrix::Identity(3, 3));
    const CMatrix Rt = CMatrix(lam.head(2).asDiagonal());
    const CMatrix B = check.P.topRows(2);
    const CMatrix C = Pinv.leftCols(2) * Rt;
    const CMatrix S = check.assembleZ();
    for (Cplx zp : {Cplx(2.3, 1.1), Cplx(-0.4, 0.6)}) {
        const CMatrix direct = -B * (zp * CMatrix::Identity(3, 3) - S).fullPivLu().solve(C);
        CHECK((conn.evaluate(zp) - direct).norm() < 1e-10);
    }
    CHECK((conn.rtilde() - Rt).norm() < 1e-10);
}

TEST_CASE("frame JSON round trip is exact") {
    auto frame = sampleFrame();
    const std::string text = toJson(frame).dump();
    auto loaded = frameFromJson(Json::parse(text));
    CHECK((loaded.sys.T - frame.sys.T).norm() == 0.0);
    CHECK((loaded.P - frame.P).norm() == 0.0);
    CHECK(loaded.blocks == frame.blocks);
    for (size_t i = 0; i < frame.z.size(); ++i) CHECK(loaded.z[i] == frame.z[i]);

    auto sys = systemFromJson(Json::parse(toJson(frame.sys).dump()));
    CHECK((sys.lambda - frame.sys.lambda).norm() == 0.0);
}

TEST_CASE("residual report renders as CSV") {
    ResidualReport report;
    report.rows.push_back({0, "commute:(0,1)", 12.5, 1e-9});
    report.rows.push_back({1, "structure:path", 3.0, 0.5});
    const std::string csv = residualCsv(report);
    CHECK(csv == "sample,direction,condition,residual\n"
                 "0,\"commute:(0,1)\",12.5,1e-09\n"
                 "1,\"structure:path\",3,0.5\n");
}

TEST_CASE("non-resonance predicate") {
    CVector lam(2);
    lam << Cplx(0.4), Cplx(-0.2);
    CHECK(nonResonant(lam));
    lam << Cplx(1.5), Cplx(0.5);
    CHECK(!nonResonant(lam));
    lam << Cplx(0.3), Cplx(0.3);  // difference zero is allowed
    CHECK(nonResonant(lam));
}

}  // TEST_SUITE
