// Adaptive embedded Dormand-Prince 5(4) integrator for complex state
// vectors over a real parameter.  Step-size control follows the usual
// weighted-RMS error estimate with a fifth-order accept rule.
#pragma once

#include "matkit.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace okb {

struct OdeOptions {
    double relTol = 1e-10;
    double absTol = 1e-12;
    double initialStep = 1e-2;
    double minStep = 1e-13;
    long maxSteps = 500000;
};

struct OdeFailure : std::runtime_error {
    explicit OdeFailure(const std::string& m) : std::runtime_error(m) {}
};

// Integrate dy/ds = f(s, y) from s0 to s1 (either direction).  `monitor`,
// when given, is called after every accepted step and may throw to abort
// (e.g. pole detection); it is also called once at the initial point.
inline CVector integrateOde(
    const std::function<CVector(double, const CVector&)>& f, double s0,
    double s1, CVector y, const OdeOptions& opt = {},
    const std::function<void(double, const CVector&)>& monitor = nullptr) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    if (s1 == s0) {
        if (monitor) monitor(s0, y);
        return y;
    }
    const double dir = (s1 > s0) ? 1.0 : -1.0;
    double s = s0;
    double h = dir * std::min(std::abs(opt.initialStep), std::abs(s1 - s0));
    if (monitor) monitor(s, y);

    CVector k1 = f(s, y);
    for (long step = 0; step < opt.maxSteps; ++step) {
        if (dir * (s - s1) >= 0.0) return y;
        if (dir * (s + h - s1) > 0.0) h = s1 - s;

        CVector y2 = y + h * (a21 * k1);
        CVector k2 = f(s + c2 * h, y2);
        CVector y3 = y + h * (a31 * k1 + a32 * k2);
        CVector k3 = f(s + c3 * h, y3);
        CVector y4 = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        CVector k4 = f(s + c4 * h, y4);
        CVector y5 = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        CVector k5 = f(s + c5 * h, y5);
        CVector y6 = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        CVector k6 = f(s + h, y6);
        CVector ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        CVector k7 = f(s + h, ynew);
        CVector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double rms = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            double sc = opt.absTol +
                        opt.relTol * std::max(std::abs(y(i)), std::abs(ynew(i)));
            double r = std::abs(err(i)) / sc;
            rms += r * r;
        }
        rms = std::sqrt(rms / static_cast<double>(std::max<Eigen::Index>(1, y.size())));

        if (rms <= 1.0) {
            s += h;
            y = std::move(ynew);
            k1 = std::move(k7);  // first-same-as-last
            if (monitor) monitor(s, y);
        }
        double factor = (rms > 0.0) ? 0.9 * std::pow(rms, -0.2) : 5.0;
        factor = std::min(5.0, std::max(0.2, factor));
        h *= factor;
        if (std::abs(h) < opt.minStep)
            throw OdeFailure("ode: step size underflow (stiffness or pole)");
    }
    throw OdeFailure("ode: step budget exhausted");
}

}  // namespace okb
