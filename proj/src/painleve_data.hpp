// Transcribed coefficient tables for the explicit 2x2 linear problems, the
// 3x3 residue matrices, and the Okubo frames of the Painleve machinery.
// Everything declared here is pure data entry, implemented in one place
// (painleve_data.cpp) and covered by a rendering test that diffs the
// evaluated tables against a golden text file produced independently.
#pragma once

#include "matkit.hpp"

namespace okb::data {

// The three 2x2 coefficient matrices of a linear problem.
struct Coeffs2 {
    CMatrix A0;
    CMatrix A1;
    CMatrix A2;
};

// Second equation: coefficients, 4x4 frame G, Jordan component S, exponents.
Coeffs2 coeffsII(Cplx q, Cplx p, Cplx u, Cplx t, Cplx thetaInf2);
CMatrix frameII(Cplx q, Cplx p, Cplx u, Cplx t, Cplx thetaInf2);
CMatrix structureII();
CVector exponentsII(Cplx thetaInf2);

// Third equation.
Coeffs2 coeffsIII(Cplx q, Cplx p, Cplx u, Cplx t, Cplx thetaInf1,
                  Cplx thetaInf2);
CMatrix frameIII(Cplx q, Cplx p, Cplx u, Cplx t, Cplx thetaInf1,
                 Cplx thetaInf2);
CMatrix structureIII();
CVector exponentsIII(Cplx thetaInf2);

// Fourth equation: coefficients plus the 3x3 residue matrix of the
// eigen-gauge route.
Coeffs2 coeffsIV(Cplx q, Cplx p, Cplx u, Cplx t, Cplx thetaInf1,
                 Cplx thetaInf2);
CMatrix residueIV(Cplx q, Cplx p, Cplx t, Cplx thetaInf1, Cplx thetaInf2);
CMatrix structureIV();

// Fifth equation.
Coeffs2 coeffsV(Cplx q, Cplx p, Cplx u, Cplx t, Cplx theta0, Cplx thetaInf1,
                Cplx thetaInf2);
CMatrix residueV(Cplx q, Cplx p, Cplx t, Cplx theta0, Cplx thetaInf1,
                 Cplx thetaInf2);
CMatrix structureV();

// First equation (regularity-failure witness): coefficients, 7x7 frame.
Coeffs2 coeffsI(Cplx q, Cplx p, Cplx t);
CMatrix frameI(Cplx q, Cplx p, Cplx t, Cplx lambda);
CMatrix structureI();
CVector exponentsI(Cplx lambda);

}  // namespace okb::data
