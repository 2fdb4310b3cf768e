// JSON and CSV encodings shared by the library and the command line tool.
// Complex scalars serialize as [re, im]; matrices as {rows, cols, entries}
// with a flat row-major entry list.  All numbers round-trip exactly
// (shortest representation that parses back to the same double).
#pragma once

#include "okubo.hpp"
#include "realize.hpp"
#include "saito.hpp"

#include <json.hpp>

#include <string>

namespace okb {

using Json = nlohmann::json;

Json toJson(const Cplx& c);
Cplx cplxFromJson(const Json& j);

Json toJson(const CMatrix& M);
CMatrix matrixFromJson(const Json& j);

Json toJson(const CVector& v);  // list of [re, im]
CVector vectorFromJson(const Json& j);

Json toJson(const GOkuboSystem& sys);
GOkuboSystem systemFromJson(const Json& j);

Json toJson(const ExtOkuboFrame& frame);
ExtOkuboFrame frameFromJson(const Json& j, const Tolerances& tol = {});

Json toJson(const RationalConnection& conn);
RationalConnection connectionFromJson(const Json& j);

Json toJson(const Realization& real);
Realization realizationFromJson(const Json& j);

// Flat-structure data as {w, t, C, Phi, g, jacobianCond}; the structure
// matrix is not stored and is rebuilt from C and the weights on import.
Json toJson(const SaitoFrame& sf);
SaitoFrame saitoFrameFromJson(const Json& j);

// Shortest exact decimal form of a double (std::to_chars).
std::string formatDouble(double x);

// Residual report as CSV with columns sample, direction, condition,
// residual; the direction field is quoted (labels contain commas).
std::string residualCsv(const ResidualReport& report);

// Flat-structure residual reports as CSV with columns sample, check,
// residual (four rows per report: commutator, unit, symmetry, homogeneity).
std::string wdvvCsv(const std::vector<WdvvReport>& reports);

}  // namespace okb
