#include "serialize.hpp"

#include <charconv>
#include <system_error>

namespace okb {

Json toJson(const Cplx& c) { return Json::array({c.real(), c.imag()}); }

Cplx cplxFromJson(const Json& j) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("serialize: complex number must be [re, im]");
    return Cplx(j[0].get<double>(), j[1].get<double>());
}

Json toJson(const CMatrix& M) {
    Json entries = Json::array();
    for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j) entries.push_back(toJson(M(i, j)));
    return Json{{"rows", M.rows()}, {"cols", M.cols()}, {"entries", std::move(entries)}};
}

CMatrix matrixFromJson(const Json& j) {
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    const Json& entries = j.at("entries");
    if (rows < 0 || cols < 0 || static_cast<int>(entries.size()) != rows * cols)
        throw std::invalid_argument("serialize: matrix entry count mismatch");
    CMatrix M(rows, cols);
    int idx = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) M(r, c) = cplxFromJson(entries[static_cast<size_t>(idx++)]);
    return M;
}

Json toJson(const CVector& v) {
    Json out = Json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(toJson(v(i)));
    return out;
}

CVector vectorFromJson(const Json& j) {
    if (!j.is_array()) throw std::invalid_argument("serialize: vector must be a list");
    CVector v(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = cplxFromJson(j[i]);
    return v;
}

Json toJson(const GOkuboSystem& sys) {
    return Json{{"T", toJson(sys.T)}, {"lambda", toJson(sys.lambda)}};
}

GOkuboSystem systemFromJson(const Json& j) {
    return GOkuboSystem{matrixFromJson(j.at("T")), vectorFromJson(j.at("lambda"))};
}

Json toJson(const ExtOkuboFrame& frame) {
    Json j = toJson(frame.sys);
    j["P"] = toJson(frame.P);
    j["blocks"] = frame.blocks;
    Json z = Json::array();
    for (const Cplx& c : frame.z) z.push_back(toJson(c));
    j["z"] = std::move(z);
    return j;
}

ExtOkuboFrame frameFromJson(const Json& j, const Tolerances& tol) {
    GOkuboSystem sys = systemFromJson(j);
    CMatrix P = matrixFromJson(j.at("P"));
    std::vector<int> blocks = j.at("blocks").get<std::vector<int>>();
    std::vector<Cplx> z;
    for (const Json& c : j.at("z")) z.push_back(cplxFromJson(c));
    return makeFrame(std::move(sys), std::move(P), std::move(blocks), std::move(z), tol);
}

Json toJson(const RationalConnection& conn) {
    Json poles = Json::array();
    for (const RationalPole& p : conn.poles) {
        Json A = Json::array();
        for (const CMatrix& M : p.A) A.push_back(toJson(M));
        poles.push_back(Json{{"a", toJson(p.a)}, {"r", p.r}, {"A", std::move(A)}});
    }
    return Json{{"m", conn.m}, {"poles", std::move(poles)}};
}

RationalConnection connectionFromJson(const Json& j) {
    RationalConnection conn;
    conn.m = j.at("m").get<int>();
    for (const Json& pj : j.at("poles")) {
        RationalPole p;
        p.a = cplxFromJson(pj.at("a"));
        p.r = pj.at("r").get<int>();
        for (const Json& Aj : pj.at("A")) p.A.push_back(matrixFromJson(Aj));
        if (static_cast<int>(p.A.size()) != p.r + 1)
            throw std::invalid_argument("serialize: pole coefficient count mismatch");
        conn.poles.push_back(std::move(p));
    }
    return conn;
}

Json toJson(const Realization& real) {
    return Json{{"S", toJson(real.S)},
                {"B", toJson(real.B)},
                {"C", toJson(real.C)},
                {"G", toJson(real.G)},
                {"lambdaOut", toJson(real.lambdaOut)},
                {"minimal", real.minimal}};
}

Realization realizationFromJson(const Json& j) {
    Realization real;
    real.S = matrixFromJson(j.at("S"));
    real.B = matrixFromJson(j.at("B"));
    real.C = matrixFromJson(j.at("C"));
    real.G = matrixFromJson(j.at("G"));
    real.lambdaOut = vectorFromJson(j.at("lambdaOut"));
    real.minimal = j.at("minimal").get<bool>();
    return real;
}

Json toJson(const SaitoFrame& sf) {
    Json phi = Json::array();
    for (const CMatrix& M : sf.higgs) phi.push_back(toJson(M));
    return Json{{"w", toJson(sf.weights.w)}, {"t", toJson(sf.t)},
                {"C", toJson(sf.Cmat)},      {"Phi", std::move(phi)},
                {"g", toJson(sf.g)},         {"jacobianCond", sf.jacobianCond}};
}

SaitoFrame saitoFrameFromJson(const Json& j) {
    SaitoFrame sf;
    sf.weights.w = vectorFromJson(j.at("w"));
    sf.t = vectorFromJson(j.at("t"));
    sf.Cmat = matrixFromJson(j.at("C"));
    for (const Json& M : j.at("Phi")) sf.higgs.push_back(matrixFromJson(M));
    sf.g = vectorFromJson(j.at("g"));
    sf.jacobianCond = j.at("jacobianCond").get<double>();
    const int N = static_cast<int>(sf.weights.w.size());
    if (sf.t.size() != N || sf.Cmat.rows() != N || sf.Cmat.cols() != N ||
        static_cast<int>(sf.higgs.size()) != N || sf.g.size() != N)
        throw std::invalid_argument("serialize: flat-structure field sizes disagree");
    sf.Tmat = CMatrix(N, N);
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c)
            sf.Tmat(r, c) = -(Cplx(1.0, 0.0) + sf.weights.w(c) - sf.weights.w(r)) *
                            sf.Cmat(r, c);
    return sf;
}

std::string formatDouble(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string residualCsv(const ResidualReport& report) {
    std::string out = "sample,direction,condition,residual\n";
    for (const ResidualRow& row : report.rows) {
        out += std::to_string(row.sample);
        out += ",\"";
        out += row.direction;
        out += "\",";
        out += formatDouble(row.condition);
        out += ",";
        out += formatDouble(row.residual);
        out += "\n";
    }
    return out;
}

std::string wdvvCsv(const std::vector<WdvvReport>& reports) {
    std::string out = "sample,check,residual\n";
    for (size_t s = 0; s < reports.size(); ++s) {
        const WdvvReport& rep = reports[s];
        const std::pair<const char*, double> rows[] = {
            {"commutator", rep.maxCommutator},
            {"unit", rep.unitDefect},
            {"symmetry", rep.maxSymmetry},
            {"homogeneity", rep.maxHomogeneity}};
        for (const auto& [check, value] : rows) {
            out += std::to_string(s);
            out += ",";
            out += check;
            out += ",";
            out += formatDouble(value);
            out += "\n";
        }
    }
    return out;
}

}  // namespace okb
