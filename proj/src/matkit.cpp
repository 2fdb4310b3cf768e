#include "matkit.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace okb {

namespace {

// Lexicographic (Re, Im) comparison used for block ordering, with a dead
// band `tau` so that eigenvalues equal up to numerical noise do not flip
// the canonical order.
bool lexLess(const Cplx& a, const Cplx& b, double tau) {
    if (std::abs(a.real() - b.real()) > tau) return a.real() < b.real();
    if (std::abs(a.imag() - b.imag()) > tau) return a.imag() < b.imag();
    return false;
}

// One Jordan chain: eigenvalue, and columns ordered bottom-up, i.e.
// cols[0] = A^{r-1} v, ..., cols[r-1] = v for a chain head v of height r.
struct Chain {
    Cplx eigenvalue;
    std::vector<CVector> cols;
};

// Orthonormalize the columns of B (drop near-dependent directions).
CMatrix orthonormalColumns(const CMatrix& B, double cutoff) {
    if (B.cols() == 0) return B;
    Eigen::JacobiSVD<CMatrix> svd(B, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > cutoff * std::max(s(0), 1e-300)) ++r;
    return svd.matrixU().leftCols(r);
}

// Swap the neighbouring diagonal entries k-1 and k of the triangular Schur
// factor T by a unitary similarity, updating U accordingly (the classical
// reordering step for 1x1 blocks).
void schurSwap(CMatrix& T, CMatrix& U, int k) {
    const Cplx a = T(k - 1, k - 1), b = T(k - 1, k), c = T(k, k);
    Eigen::JacobiRotation<Cplx> G;
    // The eigenvector of [[a,b],[0,c]] for eigenvalue c is [b, c-a]; rotate
    // it onto the first coordinate axis.
    G.makeGivens(b, c - a);
    T.applyOnTheLeft(k - 1, k, G.adjoint());
    T.applyOnTheRight(k - 1, k, G);
    U.applyOnTheRight(k - 1, k, G);
    T(k, k - 1) = 0.0;
    T(k - 1, k - 1) = c;
    T(k, k) = a;
}

// Orthonormal frame of the invariant subspace attached to the Schur diagonal
// positions `sel`: bubble the selected entries to the front of a copy of the
// Schur form, then take the leading columns of the rotated unitary factor.
CMatrix invariantSubspace(const CMatrix& Tschur, const CMatrix& Uschur,
                          std::vector<int> sel) {
    CMatrix T = Tschur;
    CMatrix U = Uschur;
    std::sort(sel.begin(), sel.end());
    const int m = static_cast<int>(sel.size());
    for (int target = 0; target < m; ++target)
        for (int k = sel[static_cast<size_t>(target)]; k > target; --k)
            schurSwap(T, U, k);
    return U.leftCols(m);
}

// Build the Jordan chains of M for one eigenvalue cluster centred at mu with
// algebraic multiplicity m, working inside the cluster's invariant subspace
// frame V (columns orthonormal, M-invariant up to roundoff).  This keeps
// kernel decisions inside the cluster, immune to tiny singular values
// leaking in from other clusters.  Returns false when the kernel staircase
// does not close at multiplicity m, which signals a wrong clustering or an
// unsuitable kernel cutoff.
bool buildClusterChains(const CMatrix& M, const CMatrix& V, Cplx mu, int m,
                        double scale, double clusterTol,
                        std::vector<Chain>& out) {
    // Restricted block and its shifted power staircase.
    const CMatrix Mc = V.adjoint() * M * V;
    const CMatrix Ac = Mc - mu * CMatrix::Identity(m, m);

    std::vector<CMatrix> kernels;  // kernels[j-1] = basis of ker Ac^j
    std::vector<int> dims;
    CMatrix Apow = Ac;
    double powScale = scale;
    for (int j = 1; j <= m; ++j) {
        CMatrix Kj = kernelBasis(Apow, clusterTol * powScale);
        dims.push_back(static_cast<int>(Kj.cols()));
        kernels.push_back(Kj);
        if (dims.back() >= m) break;
        if (j < m) {
            Apow = Apow * Ac;
            powScale *= scale;
        }
    }
    if (dims.back() != m) return false;
    const int depth = static_cast<int>(dims.size());

    // Blocks of size >= j: b_j = dim K_j - dim K_{j-1}.
    std::vector<int> bj(depth + 2, 0);
    for (int j = 1; j <= depth; ++j)
        bj[j] = dims[j - 1] - (j >= 2 ? dims[j - 2] : 0);
    for (int j = 1; j < depth; ++j)
        if (bj[j] < bj[j + 1]) return false;  // staircase must be monotone

    // Select chain heads from the top height down.  At height j the new
    // heads must complete span(K_{j-1}) + span(images of taller chains) to a
    // basis of K_j.  All of this happens inside the restricted block.
    std::vector<Chain> chains;
    for (int j = depth; j >= 1; --j) {
        const int newHeads = bj[j] - bj[j + 1];
        if (newHeads == 0) continue;
        std::vector<CVector> occupied;
        for (const auto& c : chains) {
            const int height = static_cast<int>(c.cols.size());
            // cols[i] sits at height i+1, so the height-j member is cols[j-1].
            if (height > j) occupied.push_back(c.cols[static_cast<size_t>(j - 1)]);
        }
        // Assemble the span to avoid: ker Ac^{j-1} plus occupied directions.
        int avoidCols = (j >= 2 ? static_cast<int>(kernels[j - 2].cols()) : 0) +
                        static_cast<int>(occupied.size());
        CMatrix S(m, avoidCols);
        int col = 0;
        if (j >= 2)
            for (int c = 0; c < kernels[j - 2].cols(); ++c)
                S.col(col++) = kernels[j - 2].col(c);
        for (const auto& v : occupied) S.col(col++) = v;
        CMatrix Sorth = orthonormalColumns(S, 1e-12);

        const CMatrix& B = kernels[j - 1];
        CMatrix C = B;
        if (Sorth.cols() > 0) C -= Sorth * (Sorth.adjoint() * B);
        Eigen::JacobiSVD<CMatrix> svd(C, Eigen::ComputeThinV);
        if (svd.singularValues().size() < newHeads) return false;
        if (svd.singularValues()(newHeads - 1) < 1e-10) return false;
        for (int h = 0; h < newHeads; ++h) {
            CVector head = B * svd.matrixV().col(h);
            Chain chain;
            chain.eigenvalue = mu;
            chain.cols.assign(static_cast<size_t>(j), CVector());
            CVector w = head;
            for (int i = j - 1; i >= 0; --i) {
                chain.cols[static_cast<size_t>(i)] = w;
                if (i > 0) w = Ac * w;
            }
            chains.push_back(std::move(chain));
        }
    }

    // Lift back to the ambient space, then normalize each chain: unit bottom
    // vector with its largest entry made real positive (a deterministic
    // frame choice).
    for (auto& c : chains)
        for (auto& v : c.cols) v = (V * v).eval();
    for (auto& c : chains) {
        const CVector& bottom = c.cols.front();
        double nrm = bottom.norm();
        if (nrm < 1e-300) return false;
        int imax = 0;
        bottom.cwiseAbs().maxCoeff(&imax);
        Cplx phase = bottom(imax) / std::abs(bottom(imax));
        Cplx factor = 1.0 / (nrm * phase);
        for (auto& v : c.cols) v *= factor;
    }
    for (auto& c : chains) out.push_back(std::move(c));
    return true;
}

struct Partition {
    std::vector<std::vector<int>> clusters;  // indices into the eigenvalue list
};

// Merge order over eigenvalue estimates; returns the sequence of partitions
// from near-singletons to a single cluster.  Estimates that coincide to
// machine precision (within `premerge`) start out in the same cluster, so
// exact multiplicities never read as ambiguous separations.
std::vector<Partition> mergeHierarchy(const CVector& eigs, double premerge) {
    const int N = static_cast<int>(eigs.size());
    std::vector<std::vector<int>> clusters;
    for (int i = 0; i < N; ++i) {
        bool placed = false;
        for (auto& c : clusters)
            if (std::abs(eigs(c.front()) - eigs(i)) <= premerge) {
                c.push_back(i);
                placed = true;
                break;
            }
        if (!placed) clusters.push_back({i});
    }
    auto center = [&](const std::vector<int>& c) {
        Cplx s = 0.0;
        for (int i : c) s += eigs(i);
        return s / static_cast<double>(c.size());
    };
    std::vector<Partition> out;
    out.push_back({clusters});
    while (clusters.size() > 1) {
        size_t ia = 0, ib = 1;
        double best = std::numeric_limits<double>::infinity();
        for (size_t a = 0; a < clusters.size(); ++a)
            for (size_t b = a + 1; b < clusters.size(); ++b) {
                double d = std::abs(center(clusters[a]) - center(clusters[b]));
                if (d < best) {
                    best = d;
                    ia = a;
                    ib = b;
                }
            }
        auto& ca = clusters[ia];
        ca.insert(ca.end(), clusters[ib].begin(), clusters[ib].end());
        clusters.erase(clusters.begin() + static_cast<long>(ib));
        out.push_back({clusters});
    }
    return out;
}

}  // namespace

int JordanSpec::dimension() const {
    int n = 0;
    for (const auto& b : blocks) n += b.size;
    return n;
}

bool JordanSpec::sameShape(const JordanSpec& other, double tol) const {
    if (blocks.size() != other.blocks.size()) return false;
    for (size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].size != other.blocks[i].size) return false;
        if (std::abs(blocks[i].eigenvalue - other.blocks[i].eigenvalue) > tol)
            return false;
    }
    return true;
}

std::string JordanSpec::sizeSignature() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < blocks.size(); ++i) {
        if (i) os << ",";
        os << blocks[i].size;
    }
    os << "]";
    return os.str();
}

int JordanSpec::distinctEigenvalues(double tol) const {
    std::vector<Cplx> reps;
    for (const auto& b : blocks) {
        bool found = false;
        for (const auto& r : reps)
            if (std::abs(r - b.eigenvalue) <= tol) {
                found = true;
                break;
            }
        if (!found) reps.push_back(b.eigenvalue);
    }
    return static_cast<int>(reps.size());
}

CMatrix jordanMatrix(const JordanSpec& spec) {
    const int N = spec.dimension();
    CMatrix J = CMatrix::Zero(N, N);
    int at = 0;
    for (const auto& b : spec.blocks) {
        for (int i = 0; i < b.size; ++i) {
            J(at + i, at + i) = b.eigenvalue;
            if (i + 1 < b.size) J(at + i, at + i + 1) = 1.0;
        }
        at += b.size;
    }
    return J;
}

double conditionNumber(const CMatrix& M) {
    Eigen::JacobiSVD<CMatrix> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return 0.0;
    if (s(s.size() - 1) <= 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / (s(s.size() - 1));
}

CMatrix kernelBasis(const CMatrix& M, double cutoff) {
    Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    double thresh = std::max(cutoff, s.size() > 0 ? s(0) * 1e-14 : 0.0);
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > thresh) ++rank;
    return svd.matrixV().rightCols(M.cols() - rank);
}

void requireFinite(const CMatrix& M, const std::string& where) {
    for (int j = 0; j < M.cols(); ++j)
        for (int i = 0; i < M.rows(); ++i)
            if (!std::isfinite(M(i, j).real()) || !std::isfinite(M(i, j).imag()))
                throw std::invalid_argument(where + ": non-finite matrix entry");
}

JordanizeResult jordanize(const CMatrix& M, const Tolerances& tol) {
    if (M.rows() != M.cols() || M.rows() == 0)
        throw std::invalid_argument("matkit::jordanize: square matrix required");
    requireFinite(M, "matkit::jordanize");
    const int N = static_cast<int>(M.rows());
    const double scale = normScale(M.norm());

    Eigen::ComplexSchur<CMatrix> schur(M, true);
    if (schur.info() != Eigen::Success)
        throw SingularFrame("matkit::jordanize: Schur iteration failed");
    const CMatrix Tschur = schur.matrixT();
    const CMatrix Uschur = schur.matrixU();
    CVector eigs = Tschur.diagonal();

    // Kernel cutoffs are retried with growing slack: eigenvalue scatter of a
    // defective cluster can sit right at the nominal threshold, and the
    // reconstruction check below vouches for whichever attempt succeeds.
    static const double slacks[] = {1.0, 30.0, 1000.0};

    for (const auto& part : mergeHierarchy(eigs, 1e-13 * scale)) {
      for (double slack : slacks) {
        std::vector<Chain> chains;
        bool ok = true;
        std::vector<Cplx> centers;
        for (const auto& cluster : part.clusters) {
            Cplx mu = 0.0;
            for (int i : cluster) mu += eigs(i);
            mu /= static_cast<double>(cluster.size());
            centers.push_back(mu);
            CMatrix V = invariantSubspace(Tschur, Uschur, cluster);
            if (!buildClusterChains(M, V, mu, static_cast<int>(cluster.size()),
                                    scale, tol.cluster * slack, chains)) {
                ok = false;
                break;
            }
        }
        if (!ok || chains.empty()) continue;

        const double tau = 0.5 * tol.cluster * scale;
        std::sort(chains.begin(), chains.end(),
                  [tau](const Chain& a, const Chain& b) {
                      if (a.cols.size() != b.cols.size())
                          return a.cols.size() > b.cols.size();
                      return lexLess(a.eigenvalue, b.eigenvalue, tau);
                  });

        JordanizeResult res;
        res.spec.blocks.clear();
        res.P = CMatrix(N, N);
        int col = 0;
        for (const auto& c : chains) {
            res.spec.blocks.push_back({c.eigenvalue, static_cast<int>(c.cols.size())});
            for (const auto& v : c.cols) res.P.col(col++) = v;
        }
        if (col != N) continue;

        CMatrix J = jordanMatrix(res.spec);
        Eigen::PartialPivLU<CMatrix> lu(res.P);
        CMatrix recon = res.P * J * lu.solve(CMatrix::Identity(N, N));
        res.residual = (recon - M).norm() / scale;
        if (!(res.residual <= tol.residual)) continue;
        res.condition = conditionNumber(res.P);
        // A frame whose conditioning eats the verification headroom cannot
        // certify its block structure: near-parallel chain columns would
        // "verify" a diagonal form for a defective matrix.  Reject and let a
        // coarser clustering claim the structure instead.
        if (!(res.condition * tol.residual <= 0.01)) continue;

        for (size_t a = 0; a < centers.size(); ++a)
            for (size_t b = a + 1; b < centers.size(); ++b)
                if (std::abs(centers[a] - centers[b]) < tol.cluster * scale)
                    throw ClusterAmbiguity(
                        "matkit::jordanize: eigenvalue clusters separated by less "
                        "than the clustering tolerance");
        return res;
      }
    }
    throw SingularFrame(
        "matkit::jordanize: no eigenvalue clustering yields a verified "
        "Jordan frame");
}

CMatrix solve_sylvester_gauge(const CMatrix& T, const CMatrix& R,
                              const Tolerances& tol) {
    if (T.rows() != T.cols() || R.rows() != R.cols() || T.rows() != R.rows())
        throw std::invalid_argument(
            "matkit::solve_sylvester_gauge: matching square matrices required");
    requireFinite(T, "matkit::solve_sylvester_gauge");
    requireFinite(R, "matkit::solve_sylvester_gauge");
    const int N = static_cast<int>(T.rows());

    // Vectorized commutator operator acting on column-major vec(X):
    // (X T - T X)_{ij} = sum_k X_{ik} T_{kj} - T_{ik} X_{kj}.
    CMatrix K = CMatrix::Zero(N * N, N * N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const int row = i + N * j;
            for (int k = 0; k < N; ++k) {
                K(row, i + N * k) += T(k, j);
                K(row, k + N * j) -= T(i, k);
            }
        }
    CVector vecR(N * N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) vecR(i + N * j) = R(i, j);

    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(K);
    cod.setThreshold(1e-10);
    CVector x = cod.solve(vecR);

    CMatrix X(N, N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) X(i, j) = x(i + N * j);

    double resid = (X * T - T * X - R).norm();
    if (!(resid <= tol.residual * normScale(R.norm())))
        throw Inconsistent(
            "matkit::solve_sylvester_gauge: right-hand side is not in the "
            "range of the commutator operator");
    return X;
}

}  // namespace okb
