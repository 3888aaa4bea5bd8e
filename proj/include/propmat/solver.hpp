#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "propmat/constraints.hpp"
#include "propmat/errors.hpp"
#include "propmat/laplacian.hpp"
#include "propmat/raster.hpp"

namespace propmat {

// Normal equations of the augmented energy
//   J(a) = a^T L a + lambda (a - beta)^T D (a - beta) + (a - A)^T Gamma C (a - A)
// i.e. (L + lambda D + Gamma C) a = lambda D beta + Gamma C A.
struct MattingSystem {
    int width = 0;
    int height = 0;
    double lambda = 100.0;
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    Eigen::VectorXd initial_guess;
};

inline MattingSystem assemble_system(const SparseMatrix& laplacian, const Trimap& tri,
                                     const ConstraintField& constraints, double lambda = 100.0) {
    const auto n = static_cast<Eigen::Index>(tri.pixel_count());
    if (laplacian.rows() != n || laplacian.cols() != n) {
        throw DimensionError("assemble_system: Laplacian is " + std::to_string(laplacian.rows()) +
                             "x" + std::to_string(laplacian.cols()) + ", trimap has " +
                             std::to_string(n) + " pixels");
    }
    require_same_shape(tri.width(), tri.height(), constraints.width, constraints.height,
                       "assemble_system");
    if (!(lambda > 0.0)) throw ContractError("lambda must be positive");

    MattingSystem sys;
    sys.width = tri.width();
    sys.height = tri.height();
    sys.lambda = lambda;
    sys.rhs.resize(n);
    sys.initial_guess.resize(n);
    Eigen::VectorXd diag(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const double d = is_known(tri[u]) ? 1.0 : 0.0;
        const double beta = known_alpha(tri[u]);
        const double weight = constraints.gamma[u] * constraints.confidence[u];
        diag[i] = lambda * d + weight;
        sys.rhs[i] = lambda * d * beta + weight * constraints.a_init[u];
        sys.initial_guess[i] = d != 0.0 ? beta : weight > 0.0 ? constraints.a_init[u] : 0.5;
    }
    sys.matrix = laplacian;
    for (Eigen::Index i = 0; i < n; ++i) sys.matrix.coeffRef(i, i) += diag[i];
    return sys;
}

enum class SolveMethod { Auto, Direct, Iterative };

struct SolverOptions {
    SolveMethod method = SolveMethod::Auto;
    double tolerance = 1e-9;           // relative residual target
    double acceptable_residual = 1e-6; // contract: fail above this
    int max_iterations = 20000;
    Eigen::Index direct_limit = 40000; // Auto uses LDL^T up to this many unknowns
};

struct SolveResult {
    AlphaMatte matte;         // clamped to [0,1]
    Eigen::VectorXd raw;      // solution before clamping
    double relative_residual = 0.0;
    int iterations = 0;       // 0 for the direct path
    bool direct = false;
};

inline double relative_residual(const MattingSystem& sys, const Eigen::VectorXd& x) {
    const double bnorm = sys.rhs.norm();
    const double rnorm = (sys.matrix * x - sys.rhs).norm();
    return bnorm > 0.0 ? rnorm / bnorm : rnorm;
}

inline SolveResult solve(const MattingSystem& sys, const SolverOptions& options = {}) {
    const Eigen::Index n = sys.matrix.rows();
    if (n == 0 || sys.rhs.size() != n) throw DimensionError("solve: inconsistent system");

    SolveResult out;
    bool use_direct = options.method == SolveMethod::Direct ||
                      (options.method == SolveMethod::Auto && n <= options.direct_limit);
    if (use_direct) {
        const Eigen::SparseMatrix<double> colmajor = sys.matrix;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(colmajor);
        if (ldlt.info() == Eigen::Success) {
            out.raw = ldlt.solve(sys.rhs);
            out.direct = true;
        } else if (options.method == SolveMethod::Direct) {
            throw ConvergenceError("solve: sparse LDL^T factorization failed", -1.0);
        } else {
            use_direct = false;
        }
    }
    if (!use_direct) {
        Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
        cg.setTolerance(options.tolerance);
        cg.setMaxIterations(options.max_iterations);
        cg.compute(sys.matrix);
        out.raw = cg.solveWithGuess(sys.rhs, sys.initial_guess);
        out.iterations = static_cast<int>(cg.iterations());
    }

    out.relative_residual = relative_residual(sys, out.raw);
    if (!(out.relative_residual <= options.acceptable_residual)) {
        throw ConvergenceError("solve: relative residual " + std::to_string(out.relative_residual) +
                                   " above " + std::to_string(options.acceptable_residual) +
                                   (out.direct ? "" : " after " + std::to_string(out.iterations) +
                                                          " iterations"),
                               out.relative_residual);
    }

    out.matte = AlphaMatte(sys.width, sys.height);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.matte[static_cast<std::size_t>(i)] = std::clamp(out.raw[i], 0.0, 1.0);
    }
    return out;
}

// Value of the augmented energy at `alpha`.
inline double energy(const SparseMatrix& laplacian, const Trimap& tri,
                     const ConstraintField& constraints, double lambda,
                     const Eigen::VectorXd& alpha) {
    double j = alpha.dot(laplacian * alpha);
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        const auto u = static_cast<std::size_t>(i);
        if (is_known(tri[u])) {
            const double d = alpha[i] - known_alpha(tri[u]);
            j += lambda * d * d;
        }
        const double e = alpha[i] - constraints.a_init[u];
        j += constraints.gamma[u] * constraints.confidence[u] * e * e;
    }
    return j;
}

// Matrix Market coordinate file (lower triangle, symmetric) plus a plain
// text right-hand side, one value per line, at `<path>.rhs`.
inline void dump_system(const MattingSystem& sys, const std::filesystem::path& path) {
    std::ofstream mtx(path);
    if (!mtx) throw Error("cannot open '" + path.string() + "' for writing");
    Eigen::Index lower = 0;
    for (Eigen::Index i = 0; i < sys.matrix.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(sys.matrix, i); it; ++it) {
            if (it.col() <= it.row()) ++lower;
        }
    }
    char buf[96];
    mtx << "%%MatrixMarket matrix coordinate real symmetric\n";
    mtx << sys.matrix.rows() << ' ' << sys.matrix.cols() << ' ' << lower << '\n';
    for (Eigen::Index i = 0; i < sys.matrix.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(sys.matrix, i); it; ++it) {
            if (it.col() > it.row()) continue;
            std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(it.row() + 1),
                          static_cast<long long>(it.col() + 1), it.value());
            mtx << buf;
        }
    }
    std::filesystem::path rhs_path = path;
    rhs_path += ".rhs";
    std::ofstream rhs(rhs_path);
    if (!rhs) throw Error("cannot open '" + rhs_path.string() + "' for writing");
    for (Eigen::Index i = 0; i < sys.rhs.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g\n", sys.rhs[i]);
        rhs << buf;
    }
}

}  // namespace propmat
