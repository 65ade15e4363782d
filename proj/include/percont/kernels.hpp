#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "percont/parallel.hpp"
#include "percont/systems.hpp"

namespace percont {

using SpMat = Eigen::SparseMatrix<double>;

/// Jacobian of the periodic midpoint residual: block row j holds A_j at block
/// column j and B_j at block column (j + 1) mod M.
struct CyclicBlockJacobian {
    int M = 0;
    int k = 0;
    std::vector<Eigen::MatrixXd> A;
    std::vector<Eigen::MatrixXd> B;

    SpMat to_sparse() const;
    Eigen::MatrixXd to_dense() const;
};

/// Edge residuals R_j = (X_{j+1} - X_j)/dt - rhs(t_{j+1/2}, (X_j + X_{j+1})/2, lambda),
/// X stored node-major with M nodes of dimension n m. Serial and parallel
/// execution give bit-identical results.
Vec midpoint_residual(const HomotopyFamily& fam, const Vec& X, int M, double lambda, Exec exec);

/// Central differences in each node component with step 1e-7 max(1, |x|).
CyclicBlockJacobian midpoint_jacobian(const HomotopyFamily& fam, const Vec& X, int M, double lambda, Exec exec);

/// dR/dlambda: exact for the scaling family, central differences otherwise.
Vec midpoint_lambda_derivative(const HomotopyFamily& fam, const Vec& X, int M, double lambda, Exec exec);

/// Sparse LU solve. Throws SingularLinearSolve.
Vec sparse_solve(const SpMat& A, const Vec& b);

}  // namespace percont
