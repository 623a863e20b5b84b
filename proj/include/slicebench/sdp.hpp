#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace slicebench::sdp {

// Small dense semidefinite programs in standard primal form
//
//   minimize   sum_b <C_b, X_b> + c' x
//   subject to sum_b <A_ib, X_b> + a_i' x = b_i,   i = 1..m
//              X_b PSD (real symmetric),  x >= 0
//
// solved by an infeasible-start primal-dual path-following method with the
// HKM search direction and Mehrotra predictor-corrector steps. Constraint
// matrices are given in factored form A_ib = F diag(w) F', which keeps the
// Schur-complement assembly cheap for rank-one-like data.

/// F diag(w) F' inside one PSD block.
struct LowRankTerm {
  int block = 0;
  Eigen::MatrixXd factor;   // n_b x r
  Eigen::VectorXd weights;  // r
};

struct Constraint {
  std::vector<LowRankTerm> terms;
  std::vector<std::pair<int, double>> linear;  // (index into x, coefficient)
  double rhs = 0.0;
};

struct Problem {
  std::vector<int> block_sizes;
  int linear_size = 0;
  std::vector<Eigen::MatrixXd> cost;  // one symmetric matrix per block
  Eigen::VectorXd linear_cost;        // size linear_size
  std::vector<Constraint> constraints;
};

enum class Status {
  optimal,
  primal_infeasible,  // a dual ray certifies infeasibility
  max_iterations,
  numerical_failure,
};

struct Options {
  double gap_tol = 1e-7;
  double feas_tol = 1e-8;
  double infeas_tol = 1e-8;
  int max_iters = 200;
};

struct Solution {
  Status status = Status::numerical_failure;
  std::vector<Eigen::MatrixXd> X;
  std::vector<Eigen::MatrixXd> Z;
  Eigen::VectorXd x;
  Eigen::VectorXd z;
  Eigen::VectorXd y;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_infeasibility = 0.0;  // ||b - A(X)|| / (1 + ||b||)
  double dual_infeasibility = 0.0;    // ||C - A'(y) - Z|| / (1 + ||C||)
  double complementarity = 0.0;       // <X, Z> + x'z
  int iterations = 0;
};

Solution solve(const Problem& problem, const Options& options = {});

}  // namespace slicebench::sdp
