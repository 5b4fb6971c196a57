#ifndef TAGSEM_SVM_HPP
#define TAGSEM_SVM_HPP

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace tagsem {

struct KernelParams {
  double gamma = 1e-5;
  bool operator==(const KernelParams&) const = default;
};

// exp(-gamma * ||x - y||^2) for any pair of dense Eigen expressions.
template <typename DerivedA, typename DerivedB>
double rbf(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& y,
           double gamma) {
  if (x.size() != y.size())
    throw std::invalid_argument("rbf: vector lengths differ (" + std::to_string(x.size()) +
                                " vs " + std::to_string(y.size()) + ")");
  return std::exp(-gamma * (x - y).squaredNorm());
}

// One binary soft-margin machine: f(x) = sum_i dual_coefs[i] * K(sv_i, x) + bias,
// where dual_coefs[i] = alpha_i * y_i with 0 <= alpha_i <= C.
struct BinarySvm {
  Eigen::MatrixXd support_vectors;  // one row per support vector
  Eigen::VectorXd dual_coefs;
  double bias = 0.0;
  KernelParams kernel;

  double decision(const Eigen::VectorXd& x) const;
};

// One-vs-rest multiclass model: one machine per label, prediction takes
// the maximal decision value (ties broken by label order).
struct SvmModel {
  std::vector<std::string> labels;
  std::vector<BinarySvm> machines;

  std::string predict(const Eigen::VectorXd& x) const;
};

struct TrainOptions {
  double tol = 1e-3;    // KKT tolerance
  int max_passes = 10;  // consecutive no-progress sweeps before stopping
  // When set, the dual objective is recorded after every successful
  // two-variable step (for monotonicity checks; costs O(n^2) per step).
  bool record_objective = false;
};

// Raw output of one binary SMO run over a precomputed kernel matrix.
struct SmoResult {
  Eigen::VectorXd alphas;
  double bias = 0.0;
  std::vector<double> objective_trace;
};

// Solves the binary soft-margin dual by sequential minimal optimization.
// `labels` must be +1/-1; `kernel_matrix` is the full Gram matrix.
// Deterministic: the second index maximizes |E1 - E2| with ties broken by
// the lower index, and fallback scans run in index order.
SmoResult smo_solve(const Eigen::MatrixXd& kernel_matrix, const Eigen::VectorXd& labels, double c_penalty,
                    const TrainOptions& options = {});

// Largest KKT violation over all training points for a given solution;
// at convergence this is <= options.tol.
double max_kkt_violation(const Eigen::MatrixXd& kernel_matrix, const Eigen::VectorXd& labels,
                         const SmoResult& solution, double c_penalty);

// Dual objective W(alpha) = sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double dual_objective(const Eigen::MatrixXd& kernel_matrix, const Eigen::VectorXd& labels,
                      const Eigen::VectorXd& alphas);

// Trains a one-vs-rest RBF model. X holds one sample per row; y gives the
// class label of each row. Throws std::invalid_argument on empty input,
// a single distinct label, non-finite features, or non-positive C/gamma.
SvmModel train(const Eigen::MatrixXd& X, const std::vector<std::string>& y, double c_penalty,
               double gamma, const TrainOptions& options = {});

// JSON serialization; doubles round-trip exactly. save is atomic.
void save_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_model(const std::filesystem::path& path);

}  // namespace tagsem

#endif  // TAGSEM_SVM_HPP
