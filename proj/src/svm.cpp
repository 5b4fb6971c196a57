#include "tagsem/svm.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "tagsem/errors.hpp"
#include "tagsem/io.hpp"

namespace tagsem {

namespace {

constexpr int kModelVersion = 1;
constexpr double kStepEps = 1e-8;   // minimum relative alpha progress
constexpr double kBoundEps = 1e-10;  // slack when classifying alpha as 0 or C

// Platt-style SMO over a precomputed Gram matrix. The error cache holds
// E_i = f(x_i) - y_i for every point and is updated in O(n) per step.
class SmoSolver {
 public:
  SmoSolver(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& labels, double c_penalty,
            const TrainOptions& options)
      : K_(kernel),
        y_(labels),
        C_(c_penalty),
        options_(options),
        n_(static_cast<int>(labels.size())),
        alpha_(Eigen::VectorXd::Zero(labels.size())),
        errors_(-labels) {}

  SmoResult solve() {
    int idle_sweeps = 0;
    while (idle_sweeps < options_.max_passes) {
      int changed = 0;
      for (int i = 0; i < n_; ++i) changed += examine(i) ? 1 : 0;
      idle_sweeps = changed == 0 ? idle_sweeps + 1 : 0;
    }
    return {alpha_, bias_, std::move(trace_)};
  }

 private:
  bool violates_kkt(int i) const {
    const double r = errors_(i) * y_(i);  // y_i f(x_i) - 1
    return (r < -options_.tol && alpha_(i) < C_) || (r > options_.tol && alpha_(i) > 0.0);
  }

  bool examine(int i1) {
    if (!violates_kkt(i1)) return false;

    // Second-choice heuristic: maximize |E1 - E2|, ties to the lower index.
    int best = -1;
    double best_gap = -1.0;
    for (int j = 0; j < n_; ++j) {
      if (j == i1) continue;
      const double gap = std::abs(errors_(i1) - errors_(j));
      if (gap > best_gap) {
        best_gap = gap;
        best = j;
      }
    }
    if (best >= 0 && take_step(i1, best)) return true;

    // Fallbacks in index order: non-bound points first, then all points.
    for (int j = 0; j < n_; ++j)
      if (j != i1 && j != best && alpha_(j) > 0.0 && alpha_(j) < C_ && take_step(i1, j))
        return true;
    for (int j = 0; j < n_; ++j)
      if (j != i1 && j != best && !(alpha_(j) > 0.0 && alpha_(j) < C_) && take_step(i1, j))
        return true;
    return false;
  }

  bool take_step(int i1, int i2) {
    const double a1 = alpha_(i1), a2 = alpha_(i2);
    const double y1 = y_(i1), y2 = y_(i2);
    const double e1 = errors_(i1), e2 = errors_(i2);
    const double s = y1 * y2;

    double low, high;
    if (y1 != y2) {
      low = std::max(0.0, a2 - a1);
      high = std::min(C_, C_ + a2 - a1);
    } else {
      low = std::max(0.0, a1 + a2 - C_);
      high = std::min(C_, a1 + a2);
    }
    if (high - low < 1e-12) return false;

    const double eta = K_(i1, i1) + K_(i2, i2) - 2.0 * K_(i1, i2);
    if (eta <= 1e-12) return false;  // PSD kernel: only coincident points

    const double a2_new = std::clamp(a2 + y2 * (e1 - e2) / eta, low, high);
    if (std::abs(a2_new - a2) < kStepEps * (a2_new + a2 + kStepEps)) return false;
    const double a1_new = a1 + s * (a2 - a2_new);

    const double d1 = a1_new - a1, d2 = a2_new - a2;
    const double b1 = bias_ - e1 - y1 * d1 * K_(i1, i1) - y2 * d2 * K_(i1, i2);
    const double b2 = bias_ - e2 - y1 * d1 * K_(i1, i2) - y2 * d2 * K_(i2, i2);
    double bias_new;
    if (a1_new > 0.0 && a1_new < C_)
      bias_new = b1;
    else if (a2_new > 0.0 && a2_new < C_)
      bias_new = b2;
    else
      bias_new = 0.5 * (b1 + b2);

    errors_ += y1 * d1 * K_.col(i1) + y2 * d2 * K_.col(i2) +
               Eigen::VectorXd::Constant(n_, bias_new - bias_);
    alpha_(i1) = a1_new;
    alpha_(i2) = a2_new;
    bias_ = bias_new;

    if (options_.record_objective) trace_.push_back(dual_objective(K_, y_, alpha_));
    return true;
  }

  const Eigen::MatrixXd& K_;
  const Eigen::VectorXd& y_;
  double C_;
  TrainOptions options_;
  int n_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd errors_;
  double bias_ = 0.0;
  std::vector<double> trace_;
};

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X, double gamma) {
  const Eigen::VectorXd sq = X.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = sq.replicate(1, X.rows()) + sq.transpose().replicate(X.rows(), 1) -
                       2.0 * (X * X.transpose());
  d2 = d2.cwiseMax(0.0);
  d2.diagonal().setZero();
  return (-gamma * d2).array().exp();
}

}  // namespace

double dual_objective(const Eigen::MatrixXd& kernel_matrix, const Eigen::VectorXd& labels,
                      const Eigen::VectorXd& alphas) {
  const Eigen::VectorXd u = alphas.cwiseProduct(labels);
  return alphas.sum() - 0.5 * u.dot(kernel_matrix * u);
}

SmoResult smo_solve(const Eigen::MatrixXd& kernel_matrix, const Eigen::VectorXd& labels,
                    double c_penalty, const TrainOptions& options) {
  if (kernel_matrix.rows() != kernel_matrix.cols() || kernel_matrix.rows() != labels.size())
    throw std::invalid_argument("smo_solve: kernel/label size mismatch");
  if (labels.size() < 2) throw std::invalid_argument("smo_solve: need at least 2 points");
  if (!(c_penalty > 0.0)) throw std::invalid_argument("smo_solve: C must be > 0");
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels(i) != 1.0 && labels(i) != -1.0)
      throw std::invalid_argument("smo_solve: labels must be +1/-1");
  if ((labels.array() == 1.0).all() || (labels.array() == -1.0).all())
    throw std::invalid_argument("smo_solve: both classes required");
  return SmoSolver(kernel_matrix, labels, c_penalty, options).solve();
}

double max_kkt_violation(const Eigen::MatrixXd& kernel_matrix, const Eigen::VectorXd& labels,
                         const SmoResult& solution, double c_penalty) {
  const Eigen::VectorXd u = solution.alphas.cwiseProduct(labels);
  const Eigen::VectorXd f =
      kernel_matrix * u + Eigen::VectorXd::Constant(labels.size(), solution.bias);
  double worst = 0.0;
  const double slack = kBoundEps * (1.0 + c_penalty);
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const double margin = labels(i) * f(i);
    const double a = solution.alphas(i);
    double v;
    if (a <= slack)
      v = std::max(0.0, 1.0 - margin);
    else if (a >= c_penalty - slack)
      v = std::max(0.0, margin - 1.0);
    else
      v = std::abs(margin - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}

double BinarySvm::decision(const Eigen::VectorXd& x) const {
  if (support_vectors.rows() == 0) return bias;
  if (support_vectors.cols() != x.size())
    throw std::invalid_argument("decision: expected dimension " +
                                std::to_string(support_vectors.cols()) + ", got " +
                                std::to_string(x.size()));
  const Eigen::VectorXd d2 = (support_vectors.rowwise() - x.transpose()).rowwise().squaredNorm();
  return dual_coefs.dot((-kernel.gamma * d2.array()).exp().matrix()) + bias;
}

std::string SvmModel::predict(const Eigen::VectorXd& x) const {
  if (machines.empty()) throw std::invalid_argument("predict: empty model");
  std::size_t best = 0;
  double best_value = machines[0].decision(x);
  for (std::size_t i = 1; i < machines.size(); ++i) {
    const double value = machines[i].decision(x);
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  return labels[best];
}

SvmModel train(const Eigen::MatrixXd& X, const std::vector<std::string>& y, double c_penalty,
               double gamma, const TrainOptions& options) {
  if (X.rows() == 0) throw std::invalid_argument("train: empty input");
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw std::invalid_argument("train: X rows and label count differ");
  if (X.rows() < 2) throw std::invalid_argument("train: need at least 2 samples");
  if (!X.allFinite()) throw std::invalid_argument("train: non-finite feature values");
  if (!(c_penalty > 0.0)) throw std::invalid_argument("train: C must be > 0");
  if (!(gamma > 0.0)) throw std::invalid_argument("train: gamma must be > 0");

  const std::set<std::string> distinct(y.begin(), y.end());
  if (distinct.size() < 2) throw std::invalid_argument("train: single-class input");

  const Eigen::MatrixXd K = gram_matrix(X, gamma);

  SvmModel model;
  model.labels.assign(distinct.begin(), distinct.end());
  for (const std::string& label : model.labels) {
    Eigen::VectorXd y_bin(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      y_bin(i) = y[static_cast<std::size_t>(i)] == label ? 1.0 : -1.0;

    const SmoResult r = smo_solve(K, y_bin, c_penalty, options);

    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < r.alphas.size(); ++i)
      if (r.alphas(i) > 1e-12) sv.push_back(i);

    BinarySvm machine;
    machine.kernel.gamma = gamma;
    machine.bias = r.bias;
    machine.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
    machine.dual_coefs.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t k = 0; k < sv.size(); ++k) {
      machine.support_vectors.row(static_cast<Eigen::Index>(k)) = X.row(sv[k]);
      machine.dual_coefs(static_cast<Eigen::Index>(k)) = r.alphas(sv[k]) * y_bin(sv[k]);
    }
    model.machines.push_back(std::move(machine));
  }
  return model;
}

void save_model(const SvmModel& model, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["version"] = kModelVersion;
  j["labels"] = model.labels;
  nlohmann::ordered_json machines = nlohmann::ordered_json::array();
  for (const BinarySvm& m : model.machines) {
    nlohmann::ordered_json jm;
    jm["gamma"] = m.kernel.gamma;
    jm["bias"] = m.bias;
    jm["dual_coefs"] = std::vector<double>(m.dual_coefs.begin(), m.dual_coefs.end());
    nlohmann::ordered_json svs = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.support_vectors.rows(); ++i) {
      const auto row = m.support_vectors.row(i);
      svs.push_back(std::vector<double>(row.begin(), row.end()));
    }
    jm["support_vectors"] = std::move(svs);
    machines.push_back(std::move(jm));
  }
  j["machines"] = std::move(machines);
  atomic_write_text(path, j.dump(2) + "\n");
}

SvmModel load_model(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError(path.string() + ": malformed model file");
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != kModelVersion)
    throw ParseError(path.string() + ": missing or unsupported model version");
  for (const char* key : {"labels", "machines"})
    if (!j.contains(key)) throw ParseError(path.string() + ": missing field \"" + key + "\"");

  SvmModel model;
  model.labels = j["labels"].get<std::vector<std::string>>();
  if (j["machines"].size() != model.labels.size())
    throw ParseError(path.string() + ": machine count does not match label count");

  Eigen::Index dim = -1;
  for (const auto& jm : j["machines"]) {
    BinarySvm m;
    m.kernel.gamma = jm.at("gamma").get<double>();
    m.bias = jm.at("bias").get<double>();
    const auto coefs = jm.at("dual_coefs").get<std::vector<double>>();
    const auto& svs = jm.at("support_vectors");
    if (svs.size() != coefs.size())
      throw ParseError(path.string() + ": support vector and coefficient counts differ");
    m.dual_coefs = Eigen::Map<const Eigen::VectorXd>(coefs.data(),
                                                     static_cast<Eigen::Index>(coefs.size()));
    for (std::size_t i = 0; i < svs.size(); ++i) {
      const auto row = svs[i].get<std::vector<double>>();
      if (dim < 0 && !row.empty()) dim = static_cast<Eigen::Index>(row.size());
      if (dim >= 0 && static_cast<Eigen::Index>(row.size()) != dim)
        throw ParseError(path.string() + ": inconsistent support vector dimensions");
      if (m.support_vectors.rows() == 0)
        m.support_vectors.resize(static_cast<Eigen::Index>(svs.size()),
                                 static_cast<Eigen::Index>(row.size()));
      m.support_vectors.row(static_cast<Eigen::Index>(i)) =
          Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size()));
    }
    model.machines.push_back(std::move(m));
  }
  return model;
}

}  // namespace tagsem
