#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tagsem/errors.hpp"
#include "tagsem/svm.hpp"

using namespace tagsem;

namespace {

Eigen::MatrixXd gram(const Eigen::MatrixXd& X, double gamma) {
  Eigen::MatrixXd K(X.rows(), X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.rows(); ++j)
      K(i, j) = rbf(X.row(i).transpose(), X.row(j).transpose(), gamma);
  return K;
}

// Two separable 2-D blobs, 10 points each.
std::pair<Eigen::MatrixXd, std::vector<std::string>> blobs() {
  std::mt19937 gen(43);
  std::normal_distribution<double> normal(0.0, 0.5);
  Eigen::MatrixXd X(20, 2);
  std::vector<std::string> y;
  for (int i = 0; i < 10; ++i) {
    X(i, 0) = normal(gen);
    X(i, 1) = normal(gen);
    y.push_back("neg");
  }
  for (int i = 10; i < 20; ++i) {
    X(i, 0) = 8.0 + normal(gen);
    X(i, 1) = 8.0 + normal(gen);
    y.push_back("pos");
  }
  return {X, y};
}

Eigen::MatrixXd xor_points() {
  Eigen::MatrixXd X(4, 2);
  X << 0, 0, 0, 1, 1, 0, 1, 1;
  return X;
}

}  // namespace

TEST_SUITE("svm") {

TEST_CASE("rbf kernel on hand-evaluated pairs") {
  Eigen::VectorXd x(1), y(1);
  x << 0;
  y << 1;
  CHECK(rbf(x, x, 0.5) == doctest::Approx(1.0));
  CHECK(rbf(x, y, 1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(std::abs(rbf(x, y, 1e-12) - 1.0) < 1e-6);
  Eigen::VectorXd z(2);
  z << 1, 2;
  CHECK_THROWS_AS(rbf(x, z, 1.0), std::invalid_argument);
}

TEST_CASE("separable blobs reach training accuracy 1.0") {
  const auto [X, y] = blobs();
  const SvmModel model = train(X, y, 50.0, 0.5);
  int correct = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    if (model.predict(X.row(i).transpose()) == y[static_cast<std::size_t>(i)]) ++correct;
  CHECK(correct == X.rows());
}

TEST_CASE("XOR with an RBF kernel reaches training accuracy 1.0") {
  const Eigen::MatrixXd X = xor_points();
  const std::vector<std::string> y{"a", "b", "b", "a"};
  const SvmModel model = train(X, y, 10.0, 1.0);
  for (Eigen::Index i = 0; i < 4; ++i)
    CHECK(model.predict(X.row(i).transpose()) == y[static_cast<std::size_t>(i)]);
}

TEST_CASE("train validates its input") {
  Eigen::MatrixXd X(4, 2);
  X.setRandom();
  CHECK_THROWS_AS(train(X, {"a", "a", "a", "a"}, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(train(Eigen::MatrixXd(0, 2), {}, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(train(X, {"a", "b"}, 1.0, 1.0), std::invalid_argument);
  Eigen::MatrixXd bad = X;
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train(bad, {"a", "b", "a", "b"}, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(train(X, {"a", "b", "a", "b"}, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(train(X, {"a", "b", "a", "b"}, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("binary prediction agrees with the sign of the decision function") {
  const auto [X, y] = blobs();
  const SvmModel model = train(X, y, 50.0, 0.5);
  REQUIRE(model.labels.size() == 2);
  // One-vs-rest with two classes: machine 0 is "neg vs rest".
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Eigen::VectorXd x = X.row(i).transpose();
    const double d0 = model.machines[0].decision(x);
    const double d1 = model.machines[1].decision(x);
    const std::string expected = d0 > d1 ? model.labels[0] : model.labels[1];
    CHECK(model.predict(x) == expected);
  }
}

TEST_CASE("prediction ties break to the first label in label order") {
  BinarySvm machine;
  machine.support_vectors = Eigen::MatrixXd::Ones(1, 2);
  machine.dual_coefs = Eigen::VectorXd::Ones(1);
  machine.bias = 0.25;
  machine.kernel.gamma = 1.0;
  SvmModel model;
  model.labels = {"first", "second"};
  model.machines = {machine, machine};
  CHECK(model.predict(Eigen::VectorXd::Zero(2)) == "first");
}

TEST_CASE("dual constraint and box feasibility hold per machine") {
  const auto [X, y] = blobs();
  const double C = 50.0;
  const SvmModel model = train(X, y, C, 0.5);
  for (const BinarySvm& m : model.machines) {
    CHECK(std::abs(m.dual_coefs.sum()) <= 1e-6);  // sum alpha_i y_i = 0
    for (Eigen::Index i = 0; i < m.dual_coefs.size(); ++i) {
      CHECK(std::abs(m.dual_coefs(i)) <= C + 1e-9);
      CHECK(std::abs(m.dual_coefs(i)) > 0.0);  // support vectors only
    }
  }
}

TEST_CASE("KKT violations are within tol at convergence") {
  const auto [X, y] = blobs();
  const double C = 50.0, gamma = 0.5;
  const Eigen::MatrixXd K = gram(X, gamma);
  Eigen::VectorXd y_bin(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    y_bin(i) = y[static_cast<std::size_t>(i)] == "pos" ? 1.0 : -1.0;
  TrainOptions options;
  const SmoResult r = smo_solve(K, y_bin, C, options);
  CHECK(max_kkt_violation(K, y_bin, r, C) <= options.tol);
}

TEST_CASE("the dual objective is non-decreasing across SMO steps") {
  const auto [X, y] = blobs();
  const Eigen::MatrixXd K = gram(X, 0.5);
  Eigen::VectorXd y_bin(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    y_bin(i) = y[static_cast<std::size_t>(i)] == "pos" ? 1.0 : -1.0;
  TrainOptions options;
  options.record_objective = true;
  const SmoResult r = smo_solve(K, y_bin, 50.0, options);
  REQUIRE(r.objective_trace.size() >= 2);
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
    CHECK(r.objective_trace[i] >= r.objective_trace[i - 1] - 1e-9);
  CHECK(r.objective_trace.back() == doctest::Approx(dual_objective(K, y_bin, r.alphas)));
}

TEST_CASE("smo_solve rejects degenerate problems") {
  Eigen::MatrixXd K = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(smo_solve(K, ones, 1.0), std::invalid_argument);
  Eigen::VectorXd bad(3);
  bad << 1, -1, 0.5;
  CHECK_THROWS_AS(smo_solve(K, bad, 1.0), std::invalid_argument);
}

TEST_CASE("training is deterministic") {
  const auto [X, y] = blobs();
  const SvmModel a = train(X, y, 50.0, 0.5);
  const SvmModel b = train(X, y, 50.0, 0.5);
  REQUIRE(a.machines.size() == b.machines.size());
  for (std::size_t i = 0; i < a.machines.size(); ++i) {
    CHECK(a.machines[i].bias == b.machines[i].bias);
    CHECK(a.machines[i].dual_coefs == b.machines[i].dual_coefs);
    CHECK(a.machines[i].support_vectors == b.machines[i].support_vectors);
  }
}

TEST_CASE("model save/load round-trips bit-exactly") {
  const auto [X, y] = blobs();
  const SvmModel model = train(X, y, 50.0, 1e-5);
  const auto path = std::filesystem::temp_directory_path() / "svm_roundtrip.json";
  save_model(model, path);
  const SvmModel loaded = load_model(path);
  REQUIRE(loaded.labels == model.labels);
  REQUIRE(loaded.machines.size() == model.machines.size());
  for (std::size_t i = 0; i < model.machines.size(); ++i) {
    CHECK(loaded.machines[i].bias == model.machines[i].bias);
    CHECK(loaded.machines[i].kernel.gamma == model.machines[i].kernel.gamma);
    CHECK(loaded.machines[i].dual_coefs == model.machines[i].dual_coefs);
    CHECK(loaded.machines[i].support_vectors == model.machines[i].support_vectors);
  }
}

TEST_CASE("load_model rejects malformed files") {
  const auto dir = std::filesystem::temp_directory_path();
  {
    std::ofstream out(dir / "model_bad.json");
    out << "{\"version\": 7}";
  }
  CHECK_THROWS_AS(load_model(dir / "model_bad.json"), ParseError);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), ParseError);
}

TEST_CASE("decision rejects dimension mismatches") {
  const auto [X, y] = blobs();
  const SvmModel model = train(X, y, 50.0, 0.5);
  CHECK_THROWS_AS(model.predict(Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

}  // TEST_SUITE
