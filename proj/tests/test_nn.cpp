#include <doctest.h>

#include <cmath>

#include "tamp/nn/kernels.hpp"
#include "tamp/nn/mlp.hpp"

using namespace tamp;
using namespace tamp::nn;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo = -1,
                     double hi = 1) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, lo, hi);
  return m;
}

Matrix targets_for(Loss loss, Eigen::Index rows, Eigen::Index k, Rng& rng) {
  Matrix y = random_matrix(rows, k, rng);
  if (loss == Loss::kBce) y = (y.array() > 0).cast<double>();
  return y;
}

}  // namespace

TEST_CASE("analytic gradients match central differences") {
  Rng rng(11);
  const Loss losses[] = {Loss::kMse, Loss::kGaussianNll, Loss::kBce};
  for (int trial = 0; trial < 20; ++trial) {
    Loss loss = losses[trial % 3];
    Head head = loss == Loss::kMse ? Head::kLinear
                : loss == Loss::kGaussianNll ? Head::kGaussian : Head::kLogistic;
    std::size_t in = 1 + rng() % 4;
    std::size_t out = loss == Loss::kBce ? 1 : 1 + rng() % 3;
    std::vector<std::size_t> hidden(1 + rng() % 2);
    for (auto& h : hidden) h = 2 + rng() % 5;
    Mlp net = Mlp::create(in, hidden, out, head, rng);
    Matrix x = random_matrix(7, in, rng);
    Matrix y = targets_for(loss, 7, out, rng);
    CAPTURE(trial);
    CHECK(grad_check(net, loss, x, y) <= 1e-4);
  }
}

TEST_CASE("parallel kernel agrees with the per-sample reference") {
  Rng rng(5);
  for (Loss loss : {Loss::kMse, Loss::kGaussianNll, Loss::kBce}) {
    Head head = loss == Loss::kMse ? Head::kLinear
                : loss == Loss::kGaussianNll ? Head::kGaussian : Head::kLogistic;
    std::size_t out = loss == Loss::kBce ? 1 : 3;
    std::vector<std::size_t> hidden{32, 32};
    Mlp net = Mlp::create(6, hidden, out, head, rng);
    // Crosses several chunk boundaries with a ragged tail.
    Matrix x = random_matrix(1300, 6, rng);
    Matrix y = targets_for(loss, 1300, out, rng);
    Vector g1, g2;
    double l1 = kernels::loss_and_grad(net, loss, x, y, &g1);
    double l2 = reference::loss_and_grad(net, loss, x, y, &g2);
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-10));
    CHECK((g1 - g2).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, g2.cwiseAbs().maxCoeff()));
    double l3 = kernels::loss_and_grad(net, loss, x, y, nullptr);
    CHECK(l3 == l1);
  }
}

TEST_CASE("kernel rejects mismatched shapes and heads") {
  Rng rng(1);
  std::vector<std::size_t> hidden{4};
  Mlp net = Mlp::create(2, hidden, 1, Head::kLinear, rng);
  Matrix x = Matrix::Zero(3, 2), y = Matrix::Zero(3, 1);
  CHECK_THROWS_AS(kernels::loss_and_grad(net, Loss::kBce, x, y, nullptr), ContractViolation);
  CHECK_THROWS_AS(kernels::loss_and_grad(net, Loss::kMse, Matrix::Zero(3, 3), y, nullptr),
                  ContractViolation);
  CHECK_THROWS_AS(kernels::loss_and_grad(net, Loss::kMse, x, Matrix::Zero(2, 1), nullptr),
                  ContractViolation);
  CHECK_THROWS_AS(Mlp::create(2, hidden, 2, Head::kLogistic, rng), ContractViolation);
}

TEST_CASE("regressor fits a line") {
  Matrix x(64, 1), y(64, 1);
  for (int i = 0; i < 64; ++i) {
    x(i, 0) = -1 + 2.0 * i / 63;
    y(i, 0) = 2 * x(i, 0) + 1;
  }
  TrainConfig cfg;
  Network net = train(x, y, Loss::kMse, cfg);
  double mse = 0;
  for (int i = 0; i < 64; ++i) {
    double d = net.predict(Vector::Constant(1, x(i, 0)))[0] - y(i, 0);
    mse += d * d / 64;
  }
  CHECK(mse < 1e-4);
  CHECK(net.loss_curve.size() == static_cast<std::size_t>(cfg.epochs / cfg.record_every + 1));
  CHECK(net.loss_curve.back() < net.loss_curve.front());
}

TEST_CASE("Gaussian regressor recovers a constant target") {
  Rng rng(3);
  // Constant inputs: the maximum-likelihood fit is the sample mean and variance.
  Matrix x = Matrix::Zero(200, 2);
  Matrix y(200, 1);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (int i = 0; i < 200; ++i) y(i, 0) = 0.5 + noise(rng);
  TrainConfig cfg;
  cfg.epochs = 3000;
  Network net = train(x, y, Loss::kGaussianNll, cfg);
  double sample_mean = y.col(0).mean();
  double sample_var = (y.col(0).array() - sample_mean).square().mean();
  auto [mean, var] = net.predict_gaussian(Vector::Zero(2));
  CHECK(std::abs(mean[0] - sample_mean) < 0.05);
  CHECK(var[0] == doctest::Approx(sample_var).epsilon(0.1));
}

TEST_CASE("classifier separates two clusters") {
  Rng rng(8);
  Matrix x(200, 2), y(200, 1);
  for (int i = 0; i < 200; ++i) {
    bool pos = i % 2 == 0;
    x(i, 0) = uniform(rng, pos ? 0.2 : -1.0, pos ? 1.0 : -0.2);
    x(i, 1) = uniform(rng, -1, 1);
    y(i, 0) = pos;
  }
  TrainConfig cfg;
  cfg.epochs = 1000;
  Network net = train(x, y, Loss::kBce, cfg);
  int correct = 0;
  for (int i = 0; i < 200; ++i) {
    double p = net.predict(x.row(i).transpose())[0];
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    correct += (p > 0.5) == (y(i, 0) > 0.5);
  }
  CHECK(correct / 200.0 > 0.99);
}

TEST_CASE("training is deterministic and serializes losslessly") {
  Rng rng(4);
  Matrix x = random_matrix(50, 3, rng), y = random_matrix(50, 2, rng);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 9;
  Network a = train(x, y, Loss::kGaussianNll, cfg);
  Network b = train(x, y, Loss::kGaussianNll, cfg);
  CHECK(a.mlp.params == b.mlp.params);
  cfg.seed = 10;
  Network c = train(x, y, Loss::kGaussianNll, cfg);
  CHECK(a.mlp.params != c.mlp.params);

  Network back = network_from_json(nlohmann::json::parse(to_json(a).dump()));
  CHECK(back.mlp.params == a.mlp.params);
  CHECK(back.mlp.sizes == a.mlp.sizes);
  CHECK(to_json(back).dump() == to_json(a).dump());
  Vector q = x.row(3).transpose();
  CHECK(back.predict_gaussian(q).first == a.predict_gaussian(q).first);

  auto bad = to_json(a);
  bad["params"].erase(0);
  CHECK_THROWS_AS(network_from_json(bad), FormatError);
  bad = to_json(a);
  bad["head"] = "cubic";
  CHECK_THROWS_AS(network_from_json(bad), FormatError);
}

TEST_CASE("divergent learning rate is reported") {
  Matrix x(4, 1), y(4, 1);
  x << 0, 1, 2, 3;
  y << 1e300, -1e300, 1e300, -1e300;
  TrainConfig cfg;
  cfg.normalize_targets = false;
  cfg.lr = 1e6;
  cfg.epochs = 50;
  try {
    train(x, y, Loss::kMse, cfg);
    FAIL("expected a training error");
  } catch (const TrainingError& e) {
    std::string msg = e.what();
    CHECK(msg.find("epoch") != std::string::npos);
    CHECK(msg.find("learning rate") != std::string::npos);
  }
}

TEST_CASE("normalization round-trips and tolerates constant columns") {
  Rng rng(2);
  Matrix d = random_matrix(30, 3, rng, -5, 5);
  d.col(1).setConstant(4.0);
  NormStats s = NormStats::fit(d);
  CHECK(s.scale[1] == 1.0);
  Matrix n = s.normalize(d);
  CHECK(std::abs(n.col(0).mean()) < 1e-12);
  CHECK(std::abs(std::sqrt(n.col(0).array().square().mean()) - 1) < 1e-12);
  for (int i = 0; i < 30; ++i) {
    Vector row = d.row(i).transpose();
    CHECK((s.denormalize(s.normalize(row)) - row).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("inputs constant in training do not move predictions") {
  Rng rng(4);
  Matrix x = random_matrix(40, 3, rng, -1, 1);
  x.col(2).setConstant(-1.0);
  Matrix y(40, 1);
  for (int i = 0; i < 40; ++i) y(i, 0) = x(i, 0) - 2 * x(i, 1);
  TrainConfig c;
  c.epochs = 300;
  for (Loss loss : {Loss::kMse, Loss::kGaussianNll}) {
    Network net = train(x, y, loss, c);
    for (int i = 0; i < 10; ++i) {
      Vector row = x.row(i).transpose();
      Vector moved = row;
      moved[2] = uniform(rng, -3, 3);
      CHECK((net.predict(row) - net.predict(moved)).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("Gaussian sampling matches its moments and is reproducible") {
  Vector mean(2), var(2);
  mean << 1.0, -2.0;
  var << 0.25, 4.0;
  Rng rng(17);
  const int n = 20000;
  Vector sum = Vector::Zero(2), sq = Vector::Zero(2);
  for (int i = 0; i < n; ++i) {
    Vector s = sample_gaussian(mean, var, rng);
    sum += s;
    sq += s.cwiseAbs2();
  }
  Vector m = sum / n;
  Vector v = sq / n - m.cwiseAbs2();
  for (int j = 0; j < 2; ++j) {
    // Four standard errors.
    CHECK(std::abs(m[j] - mean[j]) < 4 * std::sqrt(var[j] / n));
    CHECK(std::abs(v[j] - var[j]) < 4 * var[j] * std::sqrt(2.0 / n));
  }
  Rng r1(5), r2(5);
  CHECK(sample_gaussian(mean, var, r1) == sample_gaussian(mean, var, r2));
  CHECK(sample_gaussian(mean, Vector::Zero(2), r1) == mean);
}
