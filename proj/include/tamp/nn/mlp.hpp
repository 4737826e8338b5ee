#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tamp/core/error.hpp"
#include "tamp/util/rng.hpp"

namespace tamp::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Head { kLinear, kGaussian, kLogistic };
enum class Loss { kMse, kGaussianNll, kBce };

/// Positivity floor added to the Gaussian head variance.
inline constexpr double kVarianceFloor = 1e-6;

/// Fully connected rectifier network with all parameters in one flat vector.
/// Layer l stores W_l (out x in, row-major) followed by b_l. A Gaussian head
/// doubles the last layer: the first half is the mean, the second half goes
/// through elu(z) + 1 + kVarianceFloor.
struct Mlp {
  std::vector<std::size_t> sizes;  // input, hidden..., raw output
  Head head = Head::kLinear;
  Vector params;

  static Mlp create(std::size_t input, std::span<const std::size_t> hidden,
                    std::size_t output, Head head, Rng& rng);

  std::size_t input_dim() const { return sizes.front(); }
  /// Logical output size (mean dimension for a Gaussian head).
  std::size_t output_dim() const {
    return head == Head::kGaussian ? sizes.back() / 2 : sizes.back();
  }
  std::size_t layers() const { return sizes.size() - 1; }
  std::size_t weight_offset(std::size_t layer) const;
  std::size_t bias_offset(std::size_t layer) const {
    return weight_offset(layer) + sizes[layer + 1] * sizes[layer];
  }

  /// Raw last-layer activations for a batch (rows are samples).
  Matrix forward(const Matrix& x) const;
};

Loss default_loss(Head head);

/// Per-dimension shift/scale; degenerate dimensions keep scale 1.
struct NormStats {
  Vector shift, scale;

  static NormStats fit(const Matrix& data);
  static NormStats identity(std::size_t dim);
  Matrix normalize(const Matrix& data) const;
  Vector normalize(const Vector& v) const;
  Vector denormalize(const Vector& v) const;
  std::size_t dim() const { return shift.size(); }
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

struct TrainConfig {
  int epochs = 10000;
  double lr = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden = {32, 32};
  bool normalize_targets = true;  // ignored for BCE
  int record_every = 100;         // loss-curve sampling interval
};

/// Trained network together with its normalization statistics.
struct Network {
  Mlp mlp;
  Loss loss = Loss::kMse;
  NormStats input_norm;
  NormStats output_norm;  // identity for BCE
  std::vector<double> loss_curve;
  double final_loss = 0.0;

  /// Linear head: denormalized prediction. Logistic head: probability.
  Vector predict(const Vector& x) const;
  /// Gaussian head: denormalized mean and diagonal variance.
  std::pair<Vector, Vector> predict_gaussian(const Vector& x) const;
};

/// Full-batch Adam, one step per epoch. Deterministic given the config.
/// Throws TrainingError on a non-finite loss.
Network train(const Matrix& inputs, const Matrix& targets, Loss loss,
              const TrainConfig& config);

/// Largest relative error between the analytic gradient and central finite
/// differences (step 1e-5) over every parameter.
double grad_check(const Mlp& net, Loss loss, const Matrix& x, const Matrix& y,
                  double step = 1e-5);

/// mean + sqrt(var) * N(0, I).
Vector sample_gaussian(const Vector& mean, const Vector& var, Rng& rng);

nlohmann::json to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);

}  // namespace tamp::nn
