#include "tamp/nn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tamp/nn/kernels.hpp"

namespace tamp::nn {

Mlp Mlp::create(std::size_t input, std::span<const std::size_t> hidden,
                std::size_t output, Head head, Rng& rng) {
  if (input == 0 || output == 0) throw ContractViolation("network needs nonzero widths");
  if (head == Head::kLogistic && output != 1) {
    throw ContractViolation("logistic head has exactly one output");
  }
  Mlp m;
  m.head = head;
  m.sizes.push_back(input);
  for (auto h : hidden) {
    if (h == 0) throw ContractViolation("hidden width must be positive");
    m.sizes.push_back(h);
  }
  m.sizes.push_back(head == Head::kGaussian ? 2 * output : output);
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < m.sizes.size(); ++l) {
    total += m.sizes[l + 1] * (m.sizes[l] + 1);
  }
  m.params.resize(total);
  for (std::size_t l = 0; l < m.layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.sizes[l]));
    const std::size_t n = m.sizes[l + 1] * (m.sizes[l] + 1);
    for (std::size_t i = 0; i < n; ++i) m.params[m.weight_offset(l) + i] = uniform(rng, -bound, bound);
  }
  return m;
}

std::size_t Mlp::weight_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) off += sizes[l + 1] * (sizes[l] + 1);
  return off;
}

Matrix Mlp::forward(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim()) {
    throw ContractViolation("input width does not match the network");
  }
  Matrix a = x;
  for (std::size_t l = 0; l < layers(); ++l) {
    Eigen::Map<const Matrix> w(params.data() + weight_offset(l), sizes[l + 1], sizes[l]);
    Eigen::Map<const Eigen::RowVectorXd> b(params.data() + bias_offset(l), sizes[l + 1]);
    Matrix z = a * w.transpose();
    z.rowwise() += b;
    a = (l + 1 < layers()) ? Matrix(z.cwiseMax(0.0)) : z;
  }
  return a;
}

Loss default_loss(Head head) {
  switch (head) {
    case Head::kLinear: return Loss::kMse;
    case Head::kGaussian: return Loss::kGaussianNll;
    case Head::kLogistic: return Loss::kBce;
  }
  return Loss::kMse;
}

namespace {

Head head_for(Loss loss) {
  switch (loss) {
    case Loss::kMse: return Head::kLinear;
    case Loss::kGaussianNll: return Head::kGaussian;
    case Loss::kBce: return Head::kLogistic;
  }
  return Head::kLinear;
}

double gaussian_variance(double raw) {
  return (raw > 0 ? raw + 1.0 : std::exp(raw)) + kVarianceFloor;
}

// Standard deviation of column j; below kFlat the column counts as constant.
constexpr double kFlat = 1e-6;
double column_sd(const Matrix& data, Eigen::Index j, double mean) {
  return std::sqrt((data.col(j).array() - mean).square().mean());
}

}  // namespace

NormStats NormStats::fit(const Matrix& data) {
  if (data.rows() == 0) throw ContractViolation("cannot fit normalization to no rows");
  NormStats s;
  s.shift = data.colwise().mean().transpose();
  s.scale.resize(data.cols());
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    double sd = column_sd(data, j, s.shift[j]);
    s.scale[j] = sd < kFlat ? 1.0 : sd;
  }
  return s;
}

NormStats NormStats::identity(std::size_t dim) {
  return {Vector::Zero(dim), Vector::Ones(dim)};
}

Matrix NormStats::normalize(const Matrix& data) const {
  Matrix out = data.rowwise() - shift.transpose();
  return out.array().rowwise() / scale.transpose().array();
}

Vector NormStats::normalize(const Vector& v) const {
  return (v - shift).cwiseQuotient(scale);
}

Vector NormStats::denormalize(const Vector& v) const {
  return v.cwiseProduct(scale) + shift;
}

Vector Network::predict(const Vector& x) const {
  if (mlp.head == Head::kGaussian) return predict_gaussian(x).first;
  Matrix in = input_norm.normalize(x).transpose();
  Vector z = mlp.forward(in).row(0).transpose();
  if (mlp.head == Head::kLogistic) {
    return Vector::Constant(1, 1.0 / (1.0 + std::exp(-z[0])));
  }
  return output_norm.denormalize(z);
}

std::pair<Vector, Vector> Network::predict_gaussian(const Vector& x) const {
  if (mlp.head != Head::kGaussian) throw ContractViolation("network has no Gaussian head");
  Matrix in = input_norm.normalize(x).transpose();
  Vector z = mlp.forward(in).row(0).transpose();
  const auto k = static_cast<Eigen::Index>(mlp.output_dim());
  Vector mean = output_norm.denormalize(z.head(k));
  Vector var(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    var[j] = gaussian_variance(z[k + j]) * output_norm.scale[j] * output_norm.scale[j];
  }
  return {mean, var};
}

Network train(const Matrix& inputs, const Matrix& targets, Loss loss,
              const TrainConfig& config) {
  if (inputs.rows() == 0 || inputs.rows() != targets.rows()) {
    throw ContractViolation("training needs matching nonzero row counts");
  }
  if (config.epochs < 0 || config.record_every <= 0) {
    throw ContractViolation("bad epoch or recording interval");
  }
  Network net;
  net.loss = loss;
  net.input_norm = NormStats::fit(inputs);
  net.output_norm = (loss != Loss::kBce && config.normalize_targets)
                        ? NormStats::fit(targets)
                        : NormStats::identity(targets.cols());
  Matrix x = net.input_norm.normalize(inputs);
  const Matrix y = net.output_norm.normalize(targets);

  Rng rng(derive_seed({config.seed, 0x6e6eULL}));
  net.mlp = Mlp::create(inputs.cols(), config.hidden, targets.cols(), head_for(loss), rng);
  // An input that never varies carries no signal. Its first-layer weights
  // stay at zero (its training column is exactly zero, so no gradient), and
  // unseen values there cannot move the output.
  const std::size_t in = net.mlp.sizes[0];
  for (std::size_t j = 0; j < in; ++j) {
    if (column_sd(inputs, j, net.input_norm.shift[j]) >= kFlat) continue;
    x.col(j).setZero();
    for (std::size_t i = 0; i < net.mlp.sizes[1]; ++i) {
      net.mlp.params[net.mlp.weight_offset(0) + i * in + j] = 0.0;
    }
  }

  Vector m = Vector::Zero(net.mlp.params.size());
  Vector v = Vector::Zero(net.mlp.params.size());
  Vector g;
  double b1t = 1.0, b2t = 1.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double value = kernels::loss_and_grad(net.mlp, loss, x, y, &g);
    if (!std::isfinite(value) || !g.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite loss at epoch " << epoch << " with learning rate " << config.lr;
      throw TrainingError(msg.str());
    }
    if (epoch % config.record_every == 0) net.loss_curve.push_back(value);
    b1t *= config.beta1;
    b2t *= config.beta2;
    m = config.beta1 * m + (1 - config.beta1) * g;
    v = config.beta2 * v + (1 - config.beta2) * g.cwiseAbs2();
    const double step = config.lr / (1 - b1t);
    const double vcorr = 1.0 / (1 - b2t);
    net.mlp.params.array() -=
        step * m.array() / ((v.array() * vcorr).sqrt() + config.eps);
  }
  net.final_loss = kernels::loss_and_grad(net.mlp, loss, x, y, nullptr);
  if (!std::isfinite(net.final_loss)) {
    std::ostringstream msg;
    msg << "non-finite loss at epoch " << config.epochs << " with learning rate " << config.lr;
    throw TrainingError(msg.str());
  }
  net.loss_curve.push_back(net.final_loss);
  return net;
}

double grad_check(const Mlp& net, Loss loss, const Matrix& x, const Matrix& y,
                  double step) {
  Vector analytic;
  reference::loss_and_grad(net, loss, x, y, &analytic);
  Mlp probe = net;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < probe.params.size(); ++i) {
    const double saved = probe.params[i];
    probe.params[i] = saved + step;
    double up = reference::loss_and_grad(probe, loss, x, y, nullptr);
    probe.params[i] = saved - step;
    double down = reference::loss_and_grad(probe, loss, x, y, nullptr);
    probe.params[i] = saved;
    double numeric = (up - down) / (2 * step);
    double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

Vector sample_gaussian(const Vector& mean, const Vector& var, Rng& rng) {
  if (mean.size() != var.size()) throw ContractViolation("mean and variance sizes differ");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector out(mean.size());
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    if (!(var[i] >= 0)) throw ContractViolation("negative variance");
    out[i] = mean[i] + std::sqrt(var[i]) * normal(rng);
  }
  return out;
}

namespace {

const char* head_name(Head h) {
  switch (h) {
    case Head::kLinear: return "linear";
    case Head::kGaussian: return "gaussian";
    case Head::kLogistic: return "logistic";
  }
  return "linear";
}

Head parse_head(const std::string& s) {
  if (s == "linear") return Head::kLinear;
  if (s == "gaussian") return Head::kGaussian;
  if (s == "logistic") return Head::kLogistic;
  throw FormatError("unknown network head '" + s + "'");
}

std::vector<double> as_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_vec(const nlohmann::json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

NormStats norm_from_json(const nlohmann::json& j) {
  NormStats s{from_vec(j.at("shift")), from_vec(j.at("scale"))};
  if (s.shift.size() != s.scale.size()) throw FormatError("normalization sizes differ");
  return s;
}

}  // namespace

nlohmann::json to_json(const Network& net) {
  return {{"sizes", net.mlp.sizes},
          {"head", head_name(net.mlp.head)},
          {"params", as_vec(net.mlp.params)},
          {"input_norm", {{"shift", as_vec(net.input_norm.shift)},
                          {"scale", as_vec(net.input_norm.scale)}}},
          {"output_norm", {{"shift", as_vec(net.output_norm.shift)},
                           {"scale", as_vec(net.output_norm.scale)}}},
          {"final_loss", net.final_loss},
          {"loss_curve", net.loss_curve}};
}

Network network_from_json(const nlohmann::json& j) {
  try {
    Network net;
    net.mlp.sizes = j.at("sizes").get<std::vector<std::size_t>>();
    net.mlp.head = parse_head(j.at("head").get<std::string>());
    net.loss = default_loss(net.mlp.head);
    net.mlp.params = from_vec(j.at("params"));
    net.input_norm = norm_from_json(j.at("input_norm"));
    net.output_norm = norm_from_json(j.at("output_norm"));
    net.final_loss = j.at("final_loss").get<double>();
    net.loss_curve = j.at("loss_curve").get<std::vector<double>>();
    if (net.mlp.sizes.size() < 2) throw FormatError("network needs at least one layer");
    if (static_cast<std::size_t>(net.mlp.params.size()) != net.mlp.weight_offset(net.mlp.layers())) {
      throw FormatError("parameter count does not match layer sizes");
    }
    if (net.input_norm.dim() != net.mlp.input_dim() ||
        net.output_norm.dim() != net.mlp.output_dim()) {
      throw FormatError("normalization width does not match the network");
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad network record: ") + e.what());
  }
}

}  // namespace tamp::nn
