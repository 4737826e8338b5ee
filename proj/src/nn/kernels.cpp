#include "tamp/nn/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace tamp::nn {
namespace {

using RowMap = Eigen::Map<const Matrix>;
using Array = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_shapes(const Mlp& net, Loss loss, const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.rows() == 0) {
    throw ContractViolation("inputs and targets need the same nonzero row count");
  }
  if (static_cast<std::size_t>(x.cols()) != net.input_dim()) {
    throw ContractViolation("input width does not match the network");
  }
  if (static_cast<std::size_t>(y.cols()) != net.output_dim()) {
    throw ContractViolation("target width does not match the network");
  }
  bool ok = (loss == Loss::kMse && net.head == Head::kLinear) ||
            (loss == Loss::kGaussianNll && net.head == Head::kGaussian) ||
            (loss == Loss::kBce && net.head == Head::kLogistic);
  if (!ok) throw ContractViolation("loss does not match the network head");
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

namespace kernels {
namespace {

// Loss summed over the chunk (already divided by the global normalizer) and
// gradient of that sum with respect to the raw outputs.
double head_loss(Loss loss, const Matrix& z, const Eigen::Ref<const Matrix>& y,
                 double norm, Matrix& dz) {
  const Eigen::Index k = y.cols();
  dz.resize(z.rows(), z.cols());
  switch (loss) {
    case Loss::kMse: {
      Array diff = (z - y).array();
      dz = (2.0 / norm) * diff.matrix();
      return diff.square().sum() / norm;
    }
    case Loss::kGaussianNll: {
      Array mu = z.leftCols(k).array();
      Array raw = z.rightCols(k).array();
      Array pos = (raw > 0).cast<double>();
      Array var = pos * (raw + 1.0) + (1.0 - pos) * raw.exp() + kVarianceFloor;
      Array dvar_draw = pos + (1.0 - pos) * raw.exp();
      Array r = y.array() - mu;
      double total = (0.5 * var.log() + 0.5 * r.square() / var).sum();
      dz.leftCols(k) = (-(r / var) / norm).matrix();
      dz.rightCols(k) =
          (((0.5 / var) - 0.5 * r.square() / var.square()) * dvar_draw / norm).matrix();
      return total / norm;
    }
    case Loss::kBce: {
      double total = 0.0;
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        double zi = z(i, 0), yi = y(i, 0);
        total += softplus(zi) - yi * zi;
        dz(i, 0) = (sigmoid(zi) - yi) / norm;
      }
      return total / norm;
    }
  }
  return 0.0;
}

}  // namespace

double loss_and_grad(const Mlp& net, Loss loss, const Matrix& x, const Matrix& y,
                     Vector* grad) {
  check_shapes(net, loss, x, y);
  const Eigen::Index n = x.rows();
  const double norm = loss == Loss::kBce ? static_cast<double>(n)
                                         : static_cast<double>(n * y.cols());
  const Eigen::Index chunks = (n + kChunkRows - 1) / kChunkRows;
  const std::size_t layers = net.layers();
  std::vector<double> chunk_loss(chunks, 0.0);
  std::vector<Vector> chunk_grad(grad ? chunks : 0);

#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index begin = c * kChunkRows;
    const Eigen::Index rows = std::min<Eigen::Index>(kChunkRows, n - begin);
    std::vector<Matrix> acts(layers + 1);
    acts[0] = x.middleRows(begin, rows);
    for (std::size_t l = 0; l < layers; ++l) {
      RowMap w(net.params.data() + net.weight_offset(l), net.sizes[l + 1], net.sizes[l]);
      Eigen::Map<const Eigen::RowVectorXd> b(net.params.data() + net.bias_offset(l),
                                             net.sizes[l + 1]);
      acts[l + 1].noalias() = acts[l] * w.transpose();
      acts[l + 1].rowwise() += b;
      if (l + 1 < layers) acts[l + 1] = acts[l + 1].cwiseMax(0.0);
    }
    Matrix dz;
    chunk_loss[c] = head_loss(loss, acts[layers], y.middleRows(begin, rows), norm, dz);
    if (!grad) continue;

    Vector& g = chunk_grad[c];
    g.setZero(net.params.size());
    for (std::size_t l = layers; l-- > 0;) {
      Eigen::Map<Matrix> gw(g.data() + net.weight_offset(l), net.sizes[l + 1], net.sizes[l]);
      Eigen::Map<Eigen::RowVectorXd> gb(g.data() + net.bias_offset(l), net.sizes[l + 1]);
      gw.noalias() += dz.transpose() * acts[l];
      gb += dz.colwise().sum();
      if (l == 0) break;
      RowMap w(net.params.data() + net.weight_offset(l), net.sizes[l + 1], net.sizes[l]);
      Matrix da = dz * w;
      // Rectifier derivative from the post-activation values.
      dz = (acts[l].array() > 0).select(da, 0.0);
    }
  }

  double total = 0.0;
  for (double v : chunk_loss) total += v;
  if (grad) {
    grad->setZero(net.params.size());
    for (const auto& g : chunk_grad) *grad += g;
  }
  return total;
}

}  // namespace kernels

namespace reference {

double loss_and_grad(const Mlp& net, Loss loss, const Matrix& x, const Matrix& y,
                     Vector* grad) {
  check_shapes(net, loss, x, y);
  const std::size_t n = x.rows(), k = y.cols(), layers = net.layers();
  const double norm = loss == Loss::kBce ? static_cast<double>(n)
                                         : static_cast<double>(n * k);
  const double* p = net.params.data();
  if (grad) grad->setZero(net.params.size());
  double total = 0.0;

  for (std::size_t s = 0; s < n; ++s) {
    // Forward pass, keeping pre-activations.
    std::vector<std::vector<double>> a(layers + 1), zs(layers + 1);
    a[0].assign(x.row(s).data(), x.row(s).data() + x.cols());
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t in = net.sizes[l], out = net.sizes[l + 1];
      zs[l + 1].assign(out, 0.0);
      a[l + 1].assign(out, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        double acc = p[net.bias_offset(l) + o];
        for (std::size_t i = 0; i < in; ++i) acc += p[net.weight_offset(l) + o * in + i] * a[l][i];
        zs[l + 1][o] = acc;
        a[l + 1][o] = (l + 1 < layers) ? std::max(acc, 0.0) : acc;
      }
    }
    const std::vector<double>& z = a[layers];
    std::vector<double> dz(z.size(), 0.0);
    switch (loss) {
      case Loss::kMse:
        for (std::size_t j = 0; j < k; ++j) {
          double d = z[j] - y(s, j);
          total += d * d / norm;
          dz[j] = 2.0 * d / norm;
        }
        break;
      case Loss::kGaussianNll:
        for (std::size_t j = 0; j < k; ++j) {
          double mu = z[j], raw = z[k + j];
          double var = (raw > 0 ? raw + 1.0 : std::exp(raw)) + kVarianceFloor;
          double dvar = raw > 0 ? 1.0 : std::exp(raw);
          double r = y(s, j) - mu;
          total += (0.5 * std::log(var) + 0.5 * r * r / var) / norm;
          dz[j] = -r / var / norm;
          dz[k + j] = (0.5 / var - 0.5 * r * r / (var * var)) * dvar / norm;
        }
        break;
      case Loss::kBce:
        total += (softplus(z[0]) - y(s, 0) * z[0]) / norm;
        dz[0] = (sigmoid(z[0]) - y(s, 0)) / norm;
        break;
    }
    if (!grad) continue;
    double* g = grad->data();
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = net.sizes[l], out = net.sizes[l + 1];
      std::vector<double> da(in, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        g[net.bias_offset(l) + o] += dz[o];
        for (std::size_t i = 0; i < in; ++i) {
          g[net.weight_offset(l) + o * in + i] += dz[o] * a[l][i];
          da[i] += dz[o] * p[net.weight_offset(l) + o * in + i];
        }
      }
      if (l == 0) break;
      dz.assign(in, 0.0);
      for (std::size_t i = 0; i < in; ++i) dz[i] = zs[l][i] > 0 ? da[i] : 0.0;
    }
  }
  return total;
}

}  // namespace reference
}  // namespace tamp::nn
