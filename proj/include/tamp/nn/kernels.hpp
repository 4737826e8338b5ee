#pragma once

#include "tamp/nn/mlp.hpp"

namespace tamp::nn {

/// Mean loss over the batch and, if `grad` is non-null, its gradient with
/// respect to net.params (resized as needed).
///
/// The parallel kernel splits rows into fixed-size chunks, runs blocked
/// matrix products per chunk, and sums per-chunk gradients in chunk order,
/// so results do not depend on the thread count.
namespace kernels {
inline constexpr std::size_t kChunkRows = 512;
double loss_and_grad(const Mlp& net, Loss loss, const Matrix& x, const Matrix& y,
                     Vector* grad);
}  // namespace kernels

/// Straightforward per-sample loops; the oracle for the parallel kernel.
namespace reference {
double loss_and_grad(const Mlp& net, Loss loss, const Matrix& x, const Matrix& y,
                     Vector* grad);
}  // namespace reference

}  // namespace tamp::nn
