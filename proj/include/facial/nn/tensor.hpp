#pragma once

#include "facial/io/track.hpp"

#include <torch/torch.h>

namespace facial::nn {

/// Pins libtorch to one intra-op thread so reductions run in a fixed order.
void use_deterministic_runtime();

torch::Tensor to_tensor(const MatrixXf& m);          // [rows, cols] float32 copy
torch::Tensor to_tensor(const Eigen::VectorXf& v);   // [n] float32 copy
MatrixXf to_matrix(const torch::Tensor& t);          // 2-D tensor -> float matrix

} // namespace facial::nn
