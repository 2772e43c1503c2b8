#include "facial/nn/tensor.hpp"

#include "facial/common/error.hpp"

namespace facial::nn {

void use_deterministic_runtime()
{
    if (torch::get_num_threads() != 1)
        torch::set_num_threads(1);
}

torch::Tensor to_tensor(const MatrixXf& m)
{
    return torch::from_blob(const_cast<float*>(m.data()), {m.rows(), m.cols()}, torch::kFloat32).clone();
}

torch::Tensor to_tensor(const Eigen::VectorXf& v)
{
    return torch::from_blob(const_cast<float*>(v.data()), {v.size()}, torch::kFloat32).clone();
}

MatrixXf to_matrix(const torch::Tensor& t)
{
    if (t.dim() != 2)
        throw Error(ErrorKind::shape_mismatch, "expected a 2-D tensor");
    const auto c = t.detach().to(torch::kFloat32).contiguous().cpu();
    return Eigen::Map<const MatrixXf>(c.data_ptr<float>(), c.size(0), c.size(1));
}

} // namespace facial::nn
