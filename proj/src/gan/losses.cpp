#include "facial/gan/losses.hpp"

#include "facial/common/error.hpp"
#include "facial/gan/networks.hpp"

namespace facial::gan {

namespace {

torch::Tensor per_sample_mean(const torch::Tensor& per_sample)
{
    return per_sample.mean();
}

} // namespace

torch::Tensor loss_s(const torch::Tensor& pred_frame0, const torch::Tensor& initial_state)
{
    if (pred_frame0.sizes() != initial_state.sizes())
        throw Error(ErrorKind::shape_mismatch, "initial-state loss needs matching shapes");
    // The 64/6/1 split is a partition of the 71 entries, so the three L1 norms
    // add up to one L1 norm over the concatenation.
    return per_sample_mean((pred_frame0 - initial_state).abs().sum(-1));
}

torch::Tensor motion_term(const torch::Tensor& pred, const torch::Tensor& target)
{
    const auto frames = pred.size(1);
    if (frames < 2)
        return torch::zeros({}, pred.options());
    auto d_target = target.slice(1, 1, frames) - target.slice(1, 0, frames - 1);
    auto d_pred = pred.slice(1, 1, frames) - pred.slice(1, 0, frames - 1);
    return per_sample_mean((d_target - d_pred).pow(2).sum({1, 2}));
}

torch::Tensor sequence_loss(const torch::Tensor& pred, const torch::Tensor& target, double motion_weight)
{
    if (pred.sizes() != target.sizes() || pred.dim() != 3)
        throw Error(ErrorKind::shape_mismatch, "sequence loss needs matching [B, T, D] tensors");
    auto value = per_sample_mean((target - pred).pow(2).sum({1, 2}));
    return value + motion_weight * motion_term(pred, target);
}

AttributeLosses loss_attr(const torch::Tensor& pred, const torch::Tensor& target, double motion_weight)
{
    const auto p = split_attributes(pred);
    const auto t = split_attributes(target);
    return {sequence_loss(p.expression, t.expression, motion_weight), sequence_loss(p.pose, t.pose, motion_weight),
            sequence_loss(p.blink, t.blink, motion_weight)};
}

RegressionLoss loss_reg(const torch::Tensor& pred, const torch::Tensor& target, const torch::Tensor& initial_state,
                        const LossWeights& w)
{
    RegressionLoss out;
    out.attributes = loss_attr(pred, target, w.motion);
    out.initial_state = loss_s(pred.select(1, 0), initial_state);
    out.total = w.expression * out.attributes.expression + w.pose * out.attributes.pose
                + w.eye * out.attributes.eye + w.initial_state * out.initial_state;
    return out;
}

AdversarialLosses loss_fgan(const torch::Tensor& d_real, const torch::Tensor& d_fake, double eps)
{
    AdversarialLosses out;
    out.generator = -(d_fake + eps).log().mean();
    out.discriminator = -((d_real + eps).log() + (1.0 - d_fake + eps).log()).mean();
    return out;
}

FacialLoss loss_facial_total(const RegressionLoss& reg, const torch::Tensor& d_fake, const LossWeights& w, double eps)
{
    FacialLoss out;
    torch::Tensor adversarial = d_fake.defined() ? -(d_fake + eps).log().mean() : torch::zeros({}, reg.total.options());
    out.total = w.adversarial * adversarial + reg.total;

    auto value = [](const torch::Tensor& t) { return t.detach().to(torch::kDouble).item<double>(); };
    out.report.add("L_exp", value(reg.attributes.expression));
    out.report.add("L_pose", value(reg.attributes.pose));
    out.report.add("L_eye", value(reg.attributes.eye));
    out.report.add("L_s", value(reg.initial_state));
    out.report.add("L_reg", value(reg.total));
    out.report.add("L_fgan_gen", value(adversarial));
    out.report.total = value(out.total);
    return out;
}

} // namespace facial::gan
