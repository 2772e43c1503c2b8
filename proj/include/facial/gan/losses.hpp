#pragma once

#include "facial/common/loss_report.hpp"
#include "facial/gan/config.hpp"

#include <torch/torch.h>

namespace facial::gan {

inline constexpr double kLogEpsilon = 1e-7;

// Every loss takes batched tensors (leading batch dimension B), sums over
// frames and feature dimensions per sample, and averages over the batch.

/// ‖f0 − f̂0‖1 + ‖p0 − p̂0‖1 + ‖e0 − ê0‖1 for pred_frame0, s of shape [B, 71].
torch::Tensor loss_s(const torch::Tensor& pred_frame0, const torch::Tensor& initial_state);

/// Σ_t ‖x_t − x̂_t‖² + ω5 Σ_{t≥1} ‖(x_t − x_{t−1}) − (x̂_t − x̂_{t−1})‖² for one
/// attribute block of shape [B, T, D].
torch::Tensor sequence_loss(const torch::Tensor& pred, const torch::Tensor& target, double motion_weight);

/// The motion sum Σ_{t≥1} U alone, [B, T, D] -> scalar.
torch::Tensor motion_term(const torch::Tensor& pred, const torch::Tensor& target);

struct AttributeLosses {
    torch::Tensor expression;
    torch::Tensor pose;
    torch::Tensor eye;
};

AttributeLosses loss_attr(const torch::Tensor& pred, const torch::Tensor& target, double motion_weight);

struct RegressionLoss {
    AttributeLosses attributes;
    torch::Tensor initial_state;
    torch::Tensor total; // ω1 L_exp + ω2 L_pose + ω3 L_eye + ω4 L_s
};

/// pred, target: [B, T, 71]; initial_state: [B, 71].
RegressionLoss loss_reg(const torch::Tensor& pred, const torch::Tensor& target, const torch::Tensor& initial_state,
                        const LossWeights& weights);

struct AdversarialLosses {
    torch::Tensor generator;     // −log(D(fake) + ε), non-saturating
    torch::Tensor discriminator; // −log(D(real) + ε) − log(1 − D(fake) + ε)
};

/// Inputs are discriminator probabilities in [0, 1], shape [B].
AdversarialLosses loss_fgan(const torch::Tensor& d_real, const torch::Tensor& d_fake, double eps = kLogEpsilon);

struct FacialLoss {
    torch::Tensor total; // ω6 · generator adversarial term + L_Reg
    LossReport report;
};

/// d_fake may be undefined when ω6 = 0; the adversarial term is then 0.
FacialLoss loss_facial_total(const RegressionLoss& reg, const torch::Tensor& d_fake, const LossWeights& weights,
                             double eps = kLogEpsilon);

} // namespace facial::gan
