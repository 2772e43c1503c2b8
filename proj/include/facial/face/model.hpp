#pragma once

#include "facial/face/basis.hpp"

#include <Eigen/Core>

#include <array>
#include <span>

namespace facial::face {

/// S = S̄ + B_id·f_id + B_exp·f_exp, reshaped to N × 3.
Vertices synthesize_geometry(const FaceBasis& basis, const Eigen::VectorXd& f_id, const Eigen::VectorXd& f_exp);

/// T = T̄ + B_tex·f_tex as per-vertex RGB, N × 3. No clamping here.
Vertices synthesize_texture(const FaceBasis& basis, const Eigen::VectorXd& f_tex);

struct PoseParams {
    Eigen::Vector3d euler = Eigen::Vector3d::Zero(); // pitch (x), yaw (y), roll (z), radians
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    /// From a pose track row [pitch, yaw, roll, tx, ty, tz].
    static PoseParams from_row(std::span<const float> row);
};

/// R = R_z(roll) · R_y(yaw) · R_x(pitch).
Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& euler);

Vertices apply_pose(const Vertices& vertices, const PoseParams& pose);

/// Area-weighted average of incident face normals, normalised. Vertices not
/// referenced by any triangle get (0, 0, 1).
Vertices vertex_normals(const Vertices& vertices, const Triangles& triangles);

inline constexpr int kShCoefficients = 9;
inline constexpr int kIlluminationSize = 3 * kShCoefficients;

/// Real spherical harmonics up to band 2 at unit direction n, ordered
/// Y00, Y1-1 (y), Y10 (z), Y11 (x), Y2-2 (xy), Y2-1 (yz), Y20, Y21 (xz), Y22.
std::array<double, kShCoefficients> sh_basis(const Eigen::Vector3d& n);

struct SHIllumination {
    std::array<double, kIlluminationSize> gamma{}; // channel c uses gamma[9c .. 9c+8]

    static SHIllumination from_row(std::span<const float> row);
};

/// color_c(v) = texture_c(v) · Σ_k gamma[9c+k] · Y_k(n_v). Normals must be unit
/// length within 1e-3.
Vertices shade_sh(const Vertices& normals, const Vertices& texture, const SHIllumination& illumination);

} // namespace facial::face
