#pragma once

#include "facial/io/track.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace facial::face {

using Vertices = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Triangles = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Affine 3DMM. Geometry and texture are stacked per vertex as
/// [x0 y0 z0 x1 y1 z1 ...] (length 3N).
struct FaceBasis {
    Eigen::VectorXd mean_geometry;
    Eigen::VectorXd mean_texture;
    Eigen::MatrixXd id_basis;  // 3N × 80
    Eigen::MatrixXd exp_basis; // 3N × 64
    Eigen::MatrixXd tex_basis; // 3N × 80
    Triangles triangles;

    std::vector<int> left_eye_landmarks;
    std::vector<int> right_eye_landmarks;
    std::vector<int> mouth_landmarks;

    int vertex_count() const noexcept { return static_cast<int>(mean_geometry.size() / 3); }
};

/// Throws Error{invalid_argument} when N < 3, M < 1, a triangle index is out
/// of range, or the stacked vectors and bases disagree in length.
void validate(const FaceBasis& basis);

struct SyntheticFaceOptions {
    std::uint64_t seed = 0;
    int grid = 64;                // vertices per side of the x-y grid over [-1, 1]^2
    int id_dims = io::kIdentityDim;
    int exp_dims = io::kExpressionDim;
    int tex_dims = io::kTextureDim;
    double geometry_scale = 0.01; // per-coordinate displacement std for a unit coefficient
    double texture_scale = 0.02;
};

/// Dome-shaped grid mesh facing +z. Basis columns are orthonormal smooth
/// random fields, scaled so a unit coefficient moves each coordinate by
/// about the given scale. Eye and mouth landmarks are symmetric vertex rings,
/// so each eye center is a vertex.
FaceBasis make_synthetic_basis(const SyntheticFaceOptions& options);

/// Directory layout: mean_geometry.facl, mean_texture.facl, id_basis.facl,
/// exp_basis.facl, tex_basis.facl and mesh.json (triangles + landmarks).
void save_basis(const FaceBasis& basis, const std::filesystem::path& dir);
FaceBasis load_basis(const std::filesystem::path& dir);

} // namespace facial::face
