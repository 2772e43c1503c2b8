#include "facial/face/model.hpp"

#include "facial/common/error.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace facial::face {

namespace {

Vertices to_vertices(const Eigen::VectorXd& stacked)
{
    return Eigen::Map<const Vertices>(stacked.data(), stacked.size() / 3, 3);
}

} // namespace

Vertices synthesize_geometry(const FaceBasis& basis, const Eigen::VectorXd& f_id, const Eigen::VectorXd& f_exp)
{
    if (f_id.size() != basis.id_basis.cols() || f_exp.size() != basis.exp_basis.cols())
        throw Error(ErrorKind::dim_mismatch, "geometry coefficient lengths do not match the basis");
    Eigen::VectorXd s = basis.mean_geometry;
    if (f_id.size() > 0)
        s.noalias() += basis.id_basis * f_id;
    if (f_exp.size() > 0)
        s.noalias() += basis.exp_basis * f_exp;
    return to_vertices(s);
}

Vertices synthesize_texture(const FaceBasis& basis, const Eigen::VectorXd& f_tex)
{
    if (f_tex.size() != basis.tex_basis.cols())
        throw Error(ErrorKind::dim_mismatch, "texture coefficient length does not match the basis");
    Eigen::VectorXd t = basis.mean_texture;
    if (f_tex.size() > 0)
        t.noalias() += basis.tex_basis * f_tex;
    return to_vertices(t);
}

PoseParams PoseParams::from_row(std::span<const float> row)
{
    if (row.size() != 6)
        throw Error(ErrorKind::dim_mismatch, "pose rows have six entries");
    PoseParams pose;
    pose.euler << row[0], row[1], row[2];
    pose.translation << row[3], row[4], row[5];
    return pose;
}

Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& euler)
{
    const double cx = std::cos(euler.x()), sx = std::sin(euler.x());
    const double cy = std::cos(euler.y()), sy = std::sin(euler.y());
    const double cz = std::cos(euler.z()), sz = std::sin(euler.z());
    Eigen::Matrix3d rx, ry, rz;
    rx << 1, 0, 0, 0, cx, -sx, 0, sx, cx;
    ry << cy, 0, sy, 0, 1, 0, -sy, 0, cy;
    rz << cz, -sz, 0, sz, cz, 0, 0, 0, 1;
    return rz * ry * rx;
}

Vertices apply_pose(const Vertices& vertices, const PoseParams& pose)
{
    if (!pose.euler.allFinite() || !pose.translation.allFinite())
        throw Error(ErrorKind::invalid_argument, "pose must be finite");
    const Eigen::Matrix3d r = rotation_matrix(pose.euler);
    Vertices out = vertices * r.transpose();
    out.rowwise() += pose.translation.transpose();
    return out;
}

Vertices vertex_normals(const Vertices& vertices, const Triangles& triangles)
{
    Vertices acc = Vertices::Zero(vertices.rows(), 3);
    for (Eigen::Index t = 0; t < triangles.rows(); ++t) {
        const int a = triangles(t, 0), b = triangles(t, 1), c = triangles(t, 2);
        const Eigen::Vector3d e1 = (vertices.row(b) - vertices.row(a)).transpose();
        const Eigen::Vector3d e2 = (vertices.row(c) - vertices.row(a)).transpose();
        // |e1 × e2| is twice the triangle area, which provides the area weighting.
        const Eigen::RowVector3d n = e1.cross(e2).transpose();
        acc.row(a) += n;
        acc.row(b) += n;
        acc.row(c) += n;
    }
    for (Eigen::Index v = 0; v < acc.rows(); ++v) {
        const double len = acc.row(v).norm();
        if (len > 0.0)
            acc.row(v) /= len;
        else
            acc.row(v) << 0.0, 0.0, 1.0;
    }
    return acc;
}

std::array<double, kShCoefficients> sh_basis(const Eigen::Vector3d& n)
{
    constexpr double c0 = 0.28209479177387814;  // 1 / (2 sqrt(pi))
    constexpr double c1 = 0.4886025119029199;   // sqrt(3 / (4 pi))
    constexpr double c2 = 1.0925484305920792;   // sqrt(15 / (4 pi))
    constexpr double c20 = 0.31539156525252005; // sqrt(5 / (16 pi))
    constexpr double c22 = 0.5462742152960396;  // sqrt(15 / (16 pi))
    const double x = n.x(), y = n.y(), z = n.z();
    return {c0,         c1 * y,     c1 * z,
            c1 * x,     c2 * x * y, c2 * y * z,
            c20 * (3.0 * z * z - 1.0), c2 * x * z, c22 * (x * x - y * y)};
}

SHIllumination SHIllumination::from_row(std::span<const float> row)
{
    if (row.size() != kIlluminationSize)
        throw Error(ErrorKind::dim_mismatch, "illumination rows have 27 entries");
    SHIllumination sh;
    for (std::size_t i = 0; i < row.size(); ++i)
        sh.gamma[i] = row[i];
    return sh;
}

Vertices shade_sh(const Vertices& normals, const Vertices& texture, const SHIllumination& illumination)
{
    if (normals.rows() != texture.rows())
        throw Error(ErrorKind::shape_mismatch, "normals and texture differ in vertex count");
    Vertices out(normals.rows(), 3);
    for (Eigen::Index v = 0; v < normals.rows(); ++v) {
        const Eigen::Vector3d n = normals.row(v).transpose();
        if (std::abs(n.norm() - 1.0) > 1e-3)
            throw Error(ErrorKind::invalid_argument, "normal " + std::to_string(v) + " is not unit length");
        const auto y = sh_basis(n);
        for (int c = 0; c < 3; ++c) {
            double irradiance = 0.0;
            for (int k = 0; k < kShCoefficients; ++k)
                irradiance += illumination.gamma[static_cast<std::size_t>(9 * c + k)] * y[static_cast<std::size_t>(k)];
            out(v, c) = texture(v, c) * irradiance;
        }
    }
    return out;
}

} // namespace facial::face
