#pragma once

#include "facial/face/basis.hpp"
#include "facial/face/raster.hpp"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace facial::eye {

inline constexpr double kDefaultAuMax = 5.0;

struct EyeSet {
    Eigen::Vector2d center = Eigen::Vector2d::Zero(); // mean-face x-y of the eye landmarks
    std::vector<int> vertex_ids;                      // sorted ascending
};

struct EyeRegion {
    std::array<EyeSet, 2> eyes; // left, right
    double threshold = 0.0;
};

/// Elliptical eye criterion (v_x - c_x)^2 / 4 + (v_y - c_y)^2 < th.
inline bool inside_eye_ellipse(const Eigen::Vector2d& v, const Eigen::Vector2d& center, double th)
{
    const double dx = v.x() - center.x();
    const double dy = v.y() - center.y();
    return dx * dx / 4.0 + dy * dy < th;
}

/// Scans the mean face once; pose and expression never enter. Throws
/// Error{empty_selection} when either eye ends up with no vertices.
EyeRegion select_eye_vertices(const face::FaceBasis& basis, double th);

/// Triangles whose three vertices all belong to the same eye.
std::vector<int> eye_triangles(const EyeRegion& region, const face::Triangles& triangles, int vertex_count);

/// Single-channel map: pixels whose visible triangle is an eye triangle get
/// au45, all others 0. Uses the shared visibility buffer so occluded eye
/// pixels stay empty and the map aligns with the RGB render.
face::Image attention_from_visibility(const face::VisibilityBuffer& vis,
                                      const std::vector<int>& eye_tris,
                                      int triangle_count,
                                      double au45);

face::Image render_attention_map(const face::Vertices& vertices_posed,
                                 const face::Triangles& triangles,
                                 const EyeRegion& region,
                                 double au45,
                                 int width,
                                 int height,
                                 const face::OrthoCamera& camera);

/// clamp(raw / max_intensity, 0, 1).
double normalize_au(double raw_au45, double max_intensity = kDefaultAuMax);

} // namespace facial::eye
