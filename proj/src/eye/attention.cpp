#include "facial/eye/attention.hpp"

#include "facial/common/error.hpp"

#include <algorithm>

namespace facial::eye {

EyeRegion select_eye_vertices(const face::FaceBasis& basis, double th)
{
    if (!(th > 0.0))
        throw Error(ErrorKind::invalid_argument, "eye threshold must be positive");
    const std::array<const std::vector<int>*, 2> landmarks{&basis.left_eye_landmarks, &basis.right_eye_landmarks};
    const int n = basis.vertex_count();

    EyeRegion region;
    region.threshold = th;
    for (std::size_t e = 0; e < 2; ++e) {
        const auto& ids = *landmarks[e];
        if (ids.empty())
            throw Error(ErrorKind::invalid_argument, "face basis has no eye landmarks");
        Eigen::Vector2d center = Eigen::Vector2d::Zero();
        for (int i : ids)
            center += basis.mean_geometry.segment<2>(3 * i);
        center /= static_cast<double>(ids.size());

        EyeSet& eye = region.eyes[e];
        eye.center = center;
        for (int v = 0; v < n; ++v)
            if (inside_eye_ellipse(basis.mean_geometry.segment<2>(3 * v), center, th))
                eye.vertex_ids.push_back(v);
        if (eye.vertex_ids.empty())
            throw Error(ErrorKind::empty_selection,
                        std::string(e == 0 ? "left" : "right") + " eye region is empty; threshold too small for the mesh");
    }
    return region;
}

std::vector<int> eye_triangles(const EyeRegion& region, const face::Triangles& triangles, int vertex_count)
{
    std::vector<int> owner(static_cast<std::size_t>(vertex_count), -1);
    for (int e = 0; e < 2; ++e)
        for (int v : region.eyes[static_cast<std::size_t>(e)].vertex_ids)
            owner[static_cast<std::size_t>(v)] = e;

    std::vector<int> tris;
    for (Eigen::Index t = 0; t < triangles.rows(); ++t) {
        const int a = owner[static_cast<std::size_t>(triangles(t, 0))];
        if (a >= 0 && a == owner[static_cast<std::size_t>(triangles(t, 1))]
            && a == owner[static_cast<std::size_t>(triangles(t, 2))])
            tris.push_back(static_cast<int>(t));
    }
    return tris;
}

face::Image attention_from_visibility(const face::VisibilityBuffer& vis,
                                      const std::vector<int>& eye_tris,
                                      int triangle_count,
                                      double au45)
{
    std::vector<char> is_eye(static_cast<std::size_t>(triangle_count), 0);
    for (int t : eye_tris)
        is_eye[static_cast<std::size_t>(t)] = 1;

    face::Image map(vis.width, vis.height, 1);
    const auto value = static_cast<float>(au45);
    if (value == 0.0f)
        return map;
    for (std::size_t p = 0; p < vis.triangle.size(); ++p) {
        const int t = vis.triangle[p];
        if (t >= 0 && is_eye[static_cast<std::size_t>(t)])
            map.pixels[p] = value;
    }
    return map;
}

face::Image render_attention_map(const face::Vertices& vertices_posed,
                                 const face::Triangles& triangles,
                                 const EyeRegion& region,
                                 double au45,
                                 int width,
                                 int height,
                                 const face::OrthoCamera& camera)
{
    const auto vis = face::rasterize_visibility(vertices_posed, triangles, width, height, camera);
    const auto tris = eye_triangles(region, triangles, static_cast<int>(vertices_posed.rows()));
    return attention_from_visibility(vis, tris, static_cast<int>(triangles.rows()), au45);
}

double normalize_au(double raw_au45, double max_intensity)
{
    if (!(max_intensity > 0.0))
        throw Error(ErrorKind::invalid_argument, "AU normalisation divisor must be positive");
    return std::clamp(raw_au45 / max_intensity, 0.0, 1.0);
}

} // namespace facial::eye
