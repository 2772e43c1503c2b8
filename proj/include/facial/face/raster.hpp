#pragma once

#include "facial/face/basis.hpp"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace facial::face {

/// Orthographic camera: the model x-y plane maps to pixels by
///   px = center_x + scale * x,  py = center_y - scale * y.
/// Larger z is nearer to the viewer.
struct OrthoCamera {
    double scale = 1.0;
    double center_x = 0.0;
    double center_y = 0.0;

    /// Fits the [-1, 1]^2 model square into 90% of the shorter image side.
    static OrthoCamera fit(int width, int height);

    Eigen::Vector2d project(const Eigen::Vector3d& v) const
    {
        return {center_x + scale * v.x(), center_y - scale * v.y()};
    }
};

/// Interleaved float image, row-major with channels innermost (HWC).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> pixels;

    Image() = default;
    Image(int w, int h, int c) : width(w), height(h), channels(c), pixels(static_cast<std::size_t>(w) * h * c, 0.0f) {}

    float& at(int x, int y, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
    float at(int x, int y, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
};

/// Per-pixel result of hidden-surface removal.
struct VisibilityBuffer {
    int width = 0;
    int height = 0;
    std::vector<int> triangle;                // -1 where nothing was drawn
    std::vector<std::array<double, 3>> bary;  // weights of the triangle's vertices 0, 1, 2
    std::vector<double> depth;

    int at(int x, int y) const { return triangle[static_cast<std::size_t>(y) * width + x]; }
};

/// Scan-converts every triangle with pixel centers at (x + 0.5, y + 0.5), a
/// top-left fill rule on 1/256-pixel fixed-point coordinates, and a z-buffer
/// where the larger z wins (earlier triangle wins exact ties). Zero-area
/// triangles are skipped.
VisibilityBuffer rasterize_visibility(const Vertices& vertices,
                                      const Triangles& triangles,
                                      int width,
                                      int height,
                                      const OrthoCamera& camera);

/// RGB image with barycentric color interpolation, colors clamped to [0, 1]
/// and background 0.
Image rasterize(const Vertices& vertices,
                const Vertices& colors,
                const Triangles& triangles,
                int width,
                int height,
                const OrthoCamera& camera);

Image shade_visibility(const VisibilityBuffer& vis, const Vertices& colors, const Triangles& triangles);

/// Orthographic x-y of the selected vertices, in model units.
std::vector<Eigen::Vector2d> project_landmarks(const Vertices& vertices, const std::vector<int>& indices);

} // namespace facial::face
