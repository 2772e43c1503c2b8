#include "facial/face/raster.hpp"

#include "facial/common/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace facial::face {

namespace {

constexpr int kSubpixelBits = 8;
constexpr std::int64_t kSubpixel = std::int64_t{1} << kSubpixelBits;

struct FixedPoint {
    std::int64_t x;
    std::int64_t y;
};

FixedPoint to_fixed(const Eigen::Vector2d& p)
{
    return {static_cast<std::int64_t>(std::llround(p.x() * kSubpixel)),
            static_cast<std::int64_t>(std::llround(p.y() * kSubpixel))};
}

// Positive when p lies on the interior side of a->b for the orientation
// chosen below; exact in integer arithmetic so shared edges agree bit-for-bit.
std::int64_t edge(const FixedPoint& a, const FixedPoint& b, std::int64_t px, std::int64_t py)
{
    return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

// Screen y grows downwards. A horizontal edge is "top" when the interior is
// below it; a non-horizontal edge is "left" when the interior is to its right.
bool is_top_left(const FixedPoint& a, const FixedPoint& b)
{
    return (a.y == b.y && b.x > a.x) || b.y < a.y;
}

} // namespace

OrthoCamera OrthoCamera::fit(int width, int height)
{
    return {0.45 * std::min(width, height), 0.5 * width, 0.5 * height};
}

VisibilityBuffer rasterize_visibility(const Vertices& vertices,
                                      const Triangles& triangles,
                                      int width,
                                      int height,
                                      const OrthoCamera& camera)
{
    if (width <= 0 || height <= 0)
        throw Error(ErrorKind::invalid_argument, "image dimensions must be positive");
    if (triangles.size() > 0
        && ((triangles.array() < 0).any() || (triangles.array() >= vertices.rows()).any()))
        throw Error(ErrorKind::invalid_argument, "triangle index out of range");

    VisibilityBuffer vis;
    vis.width = width;
    vis.height = height;
    const auto pixel_count = static_cast<std::size_t>(width) * height;
    vis.triangle.assign(pixel_count, -1);
    vis.bary.assign(pixel_count, {0.0, 0.0, 0.0});
    vis.depth.assign(pixel_count, -std::numeric_limits<double>::infinity());

    std::vector<FixedPoint> screen(static_cast<std::size_t>(vertices.rows()));
    for (Eigen::Index v = 0; v < vertices.rows(); ++v)
        screen[static_cast<std::size_t>(v)] = to_fixed(camera.project(vertices.row(v).transpose()));

    for (Eigen::Index t = 0; t < triangles.rows(); ++t) {
        std::array<int, 3> idx{triangles(t, 0), triangles(t, 1), triangles(t, 2)};
        std::array<int, 3> slot{0, 1, 2};
        FixedPoint p0 = screen[static_cast<std::size_t>(idx[0])];
        FixedPoint p1 = screen[static_cast<std::size_t>(idx[1])];
        FixedPoint p2 = screen[static_cast<std::size_t>(idx[2])];
        std::int64_t area = edge(p0, p1, p2.x, p2.y);
        if (area == 0)
            continue;
        if (area < 0) {
            std::swap(p1, p2);
            std::swap(idx[1], idx[2]);
            std::swap(slot[1], slot[2]);
            area = -area;
        }

        const std::int64_t min_x = std::min({p0.x, p1.x, p2.x});
        const std::int64_t max_x = std::max({p0.x, p1.x, p2.x});
        const std::int64_t min_y = std::min({p0.y, p1.y, p2.y});
        const std::int64_t max_y = std::max({p0.y, p1.y, p2.y});
        // Pixel x covers center (x + 0.5) * kSubpixel.
        auto first_pixel = [](std::int64_t lo) {
            return static_cast<int>(std::ceil((static_cast<double>(lo) / kSubpixel) - 0.5));
        };
        auto last_pixel = [](std::int64_t hi) {
            return static_cast<int>(std::floor((static_cast<double>(hi) / kSubpixel) - 0.5));
        };
        const int x0 = std::max(0, first_pixel(min_x));
        const int x1 = std::min(width - 1, last_pixel(max_x));
        const int y0 = std::max(0, first_pixel(min_y));
        const int y1 = std::min(height - 1, last_pixel(max_y));
        if (x0 > x1 || y0 > y1)
            continue;

        const bool tl0 = is_top_left(p1, p2);
        const bool tl1 = is_top_left(p2, p0);
        const bool tl2 = is_top_left(p0, p1);
        const double z0 = vertices(idx[0], 2), z1 = vertices(idx[1], 2), z2 = vertices(idx[2], 2);
        const double inv_area = 1.0 / static_cast<double>(area);

        for (int y = y0; y <= y1; ++y) {
            const std::int64_t py = y * kSubpixel + kSubpixel / 2;
            for (int x = x0; x <= x1; ++x) {
                const std::int64_t px = x * kSubpixel + kSubpixel / 2;
                const std::int64_t w0 = edge(p1, p2, px, py);
                const std::int64_t w1 = edge(p2, p0, px, py);
                const std::int64_t w2 = edge(p0, p1, px, py);
                if (w0 < 0 || w1 < 0 || w2 < 0)
                    continue;
                if ((w0 == 0 && !tl0) || (w1 == 0 && !tl1) || (w2 == 0 && !tl2))
                    continue;
                const double b0 = w0 * inv_area, b1 = w1 * inv_area, b2 = w2 * inv_area;
                const double z = b0 * z0 + b1 * z1 + b2 * z2;
                const auto pix = static_cast<std::size_t>(y) * width + x;
                if (!(z > vis.depth[pix]))
                    continue;
                vis.depth[pix] = z;
                vis.triangle[pix] = static_cast<int>(t);
                std::array<double, 3> weights{};
                weights[static_cast<std::size_t>(slot[0])] = b0;
                weights[static_cast<std::size_t>(slot[1])] = b1;
                weights[static_cast<std::size_t>(slot[2])] = b2;
                vis.bary[pix] = weights;
            }
        }
    }
    return vis;
}

Image shade_visibility(const VisibilityBuffer& vis, const Vertices& colors, const Triangles& triangles)
{
    Image img(vis.width, vis.height, 3);
    for (int y = 0; y < vis.height; ++y) {
        for (int x = 0; x < vis.width; ++x) {
            const auto pix = static_cast<std::size_t>(y) * vis.width + x;
            const int t = vis.triangle[pix];
            if (t < 0)
                continue;
            const auto& w = vis.bary[pix];
            for (int c = 0; c < 3; ++c) {
                double value = 0.0;
                for (int k = 0; k < 3; ++k)
                    value += w[static_cast<std::size_t>(k)] * colors(triangles(t, k), c);
                img.at(x, y, c) = static_cast<float>(std::clamp(value, 0.0, 1.0));
            }
        }
    }
    return img;
}

Image rasterize(const Vertices& vertices,
                const Vertices& colors,
                const Triangles& triangles,
                int width,
                int height,
                const OrthoCamera& camera)
{
    if (colors.rows() != vertices.rows())
        throw Error(ErrorKind::shape_mismatch, "colors and vertices differ in count");
    return shade_visibility(rasterize_visibility(vertices, triangles, width, height, camera), colors, triangles);
}

std::vector<Eigen::Vector2d> project_landmarks(const Vertices& vertices, const std::vector<int>& indices)
{
    std::vector<Eigen::Vector2d> points;
    points.reserve(indices.size());
    for (int i : indices) {
        if (i < 0 || i >= vertices.rows())
            throw Error(ErrorKind::invalid_argument, "landmark index out of range");
        points.emplace_back(vertices(i, 0), vertices(i, 1));
    }
    return points;
}

} // namespace facial::face
