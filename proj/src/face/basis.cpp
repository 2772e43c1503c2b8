#include "facial/face/basis.hpp"

#include "facial/common/error.hpp"
#include "facial/io/container.hpp"

#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>

namespace facial::face {

namespace fs = std::filesystem;

void validate(const FaceBasis& basis)
{
    const auto len = basis.mean_geometry.size();
    if (len % 3 != 0 || len / 3 < 3)
        throw Error(ErrorKind::invalid_argument, "face basis needs at least three vertices");
    if (basis.mean_texture.size() != len)
        throw Error(ErrorKind::dim_mismatch, "mean texture length differs from mean geometry");
    for (const Eigen::MatrixXd* b : {&basis.id_basis, &basis.exp_basis, &basis.tex_basis})
        if (b->rows() != len && b->size() != 0)
            throw Error(ErrorKind::dim_mismatch, "basis row count differs from 3N");
    if (basis.triangles.rows() < 1)
        throw Error(ErrorKind::invalid_argument, "face basis needs at least one triangle");
    const int n = basis.vertex_count();
    if ((basis.triangles.array() < 0).any() || (basis.triangles.array() >= n).any())
        throw Error(ErrorKind::invalid_argument, "triangle index out of range");
    for (const auto* set : {&basis.left_eye_landmarks, &basis.right_eye_landmarks, &basis.mouth_landmarks})
        for (int i : *set)
            if (i < 0 || i >= n)
                throw Error(ErrorKind::invalid_argument, "landmark index out of range");
}

namespace {

// Orthonormal columns spanning smooth fields: per coordinate, a few random
// low-frequency plane waves over the vertex x-y. QR keeps the span, so the
// orthonormalised columns stay smooth.
Eigen::MatrixXd smooth_fields(std::mt19937_64& rng, const Eigen::VectorXd& mean, int cols)
{
    const Eigen::Index n = mean.size() / 3;
    if (cols == 0)
        return Eigen::MatrixXd(mean.size(), 0);
    Eigen::MatrixXd b(mean.size(), cols);
    std::uniform_real_distribution<double> freq(-2.0, 2.0), phase(0.0, 2.0 * M_PI);
    std::normal_distribution<double> amp(0.0, 1.0);
    constexpr int kWaves = 3;
    for (int c = 0; c < cols; ++c) {
        for (int k = 0; k < 3; ++k) {
            std::array<double, 3 * kWaves> w{};
            for (int q = 0; q < kWaves; ++q) {
                w[3 * q] = freq(rng);
                w[3 * q + 1] = freq(rng);
                w[3 * q + 2] = phase(rng);
            }
            const double a = amp(rng);
            for (Eigen::Index v = 0; v < n; ++v) {
                const double x = mean(3 * v), y = mean(3 * v + 1);
                double f = 0.0;
                for (int q = 0; q < kWaves; ++q)
                    f += std::cos(M_PI * (w[3 * q] * x + w[3 * q + 1] * y) + w[3 * q + 2]);
                b(3 * v + k, c) = a * f;
            }
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
    return qr.householderQ() * Eigen::MatrixXd::Identity(b.rows(), cols);
}

} // namespace

FaceBasis make_synthetic_basis(const SyntheticFaceOptions& options)
{
    const int g = options.grid;
    if (g < 9)
        throw Error(ErrorKind::invalid_argument, "synthetic face grid must be at least 9 vertices per side");
    const int n = g * g;
    const double step = 2.0 / (g - 1);
    auto index = [g](int i, int j) { return j * g + i; };

    FaceBasis basis;
    basis.mean_geometry.resize(3 * n);
    basis.mean_texture.resize(3 * n);
    for (int j = 0; j < g; ++j) {
        for (int i = 0; i < g; ++i) {
            const double x = -1.0 + i * step;
            const double y = -1.0 + j * step;
            const double z = std::sqrt(std::max(0.0, 2.25 - x * x - y * y)) - 1.5;
            const int v = index(i, j);
            basis.mean_geometry.segment<3>(3 * v) << x, y, z;
            const double shade = 0.05 * (1.0 - 0.5 * (x * x + y * y));
            basis.mean_texture.segment<3>(3 * v) << 0.78 + shade, 0.57 + shade, 0.48 + shade;
        }
    }

    basis.triangles.resize(2 * (g - 1) * (g - 1), 3);
    int t = 0;
    for (int j = 0; j + 1 < g; ++j) {
        for (int i = 0; i + 1 < g; ++i) {
            // Counter-clockwise seen from +z, so face normals point at the viewer.
            basis.triangles.row(t++) << index(i, j), index(i + 1, j), index(i + 1, j + 1);
            basis.triangles.row(t++) << index(i, j), index(i + 1, j + 1), index(i, j + 1);
        }
    }

    auto snap = [&](double coord) { return static_cast<int>(std::lround((coord + 1.0) / step)); };
    auto ring = [&](double cx, double cy, int rx, int ry) {
        const int ci = snap(cx);
        const int cj = snap(cy);
        return std::vector<int>{index(ci - rx, cj), index(ci + rx, cj), index(ci, cj - ry), index(ci, cj + ry)};
    };
    const int eye_rx = std::max(1, snap(0.1) - snap(0.0));
    const int eye_ry = std::max(1, eye_rx / 2);
    basis.left_eye_landmarks = ring(-0.36, 0.26, eye_rx, eye_ry);
    basis.right_eye_landmarks = ring(0.36, 0.26, eye_rx, eye_ry);

    const int mi = snap(0.0);
    const int mj = snap(-0.46);
    const int mrx = std::max(2, snap(0.2) - snap(0.0));
    const int mry = std::max(1, mrx / 3);
    basis.mouth_landmarks = {index(mi - mrx, mj), index(mi - mrx / 2, mj + mry), index(mi, mj + mry),
                             index(mi + mrx / 2, mj + mry), index(mi + mrx, mj), index(mi + mrx / 2, mj - mry),
                             index(mi, mj - mry), index(mi - mrx / 2, mj - mry)};

    std::mt19937_64 rng(options.seed);
    const double root = std::sqrt(3.0 * n);
    basis.id_basis = smooth_fields(rng, basis.mean_geometry, options.id_dims) * (options.geometry_scale * root);
    basis.exp_basis = smooth_fields(rng, basis.mean_geometry, options.exp_dims) * (options.geometry_scale * root);
    basis.tex_basis = smooth_fields(rng, basis.mean_geometry, options.tex_dims) * (options.texture_scale * root);
    validate(basis);
    return basis;
}

namespace {

void save_matrix(const Eigen::MatrixXd& m, const fs::path& path)
{
    io::RawArray array;
    array.header.kind = "array";
    array.header.shape = {m.rows(), m.cols()};
    array.data.resize(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            array.data[static_cast<std::size_t>(r * m.cols() + c)] = static_cast<float>(m(r, c));
    io::write_array(path, array);
}

Eigen::MatrixXd load_matrix(const fs::path& path)
{
    const io::RawArray array = io::read_array(path);
    if (array.header.shape.size() != 2)
        throw Error(ErrorKind::bad_header, path.string() + ": expected a matrix");
    const Eigen::Map<const MatrixXf> m(array.data.data(), array.header.shape[0], array.header.shape[1]);
    return m.cast<double>();
}

} // namespace

void save_basis(const FaceBasis& basis, const fs::path& dir)
{
    validate(basis);
    fs::create_directories(dir);
    save_matrix(basis.mean_geometry, dir / "mean_geometry.facl");
    save_matrix(basis.mean_texture, dir / "mean_texture.facl");
    save_matrix(basis.id_basis, dir / "id_basis.facl");
    save_matrix(basis.exp_basis, dir / "exp_basis.facl");
    save_matrix(basis.tex_basis, dir / "tex_basis.facl");

    std::vector<std::array<int, 3>> tris;
    tris.reserve(static_cast<std::size_t>(basis.triangles.rows()));
    for (Eigen::Index t = 0; t < basis.triangles.rows(); ++t)
        tris.push_back({basis.triangles(t, 0), basis.triangles(t, 1), basis.triangles(t, 2)});
    const nlohmann::json mesh = {
        {"vertex_count", basis.vertex_count()},
        {"triangles", tris},
        {"landmarks",
         {{"left_eye", basis.left_eye_landmarks},
          {"right_eye", basis.right_eye_landmarks},
          {"mouth", basis.mouth_landmarks}}},
    };
    std::ofstream out(dir / "mesh.json");
    if (!out)
        throw Error(ErrorKind::io, "cannot write " + (dir / "mesh.json").string());
    out << mesh.dump() << '\n';
}

FaceBasis load_basis(const fs::path& dir)
{
    FaceBasis basis;
    basis.mean_geometry = load_matrix(dir / "mean_geometry.facl").reshaped();
    basis.mean_texture = load_matrix(dir / "mean_texture.facl").reshaped();
    basis.id_basis = load_matrix(dir / "id_basis.facl");
    basis.exp_basis = load_matrix(dir / "exp_basis.facl");
    basis.tex_basis = load_matrix(dir / "tex_basis.facl");

    std::ifstream in(dir / "mesh.json");
    if (!in)
        throw Error(ErrorKind::io, "cannot open " + (dir / "mesh.json").string());
    try {
        const auto mesh = nlohmann::json::parse(in);
        const auto tris = mesh.at("triangles").get<std::vector<std::array<int, 3>>>();
        basis.triangles.resize(static_cast<Eigen::Index>(tris.size()), 3);
        for (std::size_t t = 0; t < tris.size(); ++t)
            for (int k = 0; k < 3; ++k)
                basis.triangles(static_cast<Eigen::Index>(t), k) = tris[t][static_cast<std::size_t>(k)];
        const auto& lm = mesh.at("landmarks");
        basis.left_eye_landmarks = lm.at("left_eye").get<std::vector<int>>();
        basis.right_eye_landmarks = lm.at("right_eye").get<std::vector<int>>();
        basis.mouth_landmarks = lm.at("mouth").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::bad_header, (dir / "mesh.json").string() + ": " + e.what());
    }
    validate(basis);
    return basis;
}

} // namespace facial::face
