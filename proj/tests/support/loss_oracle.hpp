#pragma once

// Plain-loop reference implementations of the attribute losses, written
// without torch so they can check the tensor versions independently.

#include <cmath>
#include <vector>

namespace facial::testing {

// seq[t][d]
using Seq = std::vector<std::vector<double>>;

inline double oracle_v(const Seq& x, const Seq& y)
{
    double s = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t)
        for (std::size_t d = 0; d < x[t].size(); ++d)
            s += (x[t][d] - y[t][d]) * (x[t][d] - y[t][d]);
    return s;
}

inline double oracle_u(const Seq& x, const Seq& y)
{
    double s = 0.0;
    for (std::size_t t = 1; t < x.size(); ++t)
        for (std::size_t d = 0; d < x[t].size(); ++d) {
            const double diff = (x[t][d] - x[t - 1][d]) - (y[t][d] - y[t - 1][d]);
            s += diff * diff;
        }
    return s;
}

inline double oracle_sequence(const Seq& truth, const Seq& pred, double w5)
{
    return oracle_v(truth, pred) + w5 * oracle_u(truth, pred);
}

inline double oracle_l1(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += std::abs(a[i] - b[i]);
    return s;
}

// Columns [begin, end) of a frames x 71 sequence.
inline Seq columns(const Seq& x, std::size_t begin, std::size_t end)
{
    Seq out;
    for (const auto& row : x)
        out.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(begin), row.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

struct OracleReg {
    double exp = 0.0, pose = 0.0, eye = 0.0, s = 0.0, total = 0.0;
};

inline OracleReg oracle_reg(const Seq& truth, const Seq& pred, const std::vector<double>& state, double w1, double w2,
                            double w3, double w4, double w5)
{
    OracleReg r;
    r.exp = oracle_sequence(columns(truth, 0, 64), columns(pred, 0, 64), w5);
    r.pose = oracle_sequence(columns(truth, 64, 70), columns(pred, 64, 70), w5);
    r.eye = oracle_sequence(columns(truth, 70, 71), columns(pred, 70, 71), w5);
    r.s = oracle_l1(std::vector<double>(pred[0].begin(), pred[0].begin() + 64), std::vector<double>(state.begin(), state.begin() + 64))
          + oracle_l1(std::vector<double>(pred[0].begin() + 64, pred[0].begin() + 70), std::vector<double>(state.begin() + 64, state.begin() + 70))
          + std::abs(pred[0][70] - state[70]);
    r.total = w1 * r.exp + w2 * r.pose + w3 * r.eye + w4 * r.s;
    return r;
}

} // namespace facial::testing
