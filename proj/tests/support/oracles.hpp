#pragma once

// Independent oracles used to cross-check solver results. These deliberately
// avoid the library's LP and hull code paths: vertices are enumerated by
// brute force over column subsets and envelopes by direct pair interpolation.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace cmot::testing {

struct VertexOracleResult {
    bool feasible = false;
    double value = std::numeric_limits<double>::infinity();  // min over vertices
};

/// Enumerates all basic solutions of {A x = b, x >= 0} and minimizes c over
/// them. Exponential in the column count; callers keep instances tiny.
inline VertexOracleResult enumerate_vertices(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                             const Eigen::VectorXd& c, double tol = 1e-9) {
    VertexOracleResult result;
    const Eigen::Index n = a.cols();
    if (n == 0) {
        if (b.lpNorm<Eigen::Infinity>() <= tol) {
            result.feasible = true;
            result.value = 0.0;
        }
        return result;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();

    Eigen::MatrixXd ab(a.rows(), n + 1);
    ab << a, b;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_ab(ab);
    qr_ab.setThreshold(1e-10);
    if (qr_ab.rank() > rank) return result;  // inconsistent rows

    std::vector<Eigen::Index> subset(static_cast<std::size_t>(rank));
    std::vector<bool> chosen;

    // iterate subsets of size `rank` in lexicographic order
    for (Eigen::Index i = 0; i < rank; ++i) subset[static_cast<std::size_t>(i)] = i;
    if (rank == 0) {
        if (b.lpNorm<Eigen::Infinity>() <= tol) {
            result.feasible = true;
            result.value = 0.0;
        }
        return result;
    }
    while (true) {
        Eigen::MatrixXd basis(a.rows(), rank);
        for (Eigen::Index k = 0; k < rank; ++k) basis.col(k) = a.col(subset[static_cast<std::size_t>(k)]);
        Eigen::VectorXd xs = basis.colPivHouseholderQr().solve(b);
        if ((basis * xs - b).lpNorm<Eigen::Infinity>() <= tol && xs.minCoeff() >= -tol) {
            double value = 0.0;
            for (Eigen::Index k = 0; k < rank; ++k)
                value += c[subset[static_cast<std::size_t>(k)]] * std::max(xs[k], 0.0);
            result.feasible = true;
            result.value = std::min(result.value, value);
        }
        // next subset
        Eigen::Index i = rank - 1;
        while (i >= 0 && subset[static_cast<std::size_t>(i)] == n - rank + i) --i;
        if (i < 0) break;
        ++subset[static_cast<std::size_t>(i)];
        for (Eigen::Index k = i + 1; k < rank; ++k)
            subset[static_cast<std::size_t>(k)] = subset[static_cast<std::size_t>(k - 1)] + 1;
    }
    return result;
}

/// 1-D envelope by exhaustive pair interpolation: min over admissible single
/// atoms at x and pairs y1 <= x <= y2. ys must be sorted; f aligned with ys.
inline std::optional<double> envelope_pair_oracle(const std::vector<double>& f,
                                                  const std::vector<double>& ys, double x,
                                                  double radius, double ball_tol = 1e-12) {
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    std::vector<std::size_t> adm;
    for (std::size_t j = 0; j < ys.size(); ++j)
        if (std::abs(ys[j] - x) <= radius + ball_tol) adm.push_back(j);
    for (std::size_t j : adm) {
        if (ys[j] == x) {
            best = std::min(best, f[j]);
            found = true;
        }
    }
    for (std::size_t a = 0; a < adm.size(); ++a) {
        for (std::size_t b = a + 1; b < adm.size(); ++b) {
            double y1 = ys[adm[a]], y2 = ys[adm[b]];
            if (y1 > x || y2 < x) continue;
            double lambda = (y2 - x) / (y2 - y1);
            best = std::min(best, lambda * f[adm[a]] + (1.0 - lambda) * f[adm[b]]);
            found = true;
        }
    }
    if (!found) return std::nullopt;
    return best;
}

}  // namespace cmot::testing
