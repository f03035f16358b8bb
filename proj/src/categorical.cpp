#include "matsketch/categorical.hpp"

#include "matsketch/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <unordered_map>

namespace matsketch {

CategoricalColumn make_categorical(std::string name, std::vector<std::string> values) {
    CategoricalColumn col;
    col.name = std::move(name);
    col.values = std::move(values);
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& v : col.values) {
        if (seen.emplace(v, col.levels.size()).second) col.levels.push_back(v);
    }
    return col;
}

Matrix dummy_code(const CategoricalColumn& col) {
    if (col.values.empty() || col.levels.empty())
        throw UsageError("dummy_code: empty categorical column");
    std::unordered_map<std::string, std::size_t> level_index;
    for (std::size_t l = 0; l < col.levels.size(); ++l) level_index.emplace(col.levels[l], l);

    Matrix out(col.values.size(), col.levels.size());
    for (std::size_t i = 0; i < col.values.size(); ++i) {
        auto it = level_index.find(col.values[i]);
        if (it == level_index.end())
            throw UsageError("dummy_code: value '" + col.values[i] + "' is not among the levels");
        out.at(i, it->second) = 1.0;
    }
    return out;
}

CAEncoding fit_ca(const Matrix& indicators) {
    if (indicators.n_rows == 0 || indicators.n_cols == 0)
        throw UsageError("fit_ca: empty indicator matrix");
    const std::size_t n = indicators.n_rows;
    const std::size_t levels = indicators.n_cols;

    CAEncoding enc;
    enc.level_means.resize(levels);
    for (std::size_t l = 0; l < levels; ++l) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += indicators.at(i, l);
        enc.level_means[l] = s / static_cast<double>(n);
    }

    // Covariance of the centered dummy codes, S = Z^T Z / n.
    Eigen::MatrixXd cov(levels, levels);
    for (std::size_t a = 0; a < levels; ++a) {
        for (std::size_t b = a; b < levels; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                s += (indicators.at(i, a) - enc.level_means[a]) *
                     (indicators.at(i, b) - enc.level_means[b]);
            cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = s / n;
            cov(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = s / n;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw NumericError("fit_ca: eigensolver failed to converge on a " +
                           std::to_string(levels) + "x" + std::to_string(levels) +
                           " dummy-code covariance");

    // Eigen reports ascending eigenvalues; store them descending.
    std::vector<std::size_t> order(levels);
    for (std::size_t k = 0; k < levels; ++k) order[k] = levels - 1 - k;

    enc.eigenvalues.resize(levels);
    for (std::size_t k = 0; k < levels; ++k) {
        double lambda = solver.eigenvalues()(static_cast<Eigen::Index>(order[k]));
        if (lambda < 0.0) {
            if (lambda < -1e-10)
                throw NumericError("fit_ca: covariance eigenvalue " + std::to_string(lambda) +
                                   " is negative beyond tolerance");
            lambda = 0.0;
        }
        enc.eigenvalues[k] = lambda;
    }
    enc.retained = 0;
    while (enc.retained < levels && enc.eigenvalues[enc.retained] > 1e-10) ++enc.retained;

    enc.eigenvectors = Matrix(levels, enc.retained);
    for (std::size_t k = 0; k < enc.retained; ++k)
        for (std::size_t l = 0; l < levels; ++l)
            enc.eigenvectors.at(l, k) =
                solver.eigenvectors()(static_cast<Eigen::Index>(l),
                                      static_cast<Eigen::Index>(order[k]));

    // Sorting already matches eigenvalue order; levels carried by the caller.
    return enc;
}

CAEncoding fit_ca(const CategoricalColumn& col) {
    CAEncoding enc = fit_ca(dummy_code(col));
    enc.levels = col.levels;
    return enc;
}

Matrix ca_scores(const CategoricalColumn& col, const CAEncoding& enc) {
    const std::size_t levels = enc.level_means.size();
    if (!enc.levels.empty() && enc.levels != col.levels)
        throw UsageError("ca_scores: encoding was fitted on different levels");
    if (col.levels.size() != levels)
        throw UsageError("ca_scores: level count does not match the encoding");

    std::unordered_map<std::string, std::size_t> level_index;
    for (std::size_t l = 0; l < levels; ++l) level_index.emplace(col.levels[l], l);

    // Per-level score rows: (e_l - means) * V.
    Matrix level_scores(levels, enc.retained);
    for (std::size_t l = 0; l < levels; ++l)
        for (std::size_t k = 0; k < enc.retained; ++k) {
            double s = 0.0;
            for (std::size_t q = 0; q < levels; ++q) {
                const double centered = (q == l ? 1.0 : 0.0) - enc.level_means[q];
                s += centered * enc.eigenvectors.at(q, k);
            }
            level_scores.at(l, k) = s;
        }

    Matrix out(col.values.size(), enc.retained);
    for (std::size_t i = 0; i < col.values.size(); ++i) {
        auto it = level_index.find(col.values[i]);
        if (it == level_index.end())
            throw UsageError("ca_scores: unseen level '" + col.values[i] + "'");
        for (std::size_t k = 0; k < enc.retained; ++k)
            out.at(i, k) = level_scores.at(it->second, k);
    }
    return out;
}

} // namespace matsketch
