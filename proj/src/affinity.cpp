#include "stitch3d/affinity.hpp"

#include <cmath>
#include <vector>

namespace stitch3d {

AffinityMatrix::AffinityMatrix(int n, int m, std::vector<double> values)
    : n_(n), m_(m), values_(std::move(values)) {
    if (n < 0 || m < 0) fail_invalid("AffinityMatrix: negative shape");
    if (values_.size() != static_cast<std::size_t>(n) * m) {
        fail_invalid("AffinityMatrix: expected " + std::to_string(static_cast<std::size_t>(n) * m) +
                     " values, got " + std::to_string(values_.size()));
    }
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) fail_invalid("AffinityMatrix: entries must lie in [0, 1]");
    }
}

AffinityMatrix build_affinity(const std::vector<Eigen::VectorXd>& e1,
                              const std::vector<Eigen::VectorXd>& e2, double k) {
    auto check = [](const std::vector<Eigen::VectorXd>& es, const char* side) {
        for (std::size_t i = 0; i < es.size(); ++i) {
            if (std::abs(es[i].norm() - 1.0) > 1e-6) {
                fail_invalid(std::string("build_affinity: ") + side + " embedding " +
                             std::to_string(i) + " is not unit norm");
            }
        }
    };
    check(e1, "view-1");
    check(e2, "view-2");
    for (const auto& a : e1) {
        for (const auto& b : e2) {
            if (a.size() != b.size()) fail_invalid("build_affinity: embedding dimensions differ");
        }
    }

    std::vector<double> values;
    values.reserve(e1.size() * e2.size());
    for (const auto& a : e1) {
        for (const auto& b : e2) {
            const double logit = k * a.dot(b);
            values.push_back(1.0 / (1.0 + std::exp(-logit)));
        }
    }
    return AffinityMatrix(static_cast<int>(e1.size()), static_cast<int>(e2.size()),
                          std::move(values));
}

double balanced_affinity_loss(const AffinityMatrix& a, const AffinityLabels& labels) {
    const std::size_t total = static_cast<std::size_t>(a.rows()) * a.cols();
    if (labels.positives.size() + labels.negatives.size() != total) {
        fail_invalid("balanced_affinity_loss: labels must cover all pairs exactly once");
    }
    std::vector<char> seen(total, 0);
    auto mark = [&](const std::vector<std::pair<int, int>>& pairs) {
        for (auto [i, j] : pairs) {
            if (i < 0 || i >= a.rows() || j < 0 || j >= a.cols()) {
                fail_invalid("balanced_affinity_loss: label index out of range");
            }
            char& cell = seen[static_cast<std::size_t>(i) * a.cols() + j];
            if (cell) fail_invalid("balanced_affinity_loss: duplicate label for a pair");
            cell = 1;
        }
    };
    mark(labels.positives);
    mark(labels.negatives);

    double loss = 0.0;
    if (!labels.positives.empty()) {
        double sum = 0.0;
        for (auto [i, j] : labels.positives) {
            const double d = a.at(i, j) - 1.0;
            sum += d * d;
        }
        loss += sum / static_cast<double>(labels.positives.size());
    }
    if (!labels.negatives.empty()) {
        double sum = 0.0;
        for (auto [i, j] : labels.negatives) {
            const double d = a.at(i, j);
            sum += d * d;
        }
        loss += sum / static_cast<double>(labels.negatives.size());
    }
    return loss;
}

std::vector<std::pair<int, int>> feasible_pairs(const AffinityMatrix& a, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        fail_invalid("feasible_pairs: threshold must lie in (0, 1)");
    }
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) {
            if (a.at(i, j) > threshold) out.emplace_back(i, j);
        }
    }
    return out;
}

}  // namespace stitch3d
