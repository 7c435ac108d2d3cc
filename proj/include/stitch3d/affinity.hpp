#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stitch3d/error.hpp"

namespace stitch3d {

// N x M matching scores between view-1 and view-2 objects, row-major.
// Entries produced from embeddings are sigmoid outputs and therefore lie
// strictly inside (0, 1); hand-built matrices may use the closed range.
class AffinityMatrix {
public:
    AffinityMatrix() = default;
    AffinityMatrix(int n, int m, std::vector<double> values);

    int rows() const { return n_; }
    int cols() const { return m_; }
    double at(int i, int j) const { return values_[static_cast<std::size_t>(i) * m_ + j]; }
    const std::vector<double>& values() const { return values_; }

private:
    int n_ = 0;
    int m_ = 0;
    std::vector<double> values_;
};

// Ground-truth split of all N*M pairs into corresponding / non-corresponding.
struct AffinityLabels {
    std::vector<std::pair<int, int>> positives;
    std::vector<std::pair<int, int>> negatives;
};

// A_ij = sigmoid(k * <e1_i, e2_j>). Embeddings must be unit norm within
// 1e-6 and share one dimension.
AffinityMatrix build_affinity(const std::vector<Eigen::VectorXd>& e1,
                              const std::vector<Eigen::VectorXd>& e2, double k = 5.0);

// Class-balanced squared error: mean over positives of (A - 1)^2 plus mean
// over negatives of A^2. An empty class contributes 0. Labels must be
// disjoint and cover the matrix.
double balanced_affinity_loss(const AffinityMatrix& a, const AffinityLabels& labels);

// Pairs with affinity strictly above the threshold, row-major order.
std::vector<std::pair<int, int>> feasible_pairs(const AffinityMatrix& a, double threshold = 0.5);

}  // namespace stitch3d
