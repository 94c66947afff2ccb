#pragma once

#include <limits>
#include <utility>
#include <vector>

namespace tracklab {

inline constexpr double kInfCost = std::numeric_limits<double>::infinity();

/// Row-major dense cost matrix. +inf marks a forbidden pair.
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }
    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

struct Assignment {
    std::vector<int> row_to_col;  // -1 when the row is unassigned
    double total_cost = 0.0;
    int matched() const;
};

// Minimum-cost assignment over the finite entries. Among all matchings it first
// maximizes the number of finite pairs, then minimizes their total. Rows are
// inserted in index order and ties pick the lowest column, so results are
// deterministic.
Assignment hungarian(const CostMatrix& cost);

struct Matching {
    std::vector<std::pair<int, int>> matches;  // (row, col), sorted by row
    std::vector<int> unmatched_rows;
    std::vector<int> unmatched_cols;
};

// Tracker-level assignment: leaving a row and a column unmatched costs
// `threshold` in total, so a pair above the threshold is never taken.
Matching linear_assignment(const CostMatrix& cost, double threshold);

}  // namespace tracklab
