#pragma once

#include <Eigen/Core>

namespace mclink {

/// LU factors of a constant tridiagonal matrix, reused across many right-hand sides.
class TridiagonalFactor {
public:
    /// lower[i] couples row i to i-1 (lower[0] unused), upper[i] couples row i to i+1.
    TridiagonalFactor(const Eigen::ArrayXd& lower, const Eigen::ArrayXd& diag,
                      const Eigen::ArrayXd& upper);

    /// Overwrites rhs with the solution.
    void solve_in_place(Eigen::Ref<Eigen::ArrayXd> rhs) const;
    [[nodiscard]] Eigen::Index size() const noexcept { return inv_pivot_.size(); }

private:
    Eigen::ArrayXd lower_;
    Eigen::ArrayXd upper_scaled_;  // upper[i] / pivot[i]
    Eigen::ArrayXd inv_pivot_;
};

}  // namespace mclink
