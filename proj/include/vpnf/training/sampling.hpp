#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "vpnf/errors.hpp"
#include "vpnf/random.hpp"

namespace vpnf::training {

// Latin hypercube sample of n points in the box [lo, hi] (one column per point). Along
// every dimension each of the n equal-width strata holds exactly one point, placed
// uniformly inside its stratum.
inline Eigen::MatrixXd lhs_sample(std::size_t n, const Eigen::Ref<const Eigen::VectorXd>& lo,
                                  const Eigen::Ref<const Eigen::VectorXd>& hi, Rng& rng) {
    if (n == 0) throw ConfigurationError("lhs_sample: n must be at least 1");
    if (lo.size() != hi.size()) throw ConfigurationError("lhs_sample: bound size mismatch");
    const Eigen::Index dims = lo.size();
    Eigen::MatrixXd pts(dims, static_cast<Eigen::Index>(n));
    std::vector<std::size_t> perm(n);
    for (Eigen::Index d = 0; d < dims; ++d) {
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
            // Clamp guards the top edge against rounding past hi.
            pts(d, static_cast<Eigen::Index>(i)) = std::min(hi[d], lo[d] + u * (hi[d] - lo[d]));
        }
    }
    return pts;
}

inline Eigen::MatrixXd lhs_sample(std::size_t n, const Eigen::Ref<const Eigen::VectorXd>& lo,
                                  const Eigen::Ref<const Eigen::VectorXd>& hi, std::uint64_t seed) {
    Rng rng(seed);
    return lhs_sample(n, lo, hi, rng);
}

}  // namespace vpnf::training
