#pragma once

#include "ipd/interval_partition.hpp"

namespace ipd {

// Infimum over order-preserving correspondences of the four-term distortion.
// Requires marks on both sides.
double distance_dI(const IntervalPartition& beta, const IntervalPartition& gamma);

// Hausdorff distance between the complements of the block unions in
// [0, total_mass]. Dust sits at the right end as a closed interval.
double distance_dH(const IntervalPartition& beta, const IntervalPartition& gamma);

// Infimum of the mass terms only.
double distance_dH_prime(const IntervalPartition& beta, const IntervalPartition& gamma);

// Smallest achievable max(|beta| + sum A, |gamma| + sum B) over correspondences
// whose pairs all satisfy |mark_i - mark_j| <= mark_tol (ignored when < 0).
double min_mass_distortion(const IntervalPartition& beta, const IntervalPartition& gamma, double mark_tol);

// Exhaustive search over all order-preserving correspondences; exponential,
// for small partitions only.
double distance_dI_enumerate(const IntervalPartition& beta, const IntervalPartition& gamma);

}  // namespace ipd
