#pragma once

#include <vector>

#include "sensi/age_group.hpp"
#include "sensi/morris.hpp"

namespace sensi {

/// Fractional ranks with 1 for the largest value. Tied values share the
/// average of the positions they occupy, so the ranks always sum to
/// n(n+1)/2. Throws ValidationError on NaN.
std::vector<double> rank_descending(const std::vector<double>& values);

/// Ranks the eight scaled sensitivity indices at each delta of the grid and
/// averages the ranks over the grid. All sweeps must share one delta grid.
AgeGroupVector average_rank_over_deltas(const MorrisMatrix& matrix);

/// Elementwise absolute difference of two rank vectors.
AgeGroupVector rank_difference(const AgeGroupVector& a, const AgeGroupVector& b);

/// Cases per 100 persons for each age group.
AgeGroupVector infection_rates(const AgeGroupVector& cases, const AgeGroupVector& population);

/// Spearman rank correlation (Pearson correlation of fractional ranks, so
/// ties are handled). Throws ValidationError on length mismatch, fewer than
/// two points, or zero rank variance.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace sensi
