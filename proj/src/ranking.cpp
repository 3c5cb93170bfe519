#include "sensi/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sensi/errors.hpp"
#include "sensi/kahan.hpp"

namespace sensi {

std::vector<double> rank_descending(const std::vector<double>& values) {
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < n; ++i)
        if (std::isnan(values[i]))
            throw ValidationError("cannot rank NaN at position " + std::to_string(i));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // positions i..j are one tie run; ranks are 1-based
        double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t p = i; p <= j; ++p) ranks[order[p]] = shared;
        i = j + 1;
    }
    return ranks;
}

AgeGroupVector average_rank_over_deltas(const MorrisMatrix& matrix) {
    if (matrix.size() != static_cast<std::size_t>(kNumAgeGroups))
        throw ValidationError("expected sweeps for all " + std::to_string(kNumAgeGroups) +
                              " age groups, got " + std::to_string(matrix.size()));
    const MorrisSweep& first = matrix.begin()->second;
    const std::size_t num_deltas = first.results.size();
    if (num_deltas == 0) throw ValidationError("empty delta grid in sensitivity matrix");
    for (const auto& [group, sweep] : matrix) {
        if (sweep.results.size() != num_deltas)
            throw ValidationError("age group " + age_group_label(group) +
                                  " has a different delta grid size");
        for (std::size_t d = 0; d < num_deltas; ++d)
            if (sweep.results[d].delta != first.results[d].delta)
                throw ValidationError("age group " + age_group_label(group) +
                                      " was swept over different deltas");
    }

    std::array<KahanSum, kNumAgeGroups> totals;
    for (std::size_t d = 0; d < num_deltas; ++d) {
        std::vector<double> scaled(kNumAgeGroups);
        for (AgeGroup g : all_age_groups())
            scaled[static_cast<std::size_t>(index_of(g))] = matrix.at(g).results[d].scaled_index;
        std::vector<double> ranks = rank_descending(scaled);
        for (int i = 0; i < kNumAgeGroups; ++i) totals[static_cast<std::size_t>(i)].add(ranks[static_cast<std::size_t>(i)]);
    }
    AgeGroupVector out{};
    for (int i = 0; i < kNumAgeGroups; ++i)
        out[static_cast<std::size_t>(i)] =
            totals[static_cast<std::size_t>(i)].value() / static_cast<double>(num_deltas);
    return out;
}

AgeGroupVector rank_difference(const AgeGroupVector& a, const AgeGroupVector& b) {
    AgeGroupVector out{};
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(a[i] - b[i]);
    return out;
}

AgeGroupVector infection_rates(const AgeGroupVector& cases, const AgeGroupVector& population) {
    AgeGroupVector out{};
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(population[i] > 0.0))
            throw ValidationError("population must be positive for group " +
                                  age_group_label(all_age_groups()[i]));
        if (cases[i] < 0.0)
            throw ValidationError("negative case count for group " +
                                  age_group_label(all_age_groups()[i]));
        out[i] = 100.0 * cases[i] / population[i];
    }
    return out;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("spearman: length mismatch");
    if (a.size() < 2) throw ValidationError("spearman: need at least two points");
    std::vector<double> ra = rank_descending(a);
    std::vector<double> rb = rank_descending(b);
    const double n = static_cast<double>(a.size());
    double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        double da = ra[i] - ma;
        double db = rb[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) throw ValidationError("spearman: rank variance is zero");
    return cov / std::sqrt(va * vb);
}

}  // namespace sensi
