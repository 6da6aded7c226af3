#pragma once

#include <string>
#include <vector>

#include "symrewrite/evaluation.hpp"

namespace symrewrite {

// Box-and-whisker statistics. Quartiles use linear interpolation at rank
// p*(n-1) over the sorted sample; whiskers reach the farthest data point
// within 1.5*IQR of the box, and everything beyond is an outlier.
struct BoxStats {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double whisker_lo = 0.0;
    double whisker_hi = 0.0;
    std::vector<double> outliers;
};

double quantile_linear(std::vector<double> values, double p);
BoxStats box_stats(const std::vector<double>& values);

// Four-column CSV of per-seed accuracies in percent, one row per run.
std::string results_csv(const std::vector<EvalResult>& results);

// Static box plot, one box per test set. Computed statistics are embedded
// as data-* attributes so they can be checked against the CSV.
std::string results_boxplot_svg(const std::vector<EvalResult>& results);

}  // namespace symrewrite
