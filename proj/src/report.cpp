#include "symrewrite/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "symrewrite/errors.hpp"

namespace symrewrite {

double quantile_linear(std::vector<double> values, double p) {
    if (values.empty()) {
        throw InsufficientDataError("quantile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    const double rank = p * double(values.size() - 1);
    const auto lo = static_cast<size_t>(std::floor(rank));
    const auto hi = static_cast<size_t>(std::ceil(rank));
    const double frac = rank - double(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

BoxStats box_stats(const std::vector<double>& values) {
    BoxStats b;
    b.q1 = quantile_linear(values, 0.25);
    b.median = quantile_linear(values, 0.50);
    b.q3 = quantile_linear(values, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr;
    const double hi_fence = b.q3 + 1.5 * iqr;
    b.whisker_lo = b.q3;
    b.whisker_hi = b.q1;
    bool any_in = false;
    for (double v : values) {
        if (v >= lo_fence && v <= hi_fence) {
            if (!any_in) {
                b.whisker_lo = b.whisker_hi = v;
                any_in = true;
            } else {
                b.whisker_lo = std::min(b.whisker_lo, v);
                b.whisker_hi = std::max(b.whisker_hi, v);
            }
        } else {
            b.outliers.push_back(v);
        }
    }
    std::sort(b.outliers.begin(), b.outliers.end());
    return b;
}

std::string results_csv(const std::vector<EvalResult>& results) {
    std::ostringstream out;
    out << "standard,repeat,short,long\n";
    char buf[128];
    for (const EvalResult& r : results) {
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f,%.2f,%.2f\n", 100.0 * r.accuracy.at("standard"),
                      100.0 * r.accuracy.at("repeat"), 100.0 * r.accuracy.at("short"),
                      100.0 * r.accuracy.at("long"));
        out << buf;
    }
    return out.str();
}

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

std::string results_boxplot_svg(const std::vector<EvalResult>& results) {
    if (results.empty()) {
        throw InsufficientDataError("no results to plot");
    }
    const double width = 640, height = 420;
    const double left = 70, right = 20, top = 40, bottom = 50;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    auto y_of = [&](double pct) { return top + plot_h * (1.0 - pct / 100.0); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "  <desc>Accuracy distribution per test set across seeds. Quartiles: linear "
           "interpolation at rank p*(n-1); whiskers: farthest points within 1.5*IQR; dots: "
           "outliers.</desc>\n";
    svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "  <text x=\"" << width / 2
        << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
           "Accuracy % by test set ("
        << results.size() << " seeds)</text>\n";

    // y axis with gridlines every 20 points
    for (int pct = 0; pct <= 100; pct += 20) {
        const double y = y_of(pct);
        svg << "  <line x1=\"" << left << "\" y1=\"" << fmt(y) << "\" x2=\"" << width - right
            << "\" y2=\"" << fmt(y) << "\" stroke=\"#dddddd\"/>\n";
        svg << "  <text x=\"" << left - 8 << "\" y=\"" << fmt(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << pct
            << "</text>\n";
    }
    svg << "  <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    svg << "  <line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << width - right
        << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";

    const double slot = plot_w / double(kTestSetNames.size());
    const double box_w = slot * 0.4;
    for (size_t i = 0; i < kTestSetNames.size(); ++i) {
        const std::string& name = kTestSetNames[i];
        std::vector<double> col;
        for (const EvalResult& r : results) {
            col.push_back(100.0 * r.accuracy.at(name));
        }
        const BoxStats b = box_stats(col);
        const double cx = left + slot * (double(i) + 0.5);

        svg << "  <g data-set=\"" << name << "\" data-q1=\"" << fmt(b.q1) << "\" data-median=\""
            << fmt(b.median) << "\" data-q3=\"" << fmt(b.q3) << "\" data-whisker-lo=\""
            << fmt(b.whisker_lo) << "\" data-whisker-hi=\"" << fmt(b.whisker_hi) << "\">\n";
        // whisker stems and caps
        svg << "    <line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(y_of(b.whisker_lo)) << "\" x2=\""
            << fmt(cx) << "\" y2=\"" << fmt(y_of(b.q1)) << "\" stroke=\"black\"/>\n";
        svg << "    <line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(y_of(b.q3)) << "\" x2=\""
            << fmt(cx) << "\" y2=\"" << fmt(y_of(b.whisker_hi)) << "\" stroke=\"black\"/>\n";
        for (double w : {b.whisker_lo, b.whisker_hi}) {
            svg << "    <line x1=\"" << fmt(cx - box_w / 4) << "\" y1=\"" << fmt(y_of(w))
                << "\" x2=\"" << fmt(cx + box_w / 4) << "\" y2=\"" << fmt(y_of(w))
                << "\" stroke=\"black\"/>\n";
        }
        // box and median
        svg << "    <rect x=\"" << fmt(cx - box_w / 2) << "\" y=\"" << fmt(y_of(b.q3))
            << "\" width=\"" << fmt(box_w) << "\" height=\"" << fmt(y_of(b.q1) - y_of(b.q3))
            << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
        svg << "    <line x1=\"" << fmt(cx - box_w / 2) << "\" y1=\"" << fmt(y_of(b.median))
            << "\" x2=\"" << fmt(cx + box_w / 2) << "\" y2=\"" << fmt(y_of(b.median))
            << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        for (double o : b.outliers) {
            svg << "    <circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(y_of(o))
                << "\" r=\"2.5\" fill=\"none\" stroke=\"black\"/>\n";
        }
        svg << "    <text x=\"" << fmt(cx) << "\" y=\"" << fmt(top + plot_h + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << name
            << "</text>\n";
        svg << "  </g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace symrewrite
