#pragma once

#include <string>
#include <vector>

namespace stragglers::svg {

// One plotted series; when y_std is non-empty (same length as y) a shaded
// band of +-1 std is drawn under the line.
struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> y_std;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 760;
    int height = 480;
};

// Deterministic SVG text; charts derive solely from the data passed in.
std::string line_chart(const ChartSpec& spec, const std::vector<Series>& series);

std::string bar_chart(const ChartSpec& spec, const std::vector<std::string>& labels,
                      const std::vector<double>& values);

}  // namespace stragglers::svg
