#include "stragglers/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "stragglers/errors.hpp"

namespace stragglers::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr int kPaletteSize = 10;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c; break;
        }
    }
    return out;
}

struct Mapper {
    double x_min, x_max, y_min, y_max;
    double px, py, pw, ph;  // plot viewport

    double map_x(double x) const {
        const double range = x_max - x_min == 0.0 ? 1.0 : x_max - x_min;
        return px + (x - x_min) / range * pw;
    }
    double map_y(double y) const {
        const double range = y_max - y_min == 0.0 ? 1.0 : y_max - y_min;
        return py + (1.0 - (y - y_min) / range) * ph;
    }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    if (hi <= lo) return {lo};
    const double raw_step = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw_step)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (mag * m >= raw_step) {
            step = mag * m;
            break;
        }
    }
    std::vector<double> ticks;
    const double start = std::ceil(lo / step) * step;
    for (double t = start; t <= hi + 1e-12; t += step) {
        ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
    }
    return ticks;
}

void emit_frame(std::ostringstream& out, const ChartSpec& spec, const Mapper& m) {
    out << "<rect x=\"" << fmt(m.px) << "\" y=\"" << fmt(m.py) << "\" width=\"" << fmt(m.pw)
        << "\" height=\"" << fmt(m.ph) << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << fmt(m.px + m.pw / 2) << "\" y=\"22\" text-anchor=\"middle\" "
           "font-size=\"15\" font-family=\"sans-serif\">"
        << xml_escape(spec.title) << "</text>\n";
    out << "<text x=\"" << fmt(m.px + m.pw / 2) << "\" y=\"" << fmt(m.py + m.ph + 36)
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">"
        << xml_escape(spec.x_label) << "</text>\n";
    out << "<text x=\"14\" y=\"" << fmt(m.py + m.ph / 2)
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 14 "
        << fmt(m.py + m.ph / 2) << ")\">" << xml_escape(spec.y_label) << "</text>\n";
}

void emit_axes(std::ostringstream& out, const Mapper& m) {
    out << "<g font-size=\"10\" font-family=\"sans-serif\" fill=\"#333333\">\n";
    for (double t : nice_ticks(m.x_min, m.x_max)) {
        const double sx = m.map_x(t);
        out << "<line x1=\"" << fmt(sx) << "\" y1=\"" << fmt(m.py + m.ph) << "\" x2=\"" << fmt(sx)
            << "\" y2=\"" << fmt(m.py + m.ph + 4) << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << fmt(sx) << "\" y=\"" << fmt(m.py + m.ph + 16)
            << "\" text-anchor=\"middle\">" << fmt_tick(t) << "</text>\n";
    }
    for (double t : nice_ticks(m.y_min, m.y_max)) {
        const double sy = m.map_y(t);
        out << "<line x1=\"" << fmt(m.px - 4) << "\" y1=\"" << fmt(sy) << "\" x2=\"" << fmt(m.px)
            << "\" y2=\"" << fmt(sy) << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << fmt(m.px - 7) << "\" y=\"" << fmt(sy + 3)
            << "\" text-anchor=\"end\">" << fmt_tick(t) << "</text>\n";
    }
    out << "</g>\n";
}

}  // namespace

std::string line_chart(const ChartSpec& spec, const std::vector<Series>& series) {
    if (series.empty()) {
        throw Error("line_chart requires at least one series");
    }
    double x_min = series[0].x.empty() ? 0.0 : series[0].x[0];
    double x_max = x_min, y_min = 0.0, y_max = 0.0;
    bool first_y = true;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || (!s.y_std.empty() && s.y_std.size() != s.y.size())) {
            throw Error("series '" + s.label + "' has mismatched lengths");
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            const double sd = s.y_std.empty() ? 0.0 : s.y_std[i];
            const double lo = s.y[i] - sd;
            const double hi = s.y[i] + sd;
            if (first_y) {
                y_min = lo;
                y_max = hi;
                first_y = false;
            } else {
                y_min = std::min(y_min, lo);
                y_max = std::max(y_max, hi);
            }
        }
    }
    if (y_max == y_min) {
        y_max += 1.0;
        y_min -= 1.0;
    }
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    Mapper m{x_min, x_max, y_min, y_max, 56.0, 34.0, spec.width - 76.0, spec.height - 90.0};

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
        << spec.height << "\" viewBox=\"0 0 " << spec.width << " " << spec.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    emit_frame(out, spec, m);
    emit_axes(out, m);

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % kPaletteSize];
        if (!s.y_std.empty() && s.x.size() > 1) {
            out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                out << fmt(m.map_x(s.x[i])) << "," << fmt(m.map_y(s.y[i] + s.y_std[i])) << " ";
            }
            for (std::size_t i = s.x.size(); i-- > 0;) {
                out << fmt(m.map_x(s.x[i])) << "," << fmt(m.map_y(s.y[i] - s.y_std[i])) << " ";
            }
            out << "\"/>\n";
        }
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            out << fmt(m.map_x(s.x[i])) << "," << fmt(m.map_y(s.y[i])) << " ";
        }
        out << "\"/>\n";
        // legend
        const double ly = 40.0 + 16.0 * static_cast<double>(si);
        out << "<line x1=\"" << fmt(m.px + m.pw - 150) << "\" y1=\"" << fmt(ly) << "\" x2=\""
            << fmt(m.px + m.pw - 132) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fmt(m.px + m.pw - 127) << "\" y=\"" << fmt(ly + 4)
            << "\" font-size=\"11\" font-family=\"sans-serif\">" << xml_escape(s.label)
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string bar_chart(const ChartSpec& spec, const std::vector<std::string>& labels,
                      const std::vector<double>& values) {
    if (labels.size() != values.size() || labels.empty()) {
        throw Error("bar_chart requires matching non-empty labels/values");
    }
    double y_max = *std::max_element(values.begin(), values.end());
    if (y_max <= 0.0) y_max = 1.0;
    y_max *= 1.08;

    Mapper m{0.0, static_cast<double>(labels.size()), 0.0, y_max,
             56.0, 34.0, spec.width - 76.0, spec.height - 90.0};

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
        << spec.height << "\" viewBox=\"0 0 " << spec.width << " " << spec.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    emit_frame(out, spec, m);

    out << "<g font-size=\"10\" font-family=\"sans-serif\" fill=\"#333333\">\n";
    for (double t : nice_ticks(0.0, y_max)) {
        const double sy = m.map_y(t);
        out << "<line x1=\"" << fmt(m.px - 4) << "\" y1=\"" << fmt(sy) << "\" x2=\"" << fmt(m.px)
            << "\" y2=\"" << fmt(sy) << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << fmt(m.px - 7) << "\" y=\"" << fmt(sy + 3)
            << "\" text-anchor=\"end\">" << fmt_tick(t) << "</text>\n";
    }
    out << "</g>\n";

    const double slot = m.pw / static_cast<double>(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double x0 = m.px + slot * (static_cast<double>(i) + 0.15);
        const double w = slot * 0.7;
        const double y0 = m.map_y(values[i]);
        out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(w)
            << "\" height=\"" << fmt(m.py + m.ph - y0) << "\" fill=\"" << kPalette[0] << "\"/>\n";
        out << "<text x=\"" << fmt(x0 + w / 2) << "\" y=\"" << fmt(m.py + m.ph + 16)
            << "\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">"
            << xml_escape(labels[i]) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace stragglers::svg
