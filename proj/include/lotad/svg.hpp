#ifndef LOTAD_SVG_HPP
#define LOTAD_SVG_HPP

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

namespace lotad {

// Minimal line-chart emitter: axes, ticks and one polyline per series. CSV is
// the canonical output; this exists so runs are inspectable without a
// plotting stack.
struct SvgSeries {
    std::string name;
    std::string color = "#1f6fb2";
    std::vector<double> values; // x is the index
};

inline std::string render_line_chart(const std::string& title, const std::string& x_label,
                                     const std::string& y_label,
                                     const std::vector<SvgSeries>& series) {
    const int w = 720, h = 440, ml = 70, mr = 20, mt = 50, mb = 55;
    const double pw = w - ml - mr, ph = h - mt - mb;
    size_t max_n = 1;
    double y_max = 1e-9;
    for (const auto& s : series) {
        max_n = std::max(max_n, s.values.size());
        for (double v : s.values) y_max = std::max(y_max, v);
    }
    y_max = std::max(y_max * 1.05, 1e-6);
    char buf[256];
    std::string out;
    auto add = [&out, &buf](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        out += buf;
    };
    add("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
        "viewBox=\"0 0 %d %d\" font-family=\"monospace\" font-size=\"12\">\n",
        w, h, w, h);
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    add("<text x=\"%d\" y=\"24\" font-size=\"15\">%s</text>\n", ml, title.c_str());
    add("<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", ml, mt, ml, h - mb);
    add("<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", ml, h - mb, w - mr,
        h - mb);
    for (int i = 0; i <= 4; ++i) {
        double fy = mt + ph - ph * i / 4.0;
        add("<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" stroke=\"#cccccc\"/>\n", ml, fy,
            w - mr, fy);
        add("<text x=\"%d\" y=\"%.1f\" text-anchor=\"end\">%.3g</text>\n", ml - 6, fy + 4,
            y_max * i / 4.0);
        double fx = ml + pw * i / 4.0;
        add("<text x=\"%.1f\" y=\"%d\" text-anchor=\"middle\">%zu</text>\n", fx, h - mb + 18,
            static_cast<size_t>((max_n - 1) * i / 4));
    }
    add("<text x=\"%d\" y=\"%d\" text-anchor=\"middle\">%s</text>\n", ml + static_cast<int>(pw / 2),
        h - 12, x_label.c_str());
    add("<text x=\"18\" y=\"%d\" transform=\"rotate(-90 18 %d)\" text-anchor=\"middle\">%s</text>\n",
        mt + static_cast<int>(ph / 2), mt + static_cast<int>(ph / 2), y_label.c_str());
    int legend_y = mt - 8;
    int legend_x = ml + 4;
    for (const auto& s : series) {
        if (s.values.empty()) continue;
        out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
        const size_t n = s.values.size();
        // thin long series so files stay small
        size_t stride = std::max<size_t>(1, n / 1500);
        for (size_t i = 0; i < n; i += stride) {
            double x = ml + (max_n > 1 ? pw * static_cast<double>(i) / (max_n - 1) : 0.0);
            double y = mt + ph - ph * (s.values[i] / y_max);
            add("%.1f,%.1f ", x, y);
        }
        out += "\"/>\n";
        add("<rect x=\"%d\" y=\"%d\" width=\"10\" height=\"10\" fill=\"%s\"/>\n", legend_x,
            legend_y - 9, s.color.c_str());
        add("<text x=\"%d\" y=\"%d\">%s</text>\n", legend_x + 14, legend_y, s.name.c_str());
        legend_x += 14 + 8 * static_cast<int>(s.name.size()) + 24;
    }
    out += "</svg>\n";
    return out;
}

} // namespace lotad

#endif
