#include "mft/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mft {

namespace {

constexpr int kWidth = 960;
constexpr int kPanelHeight = 260;
constexpr int kMarginLeft = 56;
constexpr int kMarginRight = 16;
constexpr int kMarginTop = 24;
constexpr int kGap = 44;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct Panel {
    double t_max = 1.0;
    double y_max = 1.0;
    int y_origin = 0;

    double x(double t) const {
        return kMarginLeft + t / t_max * (kWidth - kMarginLeft - kMarginRight);
    }
    double y(double v) const {
        return y_origin + kPanelHeight - v / y_max * kPanelHeight;
    }
};

void draw_panel(std::ofstream& out, const std::vector<DerivativeProcess>& procs, double q,
                const std::vector<ChangePoint>& cps, const std::string& label, int y_origin) {
    Panel p;
    p.y_origin = y_origin;
    p.t_max = procs.empty() ? 1.0 : procs.front().grid.horizon();
    p.y_max = 1.25 * q;
    for (const auto& proc : procs)
        for (double g : proc.g) p.y_max = std::max(p.y_max, 1.05 * std::abs(g));

    out << "<rect x='" << kMarginLeft << "' y='" << y_origin << "' width='"
        << (kWidth - kMarginLeft - kMarginRight) << "' height='" << kPanelHeight
        << "' fill='none' stroke='#999'/>\n";
    out << "<text x='" << kMarginLeft << "' y='" << y_origin - 7
        << "' font-family='sans-serif' font-size='13'>" << label << "</text>\n";

    // axis ticks: 0 and max on both axes
    out << "<text x='" << kMarginLeft - 6 << "' y='" << y_origin + kPanelHeight + 4
        << "' text-anchor='end' font-family='sans-serif' font-size='11'>0</text>\n";
    out << "<text x='" << kMarginLeft - 6 << "' y='" << y_origin + 10
        << "' text-anchor='end' font-family='sans-serif' font-size='11'>" << num(p.y_max)
        << "</text>\n";
    out << "<text x='" << kWidth - kMarginRight << "' y='" << y_origin + kPanelHeight + 16
        << "' text-anchor='end' font-family='sans-serif' font-size='11'>t=" << num(p.t_max)
        << "</text>\n";

    int color = 0;
    for (const auto& proc : procs) {
        // stride so each polyline stays below ~1500 points
        const std::size_t stride = std::max<std::size_t>(1, proc.size() / 1500);
        out << "<polyline fill='none' stroke='" << kPalette[color % 8]
            << "' stroke-width='0.8' points='";
        for (std::size_t j = 0; j < proc.size(); j += stride)
            out << num(p.x(proc.time_at(j))) << "," << num(p.y(std::abs(proc.g[j]))) << " ";
        out << "'/>\n";
        out << "<text x='" << kWidth - kMarginRight - 60 << "' y='"
            << y_origin + 14 + 13 * color << "' font-family='sans-serif' font-size='11' fill='"
            << kPalette[color % 8] << "'>h=" << num(proc.h) << "</text>\n";
        ++color;
    }

    if (std::isfinite(q)) {
        out << "<line x1='" << kMarginLeft << "' y1='" << num(p.y(q)) << "' x2='"
            << kWidth - kMarginRight << "' y2='" << num(p.y(q))
            << "' stroke='#444' stroke-dasharray='6,4'/>\n";
        out << "<text x='" << kMarginLeft + 4 << "' y='" << num(p.y(q) - 4)
            << "' font-family='sans-serif' font-size='11' fill='#444'>Q=" << num(q)
            << "</text>\n";
    }

    for (const auto& cp : cps) {
        const double cx = p.x(cp.time);
        const double cy = p.y(std::min(cp.value, p.y_max));
        out << "<path d='M " << num(cx) << " " << num(cy - 6) << " L " << num(cx + 5) << " "
            << num(cy) << " L " << num(cx) << " " << num(cy + 6) << " L " << num(cx - 5) << " "
            << num(cy) << " Z' fill='#000'/>\n";
    }
}

}  // namespace

void write_g_svg(const std::string& path, const std::vector<DerivativeProcess>& rate_procs,
                 double q_rate, const std::vector<ChangePoint>& rate_cps,
                 const std::vector<DerivativeProcess>& var_procs, double q_var,
                 const std::vector<ChangePoint>& var_cps) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write SVG: " + path);
    const int height = kMarginTop + 2 * kPanelHeight + kGap + 28;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << height
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    draw_panel(out, rate_procs, q_rate, rate_cps, "|G| rate", kMarginTop);
    draw_panel(out, var_procs, q_var, var_cps, "|G| variance", kMarginTop + kPanelHeight + kGap);
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace mft
