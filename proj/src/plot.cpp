#include "lastzero/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace lastzero {

namespace {

constexpr std::array<const char*, 6> kColours = {"#1f4e9c", "#b2182b", "#2d7f3a", "#7a4ea3", "#c46a00", "#3b3b3b"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string label(double mu) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "mu = %g", mu == 0.0 ? 0.0 : mu);
    return buf;
}

// Round a positive span up to 1, 2 or 5 times a power of ten.
double nice_step(double span, int ticks) {
    const double raw = span / ticks;
    const double p = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * p >= raw) return m * p;
    }
    return 10.0 * p;
}

}  // namespace

std::string render_boundaries_svg(const std::vector<BoundaryPair>& pairs, const PlotOptions& opts) {
    if (pairs.empty()) throw std::invalid_argument("render_boundaries_svg: nothing to plot");
    double t_max = 0.0;
    double y_abs = 0.0;
    for (const auto& bp : pairs) {
        bp.check_shape();
        t_max = std::max(t_max, bp.spec.T);
        for (std::size_t i = 0; i < bp.size(); ++i) {
            y_abs = std::max({y_abs, std::abs(bp.b_minus[i]), std::abs(bp.b_plus[i])});
        }
    }
    if (!(y_abs > 0.0)) y_abs = 1.0;
    const double y_step = nice_step(2.0 * y_abs, 8);
    const double y_lim = std::ceil(y_abs / y_step) * y_step;

    const double left = 70.0, right = 150.0, top = 40.0, bottom = 50.0;
    const double pw = opts.width - left - right;
    const double ph = opts.height - top - bottom;
    auto px = [&](double t) { return left + pw * t / t_max; };
    auto py = [&](double y) { return top + ph * (y_lim - y) / (2.0 * y_lim); };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(opts.width) << "\" height=\""
       << fmt(opts.height) << "\" viewBox=\"0 0 " << fmt(opts.width) << ' ' << fmt(opts.height) << "\">\n";
    if (!opts.manifest.empty()) os << "<!-- manifest " << opts.manifest << " -->\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << fmt(opts.width) << "\" height=\"" << fmt(opts.height)
       << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"15\">"
       << opts.title << "</text>\n";

    // Axes and ticks.
    os << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
    os << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph)
       << "\"/>\n";
    os << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(py(0.0)) << "\" x2=\"" << fmt(left + pw) << "\" y2=\""
       << fmt(py(0.0)) << "\" stroke=\"#999999\"/>\n";
    os << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
    const double t_step = nice_step(t_max, 5);
    for (double t = 0.0; t <= t_max * (1.0 + 1e-9); t += t_step) {
        os << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << fmt(top + ph) << "\" x2=\"" << fmt(px(t)) << "\" y2=\""
           << fmt(top + ph + 5) << "\" stroke=\"black\"/>";
        os << "<text x=\"" << fmt(px(t)) << "\" y=\"" << fmt(top + ph + 18) << "\" text-anchor=\"middle\">" << t
           << "</text>\n";
    }
    for (double y = -y_lim; y <= y_lim * (1.0 + 1e-9); y += y_step) {
        const double yy = std::abs(y) < 1e-12 ? 0.0 : y;
        os << "<line x1=\"" << fmt(left - 5) << "\" y1=\"" << fmt(py(yy)) << "\" x2=\"" << fmt(left) << "\" y2=\""
           << fmt(py(yy)) << "\" stroke=\"black\"/>";
        os << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(py(yy) + 4) << "\" text-anchor=\"end\">" << yy
           << "</text>\n";
    }
    os << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(opts.height - 10)
       << "\" text-anchor=\"middle\">t</text>\n";
    os << "<text x=\"18\" y=\"" << fmt(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << fmt(top + ph / 2) << ")\">x</text>\n";
    os << "</g>\n";

    // Curves.
    std::size_t colour = 0;
    std::vector<std::pair<std::string, std::string>> legend;  // label, style
    for (const auto& bp : pairs) {
        const bool dashed = bp.spec.mu == 0.0;
        const std::string stroke = dashed ? "black" : kColours[colour++ % kColours.size()];
        std::string style = "fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"1.6\"";
        if (dashed) style += " stroke-dasharray=\"6,4\"";
        for (int side = 0; side < 2; ++side) {
            const auto& b = side == 0 ? bp.b_minus : bp.b_plus;
            os << "<polyline class=\"boundary\" data-mu=\"" << (bp.spec.mu == 0.0 ? 0.0 : bp.spec.mu)
               << "\" data-side=\"" << (side == 0 ? "minus" : "plus") << "\" " << style << " points=\"";
            for (std::size_t i = 0; i < bp.size(); ++i) {
                if (i) os << ' ';
                os << fmt(px(bp.grid[i])) << ',' << fmt(py(b[i]));
            }
            os << "\"/>\n";
        }
        legend.emplace_back(label(bp.spec.mu), style);
    }

    // Legend.
    os << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    const double lx = left + pw + 15.0;
    for (std::size_t i = 0; i < legend.size(); ++i) {
        const double ly = top + 15.0 + 20.0 * static_cast<double>(i);
        os << "<g class=\"legend-entry\"><line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 28)
           << "\" y2=\"" << fmt(ly) << "\" " << legend[i].second << "/>";
        os << "<text x=\"" << fmt(lx + 34) << "\" y=\"" << fmt(ly + 4) << "\">" << legend[i].first << "</text></g>\n";
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

}  // namespace lastzero
