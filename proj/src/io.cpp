#include "rdlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <utility>

namespace rdlab::io {

std::string format_scientific(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

std::string render_csv(std::span<const std::string> header,
                       std::span<const std::vector<std::string>> rows) {
    std::string out;
    auto append_row = [&out](std::span<const std::string> cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    append_row(header);
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("render_csv: row width differs from header");
        append_row(row);
    }
    return out;
}

void write_text_file(const std::string& path, std::string_view content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write_text_file: cannot write " + path);
}

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 24.0;
constexpr double kTop = 44.0;
constexpr double kBottom = 58.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape_text(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
    bool seen = false;

    void take(double v) {
        if (!std::isfinite(v)) return;
        if (!seen) {
            lo = hi = v;
            seen = true;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void pad() {
        if (!seen) {
            lo = 0.0;
            hi = 1.0;
            return;
        }
        double span = hi - lo;
        if (span <= 0.0) span = std::max(1.0, std::fabs(lo));
        lo -= 0.05 * span;
        hi += 0.05 * span;
    }
};

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgPlot::add_line(std::span<const double> xs, std::span<const double> ys,
                       std::string_view color) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("SvgPlot::add_line: mismatched series lengths");
    series_.push_back({{xs.begin(), xs.end()}, {ys.begin(), ys.end()}, std::string(color), true});
}

void SvgPlot::add_points(std::span<const double> xs, std::span<const double> ys,
                         std::string_view color) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("SvgPlot::add_points: mismatched series lengths");
    series_.push_back({{xs.begin(), xs.end()}, {ys.begin(), ys.end()}, std::string(color), false});
}

void SvgPlot::add_reference_circle(double cx, double cy, double radius) {
    circles_.push_back({cx, cy, radius});
}

std::string SvgPlot::render() const {
    Range rx;
    Range ry;
    for (const auto& s : series_) {
        for (double v : s.xs) rx.take(v);
        for (double v : s.ys) ry.take(v);
    }
    for (const auto& c : circles_) {
        rx.take(c.cx - c.r);
        rx.take(c.cx + c.r);
        ry.take(c.cy - c.r);
        ry.take(c.cy + c.r);
    }
    rx.pad();
    ry.pad();

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;

    if (equal_aspect_) {
        const double ux = (rx.hi - rx.lo) / plot_w;
        const double uy = (ry.hi - ry.lo) / plot_h;
        const double u = std::max(ux, uy);
        const double cx = 0.5 * (rx.lo + rx.hi);
        const double cy = 0.5 * (ry.lo + ry.hi);
        rx.lo = cx - 0.5 * u * plot_w;
        rx.hi = cx + 0.5 * u * plot_w;
        ry.lo = cy - 0.5 * u * plot_h;
        ry.hi = cy + 0.5 * u * plot_h;
    }

    auto px = [&](double x) { return kLeft + (x - rx.lo) / (rx.hi - rx.lo) * plot_w; };
    auto py = [&](double y) { return kTop + (ry.hi - y) / (ry.hi - ry.lo) * plot_h; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
           num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Grid lines and tick labels, five per axis.
    svg += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
        svg += "<line x1=\"" + num(px(fx)) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(px(fx)) +
               "\" y2=\"" + num(kTop + plot_h) + "\"/>\n";
        svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py(fy)) + "\" x2=\"" +
               num(kLeft + plot_w) + "\" y2=\"" + num(py(fy)) + "\"/>\n";
    }
    svg += "</g>\n";
    svg += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#444444\">\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
        svg += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(kTop + plot_h + 16.0) +
               "\" text-anchor=\"middle\">" + tick_label(fx) + "</text>\n";
        svg += "<text x=\"" + num(kLeft - 6.0) + "\" y=\"" + num(py(fy) + 4.0) +
               "\" text-anchor=\"end\">" + tick_label(fy) + "</text>\n";
    }
    svg += "</g>\n";

    // Frame.
    svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(plot_w) +
           "\" height=\"" + num(plot_h) + "\" fill=\"none\" stroke=\"#333333\"/>\n";

    for (const auto& c : circles_) {
        const double r_px = c.r / (rx.hi - rx.lo) * plot_w;
        svg += "<ellipse cx=\"" + num(px(c.cx)) + "\" cy=\"" + num(py(c.cy)) + "\" rx=\"" +
               num(r_px) + "\" ry=\"" + num(c.r / (ry.hi - ry.lo) * plot_h) +
               "\" fill=\"none\" stroke=\"#999999\" stroke-dasharray=\"5,4\"/>\n";
    }

    for (const auto& s : series_) {
        if (s.line) {
            std::string d;
            bool open = false;
            for (std::size_t i = 0; i < s.xs.size(); ++i) {
                if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) {
                    open = false;
                    continue;
                }
                d += open ? " L " : " M ";
                d += num(px(s.xs[i])) + " " + num(py(s.ys[i]));
                open = true;
            }
            if (!d.empty())
                svg += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + s.color +
                       "\" stroke-width=\"1.5\"/>\n";
        } else {
            svg += "<g fill=\"" + s.color + "\">\n";
            for (std::size_t i = 0; i < s.xs.size(); ++i) {
                if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
                svg += "<circle cx=\"" + num(px(s.xs[i])) + "\" cy=\"" + num(py(s.ys[i])) +
                       "\" r=\"2.6\"/>\n";
            }
            svg += "</g>\n";
        }
    }

    svg += "<text x=\"" + num(kWidth / 2.0) + "\" y=\"22\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"15\" fill=\"#111111\">" +
           escape_text(title_) + "</text>\n";
    svg += "<text x=\"" + num(kLeft + plot_w / 2.0) + "\" y=\"" + num(kHeight - 14.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "fill=\"#111111\">" +
           escape_text(x_label_) + "</text>\n";
    svg += "<text x=\"18\" y=\"" + num(kTop + plot_h / 2.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "fill=\"#111111\" transform=\"rotate(-90 18 " +
           num(kTop + plot_h / 2.0) + ")\">" + escape_text(y_label_) + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace rdlab::io
