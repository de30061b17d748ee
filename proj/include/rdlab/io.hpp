#pragma once
/// Output plumbing for the experiment runner: fixed-format scientific
/// numbers, CSV rendering, text-file writing, and a dependency-free
/// write-only SVG plotter (solution waterfalls, eigenvalue scatters,
/// convergence curves).

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rdlab::io {

/// Scientific "%.12e" form so repeated runs are byte-identical. Non-finite
/// values become the bare strings "nan", "inf" or "-inf".
[[nodiscard]] std::string format_scientific(double v);

/// Renders a header row plus pre-formatted value rows, comma-separated,
/// one trailing newline. Every row must match the header width.
[[nodiscard]] std::string render_csv(std::span<const std::string> header,
                                     std::span<const std::vector<std::string>> rows);

/// Writes content to path, creating parent directories as needed; throws
/// std::runtime_error when the file cannot be written.
void write_text_file(const std::string& path, std::string_view content);

/// Minimal line/scatter plotter emitting a standalone SVG document.
/// Axes auto-scale to the added data; non-finite points break polylines
/// rather than corrupting the path.
class SvgPlot {
  public:
    SvgPlot(std::string title, std::string x_label, std::string y_label);

    void add_line(std::span<const double> xs, std::span<const double> ys,
                  std::string_view color);
    void add_points(std::span<const double> xs, std::span<const double> ys,
                    std::string_view color);
    /// Dashed reference circle, e.g. the unit circle behind a spectrum.
    void add_reference_circle(double cx, double cy, double radius);
    /// Forces equal data units per pixel on both axes (spectra).
    void set_equal_aspect(bool on) { equal_aspect_ = on; }

    [[nodiscard]] std::string render() const;

  private:
    struct Series {
        std::vector<double> xs;
        std::vector<double> ys;
        std::string color;
        bool line = true;
    };
    struct Circle {
        double cx = 0.0;
        double cy = 0.0;
        double r = 0.0;
    };

    std::string title_;
    std::string x_label_;
    std::string y_label_;
    std::vector<Series> series_;
    std::vector<Circle> circles_;
    bool equal_aspect_ = false;
};

}  // namespace rdlab::io
