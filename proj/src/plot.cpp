#include "cilfit/plot.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace cilfit {

Canvas::Canvas(int w, int h, Rgb fill) : width(w), height(h) {
    if (w < 1 || h < 1) throw std::invalid_argument("Canvas: degenerate dimensions");
    pixels.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < pixels.size(); i += 3) {
        pixels[i] = fill.r;
        pixels[i + 1] = fill.g;
        pixels[i + 2] = fill.b;
    }
}

void Canvas::set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    const std::size_t idx = (static_cast<std::size_t>(y) * width + x) * 3;
    pixels[idx] = c.r;
    pixels[idx + 1] = c.g;
    pixels[idx + 2] = c.b;
}

void Canvas::line(int x0, int y0, int x1, int y1, Rgb c) {
    // Bresenham
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        set(x0, y0, c);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void Canvas::rect(int x0, int y0, int x1, int y1, Rgb c) {
    line(x0, y0, x1, y0, c);
    line(x1, y0, x1, y1, c);
    line(x1, y1, x0, y1, c);
    line(x0, y1, x0, y0, c);
}

void Canvas::disc(int cx, int cy, int radius, Rgb c) {
    for (int y = -radius; y <= radius; ++y)
        for (int x = -radius; x <= radius; ++x)
            if (x * x + y * y <= radius * radius) set(cx + x, cy + y, c);
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

}  // namespace

void Canvas::save_png(const std::string& path) const {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot write file: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png write failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(
                               pixels.data() + static_cast<std::size_t>(y) * width * 3));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void render_pattern_png(const std::string& path, const Pattern& pattern, int scale) {
    scale = std::max(scale, 1);
    const Eigen::Index n = pattern.values.rows();
    const Eigen::Index m = pattern.values.cols();
    Canvas canvas(static_cast<int>(m) * scale, static_cast<int>(n) * scale);
    const double lo = pattern.values.minCoeff();
    const double hi = pattern.values.maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto g = static_cast<unsigned char>(
                std::lround((pattern.values(i, j) - lo) / span * 255.0));
            for (int dy = 0; dy < scale; ++dy)
                for (int dx = 0; dx < scale; ++dx)
                    canvas.set(static_cast<int>(j) * scale + dx,
                               static_cast<int>(i) * scale + dy, {g, g, g});
        }
    canvas.save_png(path);
}

namespace {

struct AxisMap {
    double lo, hi;
    int px0, px1;

    int map(double v) const {
        const double span = hi > lo ? hi - lo : 1.0;
        return px0 + static_cast<int>(std::lround((v - lo) / span * (px1 - px0)));
    }
};

void draw_scatter_panel(Canvas& canvas, int x0, int y0, int x1, int y1,
                        const std::vector<double>& xs, const std::vector<double>& ys) {
    canvas.rect(x0, y0, x1, y1, {0, 0, 0});
    if (xs.empty()) return;
    const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
    const auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
    const AxisMap ax{*xmin, *xmax, x0 + 4, x1 - 4};
    const AxisMap ay{*ymin, *ymax, y1 - 4, y0 + 4};  // y grows upward
    for (std::size_t i = 0; i < xs.size(); ++i)
        canvas.disc(ax.map(xs[i]), ay.map(ys[i]), 1, {40, 60, 180});
}

}  // namespace

void scatter_png(const std::string& path, const std::vector<double>& x,
                 const std::vector<double>& y, int width, int height) {
    if (x.size() != y.size()) throw std::invalid_argument("scatter_png: size mismatch");
    Canvas canvas(width, height);
    draw_scatter_panel(canvas, 10, 10, width - 10, height - 10, x, y);
    canvas.save_png(path);
}

void series_png(const std::string& path, const std::vector<double>& y, int width,
                int height) {
    Canvas canvas(width, height);
    canvas.rect(10, 10, width - 10, height - 10, {0, 0, 0});
    if (y.size() >= 2) {
        std::vector<double> finite;
        for (double v : y)
            if (std::isfinite(v)) finite.push_back(v);
        if (!finite.empty()) {
            const auto [mn, mx] = std::minmax_element(finite.begin(), finite.end());
            const AxisMap ax{0.0, static_cast<double>(y.size() - 1), 14, width - 14};
            const AxisMap ay{*mn, *mx, height - 14, 14};
            int px = -1, py = -1;
            for (std::size_t i = 0; i < y.size(); ++i) {
                if (!std::isfinite(y[i])) continue;
                const int cx = ax.map(static_cast<double>(i));
                const int cy = ay.map(y[i]);
                if (px >= 0) canvas.line(px, py, cx, cy, {180, 40, 40});
                px = cx;
                py = cy;
            }
        }
    }
    canvas.save_png(path);
}

void pair_plot_png(const std::string& path, const Eigen::MatrixXd& samples,
                   const std::vector<std::string>& names, int panel) {
    const auto dim = static_cast<int>(samples.cols());
    if (dim < 1) throw std::invalid_argument("pair_plot_png: no columns");
    (void)names;  // panel labels omitted in the raster renderer
    const int gap = 8;
    const int size = dim * panel + (dim + 1) * gap;
    Canvas canvas(size, size);
    for (int row = 0; row < dim; ++row)
        for (int col = 0; col < dim; ++col) {
            const int x0 = gap + col * (panel + gap);
            const int y0 = gap + row * (panel + gap);
            std::vector<double> xs(samples.rows()), ys(samples.rows());
            for (Eigen::Index i = 0; i < samples.rows(); ++i) {
                xs[static_cast<std::size_t>(i)] = samples(i, col);
                ys[static_cast<std::size_t>(i)] = samples(i, row);
            }
            draw_scatter_panel(canvas, x0, y0, x0 + panel, y0 + panel, xs, ys);
        }
    canvas.save_png(path);
}

}  // namespace cilfit
