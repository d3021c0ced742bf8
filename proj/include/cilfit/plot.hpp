#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cilfit/simulate.hpp"

namespace cilfit {

struct Rgb {
    unsigned char r = 0, g = 0, b = 0;
};

// Minimal RGB raster canvas for report plots.
struct Canvas {
    int width = 0;
    int height = 0;
    std::vector<unsigned char> pixels;  // RGB, row-major

    Canvas(int w, int h, Rgb fill = {255, 255, 255});
    void set(int x, int y, Rgb c);
    void line(int x0, int y0, int x1, int y1, Rgb c);
    void rect(int x0, int y0, int x1, int y1, Rgb c);
    void disc(int cx, int cy, int radius, Rgb c);
    void save_png(const std::string& path) const;
};

// Pattern rendered as a grayscale heat map, nearest-neighbor upscaled.
void render_pattern_png(const std::string& path, const Pattern& pattern, int scale = 4);

// Scatter plot with axes box; one series of (x, y) points.
void scatter_png(const std::string& path, const std::vector<double>& x,
                 const std::vector<double>& y, int width = 480, int height = 480);

// Polyline plot of y against index (e.g. best-cost history).
void series_png(const std::string& path, const std::vector<double>& y, int width = 640,
                int height = 360);

// Pair-plot grid of scatter panels for the columns of a sample matrix.
void pair_plot_png(const std::string& path, const Eigen::MatrixXd& samples,
                   const std::vector<std::string>& names, int panel = 200);

}  // namespace cilfit
