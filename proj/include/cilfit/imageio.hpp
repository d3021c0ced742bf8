#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "cilfit/simulate.hpp"

namespace cilfit {

struct UnsupportedFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CorruptFileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CropTooLargeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct BadTargetError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Grayscale image with pixel values in [0, 1].
struct GrayImage {
    Eigen::ArrayXXd pixels;  // rows x cols
    std::string source;

    Eigen::Index height() const { return pixels.rows(); }
    Eigen::Index width() const { return pixels.cols(); }
};

struct PreprocessConfig {
    int crop_side = 275;
    double smooth_sigma = 2.0;
    int target_side = 96;

    void validate() const;
};

// 8/16-bit PGM (P2/P5) and PNG (gray/RGB/alpha-stripped, 8/16-bit); values
// scaled to [0,1] by the format's max value; color converted by Rec.709 luma.
GrayImage load_gray(const std::string& path);

// 16-bit grayscale writers (bit-exact round trip of 16-bit quantized data).
void save_pgm16(const std::string& path, const GrayImage& img);
void save_png16(const std::string& path, const GrayImage& img);
void save_png8(const std::string& path, const GrayImage& img);

// Centered square block; offset floor((dim - side)/2) from the top/left, so
// odd leftovers drop the extra row/column at the bottom/right.
GrayImage center_crop(const GrayImage& img, int side);

// Separable Gaussian blur: kernel truncated at 4*sigma and renormalized,
// boundaries by edge replication; sigma = 0 is the identity.
GrayImage gaussian_smooth(const GrayImage& img, double sigma);

// Area-averaging (box) resample to target_side x target_side.
GrayImage downsample(const GrayImage& img, int target_side);

// crop -> smooth -> downsample -> min-max normalize. patch_len is supplied by
// the caller: the physical side is a model parameter, not an image property.
Pattern preprocess(const GrayImage& img, const PreprocessConfig& cfg, double patch_len);

}  // namespace cilfit
