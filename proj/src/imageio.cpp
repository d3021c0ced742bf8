#include "cilfit/imageio.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace cilfit {

void PreprocessConfig::validate() const {
    if (crop_side < 1) throw std::invalid_argument("PreprocessConfig: crop_side < 1");
    if (!(smooth_sigma >= 0.0))
        throw std::invalid_argument("PreprocessConfig: smooth_sigma < 0");
    if (target_side < 1 || target_side > crop_side)
        throw std::invalid_argument("PreprocessConfig: need 1 <= target_side <= crop_side");
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

// --- PGM -------------------------------------------------------------------

int next_pnm_token(std::istream& in, std::string& token) {
    token.clear();
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (!std::isspace(c)) break;
    }
    if (c == EOF) return -1;
    token.push_back(static_cast<char>(c));
    while ((c = in.get()) != EOF && !std::isspace(c)) token.push_back(static_cast<char>(c));
    return 0;
}

long pnm_int(std::istream& in, const std::string& path) {
    std::string tok;
    if (next_pnm_token(in, tok) != 0) throw CorruptFileError("truncated header: " + path);
    try {
        return std::stol(tok);
    } catch (const std::exception&) {
        throw CorruptFileError("bad header token '" + tok + "': " + path);
    }
}

GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string magic;
    if (next_pnm_token(in, magic) != 0) throw CorruptFileError("empty file: " + path);
    if (magic != "P2" && magic != "P5")
        throw UnsupportedFormatError("unsupported graymap type '" + magic + "': " + path);
    const long width = pnm_int(in, path);
    const long height = pnm_int(in, path);
    const long maxval = pnm_int(in, path);
    if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
        throw CorruptFileError("implausible graymap dimensions: " + path);
    GrayImage img;
    img.source = path;
    img.pixels.resize(height, width);
    const double scale = 1.0 / static_cast<double>(maxval);
    if (magic == "P2") {
        for (long i = 0; i < height; ++i)
            for (long j = 0; j < width; ++j) {
                const long v = pnm_int(in, path);
                if (v < 0 || v > maxval) throw CorruptFileError("sample out of range: " + path);
                img.pixels(i, j) = v * scale;
            }
    } else {
        // P5: single whitespace after maxval already consumed by tokenizer? No:
        // pnm_int stops at the first whitespace, which is the required separator.
        const int bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> row(static_cast<std::size_t>(width) * bytes);
        for (long i = 0; i < height; ++i) {
            in.read(reinterpret_cast<char*>(row.data()),
                    static_cast<std::streamsize>(row.size()));
            if (!in) throw CorruptFileError("truncated pixel data: " + path);
            for (long j = 0; j < width; ++j) {
                const long v = bytes == 1 ? row[static_cast<std::size_t>(j)]
                                          : (row[2 * j] << 8 | row[2 * j + 1]);
                img.pixels(i, j) = v * scale;
            }
        }
    }
    return img;
}

// --- PNG -------------------------------------------------------------------

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

GrayImage load_png(const std::string& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("cannot open file: " + path);
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw CorruptFileError("not a portable network graphics file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    std::vector<std::vector<png_byte>> rows;
    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw CorruptFileError("corrupt portable network graphics file: " + path);
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    depth = png_get_bit_depth(png, info);
    const int channels = png_get_channels(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    rows.assign(height, std::vector<png_byte>(rowbytes));
    row_ptrs.resize(height);
    for (png_uint_32 i = 0; i < height; ++i) row_ptrs[i] = rows[i].data();
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    GrayImage img;
    img.source = path;
    img.pixels.resize(height, width);
    const double scale = depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
    const int bytes = depth == 16 ? 2 : 1;
    for (png_uint_32 i = 0; i < height; ++i) {
        const png_byte* row = rows[i].data();
        for (png_uint_32 j = 0; j < width; ++j) {
            double chan[3] = {0, 0, 0};
            const int nchan = std::min(channels, 3);
            for (int c = 0; c < nchan; ++c) {
                const png_byte* p = row + (static_cast<std::size_t>(j) * channels + c) * bytes;
                // 16-bit samples are big-endian in the stream
                chan[c] = bytes == 2 ? (p[0] << 8 | p[1]) : p[0];
            }
            const double v = nchan >= 3
                                 ? 0.2126 * chan[0] + 0.7152 * chan[1] + 0.0722 * chan[2]
                                 : chan[0];
            img.pixels(i, j) = v * scale;
        }
    }
    return img;
}

std::uint16_t quantize16(double v) {
    return static_cast<std::uint16_t>(
        std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
}

}  // namespace

GrayImage load_gray(const std::string& path) {
    const std::string lower = lowercase(path);
    if (ends_with(lower, ".pgm") || ends_with(lower, ".pnm")) return load_pgm(path);
    if (ends_with(lower, ".png")) return load_png(path);
    // fall back to content sniffing
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    char head[2] = {};
    in.read(head, 2);
    in.close();
    if (head[0] == 'P' && (head[1] == '2' || head[1] == '5')) return load_pgm(path);
    if (static_cast<unsigned char>(head[0]) == 0x89 && head[1] == 'P') return load_png(path);
    throw UnsupportedFormatError("unsupported image format: " + path);
}

void save_pgm16(const std::string& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "P5\n" << img.width() << " " << img.height() << "\n65535\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(img.width()) * 2);
    for (Eigen::Index i = 0; i < img.height(); ++i) {
        for (Eigen::Index j = 0; j < img.width(); ++j) {
            const std::uint16_t v = quantize16(img.pixels(i, j));
            row[2 * j] = static_cast<unsigned char>(v >> 8);
            row[2 * j + 1] = static_cast<unsigned char>(v & 0xff);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
}

namespace {

void save_png_impl(const std::string& path, const GrayImage& img, int depth) {
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
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
                 static_cast<png_uint_32>(img.height()), depth, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const int bytes = depth == 16 ? 2 : 1;
    std::vector<png_byte> row(static_cast<std::size_t>(img.width()) * bytes);
    for (Eigen::Index i = 0; i < img.height(); ++i) {
        for (Eigen::Index j = 0; j < img.width(); ++j) {
            if (depth == 16) {
                const std::uint16_t v = quantize16(img.pixels(i, j));
                row[2 * j] = static_cast<png_byte>(v >> 8);
                row[2 * j + 1] = static_cast<png_byte>(v & 0xff);
            } else {
                row[j] = static_cast<png_byte>(
                    std::lround(std::clamp(img.pixels(i, j), 0.0, 1.0) * 255.0));
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

void save_png16(const std::string& path, const GrayImage& img) {
    save_png_impl(path, img, 16);
}

void save_png8(const std::string& path, const GrayImage& img) {
    save_png_impl(path, img, 8);
}

GrayImage center_crop(const GrayImage& img, int side) {
    if (side < 1 || side > img.height() || side > img.width())
        throw CropTooLargeError("center_crop: side exceeds image dimensions");
    const Eigen::Index r0 = (img.height() - side) / 2;
    const Eigen::Index c0 = (img.width() - side) / 2;
    GrayImage out;
    out.source = img.source;
    out.pixels = img.pixels.block(r0, c0, side, side);
    return out;
}

GrayImage gaussian_smooth(const GrayImage& img, double sigma) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("gaussian_smooth: sigma < 0");
    if (sigma == 0.0) return img;
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[static_cast<std::size_t>(k + radius)] =
            std::exp(-0.5 * (k / sigma) * (k / sigma));
        sum += kernel[static_cast<std::size_t>(k + radius)];
    }
    for (double& w : kernel) w /= sum;

    const Eigen::Index h = img.height(), w = img.width();
    Eigen::ArrayXXd tmp(h, w), out(h, w);
    // vertical pass (over rows), edge replication
    for (Eigen::Index j = 0; j < w; ++j)
        for (Eigen::Index i = 0; i < h; ++i) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const Eigen::Index ii = std::clamp<Eigen::Index>(i + k, 0, h - 1);
                acc += kernel[static_cast<std::size_t>(k + radius)] * img.pixels(ii, j);
            }
            tmp(i, j) = acc;
        }
    // horizontal pass
    for (Eigen::Index j = 0; j < w; ++j)
        for (Eigen::Index i = 0; i < h; ++i) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const Eigen::Index jj = std::clamp<Eigen::Index>(j + k, 0, w - 1);
                acc += kernel[static_cast<std::size_t>(k + radius)] * tmp(i, jj);
            }
            out(i, j) = acc;
        }
    GrayImage result;
    result.source = img.source;
    result.pixels = std::move(out);
    return result;
}

namespace {

// 1-D area-average resample of each column block; operates along rows.
Eigen::ArrayXXd box_resample_rows(const Eigen::ArrayXXd& in, int target) {
    const Eigen::Index src = in.rows();
    Eigen::ArrayXXd out(target, in.cols());
    const double scale = static_cast<double>(src) / target;
    for (int i = 0; i < target; ++i) {
        const double lo = i * scale;
        const double hi = (i + 1) * scale;
        const auto first = static_cast<Eigen::Index>(lo);
        const auto last = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(hi)), src);
        for (Eigen::Index j = 0; j < in.cols(); ++j) {
            double acc = 0.0;
            for (Eigen::Index s = first; s < last; ++s) {
                const double cover = std::min<double>(hi, s + 1.0) - std::max<double>(lo, s);
                acc += cover * in(s, j);
            }
            out(i, j) = acc / scale;
        }
    }
    return out;
}

}  // namespace

GrayImage downsample(const GrayImage& img, int target_side) {
    if (target_side < 1 || target_side > img.height() || target_side > img.width())
        throw BadTargetError("downsample: target must be in [1, side]");
    GrayImage out;
    out.source = img.source;
    out.pixels =
        box_resample_rows(box_resample_rows(img.pixels, target_side).transpose(), target_side)
            .transpose();
    return out;
}

Pattern preprocess(const GrayImage& img, const PreprocessConfig& cfg, double patch_len) {
    cfg.validate();
    GrayImage stage = center_crop(img, cfg.crop_side);
    stage = gaussian_smooth(stage, cfg.smooth_sigma);
    stage = downsample(stage, cfg.target_side);
    const double lo = stage.pixels.minCoeff();
    const double hi = stage.pixels.maxCoeff();
    if (!(hi - lo >= kDegenerateRange))
        throw DegeneratePatternError("preprocess: image patch is constant");
    Pattern p;
    p.patch_len = patch_len;
    p.values = (stage.pixels - lo) / (hi - lo);
    return p;
}

}  // namespace cilfit
