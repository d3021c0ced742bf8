#include "cilfit/pattern_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace cilfit {

static_assert(std::endian::native == std::endian::little,
              "pattern files are little-endian; byte swapping is not implemented");

namespace {

constexpr char kMagic[4] = {'P', 'A', 'T', '1'};

void put_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

}  // namespace

void write_pattern(const std::string& path, const Pattern& pattern) {
    if (pattern.values.rows() != pattern.values.cols())
        throw std::invalid_argument("write_pattern: pattern must be square");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.write(kMagic, 4);
    const auto side = static_cast<std::uint32_t>(pattern.values.rows());
    put_u32(out, side);
    put_u32(out, 0);  // reserved
    put_u32(out, 0);  // header padding to 16 bytes
    std::vector<double> row(side);
    for (std::uint32_t i = 0; i < side; ++i) {
        for (std::uint32_t j = 0; j < side; ++j) row[j] = pattern.values(i, j);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(side * sizeof(double)));
    }
    if (!out) throw std::runtime_error("short write: " + path);
}

Pattern read_pattern(const std::string& path, double patch_len) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a pattern file (bad magic): " + path);
    const std::uint32_t side = get_u32(in);
    get_u32(in);  // reserved
    get_u32(in);  // padding
    if (side == 0 || side > 1u << 16)
        throw std::runtime_error("implausible pattern side in: " + path);
    Pattern p;
    p.patch_len = patch_len;
    p.values.resize(side, side);
    std::vector<double> row(side);
    for (std::uint32_t i = 0; i < side; ++i) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(side * sizeof(double)));
        if (!in) throw std::runtime_error("truncated pattern file: " + path);
        for (std::uint32_t j = 0; j < side; ++j) p.values(i, j) = row[j];
    }
    return p;
}

Pattern read_pattern_auto(const std::string& path) {
    const KvFile meta = parse_kv_file(path + ".meta");
    const KvSection* s = meta.find("pattern");
    if (!s) s = &meta.sections.front();
    return read_pattern(path, s->get_double("patch_len"));
}

void write_pattern_sidecar(const std::string& pattern_path, const SimOutcome& outcome,
                           std::uint64_t seed) {
    std::ofstream out(pattern_path + ".meta");
    if (!out) throw std::runtime_error("cannot write file: " + pattern_path + ".meta");
    out.precision(17);
    out << "[pattern]\n"
        << "status = " << to_string(outcome.status) << "\n"
        << "seed = " << seed << "\n"
        << "steps = " << outcome.steps_taken << "\n"
        << "final_residual = " << outcome.final_residual << "\n";
    if (outcome.pattern) {
        out << "patch_len = " << outcome.pattern->patch_len << "\n"
            << "side = " << outcome.pattern->values.rows() << "\n";
    }
}

void write_pattern_sidecar(const std::string& pattern_path, double patch_len) {
    std::ofstream out(pattern_path + ".meta");
    if (!out) throw std::runtime_error("cannot write file: " + pattern_path + ".meta");
    out.precision(17);
    out << "[pattern]\npatch_len = " << patch_len << "\n";
}

void write_pattern_csv(const std::string& path, const Pattern& pattern) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.precision(17);
    for (Eigen::Index i = 0; i < pattern.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < pattern.values.cols(); ++j) {
            if (j) out << ',';
            out << pattern.values(i, j);
        }
        out << '\n';
    }
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
}

}  // namespace cilfit
