#include "admor/matrix_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "matrix container I/O assumes a little-endian host");

namespace admor {

namespace {

constexpr char kMagic[8] = {'A', 'D', 'M', 'O', 'R', 'M', 'A', 'T'};

[[noreturn]] void fail(const std::filesystem::path& file,
                       const std::string& why) {
    throw std::runtime_error("matrix io: " + file.string() + ": " + why);
}

// std::stod throws on subnormal input; strtod returns the rounded value for
// the whole double range (ERANGE on under/overflow is the desired result).
double parse_double(const std::string& cell, const std::filesystem::path& file) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str()) fail(file, "bad number '" + cell + "'");
    return v;
}

}  // namespace

void write_matrix(const std::filesystem::path& file, const Matrix& M) {
    std::ofstream out(file, std::ios::binary);
    if (!out) fail(file, "cannot open for writing");
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t rows = static_cast<std::uint64_t>(M.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(M.cols());
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    using RowMajor =
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor buf = M;
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(sizeof(double) * buf.size()));
    if (!out) fail(file, "write failed");
}

Matrix read_matrix(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) fail(file, "cannot open for reading");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        fail(file, "bad magic");
    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 8);
    in.read(reinterpret_cast<char*>(&cols), 8);
    if (!in) fail(file, "truncated header");
    using RowMajor =
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor buf(static_cast<Index>(rows), static_cast<Index>(cols));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(sizeof(double) * buf.size()));
    if (!in) fail(file, "truncated payload");
    return buf;
}

void write_matrix_csv(const std::filesystem::path& file, const Matrix& M) {
    std::ofstream out(file);
    if (!out) fail(file, "cannot open for writing");
    char num[32];
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) {
            std::snprintf(num, sizeof(num), "%.17g", M(i, j));
            out << num;
            if (j + 1 < M.cols()) out << ',';
        }
        out << '\n';
    }
    if (!out) fail(file, "write failed");
}

Matrix read_matrix_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) fail(file, "cannot open for reading");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            row.push_back(parse_double(cell, file));
        if (!rows.empty() && row.size() != rows.front().size())
            fail(file, "ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) return Matrix(0, 0);
    Matrix M(static_cast<Index>(rows.size()),
             static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < M.rows(); ++i)
        for (Index j = 0; j < M.cols(); ++j)
            M(i, j) = rows[static_cast<std::size_t>(i)]
                          [static_cast<std::size_t>(j)];
    return M;
}

}  // namespace admor
