#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "admor/matrix_io.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

using namespace admor;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "admor_matrix_io_test";
    fs::create_directories(dir);
    return dir / name;
}

Matrix random_matrix(Index rows, Index cols, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1e3, 1e3);
    Matrix M(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) M(i, j) = dist(gen);
    return M;
}

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("binary matrix round trip is bit exact") {
    const Matrix M = random_matrix(17, 9, 5);
    const fs::path p = temp_file("roundtrip.bin");
    write_matrix(p, M);
    const Matrix back = read_matrix(p);
    REQUIRE(back.rows() == 17);
    REQUIRE(back.cols() == 9);
    CHECK((back.array() == M.array()).all());
}

TEST_CASE("binary writer is deterministic byte for byte") {
    const Matrix M = random_matrix(8, 3, 21);
    const fs::path a = temp_file("det_a.bin"), b = temp_file("det_b.bin");
    write_matrix(a, M);
    write_matrix(b, M);
    CHECK(file_bytes(a) == file_bytes(b));
}

TEST_CASE("degenerate shapes survive the round trip") {
    const fs::path p = temp_file("empty.bin");
    write_matrix(p, Matrix(6, 0));
    const Matrix back = read_matrix(p);
    CHECK(back.rows() == 6);
    CHECK(back.cols() == 0);

    write_matrix(p, Matrix(0, 0));
    CHECK(read_matrix(p).size() == 0);
}

TEST_CASE("special values round trip through the binary format") {
    Matrix M(2, 2);
    M << 0.0, -0.0, std::numeric_limits<double>::infinity(),
        std::numeric_limits<double>::denorm_min();
    const fs::path p = temp_file("special.bin");
    write_matrix(p, M);
    const Matrix back = read_matrix(p);
    CHECK((back.array() == M.array()).all());
    CHECK(std::signbit(back(0, 1)));
}

TEST_CASE("CSV round trip preserves doubles exactly") {
    Matrix M = random_matrix(5, 4, 9);
    M(0, 0) = 1.0 / 3.0;
    M(1, 1) = 1e-308;
    const fs::path p = temp_file("roundtrip.csv");
    write_matrix_csv(p, M);
    const Matrix back = read_matrix_csv(p);
    REQUIRE(back.rows() == M.rows());
    REQUIRE(back.cols() == M.cols());
    CHECK((back.array() == M.array()).all());
}

TEST_CASE("reader rejects missing and malformed files") {
    CHECK_THROWS(read_matrix(temp_file("does_not_exist.bin")));
    const fs::path p = temp_file("garbage.bin");
    std::ofstream(p) << "this is not a matrix container";
    CHECK_THROWS(read_matrix(p));
}
