#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <random>

#include "errors.hpp"
#include "image.hpp"
#include "oracles.hpp"

using namespace cred;

namespace {

std::string temp_path(const std::string& name) { return "img_" + name; }

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

}  // namespace

TEST_CASE("load_pgm maps bytes to values exactly") {
    const std::string path = temp_path("2x2.pgm");
    write_bytes(path, std::string("P5\n2 2\n255\n") + '\x00' + '\xff' + '\x80' + '\x40');
    const Image img = load_pgm(path);
    CHECK(img.width() == 2);
    CHECK(img.height() == 2);
    CHECK(img[0] == 0.0);
    CHECK(img[1] == 255.0);
    CHECK(img[2] == 128.0);
    CHECK(img[3] == 64.0);
    std::remove(path.c_str());
}

TEST_CASE("load_pgm handles header comments") {
    const std::string path = temp_path("comment.pgm");
    write_bytes(path, std::string("P5\n# a comment\n2 1\n255\n") + '\x05' + '\x06');
    const Image img = load_pgm(path);
    CHECK(img[0] == 5.0);
    CHECK(img[1] == 6.0);
    std::remove(path.c_str());
}

TEST_CASE("load_pgm rejects malformed inputs distinctly") {
    const std::string p2 = temp_path("ascii.pgm");
    write_bytes(p2, "P2\n2 2\n255\n0 1 2 3\n");
    CHECK_THROWS_WITH_AS(load_pgm(p2), doctest::Contains("P2"), ParseError);

    const std::string maxval = temp_path("maxval.pgm");
    write_bytes(maxval, std::string("P5\n2 2\n65535\n") + std::string(8, 'x'));
    CHECK_THROWS_WITH_AS(load_pgm(maxval), doctest::Contains("maxval"), ParseError);

    const std::string trunc = temp_path("trunc.pgm");
    write_bytes(trunc, std::string("P5\n4 4\n255\n") + std::string(7, 'x'));
    CHECK_THROWS_WITH_AS(load_pgm(trunc), doctest::Contains("truncated"), ParseError);

    const std::string garbage = temp_path("garbage.pgm");
    write_bytes(garbage, "not a pgm at all");
    CHECK_THROWS_AS(load_pgm(garbage), ParseError);

    CHECK_THROWS_AS(load_pgm("does_not_exist.pgm"), IoError);

    std::remove(p2.c_str());
    std::remove(maxval.c_str());
    std::remove(trunc.c_str());
    std::remove(garbage.c_str());
}

TEST_CASE("save_pgm clamps and rounds at write time only") {
    Image img(3, 1);
    img[0] = -3.2;
    img[1] = 254.6;
    img[2] = 128.0;
    const std::string path = temp_path("clamp.pgm");
    save_pgm(img, path);
    const Image back = load_pgm(path);
    CHECK(back[0] == 0.0);
    CHECK(back[1] == 255.0);
    CHECK(back[2] == 128.0);
    std::remove(path.c_str());
}

TEST_CASE("save/load round trip is the identity on integer images") {
    std::mt19937_64 gen(123);
    const std::string path = temp_path("roundtrip.pgm");
    const std::string path2 = temp_path("roundtrip2.pgm");
    for (int trial = 0; trial < 20; ++trial) {
        const int w = 1 + static_cast<int>(gen() % 40);
        const int h = 1 + static_cast<int>(gen() % 40);
        Image img(w, h);
        for (std::size_t i = 0; i < img.size(); ++i) {
            img[i] = static_cast<double>(gen() % 256);
        }
        save_pgm(img, path);
        const Image back = load_pgm(path);
        REQUIRE(back.same_shape(img));
        for (std::size_t i = 0; i < img.size(); ++i) REQUIRE(back[i] == img[i]);
        // byte-exact on re-save
        save_pgm(back, path2);
        REQUIRE(read_bytes(path) == read_bytes(path2));
    }
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("image construction enforces invariants") {
    CHECK_THROWS_AS(Image(2, 2, std::vector<double>{1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(Image(0, 4), std::invalid_argument);
    std::vector<double> bad{1.0, 2.0, std::nan(""), 4.0};
    CHECK_THROWS_AS(Image(2, 2, std::move(bad)), std::invalid_argument);
}

TEST_CASE("arithmetic basics") {
    const Image ones(4, 4, 1.0);
    CHECK(norm2(ones) == doctest::Approx(4.0).epsilon(1e-15));

    std::mt19937_64 gen(7);
    const Image x = oracle::random_image(8, 8, gen);
    CHECK(dot(x, x) == doctest::Approx(norm2(x) * norm2(x)).epsilon(1e-12));

    const Image z = sub(x, x);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(z[i] == 0.0);

    Image y = oracle::random_image(8, 8, gen);
    const Image s = add(x, y);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == x[i] + y[i]);

    Image acc = y;
    axpy(2.5, x, acc);
    for (std::size_t i = 0; i < acc.size(); ++i) CHECK(acc[i] == y[i] + 2.5 * x[i]);
}

TEST_CASE("dot is symmetric and norm2 is absolutely homogeneous") {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 25; ++trial) {
        const Image a = oracle::random_image(16, 16, gen, -100.0, 100.0);
        const Image b = oracle::random_image(16, 16, gen, -100.0, 100.0);
        CHECK(dot(a, b) == dot(b, a));
        const double c = -3.75;
        CHECK(norm2(scale(a, c)) ==
              doctest::Approx(std::abs(c) * norm2(a)).epsilon(1e-12));
    }
}

TEST_CASE("shape mismatch raises ShapeError") {
    const Image a(4, 4, 1.0);
    const Image b(4, 5, 1.0);
    CHECK_THROWS_AS((void)add(a, b), ShapeError);
    CHECK_THROWS_AS((void)dot(a, b), ShapeError);
}
