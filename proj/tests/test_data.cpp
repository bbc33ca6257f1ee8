#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "xcsf/data.hpp"

using namespace xcsf;

namespace {

std::vector<std::uint8_t> idx_bytes(std::uint32_t count, std::uint32_t h, std::uint32_t w,
                                    const std::vector<std::uint8_t>& pixels) {
    std::vector<std::uint8_t> b = {0, 0, 8, 3};
    for (std::uint32_t v : {count, h, w}) {
        b.push_back(static_cast<std::uint8_t>(v >> 24));
        b.push_back(static_cast<std::uint8_t>(v >> 16));
        b.push_back(static_cast<std::uint8_t>(v >> 8));
        b.push_back(static_cast<std::uint8_t>(v));
    }
    b.insert(b.end(), pixels.begin(), pixels.end());
    return b;
}

}  // namespace

TEST_CASE("csv parsing and scaling") {
    SUBCASE("byte-valued data is divided by its maximum") {
        const Dataset ds = parse_csv("0,255\n128,0\n", false);
        CHECK(ds.rows == 2);
        CHECK(ds.n == 2);
        CHECK(ds.features[0] == 0.0);
        CHECK(ds.features[1] == 1.0);
        CHECK(std::abs(ds.features[2] - 128.0 / 255.0) < 1e-15);
    }
    SUBCASE("unit-range data is left alone") {
        const Dataset ds = parse_csv("0.25,0.5\n1,0\n", false);
        CHECK(ds.features == std::vector<double>{0.25, 0.5, 1.0, 0.0});
    }
    SUBCASE("negative data is min-max scaled") {
        const Dataset ds = parse_csv("-1,0\n1,3\n", false);
        CHECK(ds.features == std::vector<double>{0.0, 0.25, 0.5, 1.0});
    }
    SUBCASE("header and trailing label column are dropped") {
        const Dataset ds = parse_csv("a,b,label\n0.1,0.2,3\n0.3,0.4,7\n", true);
        CHECK(ds.rows == 2);
        CHECK(ds.n == 2);
        CHECK(ds.features == std::vector<double>{0.1, 0.2, 0.3, 0.4});
    }
    SUBCASE("windows line endings and blank trailing lines") {
        const Dataset ds = parse_csv("0.5,0.5\r\n0.25,0.75\r\n\r\n", false);
        CHECK(ds.rows == 2);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(parse_csv("", false), DataError);
        CHECK_THROWS_AS(parse_csv("a,b\n", false), DataError);
        CHECK_THROWS_AS(parse_csv("1,2\n3\n", false), DataError);
        CHECK_THROWS_AS(parse_csv("1,2\n3,x\n", false), DataError);
        CHECK_THROWS_AS(parse_csv("5\n6\n", true), DataError);  // nothing left after the label
        CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", false), DataError);
    }
    SUBCASE("error messages point at the offending line") {
        try {
            parse_csv("1,2\n3,4\n5,oops\n", false);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
}

TEST_CASE("idx parsing") {
    const Dataset ds = parse_idx(idx_bytes(2, 2, 2, {0, 51, 102, 255, 255, 0, 0, 0}));
    CHECK(ds.rows == 2);
    CHECK(ds.n == 4);
    CHECK(ds.features[1] == doctest::Approx(0.2));
    CHECK(ds.features[3] == 1.0);
    REQUIRE(ds.image_shape);
    CHECK(*ds.image_shape == ImageShape{2, 2, 1});

    CHECK_THROWS_AS(parse_idx(idx_bytes(2, 2, 2, {0, 1, 2})), DataError);
    auto bad_magic = idx_bytes(1, 1, 1, {7});
    bad_magic[3] = 9;
    CHECK_THROWS_AS(parse_idx(bad_magic), DataError);
    CHECK_THROWS_AS(parse_idx(std::vector<std::uint8_t>{0, 0, 8}), DataError);
}

TEST_CASE("load_dataset chooses format and checks the image shape") {
    const auto dir = std::filesystem::temp_directory_path() / "xcsf_data_test";
    std::filesystem::create_directories(dir);
    const auto csv = dir / "d.csv";
    std::ofstream(csv) << "0,0.5,1,0\n1,1,0,0\n";
    ExperimentConfig cfg;
    cfg.dataset = csv.string();
    cfg.image_shape = ImageShape{2, 2, 1};
    const Dataset ds = load_dataset(cfg);
    CHECK(ds.n == 4);
    CHECK(ds.image_shape == cfg.image_shape);
    cfg.image_shape = ImageShape{3, 3, 1};
    CHECK_THROWS_AS(load_dataset(cfg), DataError);

    const auto idx = dir / "d.idx";
    const auto bytes = idx_bytes(1, 2, 2, {0, 0, 0, 255});
    std::ofstream(idx, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    cfg.dataset = idx.string();
    cfg.image_shape.reset();
    const Dataset di = load_dataset(cfg);
    CHECK(di.rows == 1);
    CHECK(di.features[3] == 1.0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("train/validation split") {
    Dataset ds;
    ds.rows = 9298;
    ds.n = 1;
    ds.features.assign(ds.rows, 0.5);
    Rng rng(3);
    split(ds, 0.9, rng);
    CHECK(ds.train_idx.size() == 8368);
    CHECK(ds.valid_idx.size() == 930);
    std::set<std::size_t> all(ds.train_idx.begin(), ds.train_idx.end());
    all.insert(ds.valid_idx.begin(), ds.valid_idx.end());
    CHECK(all.size() == 9298);

    Dataset again = ds;
    Rng rng2(3);
    split(again, 0.9, rng2);
    CHECK(again.train_idx == ds.train_idx);

    Rng rng3(4);
    split(again, 1.0, rng3);
    CHECK(again.train_idx.size() == 9298);
    CHECK(again.valid_idx.empty());
}

TEST_CASE("salt-and-pepper noise") {
    Rng rng(5);
    const std::vector<double> x(784, 0.5);
    const auto y = salt_pepper(x, 0.1, rng);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] != x[i]) {
            ++changed;
            CHECK((y[i] == 0.0 || y[i] == 1.0));
        }
    }
    CHECK(changed == 78);
    CHECK(salt_pepper(x, 0.0, rng) == x);
    for (double v : salt_pepper(x, 1.0, rng)) CHECK((v == 0.0 || v == 1.0));
}

TEST_CASE("cutout") {
    const ImageShape shape{28, 28, 1};
    const std::vector<double> x(784, 0.7);
    const auto y = cutout_at(x, shape, 3, 5, 14, 14);
    CHECK(std::count(y.begin(), y.end(), 0.0) == 196);
    CHECK(y[3 * 28 + 5] == 0.0);
    CHECK(y[2 * 28 + 5] == 0.7);
    CHECK(y[3 * 28 + 19] == 0.7);
    CHECK(cutout_at(x, shape, 0, 0, 0, 10) == x);
    const auto all = cutout_at(x, shape, 0, 0, 28, 28);
    CHECK(std::count(all.begin(), all.end(), 0.0) == 784);

    SUBCASE("every channel is cut") {
        const ImageShape rgb{4, 4, 3};
        const std::vector<double> c(48, 1.0);
        const auto z = cutout_at(c, rgb, 1, 1, 2, 2);
        CHECK(std::count(z.begin(), z.end(), 0.0) == 12);
    }
    SUBCASE("random cutouts stay within the configured side range") {
        Rng rng(6);
        for (int i = 0; i < 200; ++i) {
            const auto z = cutout(x, shape, rng);
            const auto zeros = std::count(z.begin(), z.end(), 0.0);
            CHECK(zeros >= 7 * 7);
            CHECK(zeros <= 14 * 14);
        }
    }
    SUBCASE("requires an image shape") {
        Rng rng(7);
        CHECK_THROWS_AS(cutout(x, std::nullopt, rng), DataError);
    }
}
