#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "endor/file_io.hpp"
#include "endor/weight_gen.hpp"
#include "test_helpers.hpp"

using namespace endor;
using endor::test::random_dense;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("endor_test_" + name);
}

EndorTensor tiny_tensor() {
    Bitmap b(4);
    b.set(0);
    b.set(2);
    std::vector<std::byte> values{std::byte{0x00}, std::byte{0x3C}, std::byte{0x00},
                                  std::byte{0x42}};
    return EndorTensor(2, 2, Dtype::F16, std::move(b), std::move(values));
}

} // namespace

TEST_CASE("endor container layout is byte-exact") {
    const auto data = encode_endor(tiny_tensor());
    // header 32 + bitmap 1 + values 4 + crc 4
    REQUIRE(data.size() == 41);
    REQUIRE(data.size() == endor_file_bytes(tiny_tensor()));

    const std::uint8_t golden[37] = {
        'E', 'N', 'D', 'R',         // magic
        0x01, 0x00,                 // version 1, little-endian
        0x00,                       // dtype f16
        0x00,                       // flags
        0x02, 0, 0, 0, 0, 0, 0, 0,  // rows
        0x02, 0, 0, 0, 0, 0, 0, 0,  // cols
        0x02, 0, 0, 0, 0, 0, 0, 0,  // nnz
        0x05,                       // bitmap 1010 -> LSB-first byte 0b101
        0x00, 0x3C, 0x00, 0x42,     // values
    };
    for (std::size_t i = 0; i < 37; ++i) {
        REQUIRE(std::to_integer<std::uint8_t>(data[i]) == golden[i]);
    }
}

TEST_CASE("all-zero 4x4 f16 file size follows the layout arithmetic") {
    const EndorTensor t(4, 4, Dtype::F16, Bitmap(16), {});
    // header 32 + bitmap 2 + values 0 + crc 4
    CHECK(endor_file_bytes(t) == 38);
    CHECK(encode_endor(t).size() == 38);
}

TEST_CASE("endor file round-trip, plain and quantized") {
    const auto path = temp_file("roundtrip.endor");
    std::mt19937_64 rng(8);
    for (int iter = 0; iter < 10; ++iter) {
        const Dtype dtype = rng() % 2 ? Dtype::F16 : Dtype::I8;
        const DenseMatrix w = random_dense(1 + rng() % 20, 1 + rng() % 20, dtype, rng(), 0.5);
        const EndorTensor t = compress(w);
        const std::uint64_t written = write_endor_file(t, path);
        CHECK(written == endor_file_bytes(t));
        const EndorTensor back = read_endor_file(path);
        REQUIRE(back.bitmap() == t.bitmap());
        REQUIRE(std::equal(back.values().begin(), back.values().end(), t.values().begin(),
                           t.values().end()));
        REQUIRE(decompress(back) == w);
        REQUIRE(back.quant_scale() == t.quant_scale());
    }

    // Quantized: scale and flag must survive.
    const DenseMatrix w = random_dense(8, 8, Dtype::F16, 19, 0.4);
    const EndorTensor q = quantize_values(compress(w));
    write_endor_file(q, path);
    const EndorTensor back = read_endor_file(path);
    REQUIRE(back.dtype() == Dtype::I8);
    REQUIRE(back.quant_scale() == q.quant_scale());
    REQUIRE(std::equal(back.values().begin(), back.values().end(), q.values().begin(),
                       q.values().end()));
    std::filesystem::remove(path);
}

TEST_CASE("negative-zero flag survives the container") {
    DenseMatrix w(1, 2, Dtype::F16);
    w.set_u16(0, 0x8000);
    w.set_u16(1, 0x3C00);
    const EndorTensor t = compress(w);
    REQUIRE(t.negative_zero_collapsed());
    const auto data = encode_endor(t);
    const EndorTensor back = decode_endor(data);
    CHECK(back.negative_zero_collapsed());
}

TEST_CASE("writes are deterministic") {
    const DenseMatrix w = random_dense(16, 16, Dtype::F16, 4, 0.5);
    const EndorTensor t = compress(w);
    CHECK(encode_endor(t) == encode_endor(t));
    CHECK(encode_dense(w) == encode_dense(w));
}

TEST_CASE("reader rejects each corruption kind distinctly") {
    const auto good = encode_endor(tiny_tensor());

    SECTION("bad magic") {
        auto bad = good;
        bad[0] = std::byte{'X'};
        try {
            decode_endor(bad);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.kind() == FormatError::Kind::BadMagic);
        }
    }
    SECTION("bad version") {
        auto bad = good;
        bad[4] = std::byte{9};
        try {
            decode_endor(bad);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.kind() == FormatError::Kind::BadVersion);
        }
    }
    SECTION("bad crc") {
        auto bad = good;
        bad[bad.size() - 1] ^= std::byte{0xFF};
        try {
            decode_endor(bad);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.kind() == FormatError::Kind::BadCrc);
        }
    }
    SECTION("count mismatch") {
        // Flip a bitmap bit and fix the CRC so only the nnz check fires.
        auto bad = good;
        bad[32] = std::byte{0x07}; // bitmap byte: 3 bits set, nnz says 2
        const std::uint32_t crc = detail::crc32_of(
            std::span<const std::byte>(bad).first(bad.size() - 4));
        for (int i = 0; i < 4; ++i) {
            bad[bad.size() - 4 + static_cast<std::size_t>(i)] =
                static_cast<std::byte>((crc >> (8 * i)) & 0xFF);
        }
        try {
            decode_endor(bad);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.kind() == FormatError::Kind::CountMismatch);
        }
    }
    SECTION("truncation") {
        auto bad = good;
        bad.pop_back();
        try {
            decode_endor(bad);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.kind() == FormatError::Kind::Truncated);
        }
    }
    SECTION("trailing garbage") {
        auto bad = good;
        bad.push_back(std::byte{0});
        try {
            decode_endor(bad);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.kind() == FormatError::Kind::Malformed);
        }
    }
}

TEST_CASE("every single-byte flip of a valid file is rejected") {
    const DenseMatrix w = random_dense(4, 6, Dtype::F16, 2, 0.5);
    const auto good = encode_endor(compress(w));
    for (std::size_t i = 0; i < good.size(); ++i) {
        auto bad = good;
        bad[i] ^= std::byte{0x5B};
        CHECK_THROWS_AS(decode_endor(bad), FormatError);
    }
}

TEST_CASE("dense container round-trip and corruption detection") {
    const auto path = temp_file("roundtrip.dense");
    const DenseMatrix w = random_dense(7, 9, Dtype::I8, 77, 0.3);
    const std::uint64_t written = write_dense_file(w, path);
    CHECK(written == dense_file_bytes(w));
    REQUIRE(read_dense_file(path) == w);
    std::filesystem::remove(path);

    auto data = encode_dense(w);
    data[10] ^= std::byte{1};
    CHECK_THROWS_AS(decode_dense(data), FormatError);

    // An .endor reader must not accept a .dense file, and vice versa.
    CHECK_THROWS_AS(decode_endor(encode_dense(w)), FormatError);
    CHECK_THROWS_AS(decode_dense(encode_endor(tiny_tensor())), FormatError);
}

TEST_CASE("bench_read reports one sample per repetition plus the median") {
    const auto path = temp_file("bench.dense");
    const DenseMatrix w = random_dense(64, 64, Dtype::F16, 5, 0.5);
    write_dense_file(w, path);

    const BenchReport r = bench_read(path, 3, false);
    CHECK(r.repetitions == 3);
    REQUIRE(r.sample_seconds.size() == 3);
    CHECK(r.bytes_read == dense_file_bytes(w));
    std::vector<double> sorted = r.sample_seconds;
    std::sort(sorted.begin(), sorted.end());
    CHECK(r.median_seconds == sorted[1]);
    CHECK(r.effective_bytes_per_second ==
          static_cast<double>(r.bytes_read) / r.median_seconds);
    CHECK_FALSE(r.cache_drop_attempted);

    CHECK_THROWS_AS(bench_read(path, 0, false), std::invalid_argument);
    std::filesystem::remove(path);
}
