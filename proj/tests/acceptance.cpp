// Acceptance suite: runs every acceptance criterion at its stated
// tolerance and prints one pass/fail line per criterion.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "endor/endor.hpp"

namespace fs = std::filesystem;
using namespace endor;

namespace {

int g_failures = 0;

struct Checker {
    std::ostringstream detail;
    bool ok = true;

    // value within +-tol (relative) of target
    void within(double value, double target, double tol, const char* label) {
        const bool pass = std::fabs(value - target) <= tol * target;
        ok &= pass;
        detail << (pass ? "" : " !!") << " " << label << "=" << value;
    }
    void require(bool cond, const char* label) {
        ok &= cond;
        if (!cond) detail << " !! " << label;
    }
};

void criterion(int number, const std::string& name, const std::function<void(Checker&)>& body) {
    Checker c;
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail << " exception: " << e.what();
    }
    if (!c.ok) ++g_failures;
    std::printf("[%s] criterion %d: %s —%s\n", c.ok ? "PASS" : "FAIL", number, name.c_str(),
                c.detail.str().c_str());
    std::fflush(stdout);
}

DenseMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, Dtype dtype,
                          double zero_fraction) {
    DenseMatrix w(rows, cols, dtype);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (std::size_t i = 0; i < w.element_count(); ++i) {
        if (coin(rng) < zero_fraction) continue;
        if (dtype == Dtype::F16) {
            std::uint16_t v;
            do {
                v = static_cast<std::uint16_t>(rng());
            } while ((v & 0x7FFFu) == 0);
            w.set_u16(i, v);
        } else {
            std::int8_t v;
            do {
                v = static_cast<std::int8_t>(rng());
            } while (v == 0);
            w.set_i8(i, v);
        }
    }
    return w;
}

} // namespace

int main() {
    const double tol = 0.10;

    criterion(1, "compression ratio exactness", [&](Checker& c) {
        c.require(compression_ratio(Dtype::F16, 0.5) == 0.5625, "f16@50% == 0.5625");
        c.require(compression_ratio(Dtype::I8, 0.5) == 0.625, "i8@50% == 0.625");
        const std::uint64_t rows = 9216, cols = 36864;
        c.require(endor_values_bytes(Dtype::F16, rows * cols / 2) == 339738624ull,
                  "values bytes == 339738624");
        c.require(endor_bitmap_bytes(rows, cols) == 42467328ull, "bitmap bytes == 42467328");
        c.require(rows * cols * 2 == 679477248ull, "dense bytes == 679477248");
        c.detail << " f16=" << compression_ratio(Dtype::F16, 0.5)
                 << " i8=" << compression_ratio(Dtype::I8, 0.5);
    });

    criterion(2, "CSR null compression at 50% f16 with 16-bit indices", [&](Checker& c) {
        const double r = csr_size_ratio(Dtype::F16, 0.5, CsrIndexWidth::Bits16);
        c.require(r == 1.0, "ratio == 1.0");
        c.detail << " ratio=" << r;
    });

    criterion(3, "1000-case round-trip / chunked / extraction suite", [&](Checker& c) {
        std::mt19937_64 rng(20240521);
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        int failures = 0;
        for (int iter = 0; iter < 1000 && failures == 0; ++iter) {
            const std::size_t rows = 1 + rng() % (iter % 50 == 0 ? 160 : 48);
            const std::size_t cols = 1 + rng() % (iter % 50 == 0 ? 160 : 48);
            const Dtype dtype = rng() % 2 ? Dtype::F16 : Dtype::I8;
            const double zeros = static_cast<double>(rng() % 101) / 100.0;
            const DenseMatrix w = random_matrix(rng, rows, cols, dtype, zeros);

            const EndorTensor t = compress(w);
            const DenseMatrix full = decompress(t);
            if (!(full == w)) {
                ++failures;
                c.detail << " round-trip failed at iter " << iter;
                break;
            }

            const std::uint64_t chunk = 64ull << (rng() % 7); // 64 .. 4096
            const RankIndex idx = build_rank_index(t.bitmap(), chunk);
            if (!(decompress_chunked(t, idx) == full)) {
                ++failures;
                c.detail << " chunked mismatch at iter " << iter;
                break;
            }

            std::vector<std::size_t> rsel, csel;
            for (std::size_t r = 0; r < rows; ++r) {
                if (coin(rng) < 0.5) rsel.push_back(r);
            }
            for (std::size_t col = 0; col < cols; ++col) {
                if (coin(rng) < 0.5) csel.push_back(col);
            }
            const std::size_t eb = w.elem_size();
            const DenseMatrix gr = extract_rows(t, rsel);
            for (std::size_t r = 0; r < rsel.size(); ++r) {
                if (std::memcmp(gr.bytes().data() + r * cols * eb,
                                full.bytes().data() + rsel[r] * cols * eb, cols * eb) != 0) {
                    ++failures;
                    c.detail << " row extraction mismatch at iter " << iter;
                    break;
                }
            }
            const DenseMatrix gc = extract_cols(t, csel);
            for (std::size_t r = 0; r < rows && failures == 0; ++r) {
                for (std::size_t j = 0; j < csel.size(); ++j) {
                    if (std::memcmp(gc.bytes().data() + (r * csel.size() + j) * eb,
                                    full.bytes().data() + (r * cols + csel[j]) * eb, eb) != 0) {
                        ++failures;
                        c.detail << " column extraction mismatch at iter " << iter;
                        break;
                    }
                }
            }
        }
        c.require(failures == 0, "zero failures over 1000 cases");
        if (failures == 0) c.detail << " 1000 cases clean";
    });

    criterion(4, "simulator reproduction, opt-66b default profile", [&](Checker& c) {
        const ModelSpec spec = model_catalog("opt-66b");
        const BandwidthProfile p = calibrate_default_profile();
        const DeviceMap map = DeviceMap::prefix(5, 8, 51);

        const PassReport dense = simulate_pass(spec, map, ExecMode::DenseBaseline, p, 0.5);
        const PassReport endor = simulate_pass(spec, map, ExecMode::Endor, p, 0.5);
        const PassReport direct = simulate_pass(spec, map, ExecMode::EndorDirect, p, 0.5);
        c.within(dense.total_seconds, 54.0, tol, "dense_s");
        c.within(endor.total_seconds, 35.8, tol, "endor_s");
        c.within(endor.speedup_vs(dense), 1.51, tol, "endor_x");
        c.within(direct.total_seconds, 24.2, tol, "direct_s");
        c.within(direct.speedup_vs(dense), 2.23, tol, "direct_x");

        const std::size_t cpu14 = remap_cpu_layers(spec, 8, compression_ratio(Dtype::F16, 0.5));
        c.require(cpu14 == 14, "remap gives 14 CPU layers");
        const PassReport remap =
            simulate_pass(spec, DeviceMap::prefix(5, cpu14, 64 - 5 - cpu14), ExecMode::Endor, p, 0.5);
        c.within(remap.speedup_vs(dense), 1.70, tol, "remap14_x");

        const OpShape& fc = find_op(spec, "fc1");
        const double fc_dense = simulate_op(fc, Placement::SSD, ExecMode::DenseBaseline, p, 0.5).total();
        const double fc_endor = simulate_op(fc, Placement::SSD, ExecMode::Endor, p, 0.5).total();
        c.within(fc_dense / fc_endor, 1.67, tol, "fc_op_x");

        c.within(dense.region(Placement::SSD) / endor.region(Placement::SSD), 1.64, tol, "ssd_region_x");
        c.within(dense.region(Placement::CPU) / endor.region(Placement::CPU), 1.30, tol, "cpu_region_x");

        // Per-layer: an SSD-mapped layer with direct transfer vs dense.
        const double dense_layer = dense.layers[20].seconds;
        const double direct_layer = direct.layers[20].seconds;
        c.within(dense_layer / direct_layer, 2.03, tol, "layer_direct_x");

        const OpShape fc8{"fc1", fc.rows, fc.cols, Dtype::I8};
        const double fc8_dense =
            simulate_op(fc8, Placement::SSD, ExecMode::DenseBaseline, p, 0.5).total();
        const double fc8_endor = simulate_op(fc8, Placement::SSD, ExecMode::Endor, p, 0.5).total();
        c.within(fc8_dense / fc8_endor, 1.48, tol, "int8_op_x");
        const auto [q_dense, q_endor] = quantized_pass(spec, map, p);
        c.require(q_endor.total_seconds < q_dense.total_seconds, "quantized pass speeds up");
    });

    criterion(5, "simulator reproduction, llama2-70b profile", [&](Checker& c) {
        const ModelSpec spec = model_catalog("llama2-70b");
        const BandwidthProfile p = calibrate_llama_profile();
        const DeviceMap map = DeviceMap::prefix(6, 10, 64);

        const PassReport dense = simulate_pass(spec, map, ExecMode::DenseBaseline, p, 0.5);
        const PassReport endor = simulate_pass(spec, map, ExecMode::Endor, p, 0.5);
        const PassReport direct = simulate_pass(spec, map, ExecMode::EndorDirect, p, 0.5);
        c.within(dense.total_seconds, 57.0, tol, "dense_s");
        c.within(endor.total_seconds, 35.2, tol, "endor_s");
        c.within(endor.speedup_vs(dense), 1.62, tol, "endor_x");
        c.within(direct.total_seconds, 27.0, tol, "direct_s");
        c.within(direct.speedup_vs(dense), 2.11, tol, "direct_x");

        // The 20-CPU-layer map, used verbatim.
        const DeviceMap remap = DeviceMap::prefix(6, 20, 54);
        const PassReport r_endor = simulate_pass(spec, remap, ExecMode::Endor, p, 0.5);
        const PassReport r_direct = simulate_pass(spec, remap, ExecMode::EndorDirect, p, 0.5);
        c.within(r_endor.total_seconds, 32.0, tol, "remap20_s");
        c.within(r_endor.speedup_vs(dense), 1.78, tol, "remap20_x");
        c.within(r_direct.total_seconds, 24.0, tol, "remap20_direct_s");
        c.within(r_direct.speedup_vs(dense), 2.37, tol, "remap20_direct_x");
    });

    criterion(6, "mode ordering across all catalog shapes", [&](Checker& c) {
        const BandwidthProfile p = calibrate_default_profile();
        int checked = 0;
        for (const char* model : {"opt-66b", "llama2-70b"}) {
            for (const auto& op : model_catalog(model).ops_per_layer) {
                const double direct =
                    simulate_op(op, Placement::SSD, ExecMode::EndorDirect, p, 0.5).total();
                const double endor =
                    simulate_op(op, Placement::SSD, ExecMode::Endor, p, 0.5).total();
                const double dense =
                    simulate_op(op, Placement::SSD, ExecMode::DenseBaseline, p, 0.5).total();
                const double cpu =
                    simulate_op(op, Placement::SSD, ExecMode::EndorCpuDecomp, p, 0.5).total();
                c.require(direct < endor, "direct < endor");
                c.require(endor < dense, "endor < dense");
                c.require(cpu > endor, "cpu-decomp > endor");
                ++checked;
            }
        }
        c.detail << " " << checked << " shapes ordered";
    });

    criterion(7, "pruning validity", [&](Checker& c) {
        std::mt19937_64 rng(77);
        // 10,000 random rows of 64 elements, 2:4 structured.
        const DenseMatrix w = random_matrix(rng, 10000, 64, Dtype::F16, 0.0);
        const DenseMatrix p = nm_prune(w, 2, 4);
        bool groups_ok = true;
        for (std::size_t r = 0; r < 10000 && groups_ok; ++r) {
            for (std::size_t g = 0; g < 64; g += 4) {
                int nz = 0;
                for (std::size_t col = g; col < g + 4; ++col) nz += !p.is_zero(r * 64 + col);
                if (nz > 2) {
                    groups_ok = false;
                    break;
                }
            }
        }
        c.require(groups_ok, "every 2:4 group has <= 2 non-zeros");

        bool counts_ok = true;
        for (double s : {0.1, 0.37, 0.5, 0.9}) {
            const DenseMatrix m = random_matrix(rng, 127, 61, Dtype::F16, 0.0);
            const DenseMatrix pr = magnitude_prune(m, s);
            std::size_t zeros = 0;
            for (std::size_t i = 0; i < pr.element_count(); ++i) zeros += pr.is_zero(i);
            counts_ok &= zeros == static_cast<std::size_t>(s * 127 * 61);
        }
        c.require(counts_ok, "magnitude prune hits exact target counts");
    });

    criterion(8, "file format robustness", [&](Checker& c) {
        // ~1 KiB container: 24x36 f16 at 50% -> 32 + 108 + 864 + 4 bytes.
        std::mt19937_64 rng(8);
        DenseMatrix w = random_matrix(rng, 24, 36, Dtype::F16, 0.0);
        w = magnitude_prune(w, 0.5);
        const EndorTensor t = compress(w);
        const std::vector<std::byte> good = encode_endor(t);
        c.detail << " file=" << good.size() << "B";
        c.require(good.size() >= 1000 && good.size() <= 1100, "test file is ~1 KiB");

        const fs::path dir = fs::temp_directory_path() / "endor_acceptance";
        fs::create_directories(dir);
        const fs::path f = dir / "corrupt.endor";

        // Double write is byte-identical.
        const fs::path f2 = dir / "again.endor";
        write_endor_file(t, f);
        write_endor_file(t, f2);
        c.require(detail::read_all(f) == detail::read_all(f2), "double write identical");

        std::size_t undetected = 0;
        for (std::size_t pos = 0; pos < good.size(); ++pos) {
            for (const std::uint8_t pattern : {0x01, 0x80, 0xFF}) {
                std::vector<std::byte> bad = good;
                bad[pos] ^= std::byte{pattern};
                detail::write_all(f, bad);
                try {
                    (void)read_endor_file(f);
                    ++undetected;
                } catch (const FormatError&) {
                    // rejected, as required
                }
            }
        }
        c.require(undetected == 0, "all single-byte corruptions detected");
        c.detail << " " << good.size() * 3 << " corruptions tried";
        fs::remove_all(dir);
    });

    criterion(9, "cold-cache read of compressed beats dense (>= 256 MiB)", [&](Checker& c) {
        const fs::path dir = fs::temp_directory_path() / "endor_acceptance_io";
        fs::create_directories(dir);
        const fs::path dense_f = dir / "big.dense";
        const fs::path endor_f = dir / "big.endor";
        {
            // 8192 x 16384 f16 = 256 MiB dense, 2:4-pruned to exactly 50%.
            const OpShape shape{"big", 8192, 16384, Dtype::F16};
            DenseMatrix w = nm_prune(synth_weight(shape, 1), 2, 4);
            write_dense_file(w, dense_f);
            write_endor_file(compress(w), endor_f);
        }
        const std::uint64_t db = fs::file_size(dense_f);
        const std::uint64_t eb = fs::file_size(endor_f);
        c.require(db >= 256ull * 1024 * 1024, "dense file >= 256 MiB");
        c.require(eb < db, "compressed file smaller");

        const BenchReport dense_r = bench_read(dense_f, 3, true);
        const BenchReport endor_r = bench_read(endor_f, 3, true);
        c.detail << " dense=" << dense_r.median_seconds << "s endor=" << endor_r.median_seconds
                 << "s drop=" << (dense_r.cache_drop_attempted ? "yes" : "no");
        c.require(endor_r.median_seconds < dense_r.median_seconds,
                  "compressed read is faster");
        fs::remove_all(dir);
    });

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria FAILED\n", g_failures);
    return 1;
}
