// endor: sparse weight codec, benchmark and offload-simulator CLI.

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "endor/config_json.hpp"
#include "endor/endor.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

endor::Dtype parse_dtype(const std::string& s) {
    if (s == "f16") return endor::Dtype::F16;
    if (s == "i8") return endor::Dtype::I8;
    throw endor::ConfigError("unknown dtype: " + s + " (expected f16 or i8)");
}

endor::ExecMode parse_mode(const std::string& s) {
    if (s == "dense") return endor::ExecMode::DenseBaseline;
    if (s == "endor") return endor::ExecMode::Endor;
    if (s == "endor-direct") return endor::ExecMode::EndorDirect;
    if (s == "endor-cpu") return endor::ExecMode::EndorCpuDecomp;
    if (s == "zstd-cpu") return endor::ExecMode::ZstdCpu;
    throw endor::ConfigError(
        "unknown mode: " + s +
        " (expected dense, endor, endor-direct, endor-cpu or zstd-cpu)");
}

// "5,8,51" -> GPU/CPU/SSD prefix map.
endor::DeviceMap parse_map_counts(const std::string& s) {
    std::vector<std::size_t> counts;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t comma = s.find(',', pos);
        const std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        try {
            counts.push_back(std::stoull(tok));
        } catch (const std::exception&) {
            throw endor::ConfigError("bad device map: " + s + " (expected GPU,CPU,SSD counts)");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (counts.size() != 3) {
        throw endor::ConfigError("bad device map: " + s + " (expected three counts)");
    }
    return endor::DeviceMap::prefix(counts[0], counts[1], counts[2]);
}

// --profile accepts "default", "llama", or a path to a JSON profile.
// ENDOR_PROFILE overrides the built-in default.
endor::BandwidthProfile resolve_profile(const std::string& name) {
    if (name == "default") {
        if (const char* env = std::getenv("ENDOR_PROFILE"); env && *env) {
            return endor::load_profile_file(env);
        }
        return endor::calibrate_default_profile();
    }
    if (name == "llama" || name == "llama2-70b") return endor::calibrate_llama_profile();
    return endor::load_profile_file(name);
}

struct GenOptions {
    std::string model;
    std::string layer_op;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string dtype = "f16";
    std::uint64_t seed = 0;
    double sparsity = 0.0;
    std::string nm; // "N:M"
    std::string out;
};

endor::OpShape resolve_shape(const GenOptions& o) {
    if (!o.model.empty()) {
        if (o.layer_op.empty()) {
            throw endor::ConfigError("--model requires --layer-op");
        }
        return endor::find_op(endor::model_catalog(o.model), o.layer_op);
    }
    if (o.rows == 0 || o.cols == 0) {
        throw endor::ConfigError("either --model/--layer-op or --rows/--cols is required");
    }
    return endor::OpShape{"custom", o.rows, o.cols, parse_dtype(o.dtype)};
}

std::pair<std::size_t, std::size_t> parse_nm(const std::string& s) {
    const std::size_t colon = s.find(':');
    if (colon == std::string::npos) {
        throw endor::ConfigError("bad N:M argument: " + s);
    }
    try {
        return {std::stoull(s.substr(0, colon)), std::stoull(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw endor::ConfigError("bad N:M argument: " + s);
    }
}

endor::DenseMatrix apply_pruning(endor::DenseMatrix w, double sparsity, const std::string& nm) {
    if (!nm.empty()) {
        const auto [n, m] = parse_nm(nm);
        return endor::nm_prune(w, n, m);
    }
    if (sparsity > 0.0) return endor::magnitude_prune(w, sparsity);
    return w;
}

int cmd_gen(const GenOptions& o) {
    const endor::OpShape shape = resolve_shape(o);
    endor::DenseMatrix w = apply_pruning(endor::synth_weight(shape, o.seed), o.sparsity, o.nm);
    const std::uint64_t bytes = endor::write_dense_file(w, o.out);
    json j{{"op", shape.name},
           {"rows", w.rows()},
           {"cols", w.cols()},
           {"dtype", endor::dtype_name(w.dtype())},
           {"seed", o.seed},
           {"sparsity", endor::measure_sparsity(w)},
           {"file", o.out},
           {"file_bytes", bytes}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_prune(const std::string& in, const std::string& out, const std::string& method,
              double sparsity, std::size_t n, std::size_t m) {
    endor::DenseMatrix w = endor::read_dense_file(in);
    if (method == "magnitude") {
        w = endor::magnitude_prune(w, sparsity);
    } else if (method == "nm") {
        w = endor::nm_prune(w, n, m);
    } else {
        throw endor::ConfigError("unknown prune method: " + method);
    }
    endor::write_dense_file(w, out);
    json j{{"file", out}, {"sparsity", endor::measure_sparsity(w)}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_compress(const std::string& in, const std::string& out, bool quantize) {
    const endor::DenseMatrix w = endor::read_dense_file(in);
    endor::EndorTensor t = endor::compress(w);
    if (quantize) t = endor::quantize_values(t);
    const std::uint64_t bytes = endor::write_endor_file(t, out);
    const std::uint64_t dense_bytes = endor::dense_file_bytes(w);
    json j{{"file", out},
           {"rows", t.rows()},
           {"cols", t.cols()},
           {"dtype", endor::dtype_name(t.dtype())},
           {"nnz", t.nnz()},
           {"values_bytes", t.values_bytes()},
           {"bitmap_bytes", t.bitmap_bytes()},
           {"file_bytes", bytes},
           {"ratio_vs_dense_file", static_cast<double>(bytes) / static_cast<double>(dense_bytes)}};
    if (t.quant_scale()) j["quant_scale"] = *t.quant_scale();
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_decompress(const std::string& in, const std::string& out, bool dequantize) {
    endor::EndorTensor t = endor::read_endor_file(in);
    if (dequantize) t = endor::dequantize_values(t);
    const endor::DenseMatrix w = endor::decompress(t);
    const std::uint64_t bytes = endor::write_dense_file(w, out);
    json j{{"file", out}, {"file_bytes", bytes}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

json inspect_json(const std::string& path) {
    const auto data = endor::detail::read_all(path);
    if (data.size() >= 4 && std::memcmp(data.data(), endor::kEndorMagic, 4) == 0) {
        const endor::EndorTensor t = endor::decode_endor(data);
        const std::uint64_t n = t.element_count();
        json j{{"file", path},
               {"container", "endor"},
               {"rows", t.rows()},
               {"cols", t.cols()},
               {"dtype", endor::dtype_name(t.dtype())},
               {"nnz", t.nnz()},
               {"sparsity", n ? 1.0 - static_cast<double>(t.nnz()) / static_cast<double>(n) : 0.0},
               {"values_bytes", t.values_bytes()},
               {"bitmap_bytes", t.bitmap_bytes()},
               {"file_bytes", data.size()},
               {"ratio_vs_dense", static_cast<double>(t.compressed_bytes()) /
                                      static_cast<double>(t.dense_bytes())},
               {"negative_zero_collapsed", t.negative_zero_collapsed()}};
        if (t.quant_scale()) j["quant_scale"] = *t.quant_scale();
        return j;
    }
    const endor::DenseMatrix w = endor::decode_dense(data);
    return json{{"file", path},
                {"container", "dense"},
                {"rows", w.rows()},
                {"cols", w.cols()},
                {"dtype", endor::dtype_name(w.dtype())},
                {"sparsity", endor::measure_sparsity(w)},
                {"file_bytes", data.size()}};
}

int cmd_verify(const std::string& path) {
    try {
        const auto data = endor::detail::read_all(path);
        if (data.size() >= 4 && std::memcmp(data.data(), endor::kDenseMagic, 4) == 0) {
            (void)endor::decode_dense(data);
        } else {
            (void)endor::decode_endor(data);
        }
    } catch (const endor::FormatError& e) {
        std::cerr << "verify failed: " << path << ": " << e.what() << "\n";
        return 1;
    }
    std::cout << "OK " << path << "\n";
    return 0;
}

int cmd_bench(const std::vector<std::string>& files, std::size_t reps, bool drop_cache) {
    for (const auto& f : files) {
        const endor::BenchReport r = endor::bench_read(f, reps, drop_cache);
        std::cout << endor::to_json(r).dump(2) << "\n";
    }
    return 0;
}

struct SimulateOptions {
    std::string model = "opt-66b";
    std::string map;
    std::string map_file;
    std::string mode = "endor";
    std::string profile = "default";
    double sparsity = 0.5;
    std::string config;
    bool json_out = false;
    bool per_layer = false;
    bool per_op = false;
};

int cmd_simulate(SimulateOptions o) {
    std::optional<endor::BandwidthProfile> inline_profile;
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        if (!in) throw endor::ConfigError("cannot open config " + o.config);
        json cfg;
        try {
            in >> cfg;
        } catch (const json::exception& e) {
            throw endor::ConfigError("cannot parse config " + o.config + ": " + e.what());
        }
        o.model = cfg.value("model", o.model);
        o.map = cfg.value("map", o.map);
        o.mode = cfg.value("mode", o.mode);
        o.sparsity = cfg.value("sparsity", o.sparsity);
        if (cfg.contains("profile")) {
            if (cfg["profile"].is_string()) {
                o.profile = cfg["profile"].get<std::string>();
            } else {
                inline_profile = endor::profile_from_json(cfg["profile"]);
            }
        }
    }

    const endor::ModelSpec spec = endor::model_catalog(o.model);
    const endor::BandwidthProfile p =
        inline_profile ? *inline_profile : resolve_profile(o.profile);

    endor::DeviceMap map;
    if (!o.map_file.empty()) {
        std::ifstream in(o.map_file);
        if (!in) throw endor::ConfigError("cannot open map file " + o.map_file);
        json jm;
        in >> jm;
        map = endor::device_map_from_json(jm);
    } else if (!o.map.empty()) {
        map = parse_map_counts(o.map);
    } else {
        map = endor::default_device_map(spec);
    }

    const endor::ExecMode mode = parse_mode(o.mode);
    const endor::PassReport dense =
        endor::simulate_pass(spec, map, endor::ExecMode::DenseBaseline, p, o.sparsity);
    const endor::PassReport r = endor::simulate_pass(spec, map, mode, p, o.sparsity);

    json j = endor::to_json(r, o.per_layer, o.per_op);
    j["map"] = {{"gpu", map.count(endor::Placement::GPU)},
                {"cpu", map.count(endor::Placement::CPU)},
                {"ssd", map.count(endor::Placement::SSD)}};
    j["speedup_vs_dense"] = r.speedup_vs(dense);
    j["dense_total_seconds"] = dense.total_seconds;
    j["profile"] = endor::to_json(p);

    if (o.json_out) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "model:       " << r.model_name << "\n"
                  << "mode:        " << endor::exec_mode_name(r.mode) << "\n"
                  << "map:         " << map.count(endor::Placement::GPU) << " gpu / "
                  << map.count(endor::Placement::CPU) << " cpu / "
                  << map.count(endor::Placement::SSD) << " ssd\n"
                  << "sparsity:    " << r.sparsity << "\n"
                  << "total:       " << r.total_seconds << " s\n"
                  << "  gpu region " << r.region(endor::Placement::GPU) << " s\n"
                  << "  cpu region " << r.region(endor::Placement::CPU) << " s\n"
                  << "  ssd region " << r.region(endor::Placement::SSD) << " s\n"
                  << "dense total: " << dense.total_seconds << " s\n"
                  << "speedup:     " << r.speedup_vs(dense) << "x\n";
    }
    return 0;
}

int cmd_compare(const GenOptions& o, bool json_out) {
    const endor::OpShape shape = resolve_shape(o);
    const endor::DenseMatrix w =
        apply_pruning(endor::synth_weight(shape, o.seed), o.sparsity, o.nm);
    const double sparsity = endor::measure_sparsity(w);
    const double dense_bytes = static_cast<double>(w.size_bytes());

    json rows = json::array();
    rows.push_back({{"format", "dense"},
                    {"bytes", w.size_bytes()},
                    {"ratio", 1.0}});

    {
        const auto t0 = std::chrono::steady_clock::now();
        const endor::EndorTensor t = endor::compress(w);
        const auto t1 = std::chrono::steady_clock::now();
        const endor::DenseMatrix back = endor::decompress(t);
        const auto t2 = std::chrono::steady_clock::now();
        if (back != w) throw endor::CorruptionError("endor round trip mismatch");
        rows.push_back({{"format", "endor"},
                        {"bytes", t.compressed_bytes()},
                        {"ratio", static_cast<double>(t.compressed_bytes()) / dense_bytes},
                        {"compress_seconds", std::chrono::duration<double>(t1 - t0).count()},
                        {"decompress_seconds", std::chrono::duration<double>(t2 - t1).count()}});
    }

    for (const auto width : {endor::CsrIndexWidth::Bits16, endor::CsrIndexWidth::Bits32}) {
        if (width == endor::CsrIndexWidth::Bits16 && w.cols() > 65536) continue;
        const auto t0 = std::chrono::steady_clock::now();
        const endor::CsrTensor t = endor::csr_compress(w, width);
        const auto t1 = std::chrono::steady_clock::now();
        const endor::DenseMatrix back = endor::csr_decompress(t);
        const auto t2 = std::chrono::steady_clock::now();
        if (back != w) throw endor::CorruptionError("csr round trip mismatch");
        rows.push_back(
            {{"format", width == endor::CsrIndexWidth::Bits16 ? "csr16" : "csr32"},
             {"bytes", t.payload_bytes()},
             {"ratio", static_cast<double>(t.payload_bytes()) / dense_bytes},
             {"compress_seconds", std::chrono::duration<double>(t1 - t0).count()},
             {"decompress_seconds", std::chrono::duration<double>(t2 - t1).count()}});
    }

    {
        const endor::ZlibCodec codec;
        const endor::ByteCodecReport r = endor::byte_codec_roundtrip(w.bytes(), codec);
        rows.push_back({{"format", r.codec_name},
                        {"bytes", r.output_bytes},
                        {"ratio", r.ratio()},
                        {"compress_seconds", r.compress_seconds},
                        {"decompress_seconds", r.decompress_seconds}});
    }

    json j{{"rows", w.rows()},
           {"cols", w.cols()},
           {"dtype", endor::dtype_name(w.dtype())},
           {"sparsity", sparsity},
           {"theoretical_endor_ratio", endor::compression_ratio(w.dtype(), sparsity)},
           {"formats", rows}};
    if (json_out) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << w.rows() << "x" << w.cols() << " " << endor::dtype_name(w.dtype())
                  << ", sparsity " << sparsity << "\n";
        for (const auto& row : rows) {
            std::cout << "  " << row["format"].get<std::string>() << ": "
                      << row["bytes"].get<std::uint64_t>() << " bytes (ratio "
                      << row["ratio"].get<double>() << ")";
            if (row.contains("decompress_seconds")) {
                std::cout << ", decompress " << row["decompress_seconds"].get<double>() << " s";
            }
            std::cout << "\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Endor sparse weight format: codec, benchmarks and offload simulator"};
    app.require_subcommand(1);

    GenOptions gen;
    auto* sc_gen = app.add_subcommand("gen", "generate a synthetic (optionally pruned) weight");
    sc_gen->add_option("--model", gen.model, "model catalog name (opt-66b, llama2-70b)");
    sc_gen->add_option("--layer-op", gen.layer_op, "operation name, e.g. fc1 or attn.q_proj");
    sc_gen->add_option("--rows", gen.rows, "rows of a custom shape");
    sc_gen->add_option("--cols", gen.cols, "cols of a custom shape");
    sc_gen->add_option("--dtype", gen.dtype, "f16 or i8 (custom shapes)");
    sc_gen->add_option("--seed", gen.seed, "PRNG seed");
    sc_gen->add_option("--sparsity", gen.sparsity, "magnitude-prune to this sparsity");
    sc_gen->add_option("--nm", gen.nm, "N:M structured pruning instead, e.g. 2:4");
    sc_gen->add_option("--out", gen.out, "output .dense file")->required();

    std::string prune_in, prune_out, prune_method = "magnitude";
    double prune_sparsity = 0.5;
    std::size_t prune_n = 2, prune_m = 4;
    auto* sc_prune = app.add_subcommand("prune", "prune an existing .dense weight");
    sc_prune->add_option("in", prune_in)->required();
    sc_prune->add_option("out", prune_out)->required();
    sc_prune->add_option("--method", prune_method, "magnitude or nm");
    sc_prune->add_option("--sparsity", prune_sparsity, "target sparsity (magnitude)");
    sc_prune->add_option("--n", prune_n, "N (nm)");
    sc_prune->add_option("--m", prune_m, "M (nm)");

    std::string comp_in, comp_out;
    bool comp_quantize = false;
    auto* sc_comp = app.add_subcommand("compress", "compress a .dense file to .endor");
    sc_comp->add_option("in", comp_in)->required();
    sc_comp->add_option("out", comp_out)->required();
    sc_comp->add_flag("--quantize", comp_quantize, "also quantize values to int8");

    std::string dec_in, dec_out;
    bool dec_dequantize = false;
    auto* sc_dec = app.add_subcommand("decompress", "expand an .endor file to .dense");
    sc_dec->add_option("in", dec_in)->required();
    sc_dec->add_option("out", dec_out)->required();
    sc_dec->add_flag("--dequantize", dec_dequantize, "map int8 values back to f16 first");

    std::string inspect_path;
    auto* sc_inspect = app.add_subcommand("inspect", "print container metadata");
    sc_inspect->add_option("file", inspect_path)->required();

    std::string verify_path;
    auto* sc_verify = app.add_subcommand("verify", "validate container integrity");
    sc_verify->add_option("file", verify_path)->required();

    std::vector<std::string> bench_files;
    std::size_t bench_reps = 3;
    bool bench_drop = false;
    auto* sc_bench = app.add_subcommand("bench", "time sequential reads of files");
    sc_bench->add_option("files", bench_files)->required();
    sc_bench->add_option("--reps", bench_reps, "repetitions per file");
    sc_bench->add_flag("--drop-cache", bench_drop, "ask the OS to evict the file first");

    SimulateOptions sim;
    auto* sc_sim = app.add_subcommand("simulate", "simulate a single offloaded inference pass");
    sc_sim->add_option("--model", sim.model, "model catalog name");
    sc_sim->add_option("--map", sim.map, "GPU,CPU,SSD layer counts, e.g. 5,8,51");
    sc_sim->add_option("--map-file", sim.map_file, "JSON array of per-layer placements");
    sc_sim->add_option("--mode", sim.mode,
                       "dense, endor, endor-direct, endor-cpu or zstd-cpu");
    sc_sim->add_option("--profile", sim.profile, "default, llama, or a JSON profile path");
    sc_sim->add_option("--sparsity", sim.sparsity, "weight sparsity");
    sc_sim->add_option("--config", sim.config, "JSON config document with the options above");
    sc_sim->add_flag("--json", sim.json_out, "emit the full JSON report");
    sc_sim->add_flag("--per-layer", sim.per_layer, "include per-layer timings (JSON)");
    sc_sim->add_flag("--per-op", sim.per_op, "include per-op segment timelines (JSON)");

    GenOptions cmp;
    cmp.sparsity = 0.5;
    bool cmp_json = false;
    auto* sc_cmp = app.add_subcommand("compare",
                                      "size/time table: endor vs CSR vs byte compressor");
    sc_cmp->add_option("--model", cmp.model);
    sc_cmp->add_option("--layer-op", cmp.layer_op);
    sc_cmp->add_option("--rows", cmp.rows);
    sc_cmp->add_option("--cols", cmp.cols);
    sc_cmp->add_option("--dtype", cmp.dtype);
    sc_cmp->add_option("--seed", cmp.seed);
    sc_cmp->add_option("--sparsity", cmp.sparsity);
    sc_cmp->add_option("--nm", cmp.nm);
    sc_cmp->add_flag("--json", cmp_json);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sc_gen->parsed()) return cmd_gen(gen);
        if (sc_prune->parsed()) {
            return cmd_prune(prune_in, prune_out, prune_method, prune_sparsity, prune_n, prune_m);
        }
        if (sc_comp->parsed()) return cmd_compress(comp_in, comp_out, comp_quantize);
        if (sc_dec->parsed()) return cmd_decompress(dec_in, dec_out, dec_dequantize);
        if (sc_inspect->parsed()) {
            std::cout << inspect_json(inspect_path).dump(2) << "\n";
            return 0;
        }
        if (sc_verify->parsed()) return cmd_verify(verify_path);
        if (sc_bench->parsed()) return cmd_bench(bench_files, bench_reps, bench_drop);
        if (sc_sim->parsed()) return cmd_simulate(sim);
        if (sc_cmp->parsed()) return cmd_compare(cmp, cmp_json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
