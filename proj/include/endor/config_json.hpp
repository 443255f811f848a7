#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "endor/byte_codec.hpp"
#include "endor/error.hpp"
#include "endor/file_io.hpp"
#include "endor/sim.hpp"

namespace endor {

// JSON forms of the simulator configuration and result types, used by
// the CLI for config files and plottable reports.

inline nlohmann::json to_json(const BandwidthProfile& p) {
    return {
        {"bw_ssd_cpu", p.bw_ssd_cpu},
        {"bw_cpu_gpu", p.bw_cpu_gpu},
        {"bw_ssd_gpu_direct", p.bw_ssd_gpu_direct},
        {"gpu_decomp_tput", p.gpu_decomp_tput},
        {"cpu_decomp_tput", p.cpu_decomp_tput},
        {"zstd_ratio", p.zstd_ratio},
        {"zstd_decomp_tput", p.zstd_decomp_tput},
        {"compute_seconds_per_layer", p.compute_seconds_per_layer},
    };
}

inline BandwidthProfile profile_from_json(const nlohmann::json& j) {
    BandwidthProfile p;
    try {
        p.bw_ssd_cpu = j.at("bw_ssd_cpu").get<double>();
        p.bw_cpu_gpu = j.at("bw_cpu_gpu").get<double>();
        p.bw_ssd_gpu_direct = j.value("bw_ssd_gpu_direct", 0.0);
        p.gpu_decomp_tput = j.at("gpu_decomp_tput").get<double>();
        p.cpu_decomp_tput = j.at("cpu_decomp_tput").get<double>();
        p.zstd_ratio = j.at("zstd_ratio").get<double>();
        p.zstd_decomp_tput = j.at("zstd_decomp_tput").get<double>();
        p.compute_seconds_per_layer = j.at("compute_seconds_per_layer").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad profile document: ") + e.what());
    }
    p.validate();
    return p;
}

inline BandwidthProfile load_profile_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open profile " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse profile " + path.string() + ": " + e.what());
    }
    return profile_from_json(j);
}

inline nlohmann::json to_json(const DeviceMap& map) {
    nlohmann::json arr = nlohmann::json::array();
    for (Placement p : map.layers) arr.push_back(placement_name(p));
    return arr;
}

inline DeviceMap device_map_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ConfigError("device map document must be an array");
    DeviceMap map;
    for (const auto& e : j) {
        const std::string s = e.get<std::string>();
        if (s == "gpu") {
            map.layers.push_back(Placement::GPU);
        } else if (s == "cpu") {
            map.layers.push_back(Placement::CPU);
        } else if (s == "ssd") {
            map.layers.push_back(Placement::SSD);
        } else {
            throw ConfigError("unknown placement tag: " + s);
        }
    }
    return map;
}

inline nlohmann::json to_json(const Timeline& tl) {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : tl.segments) {
        segs.push_back({{"segment", segment_name(s.kind)},
                        {"start_seconds", s.start},
                        {"seconds", s.duration}});
    }
    return {{"op", tl.op_name}, {"total_seconds", tl.total()}, {"segments", segs}};
}

inline nlohmann::json to_json(const PassReport& r, bool per_layer = false,
                              bool per_op = false) {
    nlohmann::json j{
        {"model", r.model_name},
        {"mode", exec_mode_name(r.mode)},
        {"sparsity", r.sparsity},
        {"total_seconds", r.total_seconds},
        {"region_seconds",
         {{"gpu", r.region(Placement::GPU)},
          {"cpu", r.region(Placement::CPU)},
          {"ssd", r.region(Placement::SSD)}}},
    };
    if (per_layer) {
        nlohmann::json layers = nlohmann::json::array();
        for (const auto& lr : r.layers) {
            nlohmann::json lj{{"layer", lr.layer},
                              {"placement", placement_name(lr.placement)},
                              {"seconds", lr.seconds}};
            if (per_op) {
                nlohmann::json ops = nlohmann::json::array();
                for (const auto& tl : lr.ops) ops.push_back(to_json(tl));
                lj["ops"] = ops;
            }
            layers.push_back(std::move(lj));
        }
        j["layers"] = std::move(layers);
    }
    return j;
}

inline nlohmann::json to_json(const BenchReport& r) {
    return {
        {"file", r.label},
        {"bytes", r.bytes_read},
        {"repetitions", r.repetitions},
        {"cache_drop_attempted", r.cache_drop_attempted},
        {"sample_seconds", r.sample_seconds},
        {"median_seconds", r.median_seconds},
        {"effective_bytes_per_second", r.effective_bytes_per_second},
    };
}

inline nlohmann::json to_json(const ByteCodecReport& r) {
    return {
        {"codec", r.codec_name},
        {"input_bytes", r.input_bytes},
        {"output_bytes", r.output_bytes},
        {"ratio", r.ratio()},
        {"compress_seconds", r.compress_seconds},
        {"decompress_seconds", r.decompress_seconds},
    };
}

} // namespace endor
