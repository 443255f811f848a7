#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "endor/dense_matrix.hpp"
#include "endor/error.hpp"

namespace endor {

// Shape of one offloaded linear operation.
struct OpShape {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    Dtype dtype = Dtype::F16;

    std::uint64_t element_count() const {
        return checked_element_count(rows, cols);
    }
    std::uint64_t dense_bytes() const {
        return element_count() * elem_bytes(dtype);
    }
};

// Per-layer catalog of the offloaded operations of a model.
struct ModelSpec {
    std::string model_name;
    std::size_t num_layers = 0;
    std::vector<OpShape> ops_per_layer;
    std::uint64_t bytes_per_layer = 0; // sum of op dense bytes

    std::uint64_t total_bytes() const noexcept { return bytes_per_layer * num_layers; }
};

namespace detail {

inline ModelSpec finish(ModelSpec spec) {
    spec.bytes_per_layer = 0;
    for (const auto& op : spec.ops_per_layer) spec.bytes_per_layer += op.dense_bytes();
    return spec;
}

} // namespace detail

// Built-in catalogs. Layer counts and operation shapes follow the
// published decoder architectures of the two supported models.
//   opt-66b:     64 layers; attention q/k/v/out 9216x9216, fc1
//                9216x36864, fc2 36864x9216 (f16).
//   llama2-70b:  80 layers; grouped-query attention q/o 8192x8192 and
//                k/v 1024x8192, gate/up 8192x28672, down 28672x8192
//                (f16).
inline ModelSpec model_catalog(const std::string& name) {
    if (name == "opt-66b") {
        ModelSpec spec;
        spec.model_name = name;
        spec.num_layers = 64;
        spec.ops_per_layer = {
            {"attn.q_proj", 9216, 9216, Dtype::F16},
            {"attn.k_proj", 9216, 9216, Dtype::F16},
            {"attn.v_proj", 9216, 9216, Dtype::F16},
            {"attn.out_proj", 9216, 9216, Dtype::F16},
            {"fc1", 9216, 36864, Dtype::F16},
            {"fc2", 36864, 9216, Dtype::F16},
        };
        return detail::finish(std::move(spec));
    }
    if (name == "llama2-70b") {
        ModelSpec spec;
        spec.model_name = name;
        spec.num_layers = 80;
        spec.ops_per_layer = {
            {"attn.q_proj", 8192, 8192, Dtype::F16},
            {"attn.k_proj", 1024, 8192, Dtype::F16},
            {"attn.v_proj", 1024, 8192, Dtype::F16},
            {"attn.o_proj", 8192, 8192, Dtype::F16},
            {"mlp.gate_proj", 8192, 28672, Dtype::F16},
            {"mlp.up_proj", 8192, 28672, Dtype::F16},
            {"mlp.down_proj", 28672, 8192, Dtype::F16},
        };
        return detail::finish(std::move(spec));
    }
    throw ConfigError("unknown model: " + name + " (expected opt-66b or llama2-70b)");
}

// Find an op shape by name, e.g. "fc1" or "attn.q_proj".
inline const OpShape& find_op(const ModelSpec& spec, const std::string& op_name) {
    for (const auto& op : spec.ops_per_layer) {
        if (op.name == op_name) return op;
    }
    throw ConfigError("model " + spec.model_name + " has no op named " + op_name);
}

} // namespace endor
