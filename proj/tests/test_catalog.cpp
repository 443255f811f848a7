#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "endor/model_catalog.hpp"

using namespace endor;

TEST_CASE("opt-66b catalog") {
    const ModelSpec spec = model_catalog("opt-66b");
    CHECK(spec.num_layers == 64);
    REQUIRE(spec.ops_per_layer.size() == 6); // 4 attention + 2 fully-connected

    // Independent arithmetic: 4 * 9216^2 + 9216*36864 + 36864*9216, f16.
    const std::uint64_t expect =
        (4ull * 9216 * 9216 + 2ull * 9216 * 36864) * 2;
    CHECK(spec.bytes_per_layer == expect);
    CHECK(spec.bytes_per_layer == 2038431744ull);

    int attn = 0, fc = 0;
    for (const auto& op : spec.ops_per_layer) {
        REQUIRE(op.dtype == Dtype::F16);
        if (op.rows == 9216 && op.cols == 9216) ++attn;
        if ((op.rows == 9216 && op.cols == 36864) || (op.rows == 36864 && op.cols == 9216)) ++fc;
    }
    CHECK(attn == 4);
    CHECK(fc == 2);

    // Whole-model footprint is within 2% of the 132 GB VRAM figure.
    const double total_gb = static_cast<double>(spec.total_bytes()) / 1e9;
    CHECK(std::fabs(total_gb - 132.0) / 132.0 < 0.02);
}

TEST_CASE("llama2-70b catalog") {
    const ModelSpec spec = model_catalog("llama2-70b");
    CHECK(spec.num_layers == 80);
    REQUIRE(spec.ops_per_layer.size() == 7);
    CHECK(spec.bytes_per_layer == 1711276032ull);

    CHECK(find_op(spec, "attn.q_proj").rows == 8192);
    CHECK(find_op(spec, "attn.q_proj").cols == 8192);
    CHECK(find_op(spec, "attn.k_proj").rows == 1024);
    CHECK(find_op(spec, "attn.v_proj").cols == 8192);
    CHECK(find_op(spec, "mlp.gate_proj").cols == 28672);
    CHECK(find_op(spec, "mlp.up_proj").rows == 8192);
    CHECK(find_op(spec, "mlp.down_proj").rows == 28672);
    CHECK(find_op(spec, "mlp.down_proj").cols == 8192);
}

TEST_CASE("unknown names are rejected") {
    CHECK_THROWS_AS(model_catalog("gpt-5"), ConfigError);
    CHECK_THROWS_AS(find_op(model_catalog("opt-66b"), "nope"), ConfigError);
}
