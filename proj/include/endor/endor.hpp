#pragma once

// Umbrella header for the Endor sparse weight format library.

#include "endor/bitmap.hpp"
#include "endor/byte_codec.hpp"
#include "endor/codec.hpp"
#include "endor/csr.hpp"
#include "endor/dense_matrix.hpp"
#include "endor/error.hpp"
#include "endor/file_io.hpp"
#include "endor/float16.hpp"
#include "endor/model_catalog.hpp"
#include "endor/sim.hpp"
#include "endor/weight_gen.hpp"
