#pragma once

#include <cstddef>
#include <cstdint>

#include "rlos/distributions.hpp"
#include "rlos/fit.hpp"
#include "rlos/sample.hpp"

namespace rlos {

/// Cumulative products of uniforms mapped through the block's GEV quantile.
/// Block t (1-based) draws from its own stream derive_key(seed, {t}); the
/// returned sample carries time index 1..n.
RLosSample sample_rgev11(std::size_t n, std::size_t orders, const NsGevParams& params, std::uint64_t seed);

RLosSample sample_rgev(std::size_t n, std::size_t orders, const GevParams& params, std::uint64_t seed);

/// Top `orders` of `block_size` i.i.d. Wakeby draws per block.
RLosSample sample_wakeby_rlos(std::size_t n, std::size_t orders, const WakebyParams& params,
                              std::size_t block_size, std::uint64_t seed);

/// For j = true_r + 1 .. R - 1: x(j) <- p x(j) + (1 - p) x(j + 1), using the
/// uncontaminated neighbours.
RLosSample contaminate(const RLosSample& sample, std::size_t true_r, double mixing_p);

}  // namespace rlos
