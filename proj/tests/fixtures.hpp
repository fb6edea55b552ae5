#pragma once

// Randomized pools for property tests.

#include <cstddef>
#include <vector>

#include "amm/pool.hpp"
#include "oracles.hpp"

namespace fixture {

inline amm::PoolState random_pool(oracle::Sampler& rng, amm::Family family) {
    using amm::ProtocolSpec;
    switch (family) {
        case amm::Family::WeightedProduct: {
            const auto n = static_cast<std::size_t>(rng.integer(2, 4));
            return amm::make_pool(ProtocolSpec::weighted(rng.weights(n)), rng.reserves(n));
        }
        case amm::Family::StableSwap: {
            const auto n = static_cast<std::size_t>(rng.integer(2, 4));
            return amm::make_pool(ProtocolSpec::stableswap(rng.log_uniform(0.01, 1000.0)), rng.reserves(n));
        }
        case amm::Family::PMM:
        default: {
            const double p = rng.log_uniform(0.1, 10.0);
            const double r2 = rng.log_uniform(1.0, 1e6);
            const double r1 = p * r2 * rng.log_uniform(0.2, 5.0);
            return amm::make_pool(ProtocolSpec::pmm(rng.uniform(0.05, 1.0)), {r1, r2}, p);
        }
    }
}

inline constexpr amm::Family kFamilies[] = {amm::Family::WeightedProduct, amm::Family::StableSwap, amm::Family::PMM};

}  // namespace fixture
