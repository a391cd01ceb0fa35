#pragma once

#include <stdexcept>
#include <string>

namespace rrl {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// economy: belief <= beta would imply a gross nominal rate i <= 1, where
// money demand blows up.
struct BeliefTooLow : Error {
    using Error::Error;
};

// economy: money demand m = i/(i-1) is undefined for i <= 1.
struct RateNotAboveUnity : Error {
    using Error::Error;
};

// economy: 1 + lambda = 0 makes the rate-rule inversion exponent undefined.
struct DegenerateExponent : Error {
    using Error::Error;
};

// nn: vector/layer shapes do not chain.
struct DimensionMismatch : Error {
    using Error::Error;
};

// nn: backward called without a cached forward pass.
struct NoCachedForward : Error {
    using Error::Error;
};

// ddpg: train_step called before the replay buffer holds a full minibatch.
struct BufferTooSmall : Error {
    using Error::Error;
};

// config/CLI: malformed or inconsistent configuration.
struct BadConfig : Error {
    using Error::Error;
};

// CLI/IO: file could not be read or written.
struct IoFailure : Error {
    using Error::Error;
};

// verify: expected run outputs are absent.
struct MissingOutputs : Error {
    using Error::Error;
};

// summarize: nothing to aggregate.
struct EmptyInput : Error {
    using Error::Error;
};

}  // namespace rrl
