#pragma once

#include <stdexcept>
#include <string>

namespace weakgraph {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define WEAKGRAPH_ERROR_TYPE(Name)        \
    class Name : public Error {           \
    public:                               \
        using Error::Error;               \
    };

// graph
WEAKGRAPH_ERROR_TYPE(InvalidSpec)        // out-of-range generation parameters
WEAKGRAPH_ERROR_TYPE(RetryExhausted)     // structural constraints unmet after max retries
WEAKGRAPH_ERROR_TYPE(StructureViolation) // weak-graph block structure broken
WEAKGRAPH_ERROR_TYPE(NoConvergence)      // power iteration exceeded max_iter
WEAKGRAPH_ERROR_TYPE(SingularSystem)     // (I - A_R) numerically singular

// models
WEAKGRAPH_ERROR_TYPE(OutOfSupport)       // density evaluated outside its support
WEAKGRAPH_ERROR_TYPE(DivergenceInfinite) // KL integrand diverges (support violation)
WEAKGRAPH_ERROR_TYPE(InvalidCorrelation)
WEAKGRAPH_ERROR_TYPE(InvalidShape)
WEAKGRAPH_ERROR_TYPE(DegenerateMeans)
WEAKGRAPH_ERROR_TYPE(DegeneratePoints)

// learning
WEAKGRAPH_ERROR_TYPE(AllZeroLikelihood)  // every hypothesis underflowed at an observation

// analysis
WEAKGRAPH_ERROR_TYPE(AmbiguousMinimizer) // network divergence tie: Assumption-3 violation
WEAKGRAPH_ERROR_TYPE(WrongConfiguration)
WEAKGRAPH_ERROR_TYPE(DimensionMismatch)

// topology
WEAKGRAPH_ERROR_TYPE(InconsistentData)   // y(theta_star) nonzero beyond tolerance
WEAKGRAPH_ERROR_TYPE(MissingRecord)      // trajectory lacks the requested iteration

// cli / io
WEAKGRAPH_ERROR_TYPE(ConfigError)
WEAKGRAPH_ERROR_TYPE(IoError)

#undef WEAKGRAPH_ERROR_TYPE

} // namespace weakgraph
