#pragma once

#include <stdexcept>
#include <string>

namespace optpay {

/// Base class for all engine errors. Subclasses distinguish recoverable
/// modelling problems (bad input, unsupported variant) from mathematical
/// verdicts that callers may want to branch on (arbitrage, infeasibility).
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input malformed or parameter outside its admissible range.
struct BadParameter : Error {
    explicit BadParameter(const std::string& what) : Error(what) {}
};

/// Requested operation is not defined for this acceptance variant.
struct UnsupportedVariant : Error {
    explicit UnsupportedVariant(const std::string& what) : Error(what) {}
};

/// Market payoff columns are linearly dependent.
struct DegenerateMarket : Error {
    explicit DegenerateMarket(const std::string& what) : Error(what) {}
};

/// No nonnegative payoff with unit price exists in the market span.
struct NoUnitPayoff : Error {
    explicit NoUnitPayoff(const std::string& what) : Error(what) {}
};

/// Operation requires a nonempty polyhedron.
struct EmptyPolyhedron : Error {
    explicit EmptyPolyhedron(const std::string& what) : Error(what) {}
};

/// Vertex/facet enumeration refused: ambient dimension above the cap.
struct DimensionCap : Error {
    explicit DimensionCap(const std::string& what) : Error(what) {}
};

/// Union variant would expand into more branches than the hard cap.
struct TooManyBranches : Error {
    explicit TooManyBranches(const std::string& what) : Error(what) {}
};

/// The capital requirement is -inf: some branch admits arbitrarily cheap
/// acceptable top-ups. Carries an improving feasible ray as certificate.
struct AcceptabilityArbitrage : Error {
    explicit AcceptabilityArbitrage(const std::string& what) : Error(what) {}
};

/// The capital requirement is +inf: no portfolio makes the position
/// acceptable.
struct NeverAcceptable : Error {
    explicit NeverAcceptable(const std::string& what) : Error(what) {}
};

/// The requested optimum is not attained (infeasible or unbounded LP).
struct NotAttained : Error {
    explicit NotAttained(const std::string& what) : Error(what) {}
};

/// Set operation requested on an optimal set that is empty.
struct EmptyOptimalSet : Error {
    explicit EmptyOptimalSet(const std::string& what) : Error(what) {}
};

/// Box truncation produced an empty set, so the deviation is undefined.
struct EmptyAfterBoxing : Error {
    explicit EmptyAfterBoxing(const std::string& what) : Error(what) {}
};

/// The cutting-plane iterate is pinned to the trust box even after the
/// allowed number of box enlargements.
struct BoxBoundaryHit : Error {
    explicit BoxBoundaryHit(const std::string& what) : Error(what) {}
};

/// Internal consistency failure (a certificate did not verify). Indicates
/// a bug, never a property of the input.
struct InternalCheck : Error {
    explicit InternalCheck(const std::string& what) : Error(what) {}
};

}  // namespace optpay
