#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace revc {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;
using Cost = double;

inline constexpr Cost kInfCost = std::numeric_limits<Cost>::infinity();
inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();
inline constexpr EdgeId kNoEdge = std::numeric_limits<EdgeId>::max();

/// Raised for malformed or inconsistent user input (graph rows, OD files,
/// parameter domains). The CLI maps it to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Direction : std::uint8_t { kForward, kBackward };

// Relative tolerance used for every "are these two path lengths equal"
// decision in the library.
inline constexpr double kDefaultRelTol = 1e-12;

inline bool strictly_less(Cost a, Cost b, double rel_tol) {
  return a < b - rel_tol * b;
}

}  // namespace revc
