#pragma once

#include <cstdint>

namespace bilatrr {

/// Observed counts for one treatment group.
///
/// Bilateral subjects contribute two organs and are tallied by the number of
/// responding organs (0, 1 or 2); unilateral subjects contribute one organ.
struct GroupCounts {
  std::int64_t m0 = 0;
  std::int64_t m1 = 0;
  std::int64_t m2 = 0;
  std::int64_t n0 = 0;
  std::int64_t n1 = 0;

  [[nodiscard]] constexpr std::int64_t bilateral_total() const { return m0 + m1 + m2; }
  [[nodiscard]] constexpr std::int64_t unilateral_total() const { return n0 + n1; }
  /// Number of responding organs.
  [[nodiscard]] constexpr std::int64_t responses() const { return m1 + 2 * m2 + n1; }
  /// Number of observed organs.
  [[nodiscard]] constexpr std::int64_t organs() const {
    return 2 * bilateral_total() + unilateral_total();
  }
  [[nodiscard]] constexpr bool valid() const {
    return m0 >= 0 && m1 >= 0 && m2 >= 0 && n0 >= 0 && n1 >= 0;
  }
  /// True when the group has both responding and non-responding organs, the
  /// condition for its response rate to have an interior MLE.
  [[nodiscard]] constexpr bool informative() const {
    return responses() > 0 && responses() < organs();
  }

  friend constexpr bool operator==(const GroupCounts&, const GroupCounts&) = default;
};

/// Two-group table of a combined unilateral and bilateral design.
struct Dataset {
  GroupCounts group1;
  GroupCounts group2;

  [[nodiscard]] constexpr const GroupCounts& group(int i) const { return i == 1 ? group1 : group2; }
  /// The same data with the two groups exchanged (maps delta to 1/delta).
  [[nodiscard]] constexpr Dataset swapped() const { return {group2, group1}; }

  friend constexpr bool operator==(const Dataset&, const Dataset&) = default;
};

/// Model parameters in the (delta, pi1, R) parameterization.
struct ParamPoint {
  double delta = 1.0;
  double pi1 = 0.5;
  double r = 1.0;

  [[nodiscard]] constexpr double pi2() const { return delta * pi1; }
};

/// Trinomial probabilities of 0, 1 and 2 responding organs for a bilateral
/// subject.
struct CellProbs {
  double p0 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
};

/// Admissible interval for R. The lower end is open when it equals zero.
struct RRange {
  double lower = 0.0;
  bool lower_exclusive = true;
  double upper = 0.0;

  [[nodiscard]] constexpr bool contains(double r) const {
    return (lower_exclusive ? r > lower : r >= lower) && r <= upper;
  }
};

}  // namespace bilatrr
