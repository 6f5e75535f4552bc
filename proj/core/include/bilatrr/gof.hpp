#pragma once

#include <string_view>
#include <vector>

#include "bilatrr/estimation.hpp"
#include "bilatrr/types.hpp"

namespace bilatrr {

/// Both variants compare the ten observed cells (three bilateral and two
/// unilateral per group) with their expected counts under the fitted R model.
/// They differ only in the reference distribution:
///   Paper      one degree of freedom;
///   Saturated  three degrees of freedom, six free cell parameters against
///              the three of the R model.
enum class GofVariant { Paper, Saturated };

std::string_view variant_name(GofVariant v);

struct GofResult {
  GofVariant variant = GofVariant::Paper;
  double g2 = 0.0;
  double chi2 = 0.0;
  int df = 1;
  double p_g2 = 1.0;
  double p_chi2 = 1.0;
};

GofResult gof_rosner(const Dataset& data, GofVariant variant = GofVariant::Paper);
GofResult gof_rosner(const Dataset& data, const MleResult& mle, GofVariant variant = GofVariant::Paper);

/// Both variants, Paper first.
std::vector<GofResult> gof_all(const Dataset& data);

}  // namespace bilatrr
