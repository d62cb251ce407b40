#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "voisyn/samples.hpp"

namespace voisyn {

// A future-data design: what would be collected and at what sample size.
// simulate_statistics condenses each simulated dataset to the low-dimensional
// statistic the EVSI regression consumes.
struct DesignSpec {
  enum class Kind { GumAnonAddOn, GmshsAddOn, BinomialOn };
  Kind kind = Kind::GumAnonAddOn;
  long n = 0;
  std::uint64_t seed = 0;
  std::string parameter;  // probability column for BinomialOn
  // GMSHS group split: by default the draw's rho_G/(rho_G+rho_N); set to use
  // a fixed split probability instead (e.g. the observed 493/945).
  std::optional<double> fixed_split;

  std::string statistic_name() const;
  static DesignSpec from_json(const std::string& json_text);
};

// One statistic column, K rows, simulated from the posterior predictive
// per draw.  Row i uses an RNG stream keyed by (seed, i, kind), so grids
// over n share common randomness.
SampleTable simulate_statistics(const DesignSpec& design, const SampleTable& table);

}  // namespace voisyn
