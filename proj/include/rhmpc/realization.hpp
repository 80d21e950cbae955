#pragma once

#include <cstdint>
#include <cstring>
#include <functional>
#include <string>

#include "rhmpc/error.hpp"
#include "rhmpc/lp.hpp"

namespace rhmpc {

/// Exogenous data for one period, sampled at t = 0..n (n + 1 samples per series).
struct PeriodRealization {
  Vec energy_price;  // $/kWh
  Vec fr_price;      // $/kW
  Vec load;          // kW
  Vec fr_request;    // fraction of FR capacity dispatched, in [0, 1]

  int samples() const { return static_cast<int>(load.size()); }

  void validate() const {
    const auto n = load.size();
    if (energy_price.size() != n || fr_price.size() != n || fr_request.size() != n || n < 2)
      throw Error(ErrorCode::DimensionMismatch, "realization series must share a length >= 2");
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!(energy_price[t] >= 0) || !(fr_price[t] >= 0))
        throw Error(ErrorCode::ValueError, "negative price at sample " + std::to_string(t));
      if (!(load[t] >= 0)) throw Error(ErrorCode::ValueError, "negative load at sample " + std::to_string(t));
      if (!(fr_request[t] >= 0 && fr_request[t] <= 1))
        throw Error(ErrorCode::ValueError, "fr_request outside [0,1] at sample " + std::to_string(t));
    }
  }

  friend bool operator==(const PeriodRealization& a, const PeriodRealization& b) {
    return a.energy_price.size() == b.energy_price.size() && a.load.size() == b.load.size() &&
           a.energy_price == b.energy_price && a.fr_price == b.fr_price && a.load == b.load &&
           a.fr_request == b.fr_request;
  }
};

/// Bitwise hash; bit-identical realizations (finite-support draws) collide on purpose.
struct RealizationHash {
  std::size_t operator()(const PeriodRealization& d) const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const Vec& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::uint64_t bits;
        const double x = v[i];
        std::memcpy(&bits, &x, sizeof bits);
        h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      }
    };
    mix(d.energy_price);
    mix(d.fr_price);
    mix(d.load);
    mix(d.fr_request);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace rhmpc
