#pragma once

#include <vector>

#include "lrgame/lattice.hpp"
#include "lrgame/random.hpp"

namespace lrgame {

/// Spin assignment over the extended grid of a window (interior + frame).
struct Configuration {
  std::vector<Spin> spins;

  Spin operator[](SiteIndex i) const noexcept { return spins[static_cast<std::size_t>(i)]; }
  Spin& operator[](SiteIndex i) noexcept { return spins[static_cast<std::size_t>(i)]; }
  std::size_t size() const noexcept { return spins.size(); }

  bool operator==(const Configuration&) const = default;
};

/// Independent fair spins on the interior; pinned frame copied from the window.
Configuration init_configuration(const Window& window, const RandomnessPlan& plan);

}  // namespace lrgame
