#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lrgame/random.hpp"

namespace lrgame {

using SiteIndex = std::int32_t;

enum class Boundary { torus, free, pinned };

std::string_view to_string(Boundary b);
Boundary parse_boundary(std::string_view text);

struct Site {
  int x1 = 0;
  int x2 = 0;
  auto operator<=>(const Site&) const = default;
};

/// A finite L x L window of Z^2. Interior sites have coordinates in
/// [0, L)^2. In pinned mode the window is surrounded by a one-site frame
/// (coordinates -1 and L) whose spins are frozen at `pinned_values`; frame
/// sites carry no clock and are never updated.
///
/// Sites are addressed by a dense SiteIndex over the extended grid
/// (interior plus frame), row-major in (x1, x2).
class Window {
 public:
  static constexpr int kFrameWidth = 1;

  static Window torus(int side);
  static Window free(int side);
  /// `frame` holds one spin per frame site, in frame_sites() order.
  static Window pinned(int side, std::vector<Spin> frame);
  static Window pinned(int side, Spin uniform_frame);

  int side() const noexcept { return side_; }
  Boundary boundary() const noexcept { return boundary_; }
  int frame_width() const noexcept { return frame_; }
  /// Side of the extended grid (L + 2 * frame width).
  int extent() const noexcept { return side_ + 2 * frame_; }
  int site_count() const noexcept { return extent() * extent(); }
  int interior_count() const noexcept { return side_ * side_; }

  bool on_grid(Site s) const noexcept;
  bool is_interior(Site s) const noexcept;
  bool is_interior(SiteIndex i) const noexcept { return is_interior(site(i)); }
  SiteIndex index(Site s) const;
  Site site(SiteIndex i) const noexcept;

  /// L1 distance; wraparound under torus mode.
  int distance(SiteIndex a, SiteIndex b) const noexcept;
  int distance(Site a, Site b) const noexcept;

  /// Site at `s + (dx, dy)`: wraps on the torus, nullopt when it leaves the grid.
  std::optional<SiteIndex> shifted(SiteIndex s, int dx, int dy) const noexcept;

  std::span<const SiteIndex> interior_sites() const noexcept { return interior_; }
  std::span<const SiteIndex> frame_sites() const noexcept { return frame_sites_; }
  std::span<const Spin> pinned_values() const noexcept { return pinned_; }

  /// Same geometry with a different frame assignment.
  Window with_frame(std::vector<Spin> frame) const;

  bool operator==(const Window& other) const = default;

 private:
  Window(int side, Boundary boundary, std::vector<Spin> pinned);

  int side_;
  Boundary boundary_;
  int frame_;
  std::vector<Spin> pinned_;
  std::vector<SiteIndex> interior_;
  std::vector<SiteIndex> frame_sites_;
};

}  // namespace lrgame
