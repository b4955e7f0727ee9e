#include "lrgame/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace lrgame {

std::string_view to_string(Boundary b) {
  switch (b) {
    case Boundary::torus:
      return "torus";
    case Boundary::free:
      return "free";
    case Boundary::pinned:
      return "pinned";
  }
  return "?";
}

Boundary parse_boundary(std::string_view text) {
  if (text == "torus") return Boundary::torus;
  if (text == "free") return Boundary::free;
  if (text == "pinned") return Boundary::pinned;
  throw std::invalid_argument("unknown boundary mode '" + std::string(text) + "'");
}

Window::Window(int side, Boundary boundary, std::vector<Spin> pinned)
    : side_(side),
      boundary_(boundary),
      frame_(boundary == Boundary::pinned ? kFrameWidth : 0),
      pinned_(std::move(pinned)) {
  if (side_ < 2) throw std::invalid_argument("window side must be >= 2");
  for (SiteIndex i = 0; i < site_count(); ++i) {
    (is_interior(i) ? interior_ : frame_sites_).push_back(i);
  }
  if (boundary_ == Boundary::pinned) {
    if (pinned_.size() != frame_sites_.size()) {
      throw std::invalid_argument("pinned frame must assign every frame site");
    }
    for (Spin s : pinned_) {
      if (s != 1 && s != -1) throw std::invalid_argument("pinned spins must be +1 or -1");
    }
  } else if (!pinned_.empty()) {
    throw std::invalid_argument("pinned values given for a non-pinned window");
  }
}

Window Window::torus(int side) { return Window(side, Boundary::torus, {}); }
Window Window::free(int side) { return Window(side, Boundary::free, {}); }

Window Window::pinned(int side, std::vector<Spin> frame) {
  return Window(side, Boundary::pinned, std::move(frame));
}

Window Window::pinned(int side, Spin uniform_frame) {
  const int n = side + 2 * kFrameWidth;
  const auto frame_count = static_cast<std::size_t>(n * n - side * side);
  return Window(side, Boundary::pinned, std::vector<Spin>(frame_count, uniform_frame));
}

Window Window::with_frame(std::vector<Spin> frame) const {
  if (boundary_ != Boundary::pinned) throw std::invalid_argument("with_frame needs a pinned window");
  return Window(side_, boundary_, std::move(frame));
}

bool Window::on_grid(Site s) const noexcept {
  return s.x1 >= -frame_ && s.x1 < side_ + frame_ && s.x2 >= -frame_ && s.x2 < side_ + frame_;
}

bool Window::is_interior(Site s) const noexcept {
  return s.x1 >= 0 && s.x1 < side_ && s.x2 >= 0 && s.x2 < side_;
}

SiteIndex Window::index(Site s) const {
  if (!on_grid(s)) throw std::out_of_range("site outside window");
  return (s.x1 + frame_) * extent() + (s.x2 + frame_);
}

Site Window::site(SiteIndex i) const noexcept {
  return {i / extent() - frame_, i % extent() - frame_};
}

int Window::distance(Site a, Site b) const noexcept {
  int d1 = std::abs(a.x1 - b.x1);
  int d2 = std::abs(a.x2 - b.x2);
  if (boundary_ == Boundary::torus) {
    d1 = std::min(d1, side_ - d1);
    d2 = std::min(d2, side_ - d2);
  }
  return d1 + d2;
}

int Window::distance(SiteIndex a, SiteIndex b) const noexcept { return distance(site(a), site(b)); }

std::optional<SiteIndex> Window::shifted(SiteIndex s, int dx, int dy) const noexcept {
  Site p = site(s);
  p.x1 += dx;
  p.x2 += dy;
  if (boundary_ == Boundary::torus) {
    p.x1 = ((p.x1 % side_) + side_) % side_;
    p.x2 = ((p.x2 % side_) + side_) % side_;
  } else if (!on_grid(p)) {
    return std::nullopt;
  }
  return (p.x1 + frame_) * extent() + (p.x2 + frame_);
}

}  // namespace lrgame
