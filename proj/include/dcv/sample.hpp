#pragma once

// A paired sample (x_t, y_t), t = 1..n, with the spaces the two coordinates
// live in. Construction validates lengths and payload compatibility.

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dcv/space.hpp"

namespace dcv {

struct PairedSample {
  std::vector<Point> xs;
  std::vector<Point> ys;
  Space space_x;
  Space space_y;

  PairedSample(std::vector<Point> xs_in, std::vector<Point> ys_in, Space sx, Space sy)
      : xs(std::move(xs_in)),
        ys(std::move(ys_in)),
        space_x(std::move(sx)),
        space_y(std::move(sy)) {
    if (xs.size() != ys.size())
      throw std::invalid_argument("PairedSample: coordinate lists differ in length");
    if (xs.empty()) throw std::invalid_argument("PairedSample: need n >= 1");
    for (const auto& p : xs) space_x.check_point(p);
    for (const auto& p : ys) space_y.check_point(p);
  }

  [[nodiscard]] std::size_t size() const { return xs.size(); }
};

}  // namespace dcv
