// Copyright 2026 rcakit contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Minimal deterministic raster + PNG writer used for diagnostic charts.
// Output bytes depend only on the pixels, so repeated renders of the same
// profile are identical.
namespace rca::chart {

struct Color {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
};

class Canvas {
 public:
  Canvas(int width, int height, Color background);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<std::uint8_t>& pixels() const { return rgb_; }

  // Out-of-bounds coordinates are clipped, not errors.
  void set(int x, int y, Color c);
  void line(int x0, int y0, int x1, int y1, Color c);
  void rect(int x0, int y0, int x1, int y1, Color c);
  // 5x7 bitmap font, top-left anchor, 6px advance. Uppercase renders as
  // lowercase; characters without a glyph advance silently.
  void text(int x, int y, const std::string& s, Color c);

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> rgb_;
};

// 8-bit RGB, no interlace, filter type 0 on every scanline.
std::vector<std::uint8_t> encode_png(const Canvas& canvas);

}  // namespace rca::chart
