#pragma once

#include <span>
#include <vector>

#include "rmnet/image.hpp"

namespace rmnet {

// Area (box-average) resampling of one plane: every output pixel is the
// overlap-weighted mean of the source pixels its footprint covers.
std::vector<double> area_resize_plane(std::span<const double> src, int height, int width,
                                      int out_height, int out_width);

Image area_resize(const Image& img, int out_height, int out_width);

}  // namespace rmnet
