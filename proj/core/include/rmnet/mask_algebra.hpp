#pragma once

#include "rmnet/image.hpp"
#include "rmnet/tensor.hpp"

// Element-wise masking operators. Masks use 1 = visible, 0 = hole, and are
// broadcast over the three colour channels. Masked-out values are written as
// exact zeros (a select, not a multiply) so that the visible and hole parts of
// an image always add back to the original bit-for-bit.
//
// The reverse mask 1 - M selects only the holes. The generator sees the whole
// image, but its output is cut back to the hole region with the reverse mask
// and pasted onto the untouched visible pixels, instead of renormalising or
// gating every convolution.
namespace rmnet {

// 1 - m.
BinaryMask reverse_mask(const BinaryMask& m);

// img (.) m: visible pixels unchanged, holes exactly 0.
Image apply_mask(const Image& img, const BinaryMask& m);

// pred (.) (1 - m) for the original mask m: only hole pixels survive.
Image masked_prediction(const Image& pred, const BinaryMask& m);

// ground (.) m + pred (.) (1 - m). `ground` may be the ground truth or the
// already-masked input; visible pixels of the result equal ground's exactly.
Image composite(const Image& ground, const Image& pred, const BinaryMask& m);

// Fraction of hole pixels, zeros / (H * W).
double hole_ratio(const BinaryMask& m);

// Batch forms. `masks` is N x 1 x H x W of 0/1 values; images are N x C x H x W.
Tensor apply_mask(const Tensor& images, const Tensor& masks);
Tensor apply_reverse_mask(const Tensor& images, const Tensor& masks);
Tensor composite(const Tensor& ground, const Tensor& pred, const Tensor& masks);

}  // namespace rmnet
