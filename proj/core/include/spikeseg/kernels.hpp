#pragma once

#include <vector>

#include "spikeseg/errors.hpp"

namespace spikeseg::kernels {

// Geometry of one cross-correlation. Weight layout is [out_ch, in_ch, k, k]
// for conv2d and [in_ch, out_ch, k, k] for transposed conv2d.
struct ConvSpec {
  int batch = 1;
  int in_ch = 1;
  int in_h = 0;
  int in_w = 0;
  int out_ch = 1;
  int k = 1;
  int stride = 1;
  int pad = 0;

  int conv_out_h() const { return (in_h + 2 * pad - k) / stride + 1; }
  int conv_out_w() const { return (in_w + 2 * pad - k) / stride + 1; }
  int tconv_out_h() const { return (in_h - 1) * stride - 2 * pad + k; }
  int tconv_out_w() const { return (in_w - 1) * stride - 2 * pad + k; }

  void validate_conv() const {
    if (k <= 0 || stride <= 0 || pad < 0)
      throw ShapeError("conv2d: kernel/stride must be positive, pad non-negative");
    if (in_h + 2 * pad < k || in_w + 2 * pad < k)
      throw ShapeError("conv2d: kernel larger than padded input");
  }
  void validate_tconv() const {
    if (k <= 0 || stride <= 0 || pad < 0)
      throw ShapeError("transposed_conv2d: kernel/stride must be positive, pad non-negative");
    if (tconv_out_h() <= 0 || tconv_out_w() <= 0)
      throw ShapeError("transposed_conv2d: output dims not positive");
  }
};

// forward overwrites `out`; the grad kernels accumulate into their target
template <class S>
void conv2d_forward(const S* in, const S* w, S* out, const ConvSpec& cs, bool parallel = true);
template <class S>
void conv2d_grad_input(S* gin, const S* w, const S* gout, const ConvSpec& cs,
                       bool parallel = true);
template <class S>
void conv2d_grad_weight(const S* in, S* gw, const S* gout, const ConvSpec& cs,
                        bool parallel = true);

template <class S>
void tconv2d_forward(const S* in, const S* w, S* out, const ConvSpec& cs, bool parallel = true);
template <class S>
void tconv2d_grad_input(S* gin, const S* w, const S* gout, const ConvSpec& cs,
                        bool parallel = true);
template <class S>
void tconv2d_grad_weight(const S* in, S* gw, const S* gout, const ConvSpec& cs,
                         bool parallel = true);

// window x window mean pooling; dims must divide evenly
template <class S>
void avgpool_forward(const S* in, S* out, int batch, int ch, int h, int w, int window);
template <class S>
void avgpool_backward(S* gin, const S* gout, int batch, int ch, int h, int w, int window);

}  // namespace spikeseg::kernels
