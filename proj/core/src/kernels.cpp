#include "spikeseg/kernels.hpp"

#include <algorithm>
#include <cstddef>

#include "spikeseg/thread_pool.hpp"

namespace spikeseg::kernels {

namespace {

void run(bool parallel, std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (parallel)
    ThreadPool::instance().for_each(n, fn);
  else
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace

template <class S>
void conv2d_forward(const S* in, const S* w, S* out, const ConvSpec& cs, bool parallel) {
  cs.validate_conv();
  const int oh = cs.conv_out_h(), ow = cs.conv_out_w();
  const std::size_t in_plane = static_cast<std::size_t>(cs.in_h) * cs.in_w;
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;

  run(parallel, static_cast<std::size_t>(cs.batch) * cs.out_ch, [&](std::size_t bc) {
    const int b = static_cast<int>(bc) / cs.out_ch;
    const int co = static_cast<int>(bc) % cs.out_ch;
    S* op = out + (static_cast<std::size_t>(b) * cs.out_ch + co) * out_plane;
    std::fill(op, op + out_plane, S(0));
    for (int ci = 0; ci < cs.in_ch; ++ci) {
      const S* ip = in + (static_cast<std::size_t>(b) * cs.in_ch + ci) * in_plane;
      const S* wk = w + (static_cast<std::size_t>(co) * cs.in_ch + ci) *
                            static_cast<std::size_t>(cs.k) * cs.k;
      for (int ky = 0; ky < cs.k; ++ky) {
        for (int kx = 0; kx < cs.k; ++kx) {
          const S wv = wk[ky * cs.k + kx];
          if (wv == S(0)) continue;
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * cs.stride - cs.pad + ky;
            if (iy < 0 || iy >= cs.in_h) continue;
            S* orow = op + static_cast<std::size_t>(oy) * ow;
            const S* irow = ip + static_cast<std::size_t>(iy) * cs.in_w;
            if (cs.stride == 1) {
              // ix = ox - pad + kx must stay in [0, in_w)
              const int lo = std::max(0, cs.pad - kx);
              const int hi = std::min(ow, cs.in_w + cs.pad - kx);
              const S* sv = irow + lo - cs.pad + kx;
              for (int ox = lo; ox < hi; ++ox) orow[ox] += wv * sv[ox - lo];
            } else {
              for (int ox = 0; ox < ow; ++ox) {
                const int ix = ox * cs.stride - cs.pad + kx;
                if (ix >= 0 && ix < cs.in_w) orow[ox] += wv * irow[ix];
              }
            }
          }
        }
      }
    }
  });
}

template <class S>
void conv2d_grad_input(S* gin, const S* w, const S* gout, const ConvSpec& cs, bool parallel) {
  const int oh = cs.conv_out_h(), ow = cs.conv_out_w();
  const std::size_t in_plane = static_cast<std::size_t>(cs.in_h) * cs.in_w;
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;

  run(parallel, static_cast<std::size_t>(cs.batch) * cs.in_ch, [&](std::size_t bc) {
    const int b = static_cast<int>(bc) / cs.in_ch;
    const int ci = static_cast<int>(bc) % cs.in_ch;
    S* gp = gin + (static_cast<std::size_t>(b) * cs.in_ch + ci) * in_plane;
    for (int co = 0; co < cs.out_ch; ++co) {
      const S* gop = gout + (static_cast<std::size_t>(b) * cs.out_ch + co) * out_plane;
      const S* wk = w + (static_cast<std::size_t>(co) * cs.in_ch + ci) *
                            static_cast<std::size_t>(cs.k) * cs.k;
      for (int ky = 0; ky < cs.k; ++ky) {
        for (int kx = 0; kx < cs.k; ++kx) {
          const S wv = wk[ky * cs.k + kx];
          if (wv == S(0)) continue;
          if (cs.stride == 1) {
            for (int iy = 0; iy < cs.in_h; ++iy) {
              const int oy = iy + cs.pad - ky;
              if (oy < 0 || oy >= oh) continue;
              S* grow = gp + static_cast<std::size_t>(iy) * cs.in_w;
              const S* gorow = gop + static_cast<std::size_t>(oy) * ow;
              const int lo = std::max(0, kx - cs.pad);
              const int hi = std::min(cs.in_w, ow + kx - cs.pad);
              const S* sv = gorow + lo + cs.pad - kx;
              for (int ix = lo; ix < hi; ++ix) grow[ix] += wv * sv[ix - lo];
            }
          } else {
            for (int iy = 0; iy < cs.in_h; ++iy) {
              const int oy_num = iy + cs.pad - ky;
              if (oy_num < 0 || oy_num % cs.stride) continue;
              const int oy = oy_num / cs.stride;
              if (oy >= oh) continue;
              S* grow = gp + static_cast<std::size_t>(iy) * cs.in_w;
              const S* gorow = gop + static_cast<std::size_t>(oy) * ow;
              for (int ix = 0; ix < cs.in_w; ++ix) {
                const int ox_num = ix + cs.pad - kx;
                if (ox_num < 0 || ox_num % cs.stride) continue;
                const int ox = ox_num / cs.stride;
                if (ox < ow) grow[ix] += wv * gorow[ox];
              }
            }
          }
        }
      }
    }
  });
}

template <class S>
void conv2d_grad_weight(const S* in, S* gw, const S* gout, const ConvSpec& cs, bool parallel) {
  const int oh = cs.conv_out_h(), ow = cs.conv_out_w();
  const std::size_t in_plane = static_cast<std::size_t>(cs.in_h) * cs.in_w;
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;

  // one task per output channel; per-cell accumulation order over (b, oy, ox)
  // is fixed, so the result is independent of the thread count
  run(parallel, static_cast<std::size_t>(cs.out_ch), [&](std::size_t co) {
    for (int ci = 0; ci < cs.in_ch; ++ci) {
      S* gwk = gw + (co * cs.in_ch + ci) * static_cast<std::size_t>(cs.k) * cs.k;
      for (int ky = 0; ky < cs.k; ++ky) {
        for (int kx = 0; kx < cs.k; ++kx) {
          S acc = S(0);
          for (int b = 0; b < cs.batch; ++b) {
            const S* ip = in + (static_cast<std::size_t>(b) * cs.in_ch + ci) * in_plane;
            const S* gop = gout + (static_cast<std::size_t>(b) * cs.out_ch + co) * out_plane;
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * cs.stride - cs.pad + ky;
              if (iy < 0 || iy >= cs.in_h) continue;
              const S* irow = ip + static_cast<std::size_t>(iy) * cs.in_w;
              const S* gorow = gop + static_cast<std::size_t>(oy) * ow;
              if (cs.stride == 1) {
                const int lo = std::max(0, cs.pad - kx);
                const int hi = std::min(ow, cs.in_w + cs.pad - kx);
                const S* sv = irow + lo - cs.pad + kx;
                S dot = S(0);
                for (int ox = lo; ox < hi; ++ox) dot += gorow[ox] * sv[ox - lo];
                acc += dot;
              } else {
                for (int ox = 0; ox < ow; ++ox) {
                  const int ix = ox * cs.stride - cs.pad + kx;
                  if (ix >= 0 && ix < cs.in_w) acc += gorow[ox] * irow[ix];
                }
              }
            }
          }
          gwk[ky * cs.k + kx] += acc;
        }
      }
    }
  });
}

template <class S>
void tconv2d_forward(const S* in, const S* w, S* out, const ConvSpec& cs, bool parallel) {
  cs.validate_tconv();
  const int oh = cs.tconv_out_h(), ow = cs.tconv_out_w();
  const std::size_t in_plane = static_cast<std::size_t>(cs.in_h) * cs.in_w;
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;

  run(parallel, static_cast<std::size_t>(cs.batch) * cs.out_ch, [&](std::size_t bc) {
    const int b = static_cast<int>(bc) / cs.out_ch;
    const int co = static_cast<int>(bc) % cs.out_ch;
    S* op = out + (static_cast<std::size_t>(b) * cs.out_ch + co) * out_plane;
    std::fill(op, op + out_plane, S(0));
    for (int ci = 0; ci < cs.in_ch; ++ci) {
      const S* ip = in + (static_cast<std::size_t>(b) * cs.in_ch + ci) * in_plane;
      const S* wk = w + (static_cast<std::size_t>(ci) * cs.out_ch + co) *
                            static_cast<std::size_t>(cs.k) * cs.k;
      for (int ky = 0; ky < cs.k; ++ky) {
        for (int kx = 0; kx < cs.k; ++kx) {
          const S wv = wk[ky * cs.k + kx];
          if (wv == S(0)) continue;
          for (int iy = 0; iy < cs.in_h; ++iy) {
            const int oy = iy * cs.stride - cs.pad + ky;
            if (oy < 0 || oy >= oh) continue;
            const S* irow = ip + static_cast<std::size_t>(iy) * cs.in_w;
            S* orow = op + static_cast<std::size_t>(oy) * ow;
            for (int ix = 0; ix < cs.in_w; ++ix) {
              const int ox = ix * cs.stride - cs.pad + kx;
              if (ox >= 0 && ox < ow) orow[ox] += wv * irow[ix];
            }
          }
        }
      }
    }
  });
}

template <class S>
void tconv2d_grad_input(S* gin, const S* w, const S* gout, const ConvSpec& cs, bool parallel) {
  const int oh = cs.tconv_out_h(), ow = cs.tconv_out_w();
  const std::size_t in_plane = static_cast<std::size_t>(cs.in_h) * cs.in_w;
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;

  // adjoint of the scatter above is a plain gather: conv2d of gout with w
  run(parallel, static_cast<std::size_t>(cs.batch) * cs.in_ch, [&](std::size_t bc) {
    const int b = static_cast<int>(bc) / cs.in_ch;
    const int ci = static_cast<int>(bc) % cs.in_ch;
    S* gp = gin + (static_cast<std::size_t>(b) * cs.in_ch + ci) * in_plane;
    for (int co = 0; co < cs.out_ch; ++co) {
      const S* gop = gout + (static_cast<std::size_t>(b) * cs.out_ch + co) * out_plane;
      const S* wk = w + (static_cast<std::size_t>(ci) * cs.out_ch + co) *
                            static_cast<std::size_t>(cs.k) * cs.k;
      for (int ky = 0; ky < cs.k; ++ky) {
        for (int kx = 0; kx < cs.k; ++kx) {
          const S wv = wk[ky * cs.k + kx];
          if (wv == S(0)) continue;
          for (int iy = 0; iy < cs.in_h; ++iy) {
            const int oy = iy * cs.stride - cs.pad + ky;
            if (oy < 0 || oy >= oh) continue;
            S* grow = gp + static_cast<std::size_t>(iy) * cs.in_w;
            const S* gorow = gop + static_cast<std::size_t>(oy) * ow;
            for (int ix = 0; ix < cs.in_w; ++ix) {
              const int ox = ix * cs.stride - cs.pad + kx;
              if (ox >= 0 && ox < ow) grow[ix] += wv * gorow[ox];
            }
          }
        }
      }
    }
  });
}

template <class S>
void tconv2d_grad_weight(const S* in, S* gw, const S* gout, const ConvSpec& cs, bool parallel) {
  const int oh = cs.tconv_out_h(), ow = cs.tconv_out_w();
  const std::size_t in_plane = static_cast<std::size_t>(cs.in_h) * cs.in_w;
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;

  run(parallel, static_cast<std::size_t>(cs.in_ch), [&](std::size_t ci) {
    for (int co = 0; co < cs.out_ch; ++co) {
      S* gwk = gw + (ci * cs.out_ch + co) * static_cast<std::size_t>(cs.k) * cs.k;
      for (int ky = 0; ky < cs.k; ++ky) {
        for (int kx = 0; kx < cs.k; ++kx) {
          S acc = S(0);
          for (int b = 0; b < cs.batch; ++b) {
            const S* ip = in + (static_cast<std::size_t>(b) * cs.in_ch + ci) * in_plane;
            const S* gop = gout + (static_cast<std::size_t>(b) * cs.out_ch + co) * out_plane;
            for (int iy = 0; iy < cs.in_h; ++iy) {
              const int oy = iy * cs.stride - cs.pad + ky;
              if (oy < 0 || oy >= oh) continue;
              const S* irow = ip + static_cast<std::size_t>(iy) * cs.in_w;
              const S* gorow = gop + static_cast<std::size_t>(oy) * ow;
              for (int ix = 0; ix < cs.in_w; ++ix) {
                const int ox = ix * cs.stride - cs.pad + kx;
                if (ox >= 0 && ox < ow) acc += irow[ix] * gorow[ox];
              }
            }
          }
          gwk[ky * cs.k + kx] += acc;
        }
      }
    }
  });
}

template <class S>
void avgpool_forward(const S* in, S* out, int batch, int ch, int h, int w, int window) {
  if (window <= 0 || h % window || w % window)
    throw ShapeError("avg_pool2d: spatial dims must divide by window");
  const int oh = h / window, ow = w / window;
  const S inv = S(1) / static_cast<S>(window * window);
  const std::size_t planes = static_cast<std::size_t>(batch) * ch;
  for (std::size_t p = 0; p < planes; ++p) {
    const S* ip = in + p * static_cast<std::size_t>(h) * w;
    S* op = out + p * static_cast<std::size_t>(oh) * ow;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        S acc = S(0);
        for (int dy = 0; dy < window; ++dy)
          for (int dx = 0; dx < window; ++dx)
            acc += ip[static_cast<std::size_t>(oy * window + dy) * w + ox * window + dx];
        op[static_cast<std::size_t>(oy) * ow + ox] = acc * inv;
      }
    }
  }
}

template <class S>
void avgpool_backward(S* gin, const S* gout, int batch, int ch, int h, int w, int window) {
  const int oh = h / window, ow = w / window;
  const S inv = S(1) / static_cast<S>(window * window);
  const std::size_t planes = static_cast<std::size_t>(batch) * ch;
  for (std::size_t p = 0; p < planes; ++p) {
    S* gp = gin + p * static_cast<std::size_t>(h) * w;
    const S* gop = gout + p * static_cast<std::size_t>(oh) * ow;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const S g = gop[static_cast<std::size_t>(oy) * ow + ox] * inv;
        for (int dy = 0; dy < window; ++dy)
          for (int dx = 0; dx < window; ++dx)
            gp[static_cast<std::size_t>(oy * window + dy) * w + ox * window + dx] += g;
      }
    }
  }
}

#define SPIKESEG_INSTANTIATE_KERNELS(S)                                                       \
  template void conv2d_forward<S>(const S*, const S*, S*, const ConvSpec&, bool);             \
  template void conv2d_grad_input<S>(S*, const S*, const S*, const ConvSpec&, bool);          \
  template void conv2d_grad_weight<S>(const S*, S*, const S*, const ConvSpec&, bool);         \
  template void tconv2d_forward<S>(const S*, const S*, S*, const ConvSpec&, bool);            \
  template void tconv2d_grad_input<S>(S*, const S*, const S*, const ConvSpec&, bool);         \
  template void tconv2d_grad_weight<S>(const S*, S*, const S*, const ConvSpec&, bool);        \
  template void avgpool_forward<S>(const S*, S*, int, int, int, int, int);                    \
  template void avgpool_backward<S>(S*, const S*, int, int, int, int, int);

SPIKESEG_INSTANTIATE_KERNELS(float)
SPIKESEG_INSTANTIATE_KERNELS(double)

#undef SPIKESEG_INSTANTIATE_KERNELS

}  // namespace spikeseg::kernels
