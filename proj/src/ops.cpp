/*
 * Copyright (c) 2026 the tango authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tango/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace tango {

namespace {

// Runs body(begin, end, worker_counters) over [0, n) and merges the
// per-worker tallies into ctx.counters in worker order.
template <typename Body>
void run_counted(ExecContext& ctx, std::int64_t n, Body&& body) {
  const int workers = ctx.pool.workers();
  std::vector<OpCounters> per_worker(static_cast<std::size_t>(workers));
  ctx.pool.for_chunks(n, [&](std::int64_t begin, std::int64_t end, int w) {
    body(begin, end, per_worker[static_cast<std::size_t>(w)]);
  });
  for (const auto& c : per_worker) ctx.counters += c;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

float sigmoid_counted(float z, OpCounters& c) {
  c[OpCategory::exp_tanh] += 1;
  c[OpCategory::add] += 1;
  c[OpCategory::div] += 1;
  return 1.0f / (1.0f + std::exp(-z));
}

float tanh_counted(float z, OpCounters& c) {
  c[OpCategory::exp_tanh] += 1;
  return std::tanh(z);
}

// Gate pre-activation: out(j) = b(j) + W(j,:) x + U(j,:) h.
void gate_affine(const float* x, int input_dim, const float* h, int hidden_dim,
                 const RnnGateWeights& g, float* out, OpCounters& c) {
  const float* wp = g.w.data();
  const float* up = g.u.data();
  const float* bp = g.b.data();
  for (int j = 0; j < hidden_dim; ++j) {
    float acc = bp[j];
    const float* wrow = wp + static_cast<std::int64_t>(j) * input_dim;
    for (int d = 0; d < input_dim; ++d) acc += wrow[d] * x[d];
    const float* urow = up + static_cast<std::int64_t>(j) * hidden_dim;
    for (int k = 0; k < hidden_dim; ++k) acc += urow[k] * h[k];
    out[j] = acc;
  }
  const auto rows = static_cast<std::uint64_t>(hidden_dim);
  const auto taps = static_cast<std::uint64_t>(input_dim + hidden_dim);
  c[OpCategory::add] += rows;
  c[OpCategory::mad] += rows * taps;
  c[OpCategory::load] += rows * (2 * taps + 1);
  c[OpCategory::store] += rows;
}

}  // namespace

int conv_output_extent(int input, int kernel, int stride, int pad) {
  return (input + 2 * pad - kernel) / stride + 1;
}

int pool_output_extent(int input, int window, int stride) {
  return (input - window + stride - 1) / stride + 1;
}

FireSpec make_fire_spec(int in_channels, int squeeze_channels, int expand1x1_channels,
                        int expand3x3_channels) {
  FireSpec f;
  f.squeeze = {.in_channels = in_channels, .out_channels = squeeze_channels, .kernel_h = 1, .kernel_w = 1};
  f.expand1x1 = {.in_channels = squeeze_channels, .out_channels = expand1x1_channels, .kernel_h = 1, .kernel_w = 1};
  f.expand3x3 = {.in_channels = squeeze_channels, .out_channels = expand3x3_channels,
                 .kernel_h = 3, .kernel_w = 3, .stride = 1, .pad = 1};
  return f;
}

void RnnCellWeights::validate() const {
  if (hidden_dim < 1 || input_dim < 1) {
    throw ShapeError("rnn cell dims must be >= 1");
  }
  if (static_cast<int>(gates.size()) != gate_count()) {
    throw ShapeError("rnn cell expects " + std::to_string(gate_count()) + " gates, got " +
                     std::to_string(gates.size()));
  }
  for (const auto& g : gates) {
    if (g.w.count() != static_cast<std::int64_t>(hidden_dim) * input_dim ||
        g.u.count() != static_cast<std::int64_t>(hidden_dim) * hidden_dim ||
        g.b.count() != hidden_dim) {
      throw ShapeError("rnn gate weights do not conform to dims (" + std::to_string(hidden_dim) +
                       "," + std::to_string(input_dim) + ")");
    }
  }
}

namespace detail {

void conv2d_into(const Tensor& input, const Tensor& weights, const Tensor& bias,
                 const ConvParams& p, bool fuse_relu, int out_channel_offset, Tensor& out,
                 ExecContext& ctx) {
  require(input.shape().rank() == 3, "conv2d input must be rank 3");
  const int cin = input.shape().channels();
  const int h = input.shape().height();
  const int w = input.shape().width();
  require(p.groups >= 1 && p.in_channels % p.groups == 0 && p.out_channels % p.groups == 0,
          "conv2d channels must divide groups");
  require(p.in_channels == cin, "conv2d expects " + std::to_string(p.in_channels) +
                                    " input channels, got " + std::to_string(cin));
  require(p.kernel_h >= 1 && p.kernel_w >= 1 && p.stride >= 1 && p.pad >= 0,
          "conv2d kernel geometry invalid");
  const int cin_g = p.in_channels / p.groups;
  const int cout_g = p.out_channels / p.groups;
  const std::int64_t taps = static_cast<std::int64_t>(cin_g) * p.kernel_h * p.kernel_w;
  require(weights.count() == taps * p.out_channels, "conv2d weight tensor has " +
                                                        std::to_string(weights.count()) +
                                                        " values, expected " +
                                                        std::to_string(taps * p.out_channels));
  require(bias.count() == p.out_channels, "conv2d bias length mismatch");

  const int ho = conv_output_extent(h, p.kernel_h, p.stride, p.pad);
  const int wo = conv_output_extent(w, p.kernel_w, p.stride, p.pad);
  require(ho >= 1 && wo >= 1, "conv2d output extent must be positive");
  require(out.shape().rank() == 3 && out.shape().height() == ho && out.shape().width() == wo &&
              out_channel_offset + p.out_channels <= out.shape().channels(),
          "conv2d output tensor does not fit");

  const float* in_ptr = input.data();
  const float* w_ptr = weights.data();
  const float* b_ptr = bias.data();
  float* out_ptr = out.data();

  const std::int64_t n = static_cast<std::int64_t>(p.out_channels) * ho * wo;
  run_counted(ctx, n, [&](std::int64_t begin, std::int64_t end, OpCounters& c) {
    for (std::int64_t i = begin; i < end; ++i) {
      const int o = static_cast<int>(i / (static_cast<std::int64_t>(ho) * wo));
      const int rem = static_cast<int>(i % (static_cast<std::int64_t>(ho) * wo));
      const int y = rem / wo;
      const int x = rem % wo;
      const int group = o / cout_g;
      const int iy0 = y * p.stride - p.pad;
      const int ix0 = x * p.stride - p.pad;
      const int u_lo = std::max(0, -iy0);
      const int u_hi = std::min(p.kernel_h, h - iy0);
      const int v_lo = std::max(0, -ix0);
      const int v_hi = std::min(p.kernel_w, w - ix0);

      float acc = b_ptr[o];
      const float* w_filter = w_ptr + static_cast<std::int64_t>(o) * taps;
      const float* in_group = in_ptr + static_cast<std::int64_t>(group) * cin_g * h * w;
      for (int cc = 0; cc < cin_g; ++cc) {
        const float* in_ch = in_group + static_cast<std::int64_t>(cc) * h * w;
        const float* w_ch = w_filter + static_cast<std::int64_t>(cc) * p.kernel_h * p.kernel_w;
        for (int u = u_lo; u < u_hi; ++u) {
          const float* in_row = in_ch + static_cast<std::int64_t>(iy0 + u) * w + ix0;
          const float* w_row = w_ch + static_cast<std::int64_t>(u) * p.kernel_w;
          for (int v = v_lo; v < v_hi; ++v) acc += w_row[v] * in_row[v];
        }
      }
      if (fuse_relu && acc < 0.0f) acc = 0.0f;
      out_ptr[(static_cast<std::int64_t>(out_channel_offset + o) * ho + y) * wo + x] = acc;
    }
    // Padded taps are semantic multiply-accumulates with a zero operand,
    // so the charge per output scalar is geometry-fixed.
    const auto outs = static_cast<std::uint64_t>(end - begin);
    c[OpCategory::mad] += outs * static_cast<std::uint64_t>(taps);
    c[OpCategory::add] += outs;
    c[OpCategory::load] += outs * (2 * static_cast<std::uint64_t>(taps) + 1);
    c[OpCategory::store] += outs;
    if (fuse_relu) c[OpCategory::max_cmp] += outs;
  });
}

void lstm_step(const float* x, const float* h, const float* cell, const RnnCellWeights& w,
               float* h_out, float* c_out, ExecContext& ctx) {
  const int hd = w.hidden_dim;
  std::vector<float> gi(static_cast<std::size_t>(hd)), gf(gi), go(gi), gg(gi);
  OpCounters c;
  gate_affine(x, w.input_dim, h, hd, w.gates[0], gi.data(), c);
  gate_affine(x, w.input_dim, h, hd, w.gates[1], gf.data(), c);
  gate_affine(x, w.input_dim, h, hd, w.gates[2], go.data(), c);
  gate_affine(x, w.input_dim, h, hd, w.gates[3], gg.data(), c);
  for (int j = 0; j < hd; ++j) {
    const float i_g = sigmoid_counted(gi[j], c);
    const float f_g = sigmoid_counted(gf[j], c);
    const float o_g = sigmoid_counted(go[j], c);
    const float g_g = tanh_counted(gg[j], c);
    float cv = f_g * cell[j];
    cv += i_g * g_g;
    c_out[j] = cv;
    h_out[j] = o_g * tanh_counted(cv, c);
  }
  const auto n = static_cast<std::uint64_t>(hd);
  c[OpCategory::mul] += 2 * n;  // f.c and o.tanh(c')
  c[OpCategory::mad] += n;      // i.g accumulated onto f.c
  c[OpCategory::load] += 5 * n;
  c[OpCategory::store] += 2 * n;
  ctx.counters += c;
}

void gru_step(const float* x, const float* h, const RnnCellWeights& w, float* h_out,
              ExecContext& ctx) {
  const int hd = w.hidden_dim;
  std::vector<float> gz(static_cast<std::size_t>(hd)), gr(gz), gc(gz), rh(gz);
  OpCounters c;
  gate_affine(x, w.input_dim, h, hd, w.gates[0], gz.data(), c);
  gate_affine(x, w.input_dim, h, hd, w.gates[1], gr.data(), c);
  for (int j = 0; j < hd; ++j) {
    rh[j] = sigmoid_counted(gr[j], c) * h[j];
  }
  c[OpCategory::mul] += static_cast<std::uint64_t>(hd);
  gate_affine(x, w.input_dim, rh.data(), hd, w.gates[2], gc.data(), c);
  for (int j = 0; j < hd; ++j) {
    const float z = sigmoid_counted(gz[j], c);
    const float cand = tanh_counted(gc[j], c);
    float acc = z * cand;
    acc += (1.0f - z) * h[j];
    h_out[j] = acc;
  }
  const auto n = static_cast<std::uint64_t>(hd);
  c[OpCategory::add] += n;  // 1-z
  c[OpCategory::mul] += n;  // z.hc
  c[OpCategory::mad] += n;  // (1-z).h accumulated
  c[OpCategory::load] += 4 * n;
  c[OpCategory::store] += n;
  ctx.counters += c;
}

}  // namespace detail

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const ConvParams& p, ExecContext& ctx) {
  require(input.shape().rank() == 3, "conv2d input must be rank 3");
  const int ho = conv_output_extent(input.shape().height(), p.kernel_h, p.stride, p.pad);
  const int wo = conv_output_extent(input.shape().width(), p.kernel_w, p.stride, p.pad);
  require(ho >= 1 && wo >= 1, "conv2d output extent must be positive for input " +
                                  input.shape().to_string());
  Tensor out = Tensor::zeros(Shape{p.out_channels, ho, wo});
  detail::conv2d_into(input, weights, bias, p, /*fuse_relu=*/false, 0, out, ctx);
  return out;
}

Tensor pool2d(const Tensor& input, const PoolParams& p, ExecContext& ctx) {
  require(input.shape().rank() == 3, "pool2d input must be rank 3");
  require(p.window >= 1 && p.stride >= 1, "pool2d window/stride must be >= 1");
  const int ch = input.shape().channels();
  const int h = input.shape().height();
  const int w = input.shape().width();
  require(p.window <= h && p.window <= w,
          "pool window " + std::to_string(p.window) + " larger than input " +
              input.shape().to_string());
  const int ho = pool_output_extent(h, p.window, p.stride);
  const int wo = pool_output_extent(w, p.window, p.stride);
  // Ceil mode: the last window may hang over the edge but must start in bounds.
  require((ho - 1) * p.stride < h && (wo - 1) * p.stride < w,
          "pool stride leaves an empty trailing window");

  Tensor out = Tensor::zeros(Shape{ch, ho, wo});
  const float* in_ptr = input.data();
  float* out_ptr = out.data();

  const std::int64_t n = static_cast<std::int64_t>(ch) * ho * wo;
  run_counted(ctx, n, [&](std::int64_t begin, std::int64_t end, OpCounters& c) {
    for (std::int64_t i = begin; i < end; ++i) {
      const int cc = static_cast<int>(i / (static_cast<std::int64_t>(ho) * wo));
      const int rem = static_cast<int>(i % (static_cast<std::int64_t>(ho) * wo));
      const int y = rem / wo;
      const int x = rem % wo;
      const int y0 = y * p.stride;
      const int x0 = x * p.stride;
      const int y1 = std::min(y0 + p.window, h);
      const int x1 = std::min(x0 + p.window, w);
      const float* in_ch = in_ptr + static_cast<std::int64_t>(cc) * h * w;
      const auto count = static_cast<std::uint64_t>(y1 - y0) * static_cast<std::uint64_t>(x1 - x0);

      float result;
      if (p.mode == PoolMode::max) {
        float m = in_ch[static_cast<std::int64_t>(y0) * w + x0];
        for (int yy = y0; yy < y1; ++yy) {
          const float* row = in_ch + static_cast<std::int64_t>(yy) * w;
          for (int xx = x0; xx < x1; ++xx) {
            if (!(yy == y0 && xx == x0) && row[xx] > m) m = row[xx];
          }
        }
        result = m;
        c[OpCategory::max_cmp] += count - 1;
      } else {
        float acc = 0.0f;
        for (int yy = y0; yy < y1; ++yy) {
          const float* row = in_ch + static_cast<std::int64_t>(yy) * w;
          for (int xx = x0; xx < x1; ++xx) acc += row[xx];
        }
        result = acc / static_cast<float>(count);
        c[OpCategory::add] += count;
        c[OpCategory::div] += 1;
      }
      out_ptr[(static_cast<std::int64_t>(cc) * ho + y) * wo + x] = result;
      c[OpCategory::load] += count;
      c[OpCategory::store] += 1;
    }
  });
  return out;
}

Tensor global_avg_pool(const Tensor& input, ExecContext& ctx) {
  require(input.shape().rank() == 3, "global_avg_pool input must be rank 3");
  const int ch = input.shape().channels();
  const std::int64_t hw = static_cast<std::int64_t>(input.shape().height()) * input.shape().width();
  Tensor out = Tensor::zeros(Shape{ch});
  const float* in_ptr = input.data();
  float* out_ptr = out.data();

  run_counted(ctx, ch, [&](std::int64_t begin, std::int64_t end, OpCounters& c) {
    for (std::int64_t cc = begin; cc < end; ++cc) {
      const float* in_ch = in_ptr + cc * hw;
      float acc = 0.0f;
      for (std::int64_t i = 0; i < hw; ++i) acc += in_ch[i];
      out_ptr[cc] = acc / static_cast<float>(hw);
    }
    const auto chans = static_cast<std::uint64_t>(end - begin);
    c[OpCategory::add] += chans * static_cast<std::uint64_t>(hw);
    c[OpCategory::div] += chans;
    c[OpCategory::load] += chans * static_cast<std::uint64_t>(hw);
    c[OpCategory::store] += chans;
  });
  return out;
}

Tensor relu(const Tensor& input, ExecContext& ctx) {
  Tensor out = Tensor::zeros(input.shape());
  const float* in_ptr = input.data();
  float* out_ptr = out.data();
  run_counted(ctx, input.count(), [&](std::int64_t begin, std::int64_t end, OpCounters& c) {
    for (std::int64_t i = begin; i < end; ++i) {
      const float v = in_ptr[i];
      out_ptr[i] = v > 0.0f ? v : 0.0f;
    }
    const auto n = static_cast<std::uint64_t>(end - begin);
    c[OpCategory::max_cmp] += n;
    c[OpCategory::load] += n;
    c[OpCategory::store] += n;
  });
  return out;
}

Tensor lrn(const Tensor& input, const LrnParams& p, ExecContext& ctx) {
  require(input.shape().rank() == 3, "lrn input must be rank 3");
  require(p.local_size >= 1 && p.local_size % 2 == 1, "lrn local_size must be odd");
  require(p.beta >= 0.0f && p.k >= 0.0f && p.alpha >= 0.0f, "lrn parameters must be non-negative");
  const int ch = input.shape().channels();
  const int h = input.shape().height();
  const int w = input.shape().width();
  const int half = p.local_size / 2;
  const float scale = p.alpha / static_cast<float>(p.local_size);
  ctx.counters[OpCategory::div] += 1;  // alpha/n

  Tensor out = Tensor::zeros(input.shape());
  const float* in_ptr = input.data();
  float* out_ptr = out.data();
  const std::int64_t hw = static_cast<std::int64_t>(h) * w;

  run_counted(ctx, input.count(), [&](std::int64_t begin, std::int64_t end, OpCounters& c) {
    for (std::int64_t i = begin; i < end; ++i) {
      const int cc = static_cast<int>(i / hw);
      const std::int64_t pix = i % hw;
      const int c_lo = std::max(0, cc - half);
      const int c_hi = std::min(ch - 1, cc + half);
      float acc = 0.0f;
      for (int k = c_lo; k <= c_hi; ++k) {
        const float v = in_ptr[k * hw + pix];
        acc += v * v;
      }
      const float denom = std::pow(p.k + scale * acc, p.beta);
      out_ptr[i] = in_ptr[i] / denom;
      const auto window = static_cast<std::uint64_t>(c_hi - c_lo + 1);
      c[OpCategory::mul] += window;
      c[OpCategory::add] += window;
      c[OpCategory::mad] += 1;  // k + scale*acc
      c[OpCategory::exp_tanh] += 1;
      c[OpCategory::div] += 1;
      c[OpCategory::load] += window + 1;
      c[OpCategory::store] += 1;
    }
  });
  return out;
}

Tensor batchnorm_inference(const Tensor& input, const Tensor& mean, const Tensor& var,
                           float eps, ExecContext& ctx) {
  require(input.shape().rank() == 3, "batchnorm input must be rank 3");
  const int ch = input.shape().channels();
  require(mean.count() == ch && var.count() == ch, "batchnorm stats length mismatch");
  for (int c = 0; c < ch; ++c) {
    if (var[c] < 0.0f) {
      throw DataError("batchnorm variance is negative at channel " + std::to_string(c));
    }
  }
  const std::int64_t hw = static_cast<std::int64_t>(input.shape().height()) * input.shape().width();
  Tensor out = Tensor::zeros(input.shape());
  const float* in_ptr = input.data();
  const float* mean_ptr = mean.data();
  const float* var_ptr = var.data();
  float* out_ptr = out.data();

  run_counted(ctx, ch, [&](std::int64_t begin, std::int64_t end, OpCounters& c) {
    for (std::int64_t cc = begin; cc < end; ++cc) {
      const float m = mean_ptr[cc];
      const float inv = 1.0f / std::sqrt(var_ptr[cc] + eps);
      const float* in_ch = in_ptr + cc * hw;
      float* out_ch = out_ptr + cc * hw;
      for (std::int64_t i = 0; i < hw; ++i) out_ch[i] = (in_ch[i] - m) * inv;
    }
    const auto chans = static_cast<std::uint64_t>(end - begin);
    const auto n = chans * static_cast<std::uint64_t>(hw);
    c[OpCategory::add] += n + chans;       // x-mean per value, var+eps per channel
    c[OpCategory::mul] += n;
    c[OpCategory::exp_tanh] += chans;      // sqrt
    c[OpCategory::div] += chans;
    c[OpCategory::load] += n + 2 * chans;
    c[OpCategory::store] += n;
  });
  return out;
}

Tensor scale_shift(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                   ExecContext& ctx) {
  require(input.shape().rank() == 3, "scale input must be rank 3");
  const int ch = input.shape().channels();
  require(gamma.count() == ch && beta.count() == ch, "scale parameter length mismatch");
  const std::int64_t hw = static_cast<std::int64_t>(input.shape().height()) * input.shape().width();
  Tensor out = Tensor::zeros(input.shape());
  const float* in_ptr = input.data();
  const float* g_ptr = gamma.data();
  const float* b_ptr = beta.data();
  float* out_ptr = out.data();

  run_counted(ctx, ch, [&](std::int64_t begin, std::int64_t end, OpCounters& c) {
    for (std::int64_t cc = begin; cc < end; ++cc) {
      const float g = g_ptr[cc];
      const float b = b_ptr[cc];
      const float* in_ch = in_ptr + cc * hw;
      float* out_ch = out_ptr + cc * hw;
      for (std::int64_t i = 0; i < hw; ++i) {
        float acc = b;
        acc += g * in_ch[i];
        out_ch[i] = acc;
      }
    }
    const auto chans = static_cast<std::uint64_t>(end - begin);
    const auto n = chans * static_cast<std::uint64_t>(hw);
    c[OpCategory::mad] += n;
    c[OpCategory::load] += n + 2 * chans;
    c[OpCategory::store] += n;
  });
  return out;
}

Tensor eltwise_add(const Tensor& a, const Tensor& b, ExecContext& ctx) {
  if (a.shape() != b.shape()) {
    throw ShapeError("eltwise_add shape mismatch: " + a.shape().to_string() + " vs " +
                     b.shape().to_string());
  }
  Tensor out = Tensor::zeros(a.shape());
  const float* ap = a.data();
  const float* bp = b.data();
  float* op = out.data();
  run_counted(ctx, a.count(), [&](std::int64_t begin, std::int64_t end, OpCounters& c) {
    for (std::int64_t i = begin; i < end; ++i) op[i] = ap[i] + bp[i];
    const auto n = static_cast<std::uint64_t>(end - begin);
    c[OpCategory::add] += n;
    c[OpCategory::load] += 2 * n;
    c[OpCategory::store] += n;
  });
  return out;
}

Tensor fully_connected(const Tensor& input, const Tensor& weights, const Tensor& bias,
                       ExecContext& ctx) {
  const std::int64_t n_in = input.count();
  const std::int64_t m = bias.count();
  require(m >= 1, "fully_connected needs at least one output");
  require(weights.count() == m * n_in, "fully_connected expects " + std::to_string(m) + "x" +
                                           std::to_string(n_in) + " weights, got " +
                                           std::to_string(weights.count()) + " values");
  Tensor out = Tensor::zeros(Shape{static_cast<int>(m)});
  const float* in_ptr = input.data();
  const float* w_ptr = weights.data();
  const float* b_ptr = bias.data();
  float* out_ptr = out.data();

  run_counted(ctx, m, [&](std::int64_t begin, std::int64_t end, OpCounters& c) {
    for (std::int64_t j = begin; j < end; ++j) {
      const float* row = w_ptr + j * n_in;
      float acc = b_ptr[j];
      for (std::int64_t i = 0; i < n_in; ++i) acc += row[i] * in_ptr[i];
      out_ptr[j] = acc;
    }
    const auto rows = static_cast<std::uint64_t>(end - begin);
    c[OpCategory::mad] += rows * static_cast<std::uint64_t>(n_in);
    c[OpCategory::add] += rows;
    c[OpCategory::load] += rows * (2 * static_cast<std::uint64_t>(n_in) + 1);
    c[OpCategory::store] += rows;
  });
  return out;
}

Tensor softmax(const Tensor& input, ExecContext& ctx) {
  const std::int64_t n = input.count();
  require(n >= 1, "softmax needs at least one value");
  Tensor out = Tensor::zeros(input.shape());
  const float* in_ptr = input.data();
  float* out_ptr = out.data();

  // Small and serial; internal accumulation in double keeps the float
  // output within half an ulp of the exact shifted form.
  float max_v = in_ptr[0];
  for (std::int64_t i = 1; i < n; ++i) max_v = std::max(max_v, in_ptr[i]);
  double sum = 0.0;
  std::vector<double> shifted(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    shifted[static_cast<std::size_t>(i)] = std::exp(static_cast<double>(in_ptr[i]) - max_v);
    sum += shifted[static_cast<std::size_t>(i)];
  }
  for (std::int64_t i = 0; i < n; ++i) {
    out_ptr[i] = static_cast<float>(shifted[static_cast<std::size_t>(i)] / sum);
  }

  auto& c = ctx.counters;
  const auto un = static_cast<std::uint64_t>(n);
  c[OpCategory::max_cmp] += un - 1;
  c[OpCategory::add] += 2 * un;  // shift and sum
  c[OpCategory::exp_tanh] += un;
  c[OpCategory::div] += un;
  c[OpCategory::load] += 3 * un;
  c[OpCategory::store] += 2 * un;
  return out;
}

Tensor fire_module(const Tensor& input, const FireSpec& spec, const Tensor& squeeze_w,
                   const Tensor& squeeze_b, const Tensor& expand1_w, const Tensor& expand1_b,
                   const Tensor& expand3_w, const Tensor& expand3_b, ExecContext& ctx) {
  require(spec.squeeze.kernel_h == 1 && spec.squeeze.kernel_w == 1 && spec.squeeze.stride == 1,
          "fire squeeze must be 1x1 stride 1");
  require(spec.expand1x1.kernel_h == 1 && spec.expand1x1.kernel_w == 1 &&
              spec.expand1x1.stride == 1 && spec.expand1x1.pad == 0,
          "fire expand1x1 must be 1x1 stride 1");
  require(spec.expand3x3.kernel_h == 3 && spec.expand3x3.kernel_w == 3 &&
              spec.expand3x3.stride == 1 && spec.expand3x3.pad == 1,
          "fire expand3x3 must be 3x3 pad 1 stride 1");
  require(spec.expand1x1.in_channels == spec.squeeze.out_channels &&
              spec.expand3x3.in_channels == spec.squeeze.out_channels,
          "fire expand input channels must match squeeze output");

  const int h = input.shape().height();
  const int w = input.shape().width();
  Tensor squeezed = Tensor::zeros(Shape{spec.squeeze.out_channels, h, w});
  detail::conv2d_into(input, squeeze_w, squeeze_b, spec.squeeze, /*fuse_relu=*/true, 0, squeezed,
                      ctx);
  Tensor out =
      Tensor::zeros(Shape{spec.expand1x1.out_channels + spec.expand3x3.out_channels, h, w});
  detail::conv2d_into(squeezed, expand1_w, expand1_b, spec.expand1x1, /*fuse_relu=*/true, 0, out,
                      ctx);
  detail::conv2d_into(squeezed, expand3_w, expand3_b, spec.expand3x3, /*fuse_relu=*/true,
                      spec.expand1x1.out_channels, out, ctx);
  return out;
}

std::pair<Tensor, Tensor> lstm_cell(const Tensor& x, const Tensor& h, const Tensor& c,
                                    const RnnCellWeights& w, ExecContext& ctx) {
  if (w.kind != RnnKind::lstm) throw ShapeError("lstm_cell called with non-LSTM weights");
  w.validate();
  require(x.count() == w.input_dim && h.count() == w.hidden_dim && c.count() == w.hidden_dim,
          "lstm_cell state dims do not conform");
  Tensor h_out = Tensor::zeros(Shape{w.hidden_dim});
  Tensor c_out = Tensor::zeros(Shape{w.hidden_dim});
  detail::lstm_step(x.data(), h.data(), c.data(), w, h_out.data(), c_out.data(), ctx);
  return {std::move(h_out), std::move(c_out)};
}

Tensor gru_cell(const Tensor& x, const Tensor& h, const RnnCellWeights& w, ExecContext& ctx) {
  if (w.kind != RnnKind::gru) throw ShapeError("gru_cell called with non-GRU weights");
  w.validate();
  require(x.count() == w.input_dim && h.count() == w.hidden_dim,
          "gru_cell state dims do not conform");
  Tensor h_out = Tensor::zeros(Shape{w.hidden_dim});
  detail::gru_step(x.data(), h.data(), w, h_out.data(), ctx);
  return h_out;
}

Tensor rnn_forecast(const std::vector<Tensor>& sequence, const RnnCellWeights& w,
                    const Tensor& head_weights, const Tensor& head_bias, ExecContext& ctx) {
  if (sequence.empty()) throw InputError("rnn_forecast needs a non-empty sequence");
  w.validate();
  std::vector<float> h(static_cast<std::size_t>(w.hidden_dim), 0.0f);
  std::vector<float> cell(static_cast<std::size_t>(w.hidden_dim), 0.0f);
  std::vector<float> h_next(h), c_next(cell);
  for (const Tensor& x : sequence) {
    require(x.count() == w.input_dim, "sequence element does not match input_dim");
    if (w.kind == RnnKind::lstm) {
      detail::lstm_step(x.data(), h.data(), cell.data(), w, h_next.data(), c_next.data(), ctx);
      cell.swap(c_next);
    } else {
      detail::gru_step(x.data(), h.data(), w, h_next.data(), ctx);
    }
    h.swap(h_next);
  }
  const Tensor hidden = Tensor::from_buffer(Shape{w.hidden_dim}, h);
  return fully_connected(hidden, head_weights, head_bias, ctx);
}

}  // namespace tango
