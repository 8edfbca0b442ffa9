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

#ifndef TANGO_OPS_HPP
#define TANGO_OPS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "tango/counters.hpp"
#include "tango/tensor.hpp"

namespace tango {

// Layer kernels. Every kernel is a pure function of its inputs: it
// allocates a fresh output, never mutates an argument, and produces
// bit-identical results for any worker count (each output scalar is
// computed by one worker with a fixed reduction order).

struct ConvParams {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int pad = 0;
  int groups = 1;
};

enum class PoolMode { max, average };

struct PoolParams {
  int window = 2;
  int stride = 2;
  PoolMode mode = PoolMode::max;
};

struct LrnParams {
  int local_size = 5;  // odd window across channels
  float k = 1.0f;
  float alpha = 1e-4f;
  float beta = 0.75f;
};

/// Squeeze + parallel 1x1/3x3 expand convolutions joined channel-wise.
/// Kernel geometry is fixed by construction: squeeze and expand1x1 are
/// 1x1, expand3x3 is 3x3 pad 1, all strides 1.
struct FireSpec {
  ConvParams squeeze;
  ConvParams expand1x1;
  ConvParams expand3x3;
};

FireSpec make_fire_spec(int in_channels, int squeeze_channels, int expand1x1_channels,
                        int expand3x3_channels);

enum class RnnKind { lstm, gru };

/// One gate's affine maps: w is (hidden x input), u is (hidden x hidden),
/// b is (hidden).
struct RnnGateWeights {
  Tensor w;
  Tensor u;
  Tensor b;
};

/// Gate order is fixed: LSTM {input, forget, output, candidate},
/// GRU {update, reset, candidate}.
struct RnnCellWeights {
  RnnKind kind = RnnKind::lstm;
  int input_dim = 0;
  int hidden_dim = 0;
  std::vector<RnnGateWeights> gates;

  int gate_count() const { return kind == RnnKind::lstm ? 4 : 3; }
  void validate() const;
};

// Output extents follow the Caffe conventions the reference models use:
// convolution floors the strided division, pooling ceils it (a window may
// start in bounds and hang over the edge; average pooling then divides by
// the in-bounds tap count).
int conv_output_extent(int input, int kernel, int stride, int pad);
int pool_output_extent(int input, int window, int stride);

/// out(o,y,x) = bias(o) + sum over the o's group channels and kernel taps,
/// out-of-bounds taps reading zero. `weights` holds Cout filters of
/// (Cin/groups)*Kh*Kw values each, laid out (out ch, in ch, row, col).
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const ConvParams& p, ExecContext& ctx);

Tensor pool2d(const Tensor& input, const PoolParams& p, ExecContext& ctx);

/// Per-channel mean over the full spatial extent; (C,H,W) -> (C).
Tensor global_avg_pool(const Tensor& input, ExecContext& ctx);

Tensor relu(const Tensor& input, ExecContext& ctx);

/// Across-channel local response normalization:
/// out = in / (k + alpha/n * sum of squares over the channel window)^beta.
Tensor lrn(const Tensor& input, const LrnParams& p, ExecContext& ctx);

/// out = (in - mean(c)) / sqrt(var(c) + eps), inference form.
Tensor batchnorm_inference(const Tensor& input, const Tensor& mean, const Tensor& var,
                           float eps, ExecContext& ctx);

/// out = gamma(c) * in + beta(c).
Tensor scale_shift(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                   ExecContext& ctx);

Tensor eltwise_add(const Tensor& a, const Tensor& b, ExecContext& ctx);

/// Dense transform: out(m) = bias(m) + sum_n w(m,n) * in(n). The input may
/// be any rank; it is consumed flattened in layout order.
Tensor fully_connected(const Tensor& input, const Tensor& weights, const Tensor& bias,
                       ExecContext& ctx);

/// Max-shifted exponential normalization; outputs in (0,1], summing to 1.
Tensor softmax(const Tensor& input, ExecContext& ctx);

/// relu(conv) squeeze stage followed by two relu(conv) expand stages whose
/// outputs land in the channel-concatenated result. Bit-identical to the
/// hand-assembled conv2d/relu/concat_channels pipeline.
Tensor fire_module(const Tensor& input, const FireSpec& spec, const Tensor& squeeze_w,
                   const Tensor& squeeze_b, const Tensor& expand1_w, const Tensor& expand1_b,
                   const Tensor& expand3_w, const Tensor& expand3_b, ExecContext& ctx);

/// One LSTM step:
///   i,f,o = sigmoid(W x + U h + b), g = tanh(Wg x + Ug h + bg)
///   c' = f.c + i.g,  h' = o.tanh(c')
std::pair<Tensor, Tensor> lstm_cell(const Tensor& x, const Tensor& h, const Tensor& c,
                                    const RnnCellWeights& w, ExecContext& ctx);

/// One GRU step:
///   z,r = sigmoid(W x + U h + b), hc = tanh(Wh x + Uh (r.h) + bh)
///   h' = (1-z).h + z.hc
Tensor gru_cell(const Tensor& x, const Tensor& h, const RnnCellWeights& w, ExecContext& ctx);

/// Runs the cell over the sequence from zero state and projects the final
/// hidden state to one scalar through a fully-connected head.
Tensor rnn_forecast(const std::vector<Tensor>& sequence, const RnnCellWeights& w,
                    const Tensor& head_weights, const Tensor& head_bias, ExecContext& ctx);

namespace detail {

// Convolution core shared by conv2d and fire stages: writes the filters'
// outputs into `out` starting at channel `out_channel_offset`, optionally
// clamping negatives (fused relu). Counter charges per output scalar are
// geometry-determined: taps mads, 1 bias add, 2*taps+1 loads, 1 store
// (+1 max_cmp when fused with relu).
void conv2d_into(const Tensor& input, const Tensor& weights, const Tensor& bias,
                 const ConvParams& p, bool fuse_relu, int out_channel_offset, Tensor& out,
                 ExecContext& ctx);

// Raw-buffer cell cores used by both the public cell ops and the network
// executor's sequence loop.
void lstm_step(const float* x, const float* h, const float* c, const RnnCellWeights& w,
               float* h_out, float* c_out, ExecContext& ctx);
void gru_step(const float* x, const float* h, const RnnCellWeights& w, float* h_out,
              ExecContext& ctx);

}  // namespace detail

}  // namespace tango

#endif  // TANGO_OPS_HPP
