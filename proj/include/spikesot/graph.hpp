// Copyright 2026 The spikesot Authors.
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

// Minimal reverse-mode differentiation over tensor-valued nodes.
//
// Every model operation produces a Node. With no Tape active the node just
// carries its value; inside a TapeScope, nodes that depend on a trainable
// leaf also record a backward closure and are appended to the tape, which
// is therefore already in topological order.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spikesot/kernels.hpp"
#include "spikesot/neuron.hpp"
#include "spikesot/nnops.hpp"
#include "spikesot/tensor.hpp"

namespace spikesot::ag {

struct Node {
  DenseTensor value;
  DenseTensor grad;
  /// Present when `value` is the dense view of integer spikes.
  std::optional<SpikeTensor> spikes;
  std::function<void(Node&)> backward;
  bool requires_grad = false;

  void accumulate(const DenseTensor& g);
  bool has_grad() const { return !grad.empty(); }
};

using Var = std::shared_ptr<Node>;

class Tape {
 public:
  void record(const Var& v) { nodes_.push_back(v); }
  /// Seeds d(loss)/d(loss) = 1 and runs every recorded closure once, newest
  /// first.
  void backward(const Var& loss);
  std::size_t size() const { return nodes_.size(); }
  std::size_t backward_visits() const { return visits_; }
  void clear() { nodes_.clear(); }

 private:
  std::vector<Var> nodes_;
  std::size_t visits_ = 0;
};

Tape* active_tape();

class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Var constant(DenseTensor value);
Var spike_constant(SpikeTensor spikes);
Var leaf(DenseTensor value, bool requires_grad);

// Elementwise.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var sigmoid(const Var& a);

// Layout. Spike annotations survive these.
Var reshape(const Var& a, Shape shape);
/// [T, C, H, W] -> [T, H*W, C]
Var to_tokens(const Var& a);
/// [T, N, C] -> [T, C, h, w]
Var from_tokens(const Var& a, std::size_t h, std::size_t w);
Var slice_time(const Var& a, std::size_t t);
Var concat_time(const std::vector<Var>& parts);
Var repeat_time(const Var& a, std::size_t times);
Var sum_time(const Var& a);

// Reductions and broadcasts over the token axis of [T, N, C].
Var mean_tokens(const Var& a);
/// gate [T, 1, C] (or [T, C]) times x [T, N, C].
Var gate_tokens(const Var& gate, const Var& x);
/// Per-channel gain [C] on x [..., C].
Var channel_scale(const Var& gain, const Var& x);

Var avg_pool(const Var& a, std::size_t h, std::size_t w);
Var upsample(const Var& a, std::size_t h, std::size_t w);

// Parametric operators. `bias` may be null. With path == ac and a spike
// input, the event-driven kernel runs; otherwise the dense kernel does.
Var conv2d(const Var& x, const ConvGeometry& g, const Var& w, const Var& bias, ExecPath path);
Var linear(const Var& x, const Var& w, const Var& bias, ExecPath path);

// Batched matmuls over the leading axis. When both operands carry spikes the
// product is taken on integer counts (exact) and scaled by 1/(D_a*D_b).
Var bmm(const Var& a, const Var& b);
Var bmm_tn(const Var& a, const Var& b);
Var bmm_nt(const Var& a, const Var& b);

/// [T, N, C] <-> [T*heads, N, C/heads]; heads are contiguous channel groups.
Var split_heads(const Var& a, std::size_t heads);
Var merge_heads(const Var& a, std::size_t heads);

/// NI-LIF over the leading time axis. `theta` holds the decay parameters
/// (one per timestep or a single shared one).
Var spiking(const Var& x, const Var& theta, int d_cap, NeuronMode mode);

/// out[i] = a[flat[i]], shape [flat.size()].
Var gather(const Var& a, std::vector<std::size_t> flat);

/// Wraps an externally computed value with its vector-Jacobian product.
Var custom(const Var& a, DenseTensor value,
           std::function<DenseTensor(const DenseTensor& grad_out)> vjp);

/// Sum of all elements, shape [1].
Var sum(const Var& a);

/// Central finite-difference helper for gradient checks: perturbs one element
/// of `param`, reevaluates `loss_fn`.
double numeric_derivative(const std::function<double()>& loss_fn, Node& param,
                          std::size_t index, double h);

}  // namespace spikesot::ag
