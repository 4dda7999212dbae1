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

#include "spikesot/graph.hpp"

#include <cmath>

namespace spikesot::ag {

namespace {

thread_local Tape* g_active = nullptr;

bool recording(std::initializer_list<const Var*> inputs) {
  if (!g_active) return false;
  for (const Var* v : inputs)
    if (*v && (*v)->requires_grad) return true;
  return false;
}

Var finish(Var node, bool record, std::function<void(Node&)> bw) {
  if (record) {
    node->requires_grad = true;
    node->backward = std::move(bw);
    g_active->record(node);
  }
  return node;
}

Var fresh(DenseTensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

void push(const Var& v, const DenseTensor& g) {
  if (v && v->requires_grad) v->accumulate(g);
}

template <typename Perm>
SpikeTensor permute_spikes(const SpikeTensor& s, Shape shape, Perm&& dst_of) {
  SpikeTensor out(std::move(shape), s.d_cap());
  auto dst = out.mutable_counts();
  const auto src = s.counts();
  for (std::size_t i = 0; i < src.size(); ++i) dst[dst_of(i)] = src[i];
  return out;
}

DenseTensor counts_of(const Node& v) {
  DenseTensor c(v.spikes->shape());
  const auto src = v.spikes->counts();
  for (std::size_t i = 0; i < src.size(); ++i) c[i] = src[i];
  return c;
}

// Spike x spike products run on the integer counts and are scaled once, so
// the result does not depend on the association order.
template <typename Kernel>
DenseTensor product(const Var& a, const Var& b, Kernel&& k) {
  if (a->spikes && b->spikes) {
    DenseTensor out = k(counts_of(*a), counts_of(*b));
    out *= 1.0 / (static_cast<double>(a->spikes->d_cap()) * b->spikes->d_cap());
    return out;
  }
  return k(a->value, b->value);
}

}  // namespace

void Node::accumulate(const DenseTensor& g) {
  if (grad.empty())
    grad = g;
  else
    grad += g;
}

void Tape::backward(const Var& loss) {
  loss->grad = DenseTensor(loss->value.shape(), 1.0);
  visits_ = 0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& n = **it;
    if (n.backward && n.has_grad()) {
      n.backward(n);
      ++visits_;
    }
  }
}

Tape* active_tape() { return g_active; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active) { g_active = &tape; }
TapeScope::~TapeScope() { g_active = previous_; }

Var constant(DenseTensor value) { return fresh(std::move(value)); }

Var spike_constant(SpikeTensor spikes) {
  Var v = fresh(spike_to_dense(spikes));
  v->spikes = std::move(spikes);
  return v;
}

Var leaf(DenseTensor value, bool requires_grad) {
  Var v = fresh(std::move(value));
  v->requires_grad = requires_grad;
  return v;
}

Var add(const Var& a, const Var& b) {
  require_shape("ag::add", a->value.shape(), b->value.shape());
  DenseTensor out = a->value;
  out += b->value;
  return finish(fresh(std::move(out)), recording({&a, &b}), [a, b](Node& n) {
    push(a, n.grad);
    push(b, n.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  require_shape("ag::sub", a->value.shape(), b->value.shape());
  DenseTensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b->value[i];
  return finish(fresh(std::move(out)), recording({&a, &b}), [a, b](Node& n) {
    push(a, n.grad);
    DenseTensor g = n.grad;
    g *= -1.0;
    push(b, g);
  });
}

Var mul(const Var& a, const Var& b) {
  require_shape("ag::mul", a->value.shape(), b->value.shape());
  DenseTensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b->value[i];
  return finish(fresh(std::move(out)), recording({&a, &b}), [a, b](Node& n) {
    DenseTensor ga(n.grad.shape()), gb(n.grad.shape());
    for (std::size_t i = 0; i < ga.size(); ++i) {
      ga[i] = n.grad[i] * b->value[i];
      gb[i] = n.grad[i] * a->value[i];
    }
    push(a, ga);
    push(b, gb);
  });
}

Var scale(const Var& a, double s) {
  DenseTensor out = a->value;
  out *= s;
  return finish(fresh(std::move(out)), recording({&a}), [a, s](Node& n) {
    DenseTensor g = n.grad;
    g *= s;
    push(a, g);
  });
}

Var sigmoid(const Var& a) {
  DenseTensor out(a->value.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = spikesot::sigmoid(a->value[i]);
  Var node = fresh(std::move(out));
  Node* self = node.get();
  return finish(node, recording({&a}), [a, self](Node& n) {
    DenseTensor g(n.grad.shape());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = self->value[i];
      g[i] = n.grad[i] * y * (1.0 - y);
    }
    push(a, g);
  });
}

Var reshape(const Var& a, Shape shape) {
  Var node = fresh(a->value.reshaped(shape));
  if (a->spikes) node->spikes = a->spikes->reshaped(shape);
  const Shape original = a->value.shape();
  return finish(node, recording({&a}),
                [a, original](Node& n) { push(a, n.grad.reshaped(original)); });
}

Var to_tokens(const Var& a) {
  const Shape& s = a->value.shape();
  if (s.size() != 4) throw ShapeError("ag::to_tokens", {0, 0, 0, 0}, s);
  const std::size_t T = s[0], C = s[1], N = s[2] * s[3];
  auto dst_of = [=](std::size_t i) {
    const std::size_t t = i / (C * N), c = (i / N) % C, p = i % N;
    return (t * N + p) * C + c;
  };
  DenseTensor out({T, N, C});
  for (std::size_t i = 0; i < a->value.size(); ++i) out[dst_of(i)] = a->value[i];
  Var node = fresh(std::move(out));
  if (a->spikes) node->spikes = permute_spikes(*a->spikes, {T, N, C}, dst_of);
  return finish(node, recording({&a}), [a, dst_of, s](Node& n) {
    DenseTensor g(s);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = n.grad[dst_of(i)];
    push(a, g);
  });
}

Var from_tokens(const Var& a, std::size_t h, std::size_t w) {
  const Shape& s = a->value.shape();
  if (s.size() != 3 || s[1] != h * w) throw ShapeError("ag::from_tokens", {0, h * w, 0}, s);
  const std::size_t T = s[0], N = s[1], C = s[2];
  auto dst_of = [=](std::size_t i) {
    const std::size_t t = i / (N * C), p = (i / C) % N, c = i % C;
    return (t * C + c) * N + p;
  };
  DenseTensor out({T, C, h, w});
  for (std::size_t i = 0; i < a->value.size(); ++i) out[dst_of(i)] = a->value[i];
  Var node = fresh(std::move(out));
  if (a->spikes) node->spikes = permute_spikes(*a->spikes, {T, C, h, w}, dst_of);
  return finish(node, recording({&a}), [a, dst_of, s](Node& n) {
    DenseTensor g(s);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = n.grad[dst_of(i)];
    push(a, g);
  });
}

Var slice_time(const Var& a, std::size_t t) {
  Var node = fresh(slice_leading(a->value, t, t + 1));
  if (a->spikes) node->spikes = slice_leading(*a->spikes, t, t + 1);
  const Shape full = a->value.shape();
  return finish(node, recording({&a}), [a, t, full](Node& n) {
    DenseTensor g(full);
    std::copy(n.grad.data().begin(), n.grad.data().end(), g.data().begin() + t * n.grad.size());
    push(a, g);
  });
}

Var concat_time(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error("ag::concat_time: no parts");
  DenseTensor value = parts[0]->value;
  bool all_spikes = parts[0]->spikes.has_value();
  std::optional<SpikeTensor> spikes = parts[0]->spikes;
  bool record = false;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    record = record || recording({&parts[i]});
    if (i == 0) continue;
    value = concat_leading(value, parts[i]->value);
    all_spikes = all_spikes && parts[i]->spikes.has_value();
    if (all_spikes) spikes = concat_leading(*spikes, *parts[i]->spikes);
  }
  Var node = fresh(std::move(value));
  if (all_spikes) node->spikes = std::move(spikes);
  return finish(node, record, [parts](Node& n) {
    std::size_t offset = 0;
    for (const Var& p : parts) {
      const std::size_t len = p->value.dim(0);
      push(p, slice_leading(n.grad, offset, offset + len));
      offset += len;
    }
  });
}

Var repeat_time(const Var& a, std::size_t times) {
  if (a->value.rank() == 0 || a->value.dim(0) != 1)
    throw Error("ag::repeat_time: input must have a single timestep");
  Shape shape = a->value.shape();
  shape[0] = times;
  DenseTensor out(shape);
  const std::size_t plane = a->value.size();
  for (std::size_t t = 0; t < times; ++t)
    std::copy(a->value.data().begin(), a->value.data().end(), out.data().begin() + t * plane);
  Var node = fresh(std::move(out));
  if (a->spikes) {
    SpikeTensor s(shape, a->spikes->d_cap());
    for (std::size_t t = 0; t < times; ++t)
      std::copy(a->spikes->counts().begin(), a->spikes->counts().end(),
                s.mutable_counts().begin() + t * plane);
    node->spikes = std::move(s);
  }
  return finish(node, recording({&a}), [a, times, plane](Node& n) {
    DenseTensor g(a->value.shape());
    for (std::size_t t = 0; t < times; ++t)
      for (std::size_t i = 0; i < plane; ++i) g[i] += n.grad[t * plane + i];
    push(a, g);
  });
}

Var sum_time(const Var& a) {
  const std::size_t T = a->value.dim(0), plane = a->value.size() / T;
  Shape shape = a->value.shape();
  shape[0] = 1;
  DenseTensor out(shape);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < plane; ++i) out[i] += a->value[t * plane + i];
  return finish(fresh(std::move(out)), recording({&a}), [a, T, plane](Node& n) {
    DenseTensor g(a->value.shape());
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < plane; ++i) g[t * plane + i] = n.grad[i];
    push(a, g);
  });
}

Var mean_tokens(const Var& a) {
  const Shape& s = a->value.shape();
  if (s.size() != 3) throw ShapeError("ag::mean_tokens", {0, 0, 0}, s);
  const std::size_t T = s[0], N = s[1], C = s[2];
  DenseTensor out({T, 1, C});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t p = 0; p < N; ++p)
      for (std::size_t c = 0; c < C; ++c) out[t * C + c] += a->value[(t * N + p) * C + c] / N;
  return finish(fresh(std::move(out)), recording({&a}), [a, T, N, C](Node& n) {
    DenseTensor g(a->value.shape());
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t p = 0; p < N; ++p)
        for (std::size_t c = 0; c < C; ++c) g[(t * N + p) * C + c] = n.grad[t * C + c] / N;
    push(a, g);
  });
}

Var gate_tokens(const Var& gate, const Var& x) {
  const Shape& s = x->value.shape();
  if (s.size() != 3 || gate->value.size() != s[0] * s[2])
    throw ShapeError("ag::gate_tokens", {s.empty() ? 0 : s[0], 1, s.size() > 2 ? s[2] : 0},
                     gate->value.shape());
  const std::size_t T = s[0], N = s[1], C = s[2];
  DenseTensor out(s);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t p = 0; p < N; ++p)
      for (std::size_t c = 0; c < C; ++c)
        out[(t * N + p) * C + c] = gate->value[t * C + c] * x->value[(t * N + p) * C + c];
  return finish(fresh(std::move(out)), recording({&gate, &x}), [gate, x, T, N, C](Node& n) {
    DenseTensor gg(gate->value.shape()), gx(x->value.shape());
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t p = 0; p < N; ++p)
        for (std::size_t c = 0; c < C; ++c) {
          const std::size_t k = (t * N + p) * C + c;
          gg[t * C + c] += n.grad[k] * x->value[k];
          gx[k] = n.grad[k] * gate->value[t * C + c];
        }
    push(gate, gg);
    push(x, gx);
  });
}

Var channel_scale(const Var& gain, const Var& x) {
  const std::size_t C = gain->value.size();
  if (x->value.rank() == 0 || x->value.shape().back() != C)
    throw ShapeError("ag::channel_scale", {C}, x->value.shape());
  DenseTensor out(x->value.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = gain->value[i % C] * x->value[i];
  return finish(fresh(std::move(out)), recording({&gain, &x}), [gain, x, C](Node& n) {
    DenseTensor gg({C}), gx(x->value.shape());
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gg[i % C] += n.grad[i] * x->value[i];
      gx[i] = n.grad[i] * gain->value[i % C];
    }
    push(gain, gg);
    push(x, gx);
  });
}

Var avg_pool(const Var& a, std::size_t h, std::size_t w) {
  const Shape in = a->value.shape();
  if (in[in.size() - 2] == h && in.back() == w) return a;
  return finish(fresh(avg_pool_to(a->value, h, w)), recording({&a}),
                [a, in](Node& n) { push(a, avg_pool_backward(n.grad, in)); });
}

Var upsample(const Var& a, std::size_t h, std::size_t w) {
  const Shape in = a->value.shape();
  if (in[in.size() - 2] == h && in.back() == w) return a;
  return finish(fresh(upsample_from(a->value, h, w)), recording({&a}),
                [a, in](Node& n) { push(a, upsample_backward(n.grad, in)); });
}

Var conv2d(const Var& x, const ConvGeometry& g, const Var& w, const Var& bias, ExecPath path) {
  const DenseTensor* b = bias ? &bias->value : nullptr;
  DenseTensor out = (path == ExecPath::ac && x->spikes)
                        ? kernels::conv2d_ac(*x->spikes, g, w->value, b)
                        : kernels::conv2d_mac(x->value, g, w->value, b);
  return finish(fresh(std::move(out)), recording({&x, &w, &bias}), [x, g, w, bias](Node& n) {
    DenseTensor gx, gw, gb;
    kernels::conv2d_backward(x->value, g, w->value, n.grad,
                             x->requires_grad ? &gx : nullptr,
                             w->requires_grad ? &gw : nullptr,
                             bias && bias->requires_grad ? &gb : nullptr);
    if (x->requires_grad) push(x, gx);
    if (w->requires_grad) push(w, gw);
    if (bias && bias->requires_grad) push(bias, gb);
  });
}

Var linear(const Var& x, const Var& w, const Var& bias, ExecPath path) {
  const DenseTensor* b = bias ? &bias->value : nullptr;
  DenseTensor out = (path == ExecPath::ac && x->spikes)
                        ? kernels::linear_ac(*x->spikes, w->value, b)
                        : kernels::linear_mac(x->value, w->value, b);
  return finish(fresh(std::move(out)), recording({&x, &w, &bias}), [x, w, bias](Node& n) {
    DenseTensor gx, gw, gb;
    kernels::linear_backward(x->value, w->value, n.grad, x->requires_grad ? &gx : nullptr,
                             w->requires_grad ? &gw : nullptr,
                             bias && bias->requires_grad ? &gb : nullptr);
    if (x->requires_grad) push(x, gx);
    if (w->requires_grad) push(w, gw);
    if (bias && bias->requires_grad) push(bias, gb);
  });
}

Var bmm(const Var& a, const Var& b) {
  auto k = [](const DenseTensor& x, const DenseTensor& y) { return kernels::bmm(x, y); };
  return finish(fresh(product(a, b, k)), recording({&a, &b}), [a, b](Node& n) {
    if (a->requires_grad) push(a, kernels::bmm_nt(n.grad, b->value));
    if (b->requires_grad) push(b, kernels::bmm_tn(a->value, n.grad));
  });
}

Var bmm_tn(const Var& a, const Var& b) {
  auto k = [](const DenseTensor& x, const DenseTensor& y) { return kernels::bmm_tn(x, y); };
  return finish(fresh(product(a, b, k)), recording({&a, &b}),
                [a, b](Node& n) {
                  if (a->requires_grad) push(a, kernels::bmm_nt(b->value, n.grad));
                  if (b->requires_grad) push(b, kernels::bmm(a->value, n.grad));
                });
}

Var bmm_nt(const Var& a, const Var& b) {
  auto k = [](const DenseTensor& x, const DenseTensor& y) { return kernels::bmm_nt(x, y); };
  return finish(fresh(product(a, b, k)), recording({&a, &b}),
                [a, b](Node& n) {
                  if (a->requires_grad) push(a, kernels::bmm(n.grad, b->value));
                  if (b->requires_grad) push(b, kernels::bmm_tn(n.grad, a->value));
                });
}

Var split_heads(const Var& a, std::size_t heads) {
  const Shape s = a->value.shape();
  if (s.size() != 3 || heads == 0 || s[2] % heads != 0)
    throw ShapeError("ag::split_heads", {0, 0, heads}, s);
  if (heads == 1) return a;
  const std::size_t T = s[0], N = s[1], C = s[2], c = C / heads;
  auto dst_of = [=](std::size_t i) {
    const std::size_t t = i / (N * C), p = (i / C) % N, ch = i % C, h = ch / c;
    return ((t * heads + h) * N + p) * c + ch % c;
  };
  const Shape out_shape{T * heads, N, c};
  DenseTensor out(out_shape);
  for (std::size_t i = 0; i < a->value.size(); ++i) out[dst_of(i)] = a->value[i];
  Var node = fresh(std::move(out));
  if (a->spikes) node->spikes = permute_spikes(*a->spikes, out_shape, dst_of);
  return finish(node, recording({&a}), [a, dst_of, s](Node& n) {
    DenseTensor g(s);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = n.grad[dst_of(i)];
    push(a, g);
  });
}

Var merge_heads(const Var& a, std::size_t heads) {
  const Shape s = a->value.shape();
  if (s.size() != 3 || heads == 0 || s[0] % heads != 0)
    throw ShapeError("ag::merge_heads", {heads, 0, 0}, s);
  if (heads == 1) return a;
  const std::size_t T = s[0] / heads, N = s[1], c = s[2], C = c * heads;
  auto dst_of = [=](std::size_t i) {
    const std::size_t th = i / (N * c), p = (i / c) % N, k = i % c;
    return ((th / heads) * N + p) * C + (th % heads) * c + k;
  };
  const Shape out_shape{T, N, C};
  DenseTensor out(out_shape);
  for (std::size_t i = 0; i < a->value.size(); ++i) out[dst_of(i)] = a->value[i];
  Var node = fresh(std::move(out));
  if (a->spikes) node->spikes = permute_spikes(*a->spikes, out_shape, dst_of);
  return finish(node, recording({&a}), [a, dst_of, s](Node& n) {
    DenseTensor g(s);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = n.grad[dst_of(i)];
    push(a, g);
  });
}

Var spiking(const Var& x, const Var& theta, int d_cap, NeuronMode mode) {
  NiLifParams p{theta->value.values(), d_cap};
  auto trace = std::make_shared<NiLifTrace>(nilif_forward(x->value, p, mode));
  Var node = fresh(trace->output);
  if (mode == NeuronMode::integer) node->spikes = trace->spikes;
  const bool record = recording({&x, &theta});
  if (!record) return node;
  return finish(node, true, [x, theta, trace, p](Node& n) {
    NiLifGrads g = nilif_backward(n.grad, *trace, p);
    push(x, g.input);
    push(theta, DenseTensor({g.theta.size()}, g.theta));
  });
}

Var gather(const Var& a, std::vector<std::size_t> flat) {
  DenseTensor out({flat.size()});
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (flat[i] >= a->value.size()) throw Error("ag::gather: index out of range");
    out[i] = a->value[flat[i]];
  }
  return finish(fresh(std::move(out)), recording({&a}), [a, flat](Node& n) {
    DenseTensor g(a->value.shape());
    for (std::size_t i = 0; i < flat.size(); ++i) g[flat[i]] += n.grad[i];
    push(a, g);
  });
}

Var custom(const Var& a, DenseTensor value,
           std::function<DenseTensor(const DenseTensor& grad_out)> vjp) {
  return finish(fresh(std::move(value)), recording({&a}),
                [a, vjp = std::move(vjp)](Node& n) { push(a, vjp(n.grad)); });
}

Var sum(const Var& a) {
  double total = 0.0;
  for (double v : a->value.data()) total += v;
  return finish(fresh(DenseTensor::scalar(total)), recording({&a}), [a](Node& n) {
    push(a, DenseTensor(a->value.shape(), n.grad[0]));
  });
}

double numeric_derivative(const std::function<double()>& loss_fn, Node& param,
                          std::size_t index, double h) {
  const double saved = param.value[index];
  param.value[index] = saved + h;
  const double up = loss_fn();
  param.value[index] = saved - h;
  const double down = loss_fn();
  param.value[index] = saved;
  return (up - down) / (2.0 * h);
}

}  // namespace spikesot::ag
