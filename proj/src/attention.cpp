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

#include "spikesot/attention.hpp"

#include <cmath>

namespace spikesot {

namespace {

ag::Var as_tokens3(const ag::Var& x) {
  if (x->value.rank() == 3) return x;
  if (x->value.rank() == 2) return ag::reshape(x, {1, x->value.dim(0), x->value.dim(1)});
  throw ShapeError("attention tokens", {0, 0, 0}, x->value.shape());
}

void record_products(const std::string& name, const ag::Var& q, const ag::Var& k,
                     const ag::Var& v, AttentionOrder order) {
  if (!active_profiler()) return;
  const auto& qs = q->value.shape();
  const std::size_t T = qs[0], N = qs[1], C = qs[2], Cv = v->value.dim(2);
  const int d = q->spikes ? q->spikes->d_cap() : 1;
  const auto nn = static_cast<std::uint64_t>(N);
  if (order == AttentionOrder::linear) {
    record_layer(name + ".kv", OpClass::attention_product, nn * C * Cv, input_firing(*k), T, d,
                 nn * C * Cv);
    record_layer(name + ".qm", OpClass::attention_product, nn * C * Cv, input_firing(*q), T, d,
                 nn * C * Cv);
  } else {
    record_layer(name + ".qk", OpClass::attention_product, nn * nn * C, input_firing(*q), T, d,
                 nn * nn * C);
    record_layer(name + ".sv", OpClass::attention_product, nn * nn * Cv, input_firing(*v), T, d,
                 nn * nn * Cv);
  }
  // Charged by the dense counterpart only.
  const FiringStats none;
  record_layer(name + ".scale", OpClass::scale_absent, nn * Cv, none, T, d, nn * Cv);
  record_layer(name + ".softmax", OpClass::softmax_absent, nn * nn, none, T, d, nn * nn);
}

}  // namespace

EsdsaSpec EsdsaSpec::make(ParamBuilder& pb, const std::string& name, std::size_t channels,
                          double gamma, std::size_t heads, const NeuronConfig& nc, double gain,
                          bool head_sn) {
  EsdsaSpec s;
  ParamBuilder b = pb.sub(name);
  s.name = pb.qualified(name);
  s.channels = channels;
  s.gamma = gamma;
  s.heads = heads;
  const auto cv = static_cast<std::size_t>(std::llround(gamma * static_cast<double>(channels)));
  if (head_sn) s.sn_in = NeuronLayer::make(b, "sn_in", nc);
  s.q = LinearLayer::make(b, "q", channels, channels, gain);
  s.k = LinearLayer::make(b, "k", channels, channels, gain);
  s.v = LinearLayer::make(b, "v", channels, cv, gain);
  s.out = LinearLayer::make(b, "out", cv, channels, gain);
  s.q.op_class = s.k.op_class = s.v.op_class = OpClass::attention_qkv;
  s.sn_q = NeuronLayer::make(b, "sn_q", nc);
  s.sn_k = NeuronLayer::make(b, "sn_k", nc);
  s.sn_v = NeuronLayer::make(b, "sn_v", nc);
  s.sn_attn = NeuronLayer::make(b, "sn_attn", nc);
  s.validate();
  return s;
}

double EsdsaSpec::effective_scale() const {
  return scale > 0.0 ? scale : 1.0 / std::sqrt(static_cast<double>(channels));
}

void EsdsaSpec::validate() const {
  if (channels == 0 || heads == 0 || channels % heads != 0)
    throw Error("EsdsaSpec '" + name + "': channels must be a positive multiple of heads");
  if (!(gamma > 0.0)) throw Error("EsdsaSpec '" + name + "': gamma must be positive");
  require_shape(name + ".q", {channels, channels}, q.weight->value.shape());
  require_shape(name + ".k", {channels, channels}, k.weight->value.shape());
  const auto cv = static_cast<std::size_t>(std::llround(gamma * static_cast<double>(channels)));
  require_shape(name + ".v", {cv, channels}, v.weight->value.shape());
  require_shape(name + ".out", {channels, cv}, out.weight->value.shape());
  if (cv % heads != 0) throw Error("EsdsaSpec '" + name + "': value width not divisible by heads");
}

ag::Var attention_product(const ag::Var& q, const ag::Var& k, const ag::Var& v,
                          AttentionOrder order, double scale, std::size_t heads) {
  const ag::Var qh = ag::split_heads(q, heads), kh = ag::split_heads(k, heads),
                vh = ag::split_heads(v, heads);
  ag::Var a;
  if (order == AttentionOrder::linear) {
    a = ag::bmm(qh, ag::bmm_tn(kh, vh));
  } else {
    a = ag::bmm(ag::bmm_nt(qh, kh), vh);
  }
  return ag::scale(ag::merge_heads(a, heads), scale);
}

ag::Var EsdsaSpec::attend(const ag::Var& spikes, const Exec& exec, AttentionOrder ord) const {
  const ag::Var x = as_tokens3(spikes);
  const auto& s = x->value.shape();
  if (s[2] != channels || (token_count != 0 && s[1] != token_count))
    throw ShapeError("esdsa '" + name + "'", {s[0], token_count ? token_count : s[1], channels},
                     s);
  const ag::Var qs = sn_q(q(x, exec), exec);
  const ag::Var ks = sn_k(k(x, exec), exec);
  const ag::Var vs = sn_v(v(x, exec), exec);
  record_products(name, qs, ks, vs, ord);
  const ag::Var a = attention_product(qs, ks, vs, ord, effective_scale(), heads);
  return out(sn_attn(a, exec), exec);
}

ag::Var EsdsaSpec::operator()(const ag::Var& tokens, const Exec& exec) const {
  return attend(sn_in ? (*sn_in)(tokens, exec) : tokens, exec, order);
}

DenseTensor esdsa_forward(const SpikeTensor& u, const EsdsaSpec& spec, AttentionOrder order,
                          const Exec& exec) {
  const ag::Var out = spec.attend(ag::spike_constant(u), exec, order);
  return u.rank() == 2 ? out->value.reshaped({u.dim(0), spec.channels}) : out->value;
}

DenseTensor kv_memory(const SpikeTensor& k, const SpikeTensor& v) {
  if (k.rank() < 2 || k.rank() > 3 || v.rank() != k.rank() || k.dim(0) != v.dim(0) ||
      (k.rank() == 3 && k.dim(1) != v.dim(1)))
    throw ShapeError("kv_memory", k.shape(), v.shape());
  const std::size_t T = k.rank() == 3 ? k.dim(0) : 1;
  const std::size_t N = k.shape()[k.rank() - 2], C = k.shape().back(), Cv = v.shape().back();
  // Fold the time axis into the token axis: M is a token sum.
  const ag::Var kk = ag::spike_constant(k.reshaped({1, T * N, C}));
  const ag::Var vv = ag::spike_constant(v.reshaped({1, T * N, Cv}));
  return ag::bmm_tn(kk, vv)->value.reshaped({C, Cv});
}

}  // namespace spikesot
