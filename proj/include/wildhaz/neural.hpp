/*
 * Copyright 2026 The wildhaz Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Feed-forward networks over one month of regional features. Hidden layers
// are either dense, relu(M W1 + b), or graph convolutions with a skip path,
// relu(M W1 + A_norm M W2 + b). A scalar linear read-out follows the last
// hidden layer. Reverse-mode gradients are exact for weights and inputs.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <nlohmann/json.hpp>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wildhaz/errors.hpp"
#include "wildhaz/region_graph.hpp"

namespace wildhaz {

enum class LayerKind { dense, graph_skip };
enum class Activation { relu, identity };

struct LayerSpec {
  LayerKind kind = LayerKind::graph_skip;
  int width = 1;
  Activation activation = Activation::relu;

  bool operator==(const LayerSpec&) const = default;
};

inline std::string to_string(LayerKind k) { return k == LayerKind::dense ? "dense" : "graph_skip"; }

inline LayerKind parse_layer_kind(const std::string& s) {
  if (s == "dense") return LayerKind::dense;
  if (s == "graph_skip") return LayerKind::graph_skip;
  throw ValidationError("unknown layer kind '" + s + "'");
}

struct HiddenLayer {
  LayerKind kind = LayerKind::graph_skip;
  Eigen::MatrixXd w1;  ///< n_{j-1} x n_j, own-region (skip / dense) weights
  Eigen::MatrixXd w2;  ///< n_{j-1} x n_j, neighbour weights; empty for dense
  Eigen::VectorXd bias;

  Eigen::Index in_dim() const { return w1.rows(); }
  Eigen::Index width() const { return w1.cols(); }
};

struct NetworkWeights {
  Eigen::Index input_dim = 0;
  std::vector<HiddenLayer> hidden;
  Eigen::VectorXd out_weights;
  double out_bias = 0.0;

  std::vector<LayerSpec> specs() const {
    std::vector<LayerSpec> s;
    for (const auto& l : hidden) s.push_back({l.kind, static_cast<int>(l.width()), Activation::relu});
    return s;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : hidden) n += l.w1.size() + l.w2.size() + l.bias.size();
    return n + out_weights.size() + 1;
  }

  /// Same shapes, all zeros. Used as a gradient accumulator.
  NetworkWeights zeros_like() const {
    NetworkWeights z = *this;
    for (auto& l : z.hidden) {
      l.w1.setZero();
      l.w2.setZero();
      l.bias.setZero();
    }
    z.out_weights.setZero();
    z.out_bias = 0.0;
    return z;
  }

  /// Flattened in declaration order: per layer w1, w2 (row-major), bias;
  /// then read-out weights and bias.
  void pack(std::span<double> out) const {
    if (out.size() != parameter_count()) throw StructuralError("pack: size mismatch");
    std::size_t k = 0;
    auto put = [&](const Eigen::MatrixXd& m) {
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out[k++] = m(r, c);
    };
    for (const auto& l : hidden) {
      put(l.w1);
      put(l.w2);
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) out[k++] = l.bias[i];
    }
    for (Eigen::Index i = 0; i < out_weights.size(); ++i) out[k++] = out_weights[i];
    out[k++] = out_bias;
  }

  void unpack(std::span<const double> in) {
    if (in.size() != parameter_count()) throw StructuralError("unpack: size mismatch");
    std::size_t k = 0;
    auto get = [&](Eigen::MatrixXd& m) {
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in[k++];
    };
    for (auto& l : hidden) {
      get(l.w1);
      get(l.w2);
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = in[k++];
    }
    for (Eigen::Index i = 0; i < out_weights.size(); ++i) out_weights[i] = in[k++];
    out_bias = in[k++];
  }
};

inline void validate_specs(std::span<const LayerSpec> specs) {
  for (const auto& s : specs) {
    if (s.width < 1) throw StructuralError("hidden layer width must be at least 1");
    if (s.activation != Activation::relu) throw StructuralError("hidden layers use relu");
  }
}

/// Dense layer n_{j-1} n_j + n_j, graph-skip layer 2 n_{j-1} n_j + n_j,
/// read-out n_J + 1.
inline std::size_t count_params(std::span<const LayerSpec> specs, std::size_t input_dim) {
  validate_specs(specs);
  std::size_t n = 0, prev = input_dim;
  for (const auto& s : specs) {
    const auto w = static_cast<std::size_t>(s.width);
    n += (s.kind == LayerKind::graph_skip ? 2 : 1) * prev * w + w;
    prev = w;
  }
  return n + prev + 1;
}

/// Zero-valued network with the given shapes.
inline NetworkWeights zero_network(std::span<const LayerSpec> specs, Eigen::Index input_dim) {
  validate_specs(specs);
  if (input_dim < 1) throw StructuralError("network needs at least one input");
  NetworkWeights w;
  w.input_dim = input_dim;
  Eigen::Index prev = input_dim;
  for (const auto& s : specs) {
    HiddenLayer l;
    l.kind = s.kind;
    l.w1 = Eigen::MatrixXd::Zero(prev, s.width);
    l.w2 = s.kind == LayerKind::graph_skip ? Eigen::MatrixXd::Zero(prev, s.width) : Eigen::MatrixXd(prev, 0);
    l.bias = Eigen::VectorXd::Zero(s.width);
    w.hidden.push_back(std::move(l));
    prev = s.width;
  }
  w.out_weights = Eigen::VectorXd::Zero(prev);
  return w;
}

/// Glorot-uniform weights, W1 and W2 drawn independently; zero biases.
template <class Engine>
NetworkWeights init_network(std::span<const LayerSpec> specs, Eigen::Index input_dim, Engine& rng) {
  NetworkWeights w = zero_network(specs, input_dim);
  auto fill = [&](Eigen::MatrixXd& m, Eigen::Index fan_in, Eigen::Index fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = u(rng);
  };
  for (auto& l : w.hidden) {
    fill(l.w1, l.in_dim(), l.width());
    if (l.kind == LayerKind::graph_skip) fill(l.w2, l.in_dim(), l.width());
  }
  Eigen::MatrixXd ow(w.out_weights.size(), 1);
  fill(ow, ow.rows(), 1);
  w.out_weights = ow.col(0);
  return w;
}

/// Intermediates of one forward pass, kept for the backward pass.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;      ///< M_{j-1} per hidden layer
  std::vector<Eigen::MatrixXd> aggregated;  ///< A_norm M_{j-1}, graph layers only
  std::vector<Eigen::MatrixXd> preact;      ///< pre-activation per hidden layer
  Eigen::MatrixXd last;                     ///< M_J
  Eigen::VectorXd output;
};

namespace detail {

inline void check_forward_shapes(const Eigen::MatrixXd& x, const WeightedGraph& graph,
                                 const NetworkWeights& w) {
  if (x.cols() != w.input_dim) {
    throw StructuralError("input has " + std::to_string(x.cols()) + " features, network expects " +
                          std::to_string(w.input_dim));
  }
  if (graph.size() != x.rows()) {
    throw StructuralError("input has " + std::to_string(x.rows()) + " regions, graph has " +
                          std::to_string(graph.size()));
  }
}

}  // namespace detail

inline const Eigen::VectorXd& forward(const Eigen::MatrixXd& x, const WeightedGraph& graph,
                                      const NetworkWeights& w, ForwardCache& cache) {
  detail::check_forward_shapes(x, graph, w);
  const std::size_t nl = w.hidden.size();
  cache.inputs.resize(nl);
  cache.aggregated.resize(nl);
  cache.preact.resize(nl);
  Eigen::MatrixXd m = x;
  for (std::size_t j = 0; j < nl; ++j) {
    const auto& l = w.hidden[j];
    Eigen::MatrixXd z = m * l.w1;
    if (l.kind == LayerKind::graph_skip) {
      cache.aggregated[j] = graph.normalized * m;
      z.noalias() += cache.aggregated[j] * l.w2;
    }
    z.rowwise() += l.bias.transpose();
    cache.inputs[j] = std::move(m);
    m = z.cwiseMax(0.0);
    cache.preact[j] = std::move(z);
  }
  cache.output = m * w.out_weights;
  cache.output.array() += w.out_bias;
  cache.last = std::move(m);
  return cache.output;
}

inline Eigen::VectorXd forward(const Eigen::MatrixXd& x, const WeightedGraph& graph,
                               const NetworkWeights& w) {
  ForwardCache cache;
  return forward(x, graph, w, cache);
}

/// Accumulates d(upstream . output)/d(weights) into `grad` (same shapes as
/// `w`) and, when requested, writes the V x d input gradient.
inline void backward(const ForwardCache& cache, const WeightedGraph& graph, const NetworkWeights& w,
                     const Eigen::VectorXd& upstream, NetworkWeights* grad,
                     Eigen::MatrixXd* input_grad = nullptr) {
  if (upstream.size() != cache.output.size()) throw StructuralError("upstream gradient size mismatch");
  if (grad) {
    grad->out_weights.noalias() += cache.last.transpose() * upstream;
    grad->out_bias += upstream.sum();
  }
  Eigen::MatrixXd dm = upstream * w.out_weights.transpose();
  for (std::size_t jj = w.hidden.size(); jj-- > 0;) {
    const auto& l = w.hidden[jj];
    // relu'(0) = 0
    Eigen::MatrixXd dz = (cache.preact[jj].array() > 0.0).select(dm, 0.0);
    if (grad) {
      auto& g = grad->hidden[jj];
      g.w1.noalias() += cache.inputs[jj].transpose() * dz;
      g.bias.noalias() += dz.colwise().sum().transpose();
      if (l.kind == LayerKind::graph_skip) g.w2.noalias() += cache.aggregated[jj].transpose() * dz;
    }
    if (jj == 0 && !input_grad) break;
    Eigen::MatrixXd prev = dz * l.w1.transpose();
    if (l.kind == LayerKind::graph_skip) {
      Eigen::MatrixXd t = dz * l.w2.transpose();
      prev.noalias() += graph.normalized.transpose() * t;
    }
    dm = std::move(prev);
  }
  if (input_grad) *input_grad = std::move(dm);
}

/// d output(s) / d x_i(s) for every region s and input i: the diagonal
/// blocks of the input Jacobian, one reverse pass per region.
inline Eigen::MatrixXd own_input_gradient(const Eigen::MatrixXd& x, const WeightedGraph& graph,
                                          const NetworkWeights& w) {
  ForwardCache cache;
  forward(x, graph, w, cache);
  const Eigen::Index v = x.rows();
  Eigen::MatrixXd out(v, x.cols());
  Eigen::VectorXd e = Eigen::VectorXd::Zero(v);
  Eigen::MatrixXd g;
  for (Eigen::Index s = 0; s < v; ++s) {
    e[s] = 1.0;
    backward(cache, graph, w, e, nullptr, &g);
    out.row(s) = g.row(s);
    e[s] = 0.0;
  }
  return out;
}

constexpr int kNetworkFormatVersion = 1;

inline nlohmann::json network_to_json(const NetworkWeights& w) {
  using nlohmann::json;
  json j;
  j["format_version"] = kNetworkFormatVersion;
  j["input_dim"] = w.input_dim;
  json layers = json::array();
  for (const auto& l : w.hidden) {
    layers.push_back({{"kind", to_string(l.kind)}, {"width", l.width()}, {"activation", "relu"}});
  }
  layers.push_back({{"kind", "output"}, {"width", 1}, {"activation", "identity"}});
  j["layers"] = layers;
  json arrays = json::array();
  auto put = [&](const std::string& name, const Eigen::MatrixXd& m) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(m(r, c));
    arrays.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"values", v}});
  };
  for (std::size_t k = 0; k < w.hidden.size(); ++k) {
    const auto& l = w.hidden[k];
    const auto p = "layer" + std::to_string(k + 1) + ".";
    put(p + "w1", l.w1);
    if (l.kind == LayerKind::graph_skip) put(p + "w2", l.w2);
    put(p + "bias", l.bias);
  }
  put("output.weights", w.out_weights);
  put("output.bias", Eigen::MatrixXd::Constant(1, 1, w.out_bias));
  j["arrays"] = arrays;
  return j;
}

inline NetworkWeights network_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kNetworkFormatVersion) {
      throw ValidationError("unsupported network format version");
    }
    std::vector<LayerSpec> specs;
    for (const auto& l : j.at("layers")) {
      const auto kind = l.at("kind").get<std::string>();
      if (kind == "output") continue;
      specs.push_back({parse_layer_kind(kind), l.at("width").get<int>(), Activation::relu});
    }
    NetworkWeights w = zero_network(specs, j.at("input_dim").get<Eigen::Index>());
    const auto& arrays = j.at("arrays");
    std::size_t a = 0;
    auto get = [&](const std::string& name, Eigen::MatrixXd& m) {
      if (a >= arrays.size()) throw ValidationError("network record truncated at " + name);
      const auto& rec = arrays[a++];
      if (rec.at("name").get<std::string>() != name || rec.at("rows").get<Eigen::Index>() != m.rows() ||
          rec.at("cols").get<Eigen::Index>() != m.cols()) {
        throw ValidationError("network array '" + name + "' has unexpected name or shape");
      }
      const auto v = rec.at("values").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(v.size()) != m.size()) throw ValidationError("bad array length for " + name);
      std::size_t k = 0;
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = v[k++];
    };
    for (std::size_t k = 0; k < w.hidden.size(); ++k) {
      auto& l = w.hidden[k];
      const auto p = "layer" + std::to_string(k + 1) + ".";
      get(p + "w1", l.w1);
      if (l.kind == LayerKind::graph_skip) get(p + "w2", l.w2);
      Eigen::MatrixXd b = l.bias;
      get(p + "bias", b);
      l.bias = b.col(0);
    }
    Eigen::MatrixXd ow = w.out_weights;
    get("output.weights", ow);
    w.out_weights = ow.col(0);
    Eigen::MatrixXd ob(1, 1);
    get("output.bias", ob);
    w.out_bias = ob(0, 0);
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed network record: ") + e.what());
  }
}

}  // namespace wildhaz
