#pragma once

// Masked bidirectional LSTM with hand-derived backpropagation through time.
//
// Gates are stacked [i | f | g | o] along the 4H axis:
//   z = x Wxᵀ + h Whᵀ + b
//   i = σ(z_i)  f = σ(z_f)  g = tanh(z_g)  o = σ(z_o)
//   c' = f∘c + i∘g         h' = o∘tanh(c')
// Rows whose timestep lies beyond their length keep their state unchanged and
// emit zero output, so padding never alters results. The forward direction's
// final state is the state after the last valid step; the backward direction
// starts at the last valid step from a zero state and ends at t = 0.

#include <optional>
#include <string>
#include <vector>

#include "psyling/neural/layers.hpp"

namespace psyling::neural {

template <class S>
class LstmDirection {
 public:
  struct Step {
    Mat<S> x, h_prev, c_prev, i, f, g, o, tc;
    std::vector<char> active;
  };
  struct Cache {
    std::vector<Step> steps;  // in processing order
    std::vector<std::size_t> order;
  };

  LstmDirection() = default;
  LstmDirection(const std::string& name, std::size_t input, std::size_t hidden, bool reverse)
      : Wx_(name + ".Wx", static_cast<Eigen::Index>(4 * hidden), static_cast<Eigen::Index>(input)),
        Wh_(name + ".Wh", static_cast<Eigen::Index>(4 * hidden), static_cast<Eigen::Index>(hidden)),
        b_(name + ".b", 1, static_cast<Eigen::Index>(4 * hidden)),
        input_(input),
        hidden_(hidden),
        reverse_(reverse) {}

  void init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_));
    init_uniform(Wx_.value, bound, rng);
    init_uniform(Wh_.value, bound, rng);
    b_.value.setZero();
    b_.value.middleCols(static_cast<Eigen::Index>(hidden_), static_cast<Eigen::Index>(hidden_)).setOnes();
  }

  std::size_t input_dim() const { return input_; }
  std::size_t hidden_dim() const { return hidden_; }

  /// Fills out[t] (B × H) and returns the final hidden state (B × H).
  Mat<S> forward(const Seq<S>& x, const Lengths& len, Seq<S>& out, Cache* cache = nullptr) const {
    const std::size_t T = x.size();
    const Eigen::Index B = static_cast<Eigen::Index>(len.size());
    const auto H = static_cast<Eigen::Index>(hidden_);
    out.assign(T, Mat<S>::Zero(B, H));
    Mat<S> h = Mat<S>::Zero(B, H), c = Mat<S>::Zero(B, H);
    if (cache) {
      cache->steps.clear();
      cache->order.clear();
      cache->steps.reserve(T);
    }
    for (std::size_t k = 0; k < T; ++k) {
      const std::size_t t = reverse_ ? T - 1 - k : k;
      require_shape(x[t].rows() == B, "lstm: batch size differs across timesteps");
      require_cols(x[t], Wx_.value.cols(), Wx_.name.c_str());
      std::vector<char> active(static_cast<std::size_t>(B));
      bool any = false;
      for (Eigen::Index r = 0; r < B; ++r) any |= (active[r] = t < len[r]);
      if (!any) continue;

      Mat<S> z = x[t] * Wx_.value.transpose() + h * Wh_.value.transpose();
      z.rowwise() += b_.value.row(0);
      Mat<S> i = sigmoid<S>(z.middleCols(0, H));
      Mat<S> f = sigmoid<S>(z.middleCols(H, H));
      Mat<S> g = z.middleCols(2 * H, H).array().tanh().matrix();
      Mat<S> o = sigmoid<S>(z.middleCols(3 * H, H));
      Mat<S> c_new = f.cwiseProduct(c) + i.cwiseProduct(g);
      Mat<S> tc = c_new.array().tanh().matrix();
      Mat<S> h_new = o.cwiseProduct(tc);
      for (Eigen::Index r = 0; r < B; ++r) {
        if (active[r]) {
          out[t].row(r) = h_new.row(r);
        } else {
          h_new.row(r) = h.row(r);
          c_new.row(r) = c.row(r);
        }
      }
      if (cache) {
        cache->steps.push_back(Step{x[t], h, c, std::move(i), std::move(f), std::move(g), std::move(o),
                                    std::move(tc), std::move(active)});
        cache->order.push_back(t);
      }
      h = std::move(h_new);
      c = std::move(c_new);
    }
    return h;
  }

  /// d_out[t] and d_last are gradients w.r.t. out[t] and the final state;
  /// accumulates into d_x[t] (already sized B × input).
  void backward(const Cache& cache, const Seq<S>& d_out, const Mat<S>& d_last, Seq<S>& d_x) {
    const auto H = static_cast<Eigen::Index>(hidden_);
    const Eigen::Index B = d_last.rows();
    Mat<S> dh = d_last, dc = Mat<S>::Zero(B, H);
    for (std::size_t k = cache.steps.size(); k-- > 0;) {
      const Step& s = cache.steps[k];
      const std::size_t t = cache.order[k];
      for (Eigen::Index r = 0; r < B; ++r)
        if (s.active[r] && !d_out.empty()) dh.row(r) += d_out[t].row(r);

      const auto one = S(1);
      Mat<S> d_o = dh.cwiseProduct(s.tc);
      Mat<S> dct = dc + (dh.array() * s.o.array() * (one - s.tc.array().square())).matrix();
      Mat<S> dz(B, 4 * H);
      dz.middleCols(0, H) = (dct.array() * s.g.array() * s.i.array() * (one - s.i.array())).matrix();
      dz.middleCols(H, H) = (dct.array() * s.c_prev.array() * s.f.array() * (one - s.f.array())).matrix();
      dz.middleCols(2 * H, H) = (dct.array() * s.i.array() * (one - s.g.array().square())).matrix();
      dz.middleCols(3 * H, H) = (d_o.array() * s.o.array() * (one - s.o.array())).matrix();
      Mat<S> dc_prev = dct.cwiseProduct(s.f);
      for (Eigen::Index r = 0; r < B; ++r)
        if (!s.active[r]) dz.row(r).setZero();

      Wx_.grad.noalias() += dz.transpose() * s.x;
      Wh_.grad.noalias() += dz.transpose() * s.h_prev;
      b_.grad += dz.colwise().sum();
      d_x[t].noalias() += dz * Wx_.value;
      Mat<S> dh_prev = dz * Wh_.value;
      for (Eigen::Index r = 0; r < B; ++r)
        if (!s.active[r]) {
          dh_prev.row(r) = dh.row(r);
          dc_prev.row(r) = dc.row(r);
        }
      dh = std::move(dh_prev);
      dc = std::move(dc_prev);
    }
  }

  void params(ParamList<S>& out) {
    out.push_back(&Wx_);
    out.push_back(&Wh_);
    out.push_back(&b_);
  }

  Param<S>& Wx() { return Wx_; }
  Param<S>& Wh() { return Wh_; }
  Param<S>& b() { return b_; }

 private:
  Param<S> Wx_, Wh_, b_;
  std::size_t input_ = 0, hidden_ = 0;
  bool reverse_ = false;
};

/// One bidirectional layer; outputs and final states are [forward | backward].
template <class S>
class BiLstmLayer {
 public:
  struct Cache {
    typename LstmDirection<S>::Cache fwd, bwd;
  };

  BiLstmLayer() = default;
  BiLstmLayer(const std::string& name, std::size_t input, std::size_t hidden)
      : fwd_(name + ".fwd", input, hidden, false), bwd_(name + ".bwd", input, hidden, true) {}

  void init(Rng& rng) {
    fwd_.init(rng);
    bwd_.init(rng);
  }

  std::size_t input_dim() const { return fwd_.input_dim(); }
  std::size_t hidden_dim() const { return fwd_.hidden_dim(); }

  Mat<S> forward(const Seq<S>& x, const Lengths& len, Seq<S>& out, Cache* cache = nullptr) const {
    Seq<S> of, ob;
    Mat<S> hf = fwd_.forward(x, len, of, cache ? &cache->fwd : nullptr);
    Mat<S> hb = bwd_.forward(x, len, ob, cache ? &cache->bwd : nullptr);
    const auto H = static_cast<Eigen::Index>(hidden_dim());
    out.resize(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
      out[t].resize(of[t].rows(), 2 * H);
      out[t] << of[t], ob[t];
    }
    Mat<S> last(hf.rows(), 2 * H);
    last << hf, hb;
    return last;
  }

  /// d_out may be empty (no gradient through per-step outputs).
  void backward(const Cache& cache, const Seq<S>& d_out, const Mat<S>& d_last, Seq<S>& d_x) {
    const auto H = static_cast<Eigen::Index>(hidden_dim());
    Seq<S> dof, dob;
    for (const auto& d : d_out) {
      dof.push_back(d.leftCols(H));
      dob.push_back(d.rightCols(H));
    }
    fwd_.backward(cache.fwd, dof, d_last.leftCols(H), d_x);
    bwd_.backward(cache.bwd, dob, d_last.rightCols(H), d_x);
  }

  void params(ParamList<S>& out) {
    fwd_.params(out);
    bwd_.params(out);
  }

  LstmDirection<S>& forward_direction() { return fwd_; }
  LstmDirection<S>& backward_direction() { return bwd_; }

 private:
  LstmDirection<S> fwd_, bwd_;
};

/// Stacked BiLSTM with dropout on the outputs of every layer but the last.
/// Returns the last layer's final states (B × 2H).
template <class S>
class BiLstmStack {
 public:
  struct Cache {
    std::vector<typename BiLstmLayer<S>::Cache> layers;
    std::vector<std::vector<Mat<S>>> masks;  // masks[l][t], layers 0..L-2
    std::size_t T = 0;
    Eigen::Index B = 0;
  };

  BiLstmStack() = default;
  BiLstmStack(const std::string& name, std::size_t input, std::size_t hidden, std::size_t n_layers,
              double dropout)
      : dropout_(dropout) {
    require_shape(n_layers >= 1, "BiLSTM stack needs at least one layer");
    for (std::size_t l = 0; l < n_layers; ++l)
      layers_.emplace_back(name + ".l" + std::to_string(l), l == 0 ? input : 2 * hidden, hidden);
  }

  void init(Rng& rng) {
    for (auto& l : layers_) l.init(rng);
  }

  std::size_t input_dim() const { return layers_.front().input_dim(); }
  std::size_t hidden_dim() const { return layers_.front().hidden_dim(); }
  std::size_t output_dim() const { return 2 * hidden_dim(); }
  std::size_t num_layers() const { return layers_.size(); }

  Mat<S> forward(const Seq<S>& x, const Lengths& len, Rng* rng, Cache* cache = nullptr) const {
    for (std::size_t t = 0; t < x.size(); ++t) {
      require_shape(x[t].rows() == static_cast<Eigen::Index>(len.size()), "bilstm: batch/length mismatch");
      require_cols(x[t], static_cast<Eigen::Index>(input_dim()), "bilstm input");
    }
    if (cache) {
      cache->layers.assign(layers_.size(), {});
      cache->masks.assign(layers_.size(), {});
      cache->T = x.size();
      cache->B = static_cast<Eigen::Index>(len.size());
    }
    Seq<S> cur = x, out;
    Mat<S> last;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      last = layers_[l].forward(cur, len, out, cache ? &cache->layers[l] : nullptr);
      if (l + 1 < layers_.size() && rng != nullptr && dropout_ > 0.0) {
        for (std::size_t t = 0; t < out.size(); ++t) {
          Mat<S> m = dropout_mask<S>(out[t].rows(), out[t].cols(), dropout_, *rng);
          out[t] = out[t].cwiseProduct(m);
          if (cache) cache->masks[l].push_back(std::move(m));
        }
      }
      cur = std::move(out);
      out = {};
    }
    if (last.size() == 0) last = Mat<S>::Zero(static_cast<Eigen::Index>(len.size()), 2 * hidden_dim());
    return last;
  }

  /// Gradient w.r.t. the stack input, per timestep.
  Seq<S> backward(const Cache& cache, const Mat<S>& d_last) {
    Seq<S> d_out;  // gradient w.r.t. outputs of layer l (empty for the last layer)
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const auto in = static_cast<Eigen::Index>(layers_[l].input_dim());
      Seq<S> d_in(cache.T, Mat<S>::Zero(cache.B, in));
      Mat<S> dl = l + 1 == layers_.size() ? d_last : Mat<S>::Zero(cache.B, 2 * static_cast<Eigen::Index>(hidden_dim()));
      layers_[l].backward(cache.layers[l], d_out, dl, d_in);
      if (l > 0 && !cache.masks[l - 1].empty())
        for (std::size_t t = 0; t < d_in.size(); ++t) d_in[t] = d_in[t].cwiseProduct(cache.masks[l - 1][t]);
      d_out = std::move(d_in);
    }
    return d_out;
  }

  void params(ParamList<S>& out) {
    for (auto& l : layers_) l.params(out);
  }

  BiLstmLayer<S>& layer(std::size_t l) { return layers_[l]; }

 private:
  std::vector<BiLstmLayer<S>> layers_;
  double dropout_ = 0.0;
};

}  // namespace psyling::neural
