#include "ris/neural.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ris::neural {

bool Mat::is_finite() const {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

Mat matmul_nn(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul_nn: inner dimensions differ");
  Mat c(a.rows, b.cols);
  const std::size_t n = b.cols, kk = a.cols;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* __restrict arow = a.a.data() + i * kk;
    double* __restrict crow = c.a.data() + i * n;
    std::size_t k = 0;
    for (; k + 4 <= kk; k += 4) {
      const double a0 = arow[k], a1 = arow[k + 1], a2 = arow[k + 2], a3 = arow[k + 3];
      const double* __restrict b0 = b.a.data() + k * n;
      const double* __restrict b1 = b0 + n;
      const double* __restrict b2 = b1 + n;
      const double* __restrict b3 = b2 + n;
      for (std::size_t j = 0; j < n; ++j)
        crow[j] += a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j];
    }
    for (; k < kk; ++k) {
      const double aik = arow[k];
      const double* __restrict brow = b.a.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Mat matmul_nt(const Mat& a, const Mat& b) {
  if (a.cols != b.cols) throw std::invalid_argument("matmul_nt: inner dimensions differ");
  Mat c(a.rows, b.rows);
  const std::size_t kk = a.cols, n = b.rows;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* __restrict arow = a.a.data() + i * kk;
    double* __restrict crow = c.a.data() + i * n;
    std::size_t j = 0;
    // four independent accumulator chains keep the FMA pipe busy
    for (; j + 4 <= n; j += 4) {
      const double* __restrict b0 = b.a.data() + j * kk;
      const double* __restrict b1 = b0 + kk;
      const double* __restrict b2 = b1 + kk;
      const double* __restrict b3 = b2 + kk;
      double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
      for (std::size_t k = 0; k < kk; ++k) {
        const double av = arow[k];
        s0 += av * b0[k];
        s1 += av * b1[k];
        s2 += av * b2[k];
        s3 += av * b3[k];
      }
      crow[j] = s0;
      crow[j + 1] = s1;
      crow[j + 2] = s2;
      crow[j + 3] = s3;
    }
    for (; j < n; ++j) {
      const double* __restrict brow = b.a.data() + j * kk;
      double s = 0.0;
      for (std::size_t k = 0; k < kk; ++k) s += arow[k] * brow[k];
      crow[j] = s;
    }
  }
  return c;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
  if (a.rows != b.rows) throw std::invalid_argument("matmul_tn: inner dimensions differ");
  Mat c(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* arow = a.a.data() + k * a.cols;
    const double* brow = b.a.data() + k * b.cols;
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = arow[i];
      double* crow = c.a.data() + i * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

Act act_from_string(const std::string& s) {
  if (s == "linear") return Act::linear;
  if (s == "relu") return Act::relu;
  if (s == "tanh") return Act::tanh;
  throw std::invalid_argument("unknown activation: " + s);
}

std::string act_to_string(Act a) {
  switch (a) {
    case Act::linear: return "linear";
    case Act::relu: return "relu";
    case Act::tanh: return "tanh";
  }
  return "linear";
}

bool DenseNet::same_arch(const DenseNet& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& a = layers[i];
    const DenseLayer& b = other.layers[i];
    if (a.W.rows != b.W.rows || a.W.cols != b.W.cols || a.act != b.act) return false;
    if (a.bn.has_value() != b.bn.has_value()) return false;
  }
  return true;
}

bool DenseNet::is_finite() const {
  for (const DenseLayer& l : layers) {
    if (!l.W.is_finite()) return false;
    for (double v : l.b)
      if (!std::isfinite(v)) return false;
    if (l.bn) {
      for (const auto* vec : {&l.bn->gamma, &l.bn->beta, &l.bn->run_mean, &l.bn->run_var})
        for (double v : *vec)
          if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

DenseLayer make_layer(std::size_t in, std::size_t out, Act act, bool with_bn,
                      RngStream& rng) {
  DenseLayer l;
  l.W = Mat(in, out);
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  for (double& w : l.W.a) w = rng.uniform(-bound, bound);
  l.b.assign(out, 0.0);
  l.act = act;
  if (with_bn) l.bn = BatchNorm(out);
  return l;
}

DenseNet make_mlp(std::size_t in, std::size_t h1, std::size_t h2, std::size_t out,
                  Act hidden, Act out_act, RngStream& rng) {
  DenseNet net;
  net.layers.push_back(make_layer(in, h1, hidden, true, rng));
  net.layers.push_back(make_layer(h1, h2, hidden, false, rng));
  net.layers.push_back(make_layer(h2, out, out_act, false, rng));
  return net;
}

namespace {

void apply_activation(Act act, Mat& z) {
  switch (act) {
    case Act::linear:
      break;
    case Act::relu:
      for (double& v : z.a) v = v > 0.0 ? v : 0.0;
      break;
    case Act::tanh:
      for (double& v : z.a) v = std::tanh(v);
      break;
  }
}

// One layer forward; fills cache when provided.
Mat layer_forward(DenseLayer& l, const Mat& x, bool train_mode, LayerCache* cache) {
  Mat z = matmul_nn(x, l.W);
  for (std::size_t i = 0; i < z.rows; ++i)
    for (std::size_t j = 0; j < z.cols; ++j) z(i, j) += l.b[j];
  if (cache) {
    cache->input = x;
    cache->pre_act = z;
  }
  apply_activation(l.act, z);
  if (cache) cache->post_act = z;
  if (!l.bn) return z;

  BatchNorm& bn = *l.bn;
  const std::size_t n = z.rows, w = z.cols;
  Mat y(n, w);
  if (train_mode) {
    std::vector<double> mean(w, 0.0), var(w, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < w; ++j) mean[j] += z(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        const double d = z(i, j) - mean[j];
        var[j] += d * d;
      }
    for (double& v : var) v /= static_cast<double>(n);

    Mat xhat(n, w);
    for (std::size_t j = 0; j < w; ++j) {
      const double inv = 1.0 / std::sqrt(var[j] + bn.eps);
      for (std::size_t i = 0; i < n; ++i) {
        xhat(i, j) = (z(i, j) - mean[j]) * inv;
        y(i, j) = bn.gamma[j] * xhat(i, j) + bn.beta[j];
      }
    }
    for (std::size_t j = 0; j < w; ++j) {
      bn.run_mean[j] = bn.momentum * bn.run_mean[j] + (1.0 - bn.momentum) * mean[j];
      bn.run_var[j] = bn.momentum * bn.run_var[j] + (1.0 - bn.momentum) * var[j];
    }
    if (cache) {
      cache->normalized = std::move(xhat);
      cache->mean = std::move(mean);
      cache->var = std::move(var);
    }
  } else {
    for (std::size_t j = 0; j < w; ++j) {
      const double inv = 1.0 / std::sqrt(bn.run_var[j] + bn.eps);
      for (std::size_t i = 0; i < n; ++i)
        y(i, j) = bn.gamma[j] * (z(i, j) - bn.run_mean[j]) * inv + bn.beta[j];
    }
  }
  return y;
}

}  // namespace

Mat forward(DenseNet& net, const Mat& batch) {
  if (batch.cols != net.in_dim())
    throw std::invalid_argument("forward: batch width differs from the input width");
  Mat x = batch;
  for (DenseLayer& l : net.layers) x = layer_forward(l, x, net.train_mode, nullptr);
  return x;
}

Mat forward_cached(DenseNet& net, const Mat& batch, ForwardCache& cache) {
  if (batch.cols != net.in_dim())
    throw std::invalid_argument("forward_cached: batch width differs from the input width");
  cache.layers.assign(net.layers.size(), LayerCache{});
  cache.train_mode = net.train_mode;
  Mat x = batch;
  for (std::size_t i = 0; i < net.layers.size(); ++i)
    x = layer_forward(net.layers[i], x, net.train_mode, &cache.layers[i]);
  cache.output = x;
  cache.valid = true;
  return x;
}

bool Gradients::is_finite() const {
  if (!dinput.is_finite()) return false;
  for (const LayerGrads& g : layers) {
    if (!g.dW.is_finite()) return false;
    for (const auto* vec : {&g.db, &g.dgamma, &g.dbeta})
      for (double v : *vec)
        if (!std::isfinite(v)) return false;
  }
  return true;
}

Gradients backward(const DenseNet& net, const ForwardCache& cache, const Mat& upstream) {
  if (!cache.valid) throw std::logic_error("backward: no cached forward pass");
  if (cache.layers.size() != net.layers.size())
    throw std::logic_error("backward: cache does not match the network");

  Gradients grads;
  grads.layers.assign(net.layers.size(), LayerGrads{});
  Mat dy = upstream;

  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const DenseLayer& l = net.layers[li];
    const LayerCache& lc = cache.layers[li];
    LayerGrads& lg = grads.layers[li];
    const std::size_t n = dy.rows, w = dy.cols;

    // batch norm backward (gradient w.r.t. the activation output)
    Mat da;
    if (l.bn) {
      const BatchNorm& bn = *l.bn;
      lg.dgamma.assign(w, 0.0);
      lg.dbeta.assign(w, 0.0);
      da = Mat(n, w);
      if (cache.train_mode) {
        // through the batch statistics
        for (std::size_t j = 0; j < w; ++j) {
          double sum_dy = 0.0, sum_dy_xhat = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            sum_dy += dy(i, j);
            sum_dy_xhat += dy(i, j) * lc.normalized(i, j);
          }
          lg.dbeta[j] = sum_dy;
          lg.dgamma[j] = sum_dy_xhat;
          const double inv = 1.0 / std::sqrt(lc.var[j] + bn.eps);
          const double m1 = sum_dy / static_cast<double>(n);
          const double m2 = sum_dy_xhat / static_cast<double>(n);
          for (std::size_t i = 0; i < n; ++i)
            da(i, j) = bn.gamma[j] * inv *
                       (dy(i, j) - m1 - lc.normalized(i, j) * m2);
        }
      } else {
        for (std::size_t j = 0; j < w; ++j) {
          const double inv = 1.0 / std::sqrt(bn.run_var[j] + bn.eps);
          for (std::size_t i = 0; i < n; ++i) {
            const double xhat = (lc.post_act(i, j) - bn.run_mean[j]) * inv;
            lg.dbeta[j] += dy(i, j);
            lg.dgamma[j] += dy(i, j) * xhat;
            da(i, j) = dy(i, j) * bn.gamma[j] * inv;
          }
        }
      }
    } else {
      da = std::move(dy);
    }

    // activation backward
    Mat dz = std::move(da);
    switch (l.act) {
      case Act::linear:
        break;
      case Act::relu:
        for (std::size_t i = 0; i < dz.rows; ++i)
          for (std::size_t j = 0; j < dz.cols; ++j)
            if (!(lc.pre_act(i, j) > 0.0)) dz(i, j) = 0.0;
        break;
      case Act::tanh:
        for (std::size_t i = 0; i < dz.rows; ++i)
          for (std::size_t j = 0; j < dz.cols; ++j) {
            const double t = lc.post_act(i, j);
            dz(i, j) *= 1.0 - t * t;
          }
        break;
    }

    // linear backward
    lg.dW = matmul_tn(lc.input, dz);
    lg.db.assign(dz.cols, 0.0);
    for (std::size_t i = 0; i < dz.rows; ++i)
      for (std::size_t j = 0; j < dz.cols; ++j) lg.db[j] += dz(i, j);
    dy = matmul_nt(dz, l.W);
  }

  grads.dinput = std::move(dy);
  return grads;
}

AdamState make_adam(const DenseNet& net, double lr, double decay_lambda) {
  AdamState st;
  st.lr = lr;
  st.decay_lambda = decay_lambda;
  for (const DenseLayer& l : net.layers) {
    AdamState::Slot w;
    w.m.assign(l.W.a.size(), 0.0);
    w.v.assign(l.W.a.size(), 0.0);
    st.w_slots.push_back(std::move(w));
    AdamState::Slot b;
    b.m.assign(l.b.size(), 0.0);
    b.v.assign(l.b.size(), 0.0);
    st.b_slots.push_back(std::move(b));
    AdamState::Slot g, be;
    if (l.bn) {
      g.m.assign(l.bn->gamma.size(), 0.0);
      g.v.assign(l.bn->gamma.size(), 0.0);
      be.m.assign(l.bn->beta.size(), 0.0);
      be.v.assign(l.bn->beta.size(), 0.0);
    }
    st.gamma_slots.push_back(std::move(g));
    st.beta_slots.push_back(std::move(be));
  }
  return st;
}

namespace {

void adam_update(std::vector<double>& param, const std::vector<double>& grad,
                 AdamState::Slot& slot, const AdamState& st, double bc1, double bc2) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    slot.m[i] = st.beta1 * slot.m[i] + (1.0 - st.beta1) * grad[i];
    slot.v[i] = st.beta2 * slot.v[i] + (1.0 - st.beta2) * grad[i] * grad[i];
    const double mhat = slot.m[i] / bc1;
    const double vhat = slot.v[i] / bc2;
    param[i] -= st.lr * mhat / (std::sqrt(vhat) + st.eps);
  }
}

}  // namespace

void adam_step(DenseNet& net, const Gradients& grads, AdamState& st) {
  if (grads.layers.size() != net.layers.size())
    throw std::invalid_argument("adam_step: gradient shape mismatch");
  ++st.step;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    DenseLayer& l = net.layers[i];
    const LayerGrads& g = grads.layers[i];
    if (g.dW.a.size() != l.W.a.size() || g.db.size() != l.b.size())
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    adam_update(l.W.a, g.dW.a, st.w_slots[i], st, bc1, bc2);
    adam_update(l.b, g.db, st.b_slots[i], st, bc1, bc2);
    if (l.bn) {
      adam_update(l.bn->gamma, g.dgamma, st.gamma_slots[i], st, bc1, bc2);
      adam_update(l.bn->beta, g.dbeta, st.beta_slots[i], st, bc1, bc2);
    }
  }
}

void decay_lr(AdamState& st) { st.lr *= (1.0 - st.decay_lambda); }

namespace {

void blend(std::vector<double>& target, const std::vector<double>& train, double tau) {
  for (std::size_t i = 0; i < target.size(); ++i)
    target[i] = tau * train[i] + (1.0 - tau) * target[i];
}

}  // namespace

void soft_update(DenseNet& target, const DenseNet& train, double tau) {
  if (!target.same_arch(train))
    throw std::invalid_argument("soft_update: architecture mismatch");
  for (std::size_t i = 0; i < target.layers.size(); ++i) {
    DenseLayer& t = target.layers[i];
    const DenseLayer& s = train.layers[i];
    blend(t.W.a, s.W.a, tau);
    blend(t.b, s.b, tau);
    if (t.bn) {
      blend(t.bn->gamma, s.bn->gamma, tau);
      blend(t.bn->beta, s.bn->beta, tau);
      blend(t.bn->run_mean, s.bn->run_mean, tau);
      blend(t.bn->run_var, s.bn->run_var, tau);
    }
  }
}

namespace {

void write_vec(std::ostream& os, const std::vector<double>& v) {
  os << v.size();
  os << std::setprecision(17);
  for (double x : v) os << ' ' << x;
  os << '\n';
}

std::vector<double> read_vec(std::istream& is) {
  std::size_t n = 0;
  if (!(is >> n)) throw std::runtime_error("net record: truncated vector header");
  std::vector<double> v(n);
  for (double& x : v)
    if (!(is >> x)) throw std::runtime_error("net record: truncated vector body");
  return v;
}

}  // namespace

void save_net(const DenseNet& net, std::ostream& os) {
  os << "densenet 1\n";
  os << net.layers.size() << '\n';
  for (const DenseLayer& l : net.layers) {
    os << l.W.rows << ' ' << l.W.cols << ' ' << act_to_string(l.act) << ' '
       << (l.bn ? 1 : 0) << '\n';
    write_vec(os, l.W.a);
    write_vec(os, l.b);
    if (l.bn) {
      write_vec(os, l.bn->gamma);
      write_vec(os, l.bn->beta);
      write_vec(os, l.bn->run_mean);
      write_vec(os, l.bn->run_var);
    }
  }
}

DenseNet load_net(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "densenet" || version != 1)
    throw std::runtime_error("net record: bad header");
  std::size_t n_layers = 0;
  if (!(is >> n_layers)) throw std::runtime_error("net record: missing layer count");
  DenseNet net;
  for (std::size_t i = 0; i < n_layers; ++i) {
    std::size_t in = 0, out = 0;
    std::string act;
    int has_bn = 0;
    if (!(is >> in >> out >> act >> has_bn))
      throw std::runtime_error("net record: truncated layer header");
    DenseLayer l;
    l.W = Mat(in, out);
    l.W.a = read_vec(is);
    if (l.W.a.size() != in * out) throw std::runtime_error("net record: weight size mismatch");
    l.b = read_vec(is);
    l.act = act_from_string(act);
    if (has_bn) {
      BatchNorm bn(out);
      bn.gamma = read_vec(is);
      bn.beta = read_vec(is);
      bn.run_mean = read_vec(is);
      bn.run_var = read_vec(is);
      l.bn = std::move(bn);
    }
    net.layers.push_back(std::move(l));
  }
  return net;
}

void save_net_file(const DenseNet& net, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  save_net(net, os);
}

DenseNet load_net_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  return load_net(is);
}

}  // namespace ris::neural
