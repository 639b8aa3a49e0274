#include "trailgate/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace trailgate {

namespace {

constexpr double kLayerNormEps = 1e-12;
constexpr std::size_t kChunkRows = 128;  // rows per forward/backward work unit

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

Eigen::MatrixXd glorot(Eigen::Index in, Eigen::Index out, Rng& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  Eigen::MatrixXd w(in, out);
  for (Eigen::Index r = 0; r < in; ++r) {
    for (Eigen::Index c = 0; c < out; ++c) {
      w(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
    }
  }
  return w;
}

GruParams gru_zeros(int e, int h) {
  GruParams p;
  p.Wz = Eigen::MatrixXd::Zero(e, h);
  p.Uz = Eigen::MatrixXd::Zero(h, h);
  p.Wr = Eigen::MatrixXd::Zero(e, h);
  p.Ur = Eigen::MatrixXd::Zero(h, h);
  p.Wh = Eigen::MatrixXd::Zero(e, h);
  p.Uh = Eigen::MatrixXd::Zero(h, h);
  p.bz = Eigen::MatrixXd::Zero(1, h);
  p.br = Eigen::MatrixXd::Zero(1, h);
  p.bh = Eigen::MatrixXd::Zero(1, h);
  return p;
}

GruParams gru_init(int e, int h, Rng& rng) {
  GruParams p = gru_zeros(e, h);
  p.Wz = glorot(e, h, rng);
  p.Uz = glorot(h, h, rng);
  p.Wr = glorot(e, h, rng);
  p.Ur = glorot(h, h, rng);
  p.Wh = glorot(e, h, rng);
  p.Uh = glorot(h, h, rng);
  return p;
}

}  // namespace

void NetConfig::validate() const {
  if (seq_len < 1) throw ConfigError("net: seq_len must be >= 1");
  if (embed_dim < 1 || gru_hidden < 1 || ffn_dim < 1 || fc_hidden < 1 || encoder_layers < 1) {
    throw ConfigError("net: layer sizes must be positive");
  }
  if (num_classes < 2) throw ConfigError("net: num_classes must be >= 2");
  if (d_model() % heads != 0) {
    throw ConfigError("net: d_model " + std::to_string(d_model()) + " not divisible by heads " +
                      std::to_string(heads));
  }
  if (!(lr > 0.0)) throw ConfigError("net: learning rate must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("net: dropout must lie in [0, 1)");
  if (batch < 1) throw ConfigError("net: batch must be >= 1");
  if (epochs < 1) throw ConfigError("net: epochs must be >= 1");
}

NetParams NetParams::zeros_like(const NetConfig& config) {
  config.validate();
  const int e = config.embed_dim;
  const int h = config.gru_hidden;
  const int d = config.d_model();
  NetParams p;
  p.lift = Eigen::MatrixXd::Zero(1, e);
  p.pos = Eigen::MatrixXd::Zero(config.seq_len, e);
  p.fwd = gru_zeros(e, h);
  p.bwd = gru_zeros(e, h);
  p.Wy = Eigen::MatrixXd::Zero(d, d);
  p.by = Eigen::MatrixXd::Zero(1, d);
  p.layers.resize(static_cast<std::size_t>(config.encoder_layers));
  for (auto& layer : p.layers) {
    layer.Wq = Eigen::MatrixXd::Zero(d, d);
    layer.Wk = Eigen::MatrixXd::Zero(d, d);
    layer.Wv = Eigen::MatrixXd::Zero(d, d);
    layer.Wo = Eigen::MatrixXd::Zero(d, d);
    layer.bq = Eigen::MatrixXd::Zero(1, d);
    layer.bk = Eigen::MatrixXd::Zero(1, d);
    layer.bv = Eigen::MatrixXd::Zero(1, d);
    layer.bo = Eigen::MatrixXd::Zero(1, d);
    layer.ln1_gain = Eigen::MatrixXd::Zero(1, d);
    layer.ln1_bias = Eigen::MatrixXd::Zero(1, d);
    layer.ln2_gain = Eigen::MatrixXd::Zero(1, d);
    layer.ln2_bias = Eigen::MatrixXd::Zero(1, d);
    layer.W1 = Eigen::MatrixXd::Zero(d, config.ffn_dim);
    layer.b1 = Eigen::MatrixXd::Zero(1, config.ffn_dim);
    layer.W2 = Eigen::MatrixXd::Zero(config.ffn_dim, d);
    layer.b2 = Eigen::MatrixXd::Zero(1, d);
  }
  p.Wh1 = Eigen::MatrixXd::Zero(d, config.fc_hidden);
  p.bh1 = Eigen::MatrixXd::Zero(1, config.fc_hidden);
  p.Wh2 = Eigen::MatrixXd::Zero(config.fc_hidden, config.num_classes);
  p.bh2 = Eigen::MatrixXd::Zero(1, config.num_classes);
  return p;
}

NetParams NetParams::glorot_init(const NetConfig& config, std::uint64_t seed) {
  NetParams p = zeros_like(config);
  Rng rng(seed ? seed : 0x7261696cULL);
  const int e = config.embed_dim;
  const int h = config.gru_hidden;
  const int d = config.d_model();

  p.lift = glorot(1, e, rng);
  for (Eigen::Index t = 0; t < p.pos.rows(); ++t) {
    for (Eigen::Index c = 0; c < p.pos.cols(); ++c) p.pos(t, c) = rng.gaussian() * 0.02;
  }
  p.fwd = gru_init(e, h, rng);
  p.bwd = gru_init(e, h, rng);
  p.Wy = glorot(d, d, rng);
  for (auto& layer : p.layers) {
    layer.Wq = glorot(d, d, rng);
    layer.Wk = glorot(d, d, rng);
    layer.Wv = glorot(d, d, rng);
    layer.Wo = glorot(d, d, rng);
    layer.ln1_gain.setOnes();
    layer.ln2_gain.setOnes();
    layer.W1 = glorot(d, config.ffn_dim, rng);
    layer.W2 = glorot(config.ffn_dim, d, rng);
  }
  p.Wh1 = glorot(d, config.fc_hidden, rng);
  p.Wh2 = glorot(config.fc_hidden, config.num_classes, rng);
  return p;
}

namespace {

template <typename Params, typename Mat>
std::vector<std::pair<std::string, Mat*>> tensor_list_impl(Params& p) {
  std::vector<std::pair<std::string, Mat*>> out;
  out.emplace_back("embed.lift", &p.lift);
  out.emplace_back("embed.pos", &p.pos);
  auto add_gru = [&out](const std::string& prefix, auto& g) {
    out.emplace_back(prefix + ".Wz", &g.Wz);
    out.emplace_back(prefix + ".Uz", &g.Uz);
    out.emplace_back(prefix + ".bz", &g.bz);
    out.emplace_back(prefix + ".Wr", &g.Wr);
    out.emplace_back(prefix + ".Ur", &g.Ur);
    out.emplace_back(prefix + ".br", &g.br);
    out.emplace_back(prefix + ".Wh", &g.Wh);
    out.emplace_back(prefix + ".Uh", &g.Uh);
    out.emplace_back(prefix + ".bh", &g.bh);
  };
  add_gru("gru_fwd", p.fwd);
  add_gru("gru_bwd", p.bwd);
  out.emplace_back("proj.Wy", &p.Wy);
  out.emplace_back("proj.by", &p.by);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& layer = p.layers[l];
    std::string prefix = "encoder" + std::to_string(l);
    out.emplace_back(prefix + ".Wq", &layer.Wq);
    out.emplace_back(prefix + ".bq", &layer.bq);
    out.emplace_back(prefix + ".Wk", &layer.Wk);
    out.emplace_back(prefix + ".bk", &layer.bk);
    out.emplace_back(prefix + ".Wv", &layer.Wv);
    out.emplace_back(prefix + ".bv", &layer.bv);
    out.emplace_back(prefix + ".Wo", &layer.Wo);
    out.emplace_back(prefix + ".bo", &layer.bo);
    out.emplace_back(prefix + ".ln1_gain", &layer.ln1_gain);
    out.emplace_back(prefix + ".ln1_bias", &layer.ln1_bias);
    out.emplace_back(prefix + ".W1", &layer.W1);
    out.emplace_back(prefix + ".b1", &layer.b1);
    out.emplace_back(prefix + ".W2", &layer.W2);
    out.emplace_back(prefix + ".b2", &layer.b2);
    out.emplace_back(prefix + ".ln2_gain", &layer.ln2_gain);
    out.emplace_back(prefix + ".ln2_bias", &layer.ln2_bias);
  }
  out.emplace_back("head.W1", &p.Wh1);
  out.emplace_back("head.b1", &p.bh1);
  out.emplace_back("head.W2", &p.Wh2);
  out.emplace_back("head.b2", &p.bh2);
  return out;
}

}  // namespace

std::vector<std::pair<std::string, Eigen::MatrixXd*>> tensor_list(NetParams& params) {
  return tensor_list_impl<NetParams, Eigen::MatrixXd>(params);
}

std::vector<std::pair<std::string, const Eigen::MatrixXd*>> tensor_list(const NetParams& params) {
  return tensor_list_impl<const NetParams, const Eigen::MatrixXd>(params);
}

// ---- single-sample primitives ----

Eigen::MatrixXd embed_row(const Eigen::RowVectorXd& row, const NetParams& params) {
  if (row.size() != params.pos.rows()) throw Error("embed_row: length != seq_len");
  Eigen::MatrixXd out(params.pos.rows(), params.pos.cols());
  for (Eigen::Index t = 0; t < out.rows(); ++t) {
    out.row(t) = row(t) * params.lift.row(0) + params.pos.row(t);
  }
  return out;
}

Eigen::RowVectorXd gru_cell(const Eigen::RowVectorXd& x_t, const Eigen::RowVectorXd& h_prev,
                            const GruParams& p) {
  Eigen::RowVectorXd z = sigmoid(x_t * p.Wz + h_prev * p.Uz + p.bz);
  Eigen::RowVectorXd r = sigmoid(x_t * p.Wr + h_prev * p.Ur + p.br);
  Eigen::RowVectorXd cand =
      (x_t * p.Wh + h_prev.cwiseProduct(r) * p.Uh + p.bh).array().tanh();
  return ((1.0 - z.array()) * h_prev.array() + z.array() * cand.array()).matrix();
}

Eigen::MatrixXd bigru_concat_states(const Eigen::MatrixXd& sequence, const NetParams& params) {
  const Eigen::Index T = sequence.rows();
  const Eigen::Index H = params.fwd.Wz.cols();
  Eigen::MatrixXd states(T, 2 * H);
  Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(H);
  for (Eigen::Index t = 0; t < T; ++t) {
    h = gru_cell(sequence.row(t), h, params.fwd);
    states.row(t).head(H) = h;
  }
  h.setZero();
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    h = gru_cell(sequence.row(t), h, params.bwd);
    states.row(t).tail(H) = h;
  }
  return states;
}

Eigen::MatrixXd bigru(const Eigen::MatrixXd& sequence, const NetParams& params) {
  Eigen::MatrixXd states = bigru_concat_states(sequence, params);
  return (states * params.Wy).rowwise() + params.by.row(0);
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores) {
  Eigen::MatrixXd out(scores.rows(), scores.cols());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    double mx = scores.row(r).maxCoeff();
    Eigen::ArrayXd e = (scores.row(r).array() - mx).exp();
    out.row(r) = (e / e.sum()).matrix().transpose();
  }
  return out;
}

Eigen::MatrixXd attention(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& K,
                          const Eigen::MatrixXd& V) {
  if (K.rows() != V.rows()) throw Error("attention: K/V row mismatch");
  if (Q.cols() != K.cols()) throw Error("attention: Q/K width mismatch");
  double scale = 1.0 / std::sqrt(static_cast<double>(Q.cols()));
  return softmax_rows(Q * K.transpose() * scale) * V;
}

LayerNormStats layer_norm(const Eigen::MatrixXd& X, const Eigen::MatrixXd& gain,
                          const Eigen::MatrixXd& bias) {
  LayerNormStats stats;
  stats.normalized.resizeLike(X);
  stats.output.resizeLike(X);
  const double d = static_cast<double>(X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    double mu = X.row(r).mean();
    double var = (X.row(r).array() - mu).square().sum() / d;
    double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    stats.normalized.row(r) = ((X.row(r).array() - mu) * inv).matrix();
    stats.output.row(r) =
        stats.normalized.row(r).cwiseProduct(gain.row(0)) + bias.row(0);
  }
  return stats;
}

Eigen::MatrixXd encoder_block(const Eigen::MatrixXd& X, const EncoderParams& p, int heads) {
  const Eigen::Index d = X.cols();
  if (d % heads != 0) throw ConfigError("encoder_block: width not divisible by heads");
  const Eigen::Index dk = d / heads;

  Eigen::MatrixXd Q = (X * p.Wq).rowwise() + p.bq.row(0);
  Eigen::MatrixXd K = (X * p.Wk).rowwise() + p.bk.row(0);
  Eigen::MatrixXd V = (X * p.Wv).rowwise() + p.bv.row(0);
  Eigen::MatrixXd O(X.rows(), d);
  for (int a = 0; a < heads; ++a) {
    O.middleCols(a * dk, dk) =
        attention(Q.middleCols(a * dk, dk), K.middleCols(a * dk, dk), V.middleCols(a * dk, dk));
  }
  Eigen::MatrixXd M = (O * p.Wo).rowwise() + p.bo.row(0);
  Eigen::MatrixXd N1 = layer_norm(X + M, p.ln1_gain, p.ln1_bias).output;
  Eigen::MatrixXd Z = (((N1 * p.W1).rowwise() + p.b1.row(0)).cwiseMax(0.0) * p.W2).rowwise() +
                      p.b2.row(0);
  return layer_norm(N1 + Z, p.ln2_gain, p.ln2_bias).output;
}

// ---- batched training path ----

namespace {

struct GruCache {
  std::vector<Eigen::MatrixXd> Z, R, G, H;  // indexed by processing step
};

struct EncoderCache {
  Eigen::MatrixXd X;  // layer input, sample-major (B*T) x d
  Eigen::MatrixXd Q, K, V, O;
  std::vector<Eigen::MatrixXd> attn;  // B*heads of T x T
  Eigen::MatrixXd mask1, mask2;       // dropout masks; empty in eval mode
  Eigen::MatrixXd nhat1, N1, Z1r, nhat2, N2;
  Eigen::VectorXd inv1, inv2;
};

struct Cache {
  Eigen::MatrixXd input;  // B x T
  std::vector<Eigen::MatrixXd> embedded;  // T of B x E
  GruCache fwd, bwd;
  Eigen::MatrixXd concat_sm;  // (B*T) x 2H sample-major
  Eigen::MatrixXd S0;         // after Wy projection
  std::vector<EncoderCache> layers;
  Eigen::MatrixXd pooled, Fh;  // head intermediates
};

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  Eigen::MatrixXd mask(rows, cols);
  double scale = 1.0 / (1.0 - p);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      mask(r, c) = rng.uniform() >= p ? scale : 0.0;
    }
  }
  return mask;
}

void gru_forward_batch(const std::vector<Eigen::MatrixXd>& inputs, const GruParams& p,
                       bool reverse, GruCache& cache) {
  const Eigen::Index T = static_cast<Eigen::Index>(inputs.size());
  const Eigen::Index B = inputs[0].rows();
  const Eigen::Index H = p.Wz.cols();
  cache.Z.resize(T);
  cache.R.resize(T);
  cache.G.resize(T);
  cache.H.resize(T);
  Eigen::MatrixXd h_prev = Eigen::MatrixXd::Zero(B, H);
  for (Eigen::Index step = 0; step < T; ++step) {
    Eigen::Index t = reverse ? T - 1 - step : step;
    const Eigen::MatrixXd& x = inputs[static_cast<std::size_t>(t)];
    Eigen::MatrixXd z = sigmoid(((x * p.Wz + h_prev * p.Uz).rowwise() + p.bz.row(0)));
    Eigen::MatrixXd r = sigmoid(((x * p.Wr + h_prev * p.Ur).rowwise() + p.br.row(0)));
    Eigen::MatrixXd g =
        ((x * p.Wh + r.cwiseProduct(h_prev) * p.Uh).rowwise() + p.bh.row(0)).array().tanh();
    Eigen::MatrixXd h =
        ((1.0 - z.array()) * h_prev.array() + z.array() * g.array()).matrix();
    cache.Z[static_cast<std::size_t>(step)] = std::move(z);
    cache.R[static_cast<std::size_t>(step)] = std::move(r);
    cache.G[static_cast<std::size_t>(step)] = std::move(g);
    cache.H[static_cast<std::size_t>(step)] = h;
    h_prev = std::move(h);
  }
}

// dstates[t] holds the gradient on this direction's hidden state at time t.
// Returns gradients on the embedded inputs (accumulated into dinputs).
void gru_backward_batch(const std::vector<Eigen::MatrixXd>& inputs,
                        const std::vector<Eigen::MatrixXd>& dstates, const GruParams& p,
                        bool reverse, const GruCache& cache, GruParams& grads,
                        std::vector<Eigen::MatrixXd>& dinputs) {
  const Eigen::Index T = static_cast<Eigen::Index>(inputs.size());
  const Eigen::Index B = inputs[0].rows();
  const Eigen::Index H = p.Wz.cols();
  Eigen::MatrixXd carry = Eigen::MatrixXd::Zero(B, H);
  for (Eigen::Index step = T - 1; step >= 0; --step) {
    Eigen::Index t = reverse ? T - 1 - step : step;
    const Eigen::MatrixXd& x = inputs[static_cast<std::size_t>(t)];
    const Eigen::MatrixXd& z = cache.Z[static_cast<std::size_t>(step)];
    const Eigen::MatrixXd& r = cache.R[static_cast<std::size_t>(step)];
    const Eigen::MatrixXd& g = cache.G[static_cast<std::size_t>(step)];
    Eigen::MatrixXd h_prev = step > 0 ? cache.H[static_cast<std::size_t>(step - 1)]
                                      : Eigen::MatrixXd::Zero(B, H);

    Eigen::MatrixXd dh = dstates[static_cast<std::size_t>(t)] + carry;
    Eigen::MatrixXd dz = dh.cwiseProduct(g - h_prev);
    Eigen::MatrixXd dg = dh.cwiseProduct(z);
    Eigen::MatrixXd dh_prev = dh.cwiseProduct((1.0 - z.array()).matrix());

    Eigen::MatrixXd dag = dg.cwiseProduct((1.0 - g.array().square()).matrix());
    Eigen::MatrixXd rh = r.cwiseProduct(h_prev);
    grads.Wh += x.transpose() * dag;
    grads.Uh += rh.transpose() * dag;
    grads.bh += dag.colwise().sum();
    dinputs[static_cast<std::size_t>(t)] += dag * p.Wh.transpose();
    Eigen::MatrixXd drh = dag * p.Uh.transpose();
    Eigen::MatrixXd dr = drh.cwiseProduct(h_prev);
    dh_prev += drh.cwiseProduct(r);

    Eigen::MatrixXd dar = dr.cwiseProduct(r.cwiseProduct((1.0 - r.array()).matrix()));
    grads.Wr += x.transpose() * dar;
    grads.Ur += h_prev.transpose() * dar;
    grads.br += dar.colwise().sum();
    dinputs[static_cast<std::size_t>(t)] += dar * p.Wr.transpose();
    dh_prev += dar * p.Ur.transpose();

    Eigen::MatrixXd daz = dz.cwiseProduct(z.cwiseProduct((1.0 - z.array()).matrix()));
    grads.Wz += x.transpose() * daz;
    grads.Uz += h_prev.transpose() * daz;
    grads.bz += daz.colwise().sum();
    dinputs[static_cast<std::size_t>(t)] += daz * p.Wz.transpose();
    dh_prev += daz * p.Uz.transpose();

    carry = std::move(dh_prev);
  }
}

void layer_norm_backward(const Eigen::MatrixXd& dout, const Eigen::MatrixXd& nhat,
                         const Eigen::VectorXd& inv_std, const Eigen::MatrixXd& gain,
                         Eigen::MatrixXd& dX, Eigen::MatrixXd& dgain, Eigen::MatrixXd& dbias) {
  const double d = static_cast<double>(dout.cols());
  dX.resizeLike(dout);
  for (Eigen::Index r = 0; r < dout.rows(); ++r) {
    dgain += dout.row(r).cwiseProduct(nhat.row(r));
    dbias += dout.row(r);
    Eigen::RowVectorXd dnhat = dout.row(r).cwiseProduct(gain.row(0));
    double m1 = dnhat.mean();
    double m2 = dnhat.cwiseProduct(nhat.row(r)).sum() / d;
    dX.row(r) = (inv_std(r) * (dnhat.array() - m1 - nhat.row(r).array() * m2)).matrix();
  }
}

// Forward pass over one chunk; fills the cache when train_cache is true.
Eigen::MatrixXd chunk_forward(const Eigen::MatrixXd& rows, const NetParams& params,
                              const NetConfig& config, Cache* cache, Rng* dropout_rng) {
  const Eigen::Index B = rows.rows();
  const Eigen::Index T = config.seq_len;
  const Eigen::Index E = config.embed_dim;
  const Eigen::Index H = config.gru_hidden;
  const Eigen::Index D = config.d_model();
  if (rows.cols() != T) throw Error("forward: row width != seq_len");

  Cache local;
  Cache& c = cache ? *cache : local;
  c.input = rows;

  c.embedded.resize(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) {
    c.embedded[static_cast<std::size_t>(t)] =
        rows.col(t) * params.lift + Eigen::MatrixXd::Ones(B, 1) * params.pos.row(t);
  }

  gru_forward_batch(c.embedded, params.fwd, false, c.fwd);
  gru_forward_batch(c.embedded, params.bwd, true, c.bwd);

  // Sample-major concatenated states: row b*T + t.
  c.concat_sm.resize(B * T, 2 * H);
  for (Eigen::Index t = 0; t < T; ++t) {
    // Forward cache is stored by step == time; backward by step == T-1-t.
    const Eigen::MatrixXd& hf = c.fwd.H[static_cast<std::size_t>(t)];
    const Eigen::MatrixXd& hb = c.bwd.H[static_cast<std::size_t>(T - 1 - t)];
    for (Eigen::Index b = 0; b < B; ++b) {
      c.concat_sm.row(b * T + t).head(H) = hf.row(b);
      c.concat_sm.row(b * T + t).tail(H) = hb.row(b);
    }
  }
  c.S0 = (c.concat_sm * params.Wy).rowwise() + params.by.row(0);

  const Eigen::Index dk = D / config.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  Eigen::MatrixXd S = c.S0;
  c.layers.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const EncoderParams& lp = params.layers[l];
    EncoderCache& lc = c.layers[l];
    lc.X = S;
    lc.Q = (S * lp.Wq).rowwise() + lp.bq.row(0);
    lc.K = (S * lp.Wk).rowwise() + lp.bk.row(0);
    lc.V = (S * lp.Wv).rowwise() + lp.bv.row(0);
    lc.O.resize(B * T, D);
    lc.attn.resize(static_cast<std::size_t>(B * config.heads));
    for (Eigen::Index b = 0; b < B; ++b) {
      for (int a = 0; a < config.heads; ++a) {
        auto Qb = lc.Q.block(b * T, a * dk, T, dk);
        auto Kb = lc.K.block(b * T, a * dk, T, dk);
        auto Vb = lc.V.block(b * T, a * dk, T, dk);
        Eigen::MatrixXd A = softmax_rows(Qb * Kb.transpose() * scale);
        lc.O.block(b * T, a * dk, T, dk) = A * Vb;
        lc.attn[static_cast<std::size_t>(b * config.heads + a)] = std::move(A);
      }
    }
    Eigen::MatrixXd M = (lc.O * lp.Wo).rowwise() + lp.bo.row(0);
    if (dropout_rng && config.dropout > 0.0) {
      lc.mask1 = dropout_mask(M.rows(), M.cols(), config.dropout, *dropout_rng);
      M = M.cwiseProduct(lc.mask1);
    }
    LayerNormStats ln1 = layer_norm(lc.X + M, lp.ln1_gain, lp.ln1_bias);
    lc.nhat1 = std::move(ln1.normalized);
    lc.N1 = std::move(ln1.output);
    lc.inv1.resize(B * T);
    {
      Eigen::MatrixXd R1 = lc.X + M;
      const double d = static_cast<double>(R1.cols());
      for (Eigen::Index r = 0; r < R1.rows(); ++r) {
        double mu = R1.row(r).mean();
        double var = (R1.row(r).array() - mu).square().sum() / d;
        lc.inv1(r) = 1.0 / std::sqrt(var + kLayerNormEps);
      }
    }
    lc.Z1r = ((lc.N1 * lp.W1).rowwise() + lp.b1.row(0)).cwiseMax(0.0);
    Eigen::MatrixXd Z2 = (lc.Z1r * lp.W2).rowwise() + lp.b2.row(0);
    if (dropout_rng && config.dropout > 0.0) {
      lc.mask2 = dropout_mask(Z2.rows(), Z2.cols(), config.dropout, *dropout_rng);
      Z2 = Z2.cwiseProduct(lc.mask2);
    }
    Eigen::MatrixXd R2 = lc.N1 + Z2;
    LayerNormStats ln2 = layer_norm(R2, lp.ln2_gain, lp.ln2_bias);
    lc.nhat2 = std::move(ln2.normalized);
    lc.N2 = std::move(ln2.output);
    lc.inv2.resize(B * T);
    {
      const double d = static_cast<double>(R2.cols());
      for (Eigen::Index r = 0; r < R2.rows(); ++r) {
        double mu = R2.row(r).mean();
        double var = (R2.row(r).array() - mu).square().sum() / d;
        lc.inv2(r) = 1.0 / std::sqrt(var + kLayerNormEps);
      }
    }
    S = lc.N2;
  }

  c.pooled.resize(B, D);
  for (Eigen::Index b = 0; b < B; ++b) {
    c.pooled.row(b) = S.middleRows(b * T, T).colwise().mean();
  }
  c.Fh = ((c.pooled * params.Wh1).rowwise() + params.bh1.row(0)).cwiseMax(0.0);
  return (c.Fh * params.Wh2).rowwise() + params.bh2.row(0);
}

void chunk_backward(const Eigen::MatrixXd& dlogits, const NetParams& params,
                    const NetConfig& config, const Cache& c, NetParams& grads) {
  const Eigen::Index B = c.input.rows();
  const Eigen::Index T = config.seq_len;
  const Eigen::Index H = config.gru_hidden;
  const Eigen::Index D = config.d_model();
  const Eigen::Index dk = D / config.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  // Head.
  grads.Wh2 += c.Fh.transpose() * dlogits;
  grads.bh2 += dlogits.colwise().sum();
  Eigen::MatrixXd dF = dlogits * params.Wh2.transpose();
  Eigen::MatrixXd dFpre =
      dF.cwiseProduct((c.Fh.array() > 0.0).cast<double>().matrix());
  grads.Wh1 += c.pooled.transpose() * dFpre;
  grads.bh1 += dFpre.colwise().sum();
  Eigen::MatrixXd dpooled = dFpre * params.Wh1.transpose();

  // Mean pool.
  Eigen::MatrixXd dS(B * T, D);
  double inv_T = 1.0 / static_cast<double>(T);
  for (Eigen::Index b = 0; b < B; ++b) {
    for (Eigen::Index t = 0; t < T; ++t) {
      dS.row(b * T + t) = dpooled.row(b) * inv_T;
    }
  }

  // Encoder layers, in reverse.
  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const EncoderParams& lp = params.layers[li];
    const EncoderCache& lc = c.layers[li];
    NetParams& g = grads;
    EncoderParams& gl = g.layers[li];

    Eigen::MatrixXd dR2;
    layer_norm_backward(dS, lc.nhat2, lc.inv2, lp.ln2_gain, dR2, gl.ln2_gain, gl.ln2_bias);

    Eigen::MatrixXd dN1 = dR2;  // residual branch
    Eigen::MatrixXd dZ2 = dR2;
    if (lc.mask2.size() > 0) dZ2 = dZ2.cwiseProduct(lc.mask2);
    gl.W2 += lc.Z1r.transpose() * dZ2;
    gl.b2 += dZ2.colwise().sum();
    Eigen::MatrixXd dZ1r = dZ2 * lp.W2.transpose();
    Eigen::MatrixXd dZ1 =
        dZ1r.cwiseProduct((lc.Z1r.array() > 0.0).cast<double>().matrix());
    gl.W1 += lc.N1.transpose() * dZ1;
    gl.b1 += dZ1.colwise().sum();
    dN1 += dZ1 * lp.W1.transpose();

    Eigen::MatrixXd dR1;
    layer_norm_backward(dN1, lc.nhat1, lc.inv1, lp.ln1_gain, dR1, gl.ln1_gain, gl.ln1_bias);

    Eigen::MatrixXd dX = dR1;  // residual branch
    Eigen::MatrixXd dM = dR1;
    if (lc.mask1.size() > 0) dM = dM.cwiseProduct(lc.mask1);
    gl.Wo += lc.O.transpose() * dM;
    gl.bo += dM.colwise().sum();
    Eigen::MatrixXd dO = dM * lp.Wo.transpose();

    Eigen::MatrixXd dQ = Eigen::MatrixXd::Zero(B * T, D);
    Eigen::MatrixXd dK = Eigen::MatrixXd::Zero(B * T, D);
    Eigen::MatrixXd dV = Eigen::MatrixXd::Zero(B * T, D);
    for (Eigen::Index b = 0; b < B; ++b) {
      for (int a = 0; a < config.heads; ++a) {
        const Eigen::MatrixXd& A = lc.attn[static_cast<std::size_t>(b * config.heads + a)];
        auto Qb = lc.Q.block(b * T, a * dk, T, dk);
        auto Kb = lc.K.block(b * T, a * dk, T, dk);
        auto Vb = lc.V.block(b * T, a * dk, T, dk);
        auto dOb = dO.block(b * T, a * dk, T, dk);
        Eigen::MatrixXd dA = dOb * Vb.transpose();
        dV.block(b * T, a * dk, T, dk) += A.transpose() * dOb;
        Eigen::MatrixXd dScores(T, T);
        for (Eigen::Index r = 0; r < T; ++r) {
          double dot = dA.row(r).cwiseProduct(A.row(r)).sum();
          dScores.row(r) = (A.row(r).array() * (dA.row(r).array() - dot)).matrix();
        }
        dQ.block(b * T, a * dk, T, dk) += dScores * Kb * scale;
        dK.block(b * T, a * dk, T, dk) += dScores.transpose() * Qb * scale;
      }
    }
    gl.Wq += lc.X.transpose() * dQ;
    gl.bq += dQ.colwise().sum();
    gl.Wk += lc.X.transpose() * dK;
    gl.bk += dK.colwise().sum();
    gl.Wv += lc.X.transpose() * dV;
    gl.bv += dV.colwise().sum();
    dX += dQ * lp.Wq.transpose() + dK * lp.Wk.transpose() + dV * lp.Wv.transpose();
    dS = std::move(dX);
  }

  // Projection back to the concatenated states.
  grads.Wy += c.concat_sm.transpose() * dS;
  grads.by += dS.colwise().sum();
  Eigen::MatrixXd dconcat = dS * params.Wy.transpose();

  std::vector<Eigen::MatrixXd> dfwd(static_cast<std::size_t>(T)),
      dbwd(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) {
    dfwd[static_cast<std::size_t>(t)].setZero(B, H);
    dbwd[static_cast<std::size_t>(t)].setZero(B, H);
    for (Eigen::Index b = 0; b < B; ++b) {
      dfwd[static_cast<std::size_t>(t)].row(b) = dconcat.row(b * T + t).head(H);
      dbwd[static_cast<std::size_t>(t)].row(b) = dconcat.row(b * T + t).tail(H);
    }
  }

  std::vector<Eigen::MatrixXd> dembed(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) {
    dembed[static_cast<std::size_t>(t)].setZero(B, config.embed_dim);
  }
  gru_backward_batch(c.embedded, dfwd, params.fwd, false, c.fwd, grads.fwd, dembed);
  gru_backward_batch(c.embedded, dbwd, params.bwd, true, c.bwd, grads.bwd, dembed);

  for (Eigen::Index t = 0; t < T; ++t) {
    const Eigen::MatrixXd& dE = dembed[static_cast<std::size_t>(t)];
    grads.lift += c.input.col(t).transpose() * dE;
    grads.pos.row(t) += dE.colwise().sum();
  }
}

Eigen::MatrixXd table_to_eigen(const FeatureTable& table) {
  Eigen::MatrixXd rows(table.rows, table.cols);
  for (std::size_t r = 0; r < table.rows; ++r) {
    for (std::size_t c = 0; c < table.cols; ++c) rows(static_cast<Eigen::Index>(r),
                                                      static_cast<Eigen::Index>(c)) = table.at(r, c);
  }
  return rows;
}

}  // namespace

Eigen::MatrixXd forward(const Eigen::MatrixXd& rows, const NetParams& params,
                        const NetConfig& config) {
  Eigen::MatrixXd logits(rows.rows(), config.num_classes);
  std::size_t n = static_cast<std::size_t>(rows.rows());
  parallel_for(0, n, kChunkRows, [&](std::size_t begin, std::size_t end) {
    Eigen::MatrixXd chunk = rows.middleRows(static_cast<Eigen::Index>(begin),
                                            static_cast<Eigen::Index>(end - begin));
    logits.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)) =
        chunk_forward(chunk, params, config, nullptr, nullptr);
  });
  return logits;
}

Eigen::MatrixXd forward(const FeatureTable& table, const NetParams& params,
                        const NetConfig& config) {
  return forward(table_to_eigen(table), params, config);
}

double cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw Error("cross_entropy: shape mismatch");
  }
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    double mx = logits.row(r).maxCoeff();
    double lse = std::log((logits.row(r).array() - mx).exp().sum());
    total += lse - (logits(r, labels[static_cast<std::size_t>(r)]) - mx);
  }
  return total / static_cast<double>(logits.rows());
}

double loss_and_gradients(const Eigen::MatrixXd& rows, const std::vector<int>& labels,
                          const NetParams& params, const NetConfig& config, NetParams& grads,
                          std::uint64_t dropout_seed) {
  const std::size_t n = static_cast<std::size_t>(rows.rows());
  if (n == 0) throw Error("loss_and_gradients: empty batch");
  const std::size_t n_chunks = (n + kChunkRows - 1) / kChunkRows;

  std::vector<NetParams> chunk_grads(n_chunks, NetParams::zeros_like(config));
  std::vector<double> chunk_loss(n_chunks, 0.0);

  parallel_for(0, n, kChunkRows, [&](std::size_t begin, std::size_t end) {
    std::size_t chunk_idx = begin / kChunkRows;
    Eigen::MatrixXd chunk = rows.middleRows(static_cast<Eigen::Index>(begin),
                                            static_cast<Eigen::Index>(end - begin));
    Cache cache;
    Rng drop_rng(Rng::mix(dropout_seed, chunk_idx));
    Rng* drop = (dropout_seed != 0 && config.dropout > 0.0) ? &drop_rng : nullptr;
    Eigen::MatrixXd logits = chunk_forward(chunk, params, config, &cache, drop);

    // Softmax cross-entropy gradient, scaled by 1/n for the batch mean.
    Eigen::MatrixXd dlogits(logits.rows(), logits.cols());
    double loss_sum = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      double mx = logits.row(r).maxCoeff();
      Eigen::ArrayXd e = (logits.row(r).array() - mx).exp();
      double z = e.sum();
      int y = labels[begin + static_cast<std::size_t>(r)];
      loss_sum += std::log(z) - (logits(r, y) - mx);
      dlogits.row(r) = (e / z).matrix().transpose() / static_cast<double>(n);
      dlogits(r, y) -= 1.0 / static_cast<double>(n);
    }
    chunk_loss[chunk_idx] = loss_sum;
    chunk_backward(dlogits, params, config, cache, chunk_grads[chunk_idx]);
  });

  grads = NetParams::zeros_like(config);
  auto dst = tensor_list(grads);
  for (std::size_t c = 0; c < n_chunks; ++c) {
    auto src = tensor_list(chunk_grads[c]);
    for (std::size_t i = 0; i < dst.size(); ++i) *dst[i].second += *src[i].second;
  }
  double total = std::accumulate(chunk_loss.begin(), chunk_loss.end(), 0.0);
  return total / static_cast<double>(n);
}

AdamState AdamState::zeros_like(const NetConfig& config) {
  AdamState state;
  NetParams shape = NetParams::zeros_like(config);
  for (auto& [name, tensor] : tensor_list(shape)) {
    state.m.push_back(Eigen::MatrixXd::Zero(tensor->rows(), tensor->cols()));
    state.v.push_back(Eigen::MatrixXd::Zero(tensor->rows(), tensor->cols()));
  }
  return state;
}

void adam_step(NetParams& params, const NetParams& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
  ++state.step;
  auto p = tensor_list(params);
  auto g = tensor_list(grads);
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < p.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * (*g[i].second);
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g[i].second->array().square().matrix();
    Eigen::ArrayXXd m_hat = state.m[i].array() / bc1;
    Eigen::ArrayXXd v_hat = state.v[i].array() / bc2;
    p[i].second->array() -= lr * m_hat / (v_hat.sqrt() + eps);
  }
}

std::vector<int> predict_classes(const FeatureTable& table, const NetParams& params,
                                 const NetConfig& config) {
  Eigen::MatrixXd logits = forward(table, params, config);
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    int best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(r, c) > logits(r, best)) best = static_cast<int>(c);
    }
    out[static_cast<std::size_t>(r)] = best;
  }
  return out;
}

double accuracy_on(const FeatureTable& table, const LabelVector& labels, const NetParams& params,
                   const NetConfig& config) {
  std::vector<int> pred = predict_classes(table, params, config);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels.labels[i];
  return labels.size() == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(labels.size());
}

TrainResult train(const FeatureTable& table, const LabelVector& labels, const NetConfig& config,
                  int k_folds, const std::function<void(const std::string&)>& log_fn) {
  config.validate();
  if (static_cast<int>(table.cols) != config.seq_len) {
    throw Error("train: table width != config.seq_len");
  }
  if (k_folds < 1) throw Error("train: k_folds must be >= 1");

  // Stratified fold assignment; with k_folds == 1 the "fold" is a 10%
  // validation slice of a seeded shuffle.
  const int effective_folds = std::max(k_folds, 1);
  std::vector<int> fold_of(table.rows, 0);
  {
    std::vector<std::vector<std::size_t>> members(labels.num_classes());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      members[static_cast<std::size_t>(labels.labels[i])].push_back(i);
    }
    int deal = k_folds == 1 ? 10 : k_folds;
    for (std::size_t cls = 0; cls < members.size(); ++cls) {
      Rng rng(Rng::mix(config.seed, 0xab0ul + cls));
      rng.shuffle(members[cls]);
      for (std::size_t i = 0; i < members[cls].size(); ++i) {
        fold_of[members[cls][i]] = static_cast<int>(i % static_cast<std::size_t>(deal));
      }
    }
  }

  TrainResult result;
  result.log.best_accuracy = -1.0;
  Eigen::MatrixXd all_rows = table_to_eigen(table);

  for (int fold = 0; fold < effective_folds; ++fold) {
    std::vector<std::size_t> train_idx, val_idx;
    for (std::size_t i = 0; i < table.rows; ++i) {
      (fold_of[i] == fold ? val_idx : train_idx).push_back(i);
    }
    if (val_idx.empty() || train_idx.empty()) {
      throw Error("train: degenerate fold " + std::to_string(fold));
    }

    FeatureTable val_table;
    LabelVector val_labels;
    val_table.schema = table.schema;
    val_table.cols = table.cols;
    val_table.rows = val_idx.size();
    val_table.data.resize(val_idx.size() * table.cols);
    val_labels.scheme = labels.scheme;
    val_labels.class_names = labels.class_names;
    val_labels.labels.resize(val_idx.size());
    for (std::size_t i = 0; i < val_idx.size(); ++i) {
      const double* src = table.row(val_idx[i]);
      std::copy(src, src + table.cols, val_table.data.data() + i * table.cols);
      val_labels.labels[i] = labels.labels[val_idx[i]];
    }

    NetParams params = NetParams::glorot_init(config, Rng::mix(config.seed, 1000 + fold));
    AdamState adam = AdamState::zeros_like(config);
    bool diverged = false;

    for (int epoch = 0; epoch < config.epochs && !diverged; ++epoch) {
      Rng shuffle_rng(Rng::mix(config.seed, 2000u + static_cast<std::uint64_t>(fold) * 97u +
                                                static_cast<std::uint64_t>(epoch)));
      std::vector<std::size_t> order = train_idx;
      shuffle_rng.shuffle(order);

      double loss_weighted = 0.0;
      std::size_t batch_index = 0;
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch)) {
        std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch));
        Eigen::MatrixXd batch(stop - start, table.cols);
        std::vector<int> batch_labels(stop - start);
        for (std::size_t i = start; i < stop; ++i) {
          batch.row(static_cast<Eigen::Index>(i - start)) =
              all_rows.row(static_cast<Eigen::Index>(order[i]));
          batch_labels[i - start] = labels.labels[order[i]];
        }
        NetParams grads;
        std::uint64_t drop_seed = Rng::mix(
            config.seed, 3000000u + static_cast<std::uint64_t>(fold) * 100000u +
                             static_cast<std::uint64_t>(epoch) * 1000u + batch_index);
        double loss = loss_and_gradients(batch, batch_labels, params, config, grads, drop_seed);
        if (!std::isfinite(loss)) {
          diverged = true;
          ++result.log.diverged_folds;
          if (log_fn) {
            log_fn("fold " + std::to_string(fold) + " diverged at epoch " +
                   std::to_string(epoch) + " (non-finite loss), aborting fold");
          }
          break;
        }
        adam_step(params, grads, adam, config.lr);
        loss_weighted += loss * static_cast<double>(stop - start);
        ++batch_index;
      }
      if (diverged) break;

      double mean_loss = loss_weighted / static_cast<double>(order.size());
      double val_acc = accuracy_on(val_table, val_labels, params, config);
      result.log.entries.push_back({fold, epoch, mean_loss, val_acc});
      if (val_acc > result.log.best_accuracy) {
        result.log.best_accuracy = val_acc;
        result.log.best_fold = fold;
        result.log.best_epoch = epoch;
        result.params = params;
      }
      if (log_fn) {
        log_fn("fold " + std::to_string(fold) + " epoch " + std::to_string(epoch) + " loss " +
               std::to_string(mean_loss) + " val_acc " + std::to_string(val_acc));
      }
    }
  }

  if (result.log.best_fold < 0) {
    throw StageError("train", "no fold produced a usable model (all diverged)");
  }
  return result;
}

namespace {
constexpr char kNetMagic[4] = {'T', 'G', 'N', 'W'};
constexpr std::uint32_t kNetVersion = 1;
}  // namespace

void save_params(const NetParams& params, const NetConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kNetMagic, 4);
  write_u32(out, kNetVersion);
  write_u32(out, static_cast<std::uint32_t>(config.seq_len));
  write_u32(out, static_cast<std::uint32_t>(config.embed_dim));
  write_u32(out, static_cast<std::uint32_t>(config.gru_hidden));
  write_u32(out, static_cast<std::uint32_t>(config.heads));
  write_u32(out, static_cast<std::uint32_t>(config.ffn_dim));
  write_u32(out, static_cast<std::uint32_t>(config.encoder_layers));
  write_u32(out, static_cast<std::uint32_t>(config.num_classes));
  write_u32(out, static_cast<std::uint32_t>(config.fc_hidden));
  write_f64(out, config.dropout);
  write_f64(out, config.lr);
  write_u32(out, static_cast<std::uint32_t>(config.batch));
  write_u32(out, static_cast<std::uint32_t>(config.epochs));
  write_u64(out, config.seed);

  auto tensors = tensor_list(params);
  write_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    write_string(out, name);
    write_u32(out, static_cast<std::uint32_t>(tensor->rows()));
    write_u32(out, static_cast<std::uint32_t>(tensor->cols()));
    for (Eigen::Index r = 0; r < tensor->rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor->cols(); ++c) write_f64(out, (*tensor)(r, c));
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

std::pair<NetParams, NetConfig> load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kNetMagic, 4) != 0) throw IoError("not a weights file: " + path);
  if (read_u32(in) != kNetVersion) throw IoError("unsupported weights version");

  NetConfig config;
  config.seq_len = static_cast<int>(read_u32(in));
  config.embed_dim = static_cast<int>(read_u32(in));
  config.gru_hidden = static_cast<int>(read_u32(in));
  config.heads = static_cast<int>(read_u32(in));
  config.ffn_dim = static_cast<int>(read_u32(in));
  config.encoder_layers = static_cast<int>(read_u32(in));
  config.num_classes = static_cast<int>(read_u32(in));
  config.fc_hidden = static_cast<int>(read_u32(in));
  config.dropout = read_f64(in);
  config.lr = read_f64(in);
  config.batch = static_cast<int>(read_u32(in));
  config.epochs = static_cast<int>(read_u32(in));
  config.seed = read_u64(in);

  NetParams params = NetParams::zeros_like(config);
  auto tensors = tensor_list(params);
  std::uint32_t count = read_u32(in);
  if (count != tensors.size()) throw IoError("weights file tensor count mismatch");
  for (auto& [name, tensor] : tensors) {
    std::string stored = read_string(in);
    if (stored != name) throw IoError("weights file tensor order mismatch at " + stored);
    std::uint32_t rows = read_u32(in);
    std::uint32_t cols = read_u32(in);
    if (rows != tensor->rows() || cols != tensor->cols()) {
      throw IoError("weights file shape mismatch at " + name);
    }
    for (Eigen::Index r = 0; r < tensor->rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor->cols(); ++c) (*tensor)(r, c) = read_f64(in);
    }
  }
  return {std::move(params), config};
}

void write_train_log_csv(const TrainLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.precision(17);
  out << "fold,epoch,loss,val_acc\n";
  for (const auto& e : log.entries) {
    out << e.fold << "," << e.epoch << "," << e.train_loss << "," << e.val_accuracy << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace trailgate
