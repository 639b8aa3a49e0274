#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "trailgate/dataset.hpp"

namespace trailgate {

struct NetConfig {
  int seq_len = 0;         // one time step per selected feature
  int embed_dim = 32;
  int gru_hidden = 64;     // model width d_model = 2 * gru_hidden
  int heads = 4;
  int ffn_dim = 256;
  int encoder_layers = 1;
  int num_classes = 2;
  int fc_hidden = 64;
  double dropout = 0.1;
  double lr = 0.001;
  int batch = 512;
  int epochs = 10;
  std::uint64_t seed = 0;

  int d_model() const { return 2 * gru_hidden; }
  void validate() const;
};

struct GruParams {
  // Row-activation convention: h_t = act(x W + h U + b), weights are in x out.
  Eigen::MatrixXd Wz, Uz, Wr, Ur, Wh, Uh;
  Eigen::MatrixXd bz, br, bh;  // 1 x H
};

struct EncoderParams {
  Eigen::MatrixXd Wq, Wk, Wv, Wo;
  Eigen::MatrixXd bq, bk, bv, bo;
  Eigen::MatrixXd ln1_gain, ln1_bias, ln2_gain, ln2_bias;
  Eigen::MatrixXd W1, b1, W2, b2;  // position-wise FFN
};

struct NetParams {
  Eigen::MatrixXd lift;  // 1 x E, scalar feature value lifted per step
  Eigen::MatrixXd pos;   // T x E, learned position embedding
  GruParams fwd, bwd;
  Eigen::MatrixXd Wy, by;  // 2H -> 2H projection of the concatenated states
  std::vector<EncoderParams> layers;
  Eigen::MatrixXd Wh1, bh1, Wh2, bh2;  // pooled -> fc_hidden -> classes

  static NetParams zeros_like(const NetConfig& config);
  static NetParams glorot_init(const NetConfig& config, std::uint64_t seed);
};

// Stable iteration order over every parameter tensor; Adam, serialization
// and the gradient checks all walk this list.
std::vector<std::pair<std::string, Eigen::MatrixXd*>> tensor_list(NetParams& params);
std::vector<std::pair<std::string, const Eigen::MatrixXd*>> tensor_list(const NetParams& params);

// ---- layer primitives (single sample, eval mode; used directly by tests) ----

Eigen::MatrixXd embed_row(const Eigen::RowVectorXd& row, const NetParams& params);  // T x E

// Standard 3-gate cell: z and r sigmoid gates, tanh candidate,
// h_t = (1 - z) .* h_prev + z .* candidate.
Eigen::RowVectorXd gru_cell(const Eigen::RowVectorXd& x_t, const Eigen::RowVectorXd& h_prev,
                            const GruParams& p);

// Concatenated forward/backward states, T x 2H, before the output projection.
Eigen::MatrixXd bigru_concat_states(const Eigen::MatrixXd& sequence, const NetParams& params);

// Eq-style output y_t = [h_fwd, h_bwd] Wy + by, T x 2H.
Eigen::MatrixXd bigru(const Eigen::MatrixXd& sequence, const NetParams& params);

// softmax(Q K^T / sqrt(d_k)) V with a row-wise softmax.
Eigen::MatrixXd attention(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& K,
                          const Eigen::MatrixXd& V);

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores);

// Multi-head attention + residual + layer norm + FFN + residual + layer
// norm (post-norm wiring), one T x d_model sample.
Eigen::MatrixXd encoder_block(const Eigen::MatrixXd& X, const EncoderParams& p, int heads);

struct LayerNormStats {
  Eigen::MatrixXd normalized;  // pre scale/shift
  Eigen::MatrixXd output;
};
LayerNormStats layer_norm(const Eigen::MatrixXd& X, const Eigen::MatrixXd& gain,
                          const Eigen::MatrixXd& bias);

// ---- batch paths ----

// Logits for a batch of feature rows (B x T input), eval mode.
Eigen::MatrixXd forward(const Eigen::MatrixXd& rows, const NetParams& params,
                        const NetConfig& config);
Eigen::MatrixXd forward(const FeatureTable& table, const NetParams& params,
                        const NetConfig& config);

double cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels);

// Mean loss over the batch plus gradients for every tensor. Dropout is
// active only when dropout_seed is nonzero and config.dropout > 0.
double loss_and_gradients(const Eigen::MatrixXd& rows, const std::vector<int>& labels,
                          const NetParams& params, const NetConfig& config, NetParams& grads,
                          std::uint64_t dropout_seed = 0);

struct AdamState {
  std::vector<Eigen::MatrixXd> m;
  std::vector<Eigen::MatrixXd> v;
  std::int64_t step = 0;

  static AdamState zeros_like(const NetConfig& config);
};

void adam_step(NetParams& params, const NetParams& grads, AdamState& state, double lr = 0.001,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct TrainLogEntry {
  int fold = 0;
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainLog {
  std::vector<TrainLogEntry> entries;
  int best_fold = -1;
  int best_epoch = -1;
  double best_accuracy = 0.0;
  int diverged_folds = 0;
};

struct TrainResult {
  NetParams params;
  TrainLog log;
};

// k_folds >= 2 runs cross-validation and keeps the single best snapshot
// across folds and epochs; k_folds == 1 uses one seeded 90/10 split.
TrainResult train(const FeatureTable& table, const LabelVector& labels, const NetConfig& config,
                  int k_folds = 10,
                  const std::function<void(const std::string&)>& log_fn = nullptr);

std::vector<int> predict_classes(const FeatureTable& table, const NetParams& params,
                                 const NetConfig& config);

double accuracy_on(const FeatureTable& table, const LabelVector& labels, const NetParams& params,
                   const NetConfig& config);

void save_params(const NetParams& params, const NetConfig& config, const std::string& path);
std::pair<NetParams, NetConfig> load_params(const std::string& path);

void write_train_log_csv(const TrainLog& log, const std::string& path);

}  // namespace trailgate
