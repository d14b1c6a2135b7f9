// Copyright 2026 The caplab Authors
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

#include "caplab/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace caplab {

namespace {

void fill_normal(Matrix& m, Rng& rng, double stddev) {
  for (double& v : m.data) v = rng.normal(0.0, stddev);
}

double log_sum_exp(const Vector& z, const std::vector<int>& subset) {
  double max_z = -std::numeric_limits<double>::infinity();
  if (subset.empty()) {
    for (double v : z) max_z = std::max(max_z, v);
  } else {
    for (int i : subset) max_z = std::max(max_z, z[static_cast<size_t>(i)]);
  }
  double sum = 0.0;
  if (subset.empty()) {
    for (double v : z) sum += std::exp(v - max_z);
  } else {
    for (int i : subset) sum += std::exp(z[static_cast<size_t>(i)] - max_z);
  }
  return max_z + std::log(sum);
}

Vector step_input(const ToyCaptionModel& model, const Vector& context, int prev_token) {
  Vector x(static_cast<size_t>(model.context_dim + model.embed_dim));
  std::copy(context.begin(), context.end(), x.begin());
  for (int k = 0; k < model.embed_dim; ++k) {
    x[static_cast<size_t>(model.context_dim + k)] =
        model.embed.at(static_cast<size_t>(prev_token), static_cast<size_t>(k));
  }
  return x;
}

Vector logits(const ToyCaptionModel& model, const Vector& x) {
  Vector z = matvec(model.out_weights, x);
  for (size_t i = 0; i < z.size(); ++i) z[i] += model.out_bias[i];
  return z;
}

void check_prev_token(const ToyCaptionModel& model, int prev_token) {
  if (prev_token < 0 || prev_token >= model.vocab_size) {
    throw std::invalid_argument("prev_token " + std::to_string(prev_token) +
                                " out of range [0," +
                                std::to_string(model.vocab_size) + ")");
  }
}

void check_context(const ToyCaptionModel& model, const Vector& context) {
  if (context.size() != static_cast<size_t>(model.context_dim)) {
    throw std::invalid_argument("context dimension " + std::to_string(context.size()) +
                                " does not match model context_dim " +
                                std::to_string(model.context_dim));
  }
}

}  // namespace

ToyCaptionModel ToyCaptionModel::zeros(int vocab, int embed_d, int feature_d,
                                       int context_d) {
  if (vocab < 1 || embed_d < 1 || feature_d < 1 || context_d < 1) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  ToyCaptionModel m;
  m.vocab_size = vocab;
  m.embed_dim = embed_d;
  m.feature_dim = feature_d;
  m.context_dim = context_d;
  m.context_proj = Matrix(static_cast<size_t>(context_d), static_cast<size_t>(feature_d));
  m.embed = Matrix(static_cast<size_t>(vocab), static_cast<size_t>(embed_d));
  m.out_weights = Matrix(static_cast<size_t>(vocab), static_cast<size_t>(context_d + embed_d));
  m.out_bias.assign(static_cast<size_t>(vocab), 0.0);
  return m;
}

ToyCaptionModel ToyCaptionModel::random_init(int vocab, int embed_d, int feature_d,
                                             int context_d, Rng& rng) {
  ToyCaptionModel m = zeros(vocab, embed_d, feature_d, context_d);
  fill_normal(m.context_proj, rng, 0.1);
  fill_normal(m.embed, rng, 0.1);
  fill_normal(m.out_weights, rng, 0.1);
  return m;
}

Gradients Gradients::zeros_like(const ToyCaptionModel& model) {
  Gradients g;
  g.context_proj = Matrix(model.context_proj.rows, model.context_proj.cols);
  g.out_weights = Matrix(model.out_weights.rows, model.out_weights.cols);
  g.out_bias.assign(model.out_bias.size(), 0.0);
  return g;
}

void Gradients::add_scaled(const Gradients& other, double s) {
  for (size_t i = 0; i < context_proj.data.size(); ++i) {
    context_proj.data[i] += s * other.context_proj.data[i];
  }
  for (size_t i = 0; i < out_weights.data.size(); ++i) {
    out_weights.data[i] += s * other.out_weights.data[i];
  }
  for (size_t i = 0; i < out_bias.size(); ++i) out_bias[i] += s * other.out_bias[i];
}

void Gradients::scale(double s) {
  for (double& v : context_proj.data) v *= s;
  for (double& v : out_weights.data) v *= s;
  for (double& v : out_bias) v *= s;
}

bool Gradients::all_finite() const {
  auto ok = [](const Vector& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return ok(context_proj.data) && ok(out_weights.data) && ok(out_bias);
}

bool Gradients::all_zero() const {
  auto zero = [](const Vector& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  };
  return zero(context_proj.data) && zero(out_weights.data) && zero(out_bias);
}

Vector pool_features(const MelSpectrogram& mel) {
  if (mel.frames == 0 || mel.bins == 0) {
    throw std::invalid_argument("cannot pool an empty spectrogram");
  }
  Vector pooled(mel.bins, 0.0);
  for (size_t t = 0; t < mel.frames; ++t) {
    for (size_t b = 0; b < mel.bins; ++b) pooled[b] += mel.at(t, b);
  }
  for (double& v : pooled) v /= static_cast<double>(mel.frames);
  return pooled;
}

Vector encode_context_from_features(const ToyCaptionModel& model, const Vector& pooled) {
  if (pooled.size() != static_cast<size_t>(model.feature_dim)) {
    throw std::invalid_argument("pooled feature dimension " +
                                std::to_string(pooled.size()) +
                                " does not match model feature_dim " +
                                std::to_string(model.feature_dim));
  }
  return matvec(model.context_proj, pooled);
}

Vector encode_context(const ToyCaptionModel& model, const MelSpectrogram& mel) {
  return encode_context_from_features(model, pool_features(mel));
}

Vector next_token_logprobs(const ToyCaptionModel& model, const Vector& context,
                           int prev_token) {
  check_prev_token(model, prev_token);
  check_context(model, context);
  Vector z = logits(model, step_input(model, context, prev_token));
  double lse = log_sum_exp(z, {});
  for (double& v : z) v -= lse;
  return z;
}

LossAndGrads ce_loss_label_smoothed(const ToyCaptionModel& model,
                                    const Vector& pooled_features,
                                    const TokenSequence& target, double eps) {
  if (eps < 0.0 || eps >= 1.0) {
    throw std::invalid_argument("label smoothing eps must be in [0,1)");
  }
  if (target.ids.size() < 2) {
    throw std::invalid_argument("target sequence must hold at least sos and eos");
  }
  const size_t steps = target.ids.size() - 1;
  const double inv_t = 1.0 / static_cast<double>(steps);
  const auto vocab = static_cast<size_t>(model.vocab_size);
  const double uniform_q = eps / static_cast<double>(model.vocab_size);

  Vector context = encode_context_from_features(model, pooled_features);

  LossAndGrads result;
  result.grads = Gradients::zeros_like(model);
  Vector d_context(context.size(), 0.0);

  for (size_t t = 0; t < steps; ++t) {
    const int prev = target.ids[t];
    const int label = target.ids[t + 1];
    check_prev_token(model, prev);
    if (label < 0 || label >= model.vocab_size) {
      throw std::invalid_argument("target token out of range");
    }

    Vector x = step_input(model, context, prev);
    Vector z = logits(model, x);
    const double lse = log_sum_exp(z, {});

    // loss_t = -sum_w q(w) (z_w - lse);  dz = (p - q)/T
    double loss_t = 0.0;
    for (size_t w = 0; w < vocab; ++w) {
      double q = uniform_q + (static_cast<int>(w) == label ? 1.0 - eps : 0.0);
      loss_t -= q * (z[w] - lse);
    }
    result.loss += loss_t * inv_t;

    Vector dz(vocab);
    for (size_t w = 0; w < vocab; ++w) {
      double p = std::exp(z[w] - lse);
      double q = uniform_q + (static_cast<int>(w) == label ? 1.0 - eps : 0.0);
      dz[w] = (p - q) * inv_t;
    }
    for (size_t w = 0; w < vocab; ++w) {
      const double dzw = dz[w];
      if (dzw == 0.0) continue;
      for (size_t c = 0; c < x.size(); ++c) {
        result.grads.out_weights.at(w, c) += dzw * x[c];
      }
      result.grads.out_bias[w] += dzw;
      for (size_t c = 0; c < context.size(); ++c) {
        d_context[c] += model.out_weights.at(w, c) * dzw;
      }
    }
  }

  for (size_t r = 0; r < context.size(); ++r) {
    for (size_t c = 0; c < pooled_features.size(); ++c) {
      result.grads.context_proj.at(r, c) += d_context[r] * pooled_features[c];
    }
  }
  return result;
}

double accumulate_sequence_logprob_grad(const ToyCaptionModel& model,
                                        const Vector& pooled_features,
                                        const std::vector<SampledStep>& steps,
                                        const std::vector<int>& allowed_tokens,
                                        double scale, Gradients& g) {
  Vector context = encode_context_from_features(model, pooled_features);
  Vector d_context(context.size(), 0.0);
  double logprob_sum = 0.0;

  for (const auto& step : steps) {
    check_prev_token(model, step.prev_token);
    Vector x = step_input(model, context, step.prev_token);
    Vector z = logits(model, x);
    const double lse = log_sum_exp(z, allowed_tokens);
    logprob_sum += z[static_cast<size_t>(step.token)] - lse;

    // d logp(w)/dz_v = onehot(w)_v - softmax_allowed(z)_v over the allowed set
    auto accumulate = [&](int v, double dz) {
      const auto w = static_cast<size_t>(v);
      for (size_t c = 0; c < x.size(); ++c) g.out_weights.at(w, c) += scale * dz * x[c];
      g.out_bias[w] += scale * dz;
      for (size_t c = 0; c < context.size(); ++c) {
        d_context[c] += scale * dz * model.out_weights.at(w, c);
      }
    };
    if (allowed_tokens.empty()) {
      for (int v = 0; v < model.vocab_size; ++v) {
        double dz = (v == step.token ? 1.0 : 0.0) - std::exp(z[static_cast<size_t>(v)] - lse);
        accumulate(v, dz);
      }
    } else {
      for (int v : allowed_tokens) {
        double dz = (v == step.token ? 1.0 : 0.0) - std::exp(z[static_cast<size_t>(v)] - lse);
        accumulate(v, dz);
      }
    }
  }

  for (size_t r = 0; r < context.size(); ++r) {
    for (size_t c = 0; c < pooled_features.size(); ++c) {
      g.context_proj.at(r, c) += d_context[r] * pooled_features[c];
    }
  }
  return logprob_sum;
}

AdamState AdamState::zeros_like(const ToyCaptionModel& model) {
  AdamState s;
  s.m = Gradients::zeros_like(model);
  s.v = Gradients::zeros_like(model);
  s.step_count = 0;
  return s;
}

namespace {

void adam_update_block(Vector& params, const Vector& grads, Vector& m, Vector& v,
                       double lr, const TrainConfig& cfg, double bc1, double bc2) {
  for (size_t i = 0; i < params.size(); ++i) {
    m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * grads[i];
    v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * grads[i] * grads[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
  }
}

}  // namespace

void adam_step(ToyCaptionModel& model, const Gradients& grads, AdamState& state,
               double lr, const TrainConfig& cfg) {
  if (!grads.all_finite()) {
    throw std::invalid_argument("adam_step: non-finite gradient");
  }
  if (!grads.out_weights.same_shape(model.out_weights) ||
      !grads.context_proj.same_shape(model.context_proj) ||
      grads.out_bias.size() != model.out_bias.size()) {
    throw std::invalid_argument("adam_step: gradient shape mismatch");
  }
  ++state.step_count;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.step_count));
  adam_update_block(model.context_proj.data, grads.context_proj.data,
                    state.m.context_proj.data, state.v.context_proj.data, lr, cfg, bc1, bc2);
  adam_update_block(model.out_weights.data, grads.out_weights.data,
                    state.m.out_weights.data, state.v.out_weights.data, lr, cfg, bc1, bc2);
  adam_update_block(model.out_bias, grads.out_bias, state.m.out_bias,
                    state.v.out_bias, lr, cfg, bc1, bc2);
}

double lr_at_epoch(const TrainConfig& cfg, int epoch) {
  if (epoch < 1) throw std::invalid_argument("epoch must be >= 1");
  if (cfg.warmup_epochs > 0 && epoch <= cfg.warmup_epochs) {
    return cfg.lr0 * static_cast<double>(epoch) / static_cast<double>(cfg.warmup_epochs);
  }
  if (cfg.decay_every <= 0) return cfg.lr0;
  const int past_warmup = epoch - cfg.warmup_epochs - 1;
  const int decays = past_warmup / cfg.decay_every;
  return cfg.lr0 * std::pow(0.1, static_cast<double>(decays));
}

std::vector<double> train_ce(ToyCaptionModel& model, const CaptionDataset& dataset,
                             const TrainConfig& cfg, int epochs, uint64_t seed) {
  if (dataset.empty()) throw std::invalid_argument("train_ce: empty dataset");
  for (const auto& ex : dataset) {
    if (ex.captions.empty()) throw std::invalid_argument("train_ce: clip without captions");
  }
  if (cfg.batch < 1) throw std::invalid_argument("train_ce: batch must be >= 1");

  Rng rng(seed);
  AdamState state = AdamState::zeros_like(model);
  std::vector<double> epoch_losses;
  epoch_losses.reserve(static_cast<size_t>(std::max(epochs, 0)));

  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    const double lr = lr_at_epoch(cfg, epoch);
    rng.shuffle(order);

    double loss_sum = 0.0;
    size_t step_count = 0;
    for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(cfg.batch)) {
      const size_t end = std::min(order.size(), begin + static_cast<size_t>(cfg.batch));
      Gradients acc = Gradients::zeros_like(model);
      for (size_t i = begin; i < end; ++i) {
        const auto& ex = dataset[order[i]];
        const auto pick = rng.uniform_below(ex.captions.size());
        auto res = ce_loss_label_smoothed(model, ex.features, ex.captions[pick],
                                          cfg.label_eps);
        acc.add_scaled(res.grads, 1.0);
        loss_sum += res.loss;
      }
      acc.scale(1.0 / static_cast<double>(end - begin));
      adam_step(model, acc, state, lr, cfg);
      step_count += end - begin;
    }
    epoch_losses.push_back(loss_sum / static_cast<double>(step_count));
  }
  return epoch_losses;
}

namespace {

constexpr char kCkptMagic[4] = {'C', 'A', 'P', 'M'};
constexpr uint32_t kCkptVersion = 1;

void write_u32_le(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32_le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_block(std::ostream& out, const Vector& v) {
  for (double x : v) {
    uint64_t bits;
    std::memcpy(&bits, &x, sizeof(bits));
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
  }
}

void read_block(std::istream& in, Vector& v) {
  for (double& x : v) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
    std::memcpy(&x, &bits, sizeof(x));
  }
}

}  // namespace

void save_checkpoint(const ToyCaptionModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for write: " + path);
  out.write(kCkptMagic, 4);
  write_u32_le(out, kCkptVersion);
  write_u32_le(out, static_cast<uint32_t>(model.vocab_size));
  write_u32_le(out, static_cast<uint32_t>(model.embed_dim));
  write_u32_le(out, static_cast<uint32_t>(model.feature_dim));
  write_u32_le(out, static_cast<uint32_t>(model.context_dim));
  write_block(out, model.context_proj.data);
  write_block(out, model.embed.data);
  write_block(out, model.out_weights.data);
  write_block(out, model.out_bias);
  if (!out) throw std::runtime_error("write failed: " + path);
}

ToyCaptionModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCkptMagic, 4) != 0) {
    throw std::runtime_error(path + ": not a caplab checkpoint");
  }
  const uint32_t version = read_u32_le(in);
  if (version != kCkptVersion) {
    throw std::runtime_error(path + ": unsupported checkpoint version " +
                             std::to_string(version));
  }
  const auto vocab = static_cast<int>(read_u32_le(in));
  const auto embed_d = static_cast<int>(read_u32_le(in));
  const auto feature_d = static_cast<int>(read_u32_le(in));
  const auto context_d = static_cast<int>(read_u32_le(in));
  ToyCaptionModel model = ToyCaptionModel::zeros(vocab, embed_d, feature_d, context_d);
  read_block(in, model.context_proj.data);
  read_block(in, model.embed.data);
  read_block(in, model.out_weights.data);
  read_block(in, model.out_bias);
  if (!in) throw std::runtime_error(path + ": truncated checkpoint");
  return model;
}

}  // namespace caplab
