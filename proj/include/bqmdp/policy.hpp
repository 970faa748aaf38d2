#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bqmdp/common.hpp"
#include "bqmdp/problems.hpp"

namespace bqmdp {

// Architecture hyperparameters. Defaults are the desk-scale configuration;
// all sizes are free as long as embed_dim % heads == 0.
struct PolicyConfig {
  Problem problem = Problem::PathTsp;
  int input_dim = 2;
  int embed_dim = 64;
  int ff_dim = 128;
  int heads = 4;
  int layers = 3;
  int head_outputs = 1;          // 2 for CVRP: (next node, via-depot) score pairs
  bool origin_dest_tokens = true;  // off for KP
  bool graph_conv = false;         // on for ATSP
  bool conv_row_minmax = true;     // edge-weight normalization: per-row, else global
  bool append_ident = false;       // extra random-identifier input channel

  static PolicyConfig for_problem(Problem p, int embed_dim = 64, int ff_dim = 128,
                                  int heads = 4, int layers = 3, int ident_dim = 4,
                                  bool append_ident = false);
};

// Offsets into the flat parameter vector; gradients use the same layout.
struct ParamLayout {
  struct Layer {
    int wq = 0, wk = 0, wv = 0, wo = 0, alpha_attn = 0;
    int w1 = 0, b1 = 0, w2 = 0, b2 = 0, alpha_ffn = 0;
    int wg = 0, alpha_g = 0;  // graph conv (ATSP only)
  };
  int emb_w = 0, emb_b = 0;
  int origin_tok = 0, dest_tok = 0;
  std::vector<Layer> layers;
  int head_w = 0, head_b = 0;
  int total = 0;
};

ParamLayout make_layout(const PolicyConfig& cfg);

class PolicyModel {
public:
  explicit PolicyModel(PolicyConfig cfg);

  // Uniform(-s, s) weights with s = 1/sqrt(fan_in); every ReZero scalar
  // (including the graph-conv mixing weight) starts at exactly 0, so the
  // untrained network reduces to head(embedding + tokens).
  void init_weights(std::uint64_t seed);

  const PolicyConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }
  int param_count() const { return layout_.total; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  void save(const std::string& path) const;
  static PolicyModel load(const std::string& path);

private:
  PolicyConfig cfg_;
  ParamLayout layout_;
  std::vector<double> params_;
};

// Cached activations for one forward pass; sufficient for exact
// backpropagation and bit-for-bit replay.
struct ForwardTape {
  int tokens = 0;
  std::vector<int> perm;        // canonical order: position i holds original token perm[i]
  int origin_pos = -1, dest_pos = -1;  // canonical positions of the two tokens
  std::vector<double> features; // input_dim x tokens, canonical order
  std::vector<double> edges;    // tokens x tokens, canonical order (graph conv)
  std::vector<bool> mask;       // action space, canonical order
  struct Layer {
    std::vector<double> h_in, conv_mix, conv_out, h_conv;
    std::vector<double> q, k, v, attn, concat, attn_out, h_mid;
    std::vector<double> ff_pre, ff_act, ff_out;
  };
  std::vector<double> h0;
  std::vector<Layer> layer;
  std::vector<double> h_final;
  std::vector<double> logits;     // canonical order, masked entries untouched
  std::vector<double> log_probs;  // canonical order, masked = -inf
};

// One forward pass over a single state. `features` is input_dim x tokens
// row-major; `mask` covers tokens x head_outputs actions (row-major); `edges`
// is the graph-conv weight matrix (required iff the config uses it);
// `canonical_ids` fixes the internal summation order so permuting the input
// tokens permutes the output probabilities bitwise when the ids are distinct
// (pass {} for the identity order). origin_token/dest_token locate the two
// learned encodings in the input order. Returns log-probabilities over the
// action space: masked actions are exactly -inf, the rest sum to probability
// one. Throws AllMasked when no action is allowed.
std::vector<double> policy_forward(const PolicyModel& model,
                                   const std::vector<double>& features, int tokens,
                                   const std::vector<bool>& mask,
                                   const std::vector<double>& edges = {},
                                   const std::vector<int>& canonical_ids = {},
                                   ForwardTape* tape = nullptr, int origin_token = 0,
                                   int dest_token = 1);

// Supervised target: a distribution over action ids (one-hot for a single
// expert action, uniform over the remaining expert set for KP).
struct ActionTarget {
  std::vector<int> ids;
  std::vector<double> weights;

  static ActionTarget one_hot(int id) { return {{id}, {1.0}}; }
  static ActionTarget uniform(std::vector<int> ids);
};

double cross_entropy(const std::vector<double>& log_probs, const ActionTarget& target);

// Exact gradients of the cross-entropy at the taped forward pass, accumulated
// into `grad` (flat, same layout as the parameters).
void policy_backward(const PolicyModel& model, const ForwardTape& tape,
                     const ActionTarget& target, std::vector<double>& grad);

// Convenience: forward on a reduced instance with its own mask/features.
std::vector<double> policy_scores(const PolicyModel& model, const ProblemInstance& state,
                                  ForwardTape* tape = nullptr);

struct AdamState {
  std::vector<double> m, v;
  long step = 0;
};

// Standard Adam; deterministic given state. lr follows the caller's schedule.
void adam_step(PolicyModel& model, const std::vector<double>& grad, AdamState& state,
               double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Initial rate decayed by 0.98 every 50 epochs.
double lr_schedule(double lr0, int epoch);

}  // namespace bqmdp
