#include "bqmdp/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"

namespace bqmdp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// C[m x n] += A[m x k] * B[k x n], row-major.
void addmm(double* c, const double* a, const double* b, int m, int k, int n) {
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      double* crow = c + i * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
}

// C[m x n] += A[k x m]^T * B[k x n].
void addmm_ta(double* c, const double* a, const double* b, int k, int m, int n) {
  for (int p = 0; p < k; ++p)
    for (int i = 0; i < m; ++i) {
      const double av = a[p * m + i];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      double* crow = c + i * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
}

// C[m x n] += A[m x k] * B[n x k]^T.
void addmm_tb(double* c, const double* a, const double* b, int m, int k, int n) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const double* arow = a + i * k;
      const double* brow = b + j * k;
      double sum = 0.0;
      for (int p = 0; p < k; ++p) sum += arow[p] * brow[p];
      c[i * n + j] += sum;
    }
}

std::vector<double> mm(const double* a, const double* b, int m, int k, int n) {
  std::vector<double> c(static_cast<std::size_t>(m) * n, 0.0);
  addmm(c.data(), a, b, m, k, n);
  return c;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

}  // namespace

PolicyConfig PolicyConfig::for_problem(Problem p, int embed_dim, int ff_dim, int heads,
                                       int layers, int ident_dim, bool append_ident) {
  PolicyConfig cfg;
  cfg.problem = p;
  cfg.embed_dim = embed_dim;
  cfg.ff_dim = ff_dim;
  cfg.heads = heads;
  cfg.layers = layers;
  cfg.input_dim = feature_dim(p, ident_dim, append_ident);
  cfg.head_outputs = p == Problem::PathCvrp ? 2 : 1;
  cfg.origin_dest_tokens = p != Problem::Kp;
  cfg.graph_conv = p == Problem::PathAtsp;
  cfg.append_ident = append_ident;
  return cfg;
}

ParamLayout make_layout(const PolicyConfig& cfg) {
  ParamLayout lay;
  int at = 0;
  auto take = [&](int count) {
    const int offset = at;
    at += count;
    return offset;
  };
  const int d = cfg.embed_dim;
  lay.emb_w = take(d * cfg.input_dim);
  lay.emb_b = take(d);
  if (cfg.origin_dest_tokens) {
    lay.origin_tok = take(d);
    lay.dest_tok = take(d);
  } else {
    lay.origin_tok = lay.dest_tok = -1;
  }
  lay.layers.resize(cfg.layers);
  for (auto& l : lay.layers) {
    if (cfg.graph_conv) {
      l.wg = take(d * d);
      l.alpha_g = take(1);
    }
    l.wq = take(d * d);
    l.wk = take(d * d);
    l.wv = take(d * d);
    l.wo = take(d * d);
    l.alpha_attn = take(1);
    l.w1 = take(cfg.ff_dim * d);
    l.b1 = take(cfg.ff_dim);
    l.w2 = take(d * cfg.ff_dim);
    l.b2 = take(d);
    l.alpha_ffn = take(1);
  }
  lay.head_w = take(cfg.head_outputs * d);
  lay.head_b = take(cfg.head_outputs);
  lay.total = at;
  return lay;
}

PolicyModel::PolicyModel(PolicyConfig cfg)
    : cfg_(cfg), layout_(make_layout(cfg)), params_(layout_.total, 0.0) {
  if (cfg.embed_dim % cfg.heads != 0)
    throw Error(ErrorCategory::InvalidConfig, "embed_dim must be divisible by heads");
}

void PolicyModel::init_weights(std::uint64_t seed) {
  Rng rng(seed);
  auto fill = [&](int offset, int count, int fan_in) {
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int i = 0; i < count; ++i) params_[offset + i] = (2.0 * rng.next_double() - 1.0) * s;
  };
  const int d = cfg_.embed_dim;
  fill(layout_.emb_w, d * cfg_.input_dim, cfg_.input_dim);
  // biases stay zero
  if (cfg_.origin_dest_tokens) {
    fill(layout_.origin_tok, d, d);
    fill(layout_.dest_tok, d, d);
  }
  for (const auto& l : layout_.layers) {
    if (cfg_.graph_conv) fill(l.wg, d * d, d);
    fill(l.wq, d * d, d);
    fill(l.wk, d * d, d);
    fill(l.wv, d * d, d);
    fill(l.wo, d * d, d);
    fill(l.w1, cfg_.ff_dim * d, d);
    fill(l.w2, d * cfg_.ff_dim, cfg_.ff_dim);
    // alpha_attn / alpha_ffn / alpha_g stay exactly 0 (ReZero)
  }
  fill(layout_.head_w, cfg_.head_outputs * d, d);
}

ActionTarget ActionTarget::uniform(std::vector<int> ids) {
  ActionTarget t;
  const double w = 1.0 / static_cast<double>(ids.size());
  t.weights.assign(ids.size(), w);
  t.ids = std::move(ids);
  return t;
}

std::vector<double> policy_forward(const PolicyModel& model,
                                   const std::vector<double>& features, int tokens,
                                   const std::vector<bool>& mask,
                                   const std::vector<double>& edges,
                                   const std::vector<int>& canonical_ids,
                                   ForwardTape* tape, int origin_token, int dest_token) {
  const PolicyConfig& cfg = model.config();
  const ParamLayout& lay = model.layout();
  const double* theta = model.params().data();
  const int n = tokens;
  const int d = cfg.embed_dim;
  const int din = cfg.input_dim;
  const int out = cfg.head_outputs;
  const int dh = d / cfg.heads;

  if (static_cast<int>(features.size()) != din * n)
    throw Error(ErrorCategory::InvalidConfig, "policy_forward: feature shape mismatch");
  if (static_cast<int>(mask.size()) != n * out)
    throw Error(ErrorCategory::InvalidConfig, "policy_forward: mask shape mismatch");
  if (cfg.graph_conv && static_cast<int>(edges.size()) != n * n)
    throw Error(ErrorCategory::InvalidConfig, "policy_forward: edge weights required");
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; }))
    throw Error(ErrorCategory::AllMasked, "policy_forward: every action is masked");

  // All cross-token sums run in canonical id order, so a permutation of the
  // input tokens permutes the output bitwise.
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  if (!canonical_ids.empty())
    std::stable_sort(perm.begin(), perm.end(),
                     [&](int a, int b) { return canonical_ids[a] < canonical_ids[b]; });

  ForwardTape local;
  ForwardTape& t = tape ? *tape : local;
  t.tokens = n;
  t.perm = perm;
  t.features.assign(static_cast<std::size_t>(din) * n, 0.0);
  for (int r = 0; r < din; ++r)
    for (int i = 0; i < n; ++i) t.features[r * n + i] = features[r * n + perm[i]];
  t.mask.assign(static_cast<std::size_t>(n) * out, false);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < out; ++c) t.mask[i * out + c] = mask[perm[i] * out + c];
  if (cfg.graph_conv) {
    t.edges.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t.edges[i * n + j] = edges[perm[i] * n + perm[j]];
  }

  // Embedding + origin/destination encodings.
  std::vector<double> h(static_cast<std::size_t>(d) * n, 0.0);
  addmm(h.data(), theta + lay.emb_w, t.features.data(), d, din, n);
  for (int r = 0; r < d; ++r)
    for (int i = 0; i < n; ++i) h[r * n + i] += theta[lay.emb_b + r];
  t.origin_pos = t.dest_pos = -1;
  if (cfg.origin_dest_tokens) {
    for (int i = 0; i < n; ++i) {
      if (perm[i] == origin_token) t.origin_pos = i;
      if (perm[i] == dest_token) t.dest_pos = i;
    }
    for (int r = 0; r < d; ++r) {
      h[r * n + t.origin_pos] += theta[lay.origin_tok + r];
      h[r * n + t.dest_pos] += theta[lay.dest_tok + r];
    }
  }
  t.h0 = h;

  t.layer.assign(cfg.layers, {});
  for (int l = 0; l < cfg.layers; ++l) {
    const auto& pl = lay.layers[l];
    ForwardTape::Layer& tl = t.layer[l];
    tl.h_in = h;

    if (cfg.graph_conv) {
      // h <- h + alpha_g * Wg (h E)
      tl.conv_mix = mm(h.data(), t.edges.data(), d, n, n);
      tl.conv_out = mm(theta + pl.wg, tl.conv_mix.data(), d, d, n);
      const double ag = theta[pl.alpha_g];
      for (std::size_t i = 0; i < h.size(); ++i) h[i] += ag * tl.conv_out[i];
      tl.h_conv = h;
    }

    // Multi-head self-attention with a ReZero residual.
    tl.q = mm(theta + pl.wq, h.data(), d, d, n);
    tl.k = mm(theta + pl.wk, h.data(), d, d, n);
    tl.v = mm(theta + pl.wv, h.data(), d, d, n);
    tl.attn.assign(static_cast<std::size_t>(cfg.heads) * n * n, 0.0);
    tl.concat.assign(static_cast<std::size_t>(d) * n, 0.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    for (int head = 0; head < cfg.heads; ++head) {
      const int row0 = head * dh;
      double* a = &tl.attn[static_cast<std::size_t>(head) * n * n];
      for (int i = 0; i < n; ++i) {
        double mx = -1e300;
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int r = 0; r < dh; ++r) s += tl.q[(row0 + r) * n + i] * tl.k[(row0 + r) * n + j];
          a[i * n + j] = s * scale;
          mx = std::max(mx, a[i * n + j]);
        }
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
          a[i * n + j] = std::exp(a[i * n + j] - mx);
          sum += a[i * n + j];
        }
        for (int j = 0; j < n; ++j) a[i * n + j] /= sum;
      }
      for (int r = 0; r < dh; ++r)
        for (int i = 0; i < n; ++i) {
          double s = 0.0;
          for (int j = 0; j < n; ++j) s += a[i * n + j] * tl.v[(row0 + r) * n + j];
          tl.concat[(row0 + r) * n + i] = s;
        }
    }
    tl.attn_out = mm(theta + pl.wo, tl.concat.data(), d, d, n);
    const double aa = theta[pl.alpha_attn];
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += aa * tl.attn_out[i];
    tl.h_mid = h;

    // Feed-forward (ReLU) with a ReZero residual.
    tl.ff_pre = mm(theta + pl.w1, h.data(), cfg.ff_dim, d, n);
    for (int r = 0; r < cfg.ff_dim; ++r)
      for (int i = 0; i < n; ++i) tl.ff_pre[r * n + i] += theta[pl.b1 + r];
    tl.ff_act = tl.ff_pre;
    for (double& v : tl.ff_act) v = std::max(v, 0.0);
    tl.ff_out = mm(theta + pl.w2, tl.ff_act.data(), d, cfg.ff_dim, n);
    for (int r = 0; r < d; ++r)
      for (int i = 0; i < n; ++i) tl.ff_out[r * n + i] += theta[pl.b2 + r];
    const double af = theta[pl.alpha_ffn];
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += af * tl.ff_out[i];
  }
  t.h_final = h;

  // Output head, then a softmax over the allowed action entries.
  t.logits.assign(static_cast<std::size_t>(n) * out, 0.0);
  for (int c = 0; c < out; ++c)
    for (int i = 0; i < n; ++i) {
      double s = theta[lay.head_b + c];
      for (int r = 0; r < d; ++r) s += theta[lay.head_w + c * d + r] * h[r * n + i];
      t.logits[i * out + c] = s;
    }
  double shift = -1e300;
  for (int a = 0; a < n * out; ++a)
    if (t.mask[a]) shift = std::max(shift, t.logits[a]);
  double lse = 0.0;
  for (int a = 0; a < n * out; ++a)
    if (t.mask[a]) lse += std::exp(t.logits[a] - shift);
  lse = std::log(lse);
  t.log_probs.assign(static_cast<std::size_t>(n) * out, kNegInf);
  for (int a = 0; a < n * out; ++a)
    if (t.mask[a]) t.log_probs[a] = t.logits[a] - shift - lse;

  std::vector<double> result(static_cast<std::size_t>(n) * out, kNegInf);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < out; ++c) result[perm[i] * out + c] = t.log_probs[i * out + c];
  return result;
}

double cross_entropy(const std::vector<double>& log_probs, const ActionTarget& target) {
  double loss = 0.0;
  for (std::size_t i = 0; i < target.ids.size(); ++i)
    loss -= target.weights[i] * log_probs[target.ids[i]];
  return loss;
}

void policy_backward(const PolicyModel& model, const ForwardTape& t,
                     const ActionTarget& target, std::vector<double>& grad) {
  const PolicyConfig& cfg = model.config();
  const ParamLayout& lay = model.layout();
  const double* theta = model.params().data();
  const int n = t.tokens;
  const int d = cfg.embed_dim;
  const int out = cfg.head_outputs;
  const int dh = d / cfg.heads;
  if (static_cast<int>(grad.size()) != lay.total)
    throw Error(ErrorCategory::InvalidConfig, "policy_backward: gradient buffer size mismatch");
  double* g = grad.data();

  // dL/dlogit = p - target on allowed entries, 0 on masked ones.
  std::vector<double> dlogits(static_cast<std::size_t>(n) * out, 0.0);
  for (int a = 0; a < n * out; ++a)
    if (t.mask[a]) dlogits[a] = std::exp(t.log_probs[a]);
  std::vector<int> inv(n);
  for (int i = 0; i < n; ++i) inv[t.perm[i]] = i;
  for (std::size_t i = 0; i < target.ids.size(); ++i) {
    const int orig = target.ids[i];
    const int canon = inv[orig / out] * out + orig % out;
    if (!t.mask[canon])
      throw Error(ErrorCategory::IllegalAction, "policy_backward: target action is masked");
    dlogits[canon] -= target.weights[i];
  }

  // Head.
  std::vector<double> dh_cur(static_cast<std::size_t>(d) * n, 0.0);
  for (int c = 0; c < out; ++c)
    for (int i = 0; i < n; ++i) {
      const double gl = dlogits[i * out + c];
      if (gl == 0.0) continue;
      g[lay.head_b + c] += gl;
      for (int r = 0; r < d; ++r) {
        g[lay.head_w + c * d + r] += gl * t.h_final[r * n + i];
        dh_cur[r * n + i] += gl * theta[lay.head_w + c * d + r];
      }
    }

  for (int l = cfg.layers - 1; l >= 0; --l) {
    const auto& pl = lay.layers[l];
    const ForwardTape::Layer& tl = t.layer[l];
    const std::vector<double>& attn_in = cfg.graph_conv ? tl.h_conv : tl.h_in;

    // Feed-forward block.
    {
      g[pl.alpha_ffn] += dot(dh_cur, tl.ff_out);
      const double af = theta[pl.alpha_ffn];
      std::vector<double> dgout(static_cast<std::size_t>(d) * n);
      for (std::size_t i = 0; i < dgout.size(); ++i) dgout[i] = af * dh_cur[i];
      addmm_tb(g + pl.w2, dgout.data(), tl.ff_act.data(), d, n, cfg.ff_dim);
      for (int r = 0; r < d; ++r)
        for (int i = 0; i < n; ++i) g[pl.b2 + r] += dgout[r * n + i];
      std::vector<double> du(static_cast<std::size_t>(cfg.ff_dim) * n, 0.0);
      addmm_ta(du.data(), theta + pl.w2, dgout.data(), d, cfg.ff_dim, n);
      for (std::size_t i = 0; i < du.size(); ++i)
        if (tl.ff_pre[i] <= 0.0) du[i] = 0.0;
      addmm_tb(g + pl.w1, du.data(), tl.h_mid.data(), cfg.ff_dim, n, d);
      for (int r = 0; r < cfg.ff_dim; ++r)
        for (int i = 0; i < n; ++i) g[pl.b1 + r] += du[r * n + i];
      addmm_ta(dh_cur.data(), theta + pl.w1, du.data(), cfg.ff_dim, d, n);
    }

    // Attention block.
    {
      g[pl.alpha_attn] += dot(dh_cur, tl.attn_out);
      const double aa = theta[pl.alpha_attn];
      std::vector<double> dao(static_cast<std::size_t>(d) * n);
      for (std::size_t i = 0; i < dao.size(); ++i) dao[i] = aa * dh_cur[i];
      addmm_tb(g + pl.wo, dao.data(), tl.concat.data(), d, n, d);
      std::vector<double> dconcat(static_cast<std::size_t>(d) * n, 0.0);
      addmm_ta(dconcat.data(), theta + pl.wo, dao.data(), d, d, n);

      std::vector<double> dq(static_cast<std::size_t>(d) * n, 0.0);
      std::vector<double> dk(static_cast<std::size_t>(d) * n, 0.0);
      std::vector<double> dv(static_cast<std::size_t>(d) * n, 0.0);
      const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
      std::vector<double> da(static_cast<std::size_t>(n) * n);
      std::vector<double> ds(static_cast<std::size_t>(n) * n);
      for (int head = 0; head < cfg.heads; ++head) {
        const int row0 = head * dh;
        const double* a = &tl.attn[static_cast<std::size_t>(head) * n * n];
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int r = 0; r < dh; ++r)
              s += dconcat[(row0 + r) * n + i] * tl.v[(row0 + r) * n + j];
            da[i * n + j] = s;
          }
        for (int r = 0; r < dh; ++r)
          for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += a[i * n + j] * dconcat[(row0 + r) * n + i];
            dv[(row0 + r) * n + j] += s;
          }
        for (int i = 0; i < n; ++i) {
          double inner = 0.0;
          for (int j = 0; j < n; ++j) inner += a[i * n + j] * da[i * n + j];
          for (int j = 0; j < n; ++j) ds[i * n + j] = a[i * n + j] * (da[i * n + j] - inner);
        }
        for (int r = 0; r < dh; ++r)
          for (int i = 0; i < n; ++i) {
            double sq = 0.0;
            for (int j = 0; j < n; ++j) sq += ds[i * n + j] * tl.k[(row0 + r) * n + j];
            dq[(row0 + r) * n + i] += sq * scale;
          }
        for (int r = 0; r < dh; ++r)
          for (int j = 0; j < n; ++j) {
            double sk = 0.0;
            for (int i = 0; i < n; ++i) sk += ds[i * n + j] * tl.q[(row0 + r) * n + i];
            dk[(row0 + r) * n + j] += sk * scale;
          }
      }
      auto accumulate_proj = [&](int w_offset, const std::vector<double>& dproj) {
        addmm_tb(g + w_offset, dproj.data(), attn_in.data(), d, n, d);
        addmm_ta(dh_cur.data(), theta + w_offset, dproj.data(), d, d, n);
      };
      accumulate_proj(pl.wq, dq);
      accumulate_proj(pl.wk, dk);
      accumulate_proj(pl.wv, dv);
    }

    // Graph convolution block.
    if (cfg.graph_conv) {
      g[pl.alpha_g] += dot(dh_cur, tl.conv_out);
      const double ag = theta[pl.alpha_g];
      std::vector<double> dr(static_cast<std::size_t>(d) * n);
      for (std::size_t i = 0; i < dr.size(); ++i) dr[i] = ag * dh_cur[i];
      addmm_tb(g + pl.wg, dr.data(), tl.conv_mix.data(), d, n, d);
      std::vector<double> dp(static_cast<std::size_t>(d) * n, 0.0);
      addmm_ta(dp.data(), theta + pl.wg, dr.data(), d, d, n);
      // conv_mix = H E  =>  dH += dP E^T
      addmm_tb(dh_cur.data(), dp.data(), t.edges.data(), d, n, n);
    }
  }

  // Embedding.
  {
    const int din = cfg.input_dim;
    addmm_tb(g + lay.emb_w, dh_cur.data(), t.features.data(), d, n, din);
    for (int r = 0; r < d; ++r)
      for (int i = 0; i < n; ++i) g[lay.emb_b + r] += dh_cur[r * n + i];
    if (cfg.origin_dest_tokens) {
      for (int r = 0; r < d; ++r) {
        g[lay.origin_tok + r] += dh_cur[r * n + t.origin_pos];
        g[lay.dest_tok + r] += dh_cur[r * n + t.dest_pos];
      }
    }
  }
}

std::vector<double> policy_scores(const PolicyModel& model, const ProblemInstance& state,
                                  ForwardTape* tape) {
  const PolicyConfig& cfg = model.config();
  if (cfg.problem != state.problem)
    throw Error(ErrorCategory::InvalidConfig, "policy_scores: model/problem mismatch");
  const std::vector<int> tokens = token_nodes(state);
  return policy_forward(model, feature_matrix(state, cfg.append_ident),
                        static_cast<int>(tokens.size()), feasibility_mask(state),
                        cfg.graph_conv ? conv_edge_weights(state, cfg.conv_row_minmax)
                                       : std::vector<double>{},
                        tokens, tape);
}

void adam_step(PolicyModel& model, const std::vector<double>& grad, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  std::vector<double>& theta = model.params();
  if (state.m.empty()) {
    state.m.assign(theta.size(), 0.0);
    state.v.assign(theta.size(), 0.0);
  }
  if (grad.size() != theta.size() || state.m.size() != theta.size())
    throw Error(ErrorCategory::InvalidConfig, "adam_step: shape mismatch");
  ++state.step;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

double lr_schedule(double lr0, int epoch) {
  return lr0 * std::pow(0.98, static_cast<double>(epoch / 50));
}

namespace {

nlohmann::json config_to_json(const PolicyConfig& cfg) {
  return nlohmann::json{{"problem", problem_name(cfg.problem)},
                        {"input_dim", cfg.input_dim},
                        {"embed_dim", cfg.embed_dim},
                        {"ff_dim", cfg.ff_dim},
                        {"heads", cfg.heads},
                        {"layers", cfg.layers},
                        {"head_outputs", cfg.head_outputs},
                        {"origin_dest_tokens", cfg.origin_dest_tokens},
                        {"graph_conv", cfg.graph_conv},
                        {"conv_row_minmax", cfg.conv_row_minmax},
                        {"append_ident", cfg.append_ident}};
}

PolicyConfig config_from_json(const nlohmann::json& j) {
  PolicyConfig cfg;
  cfg.problem = problem_from_name(j.at("problem").get<std::string>());
  cfg.input_dim = j.at("input_dim").get<int>();
  cfg.embed_dim = j.at("embed_dim").get<int>();
  cfg.ff_dim = j.at("ff_dim").get<int>();
  cfg.heads = j.at("heads").get<int>();
  cfg.layers = j.at("layers").get<int>();
  cfg.head_outputs = j.at("head_outputs").get<int>();
  cfg.origin_dest_tokens = j.at("origin_dest_tokens").get<bool>();
  cfg.graph_conv = j.at("graph_conv").get<bool>();
  cfg.conv_row_minmax = j.value("conv_row_minmax", true);
  cfg.append_ident = j.at("append_ident").get<bool>();
  return cfg;
}

}  // namespace

void PolicyModel::save(const std::string& path) const {
  nlohmann::json j{{"format", "bqmdp-policy"},
                   {"version", 1},
                   {"config", config_to_json(cfg_)},
                   {"params", params_}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::Io, "cannot write " + path);
  out << j.dump() << "\n";
}

PolicyModel PolicyModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot read " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "bqmdp-policy")
    throw Error(ErrorCategory::UnsupportedFormat, "not a policy checkpoint: " + path);
  PolicyModel model(config_from_json(j.at("config")));
  std::vector<double> params = j.at("params").get<std::vector<double>>();
  if (static_cast<int>(params.size()) != model.param_count())
    throw Error(ErrorCategory::MalformedInput,
                "checkpoint parameter count does not match its config");
  model.params() = std::move(params);
  return model;
}

}  // namespace bqmdp
