#include "vinet/model.hpp"

#include <cmath>
#include <limits>

namespace vinet {

namespace {

Tensor zeros_like(const Tensor& t) { return Tensor::zeros(t.shape()); }

LstmParams zeros_like(const LstmParams& p) {
  LstmParams z;
  z.W_xi = zeros_like(p.W_xi); z.W_hi = zeros_like(p.W_hi);
  z.w_ci = zeros_like(p.w_ci); z.b_i = zeros_like(p.b_i);
  z.W_xf = zeros_like(p.W_xf); z.W_hf = zeros_like(p.W_hf);
  z.w_cf = zeros_like(p.w_cf); z.b_f = zeros_like(p.b_f);
  z.W_xc = zeros_like(p.W_xc); z.W_hc = zeros_like(p.W_hc);
  z.b_c = zeros_like(p.b_c);
  z.W_xo = zeros_like(p.W_xo); z.W_ho = zeros_like(p.W_ho);
  z.w_co = zeros_like(p.w_co); z.b_o = zeros_like(p.b_o);
  return z;
}

void zero_lstm(LstmParams& p) {
  for (Tensor* t : {&p.W_xi, &p.W_hi, &p.w_ci, &p.b_i, &p.W_xf, &p.W_hf, &p.w_cf,
                    &p.b_f, &p.W_xc, &p.W_hc, &p.b_c, &p.W_xo, &p.W_ho, &p.w_co,
                    &p.b_o}) {
    t->fill(0.0);
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (image_width < 1 || image_height < 1 || image_channels < 1 || imu_hidden < 1 ||
      core_hidden < 1 || core_layers < 1 || imu_input < 1 || cnn.empty()) {
    throw ConfigError("ModelConfig: all sizes must be >= 1");
  }
  if (!(omega_max > 0.0) || omega_max * std::sqrt(3.0) > M_PI + 1e-9) {
    throw ConfigError("ModelConfig: omega_max must lie in (0, pi/sqrt(3)]");
  }
  // walk the conv chain so undersized images fail here, not mid-run
  visual_feature_size();
}

std::vector<ConvLayerSpec> ModelConfig::conv_specs() const {
  std::vector<ConvLayerSpec> specs;
  std::size_t in_maps = 2 * image_channels;  // stacked frame pair
  for (const ConvStage& st : cnn) {
    ConvLayerSpec s;
    s.in_maps = in_maps;
    s.out_maps = st.out_maps;
    s.kh = s.kw = st.kernel;
    s.stride = st.stride;
    s.act = Activation::LeakyRelu;
    s.validate();
    specs.push_back(s);
    in_maps = st.out_maps;
  }
  return specs;
}

std::size_t ModelConfig::visual_feature_size() const {
  std::size_t h = image_height;
  std::size_t w = image_width;
  std::size_t maps = 2 * image_channels;
  for (const ConvStage& st : cnn) {
    if (h < st.kernel || w < st.kernel) {
      throw ConfigError("ModelConfig: conv chain shrinks image below kernel size");
    }
    h = (h - st.kernel) / st.stride + 1;
    w = (w - st.kernel) / st.stride + 1;
    maps = st.out_maps;
  }
  return maps * h * w;
}

VinetModel::VinetModel(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  conv_specs_ = cfg_.conv_specs();
  Rng rng(seed);
  for (const ConvLayerSpec& s : conv_specs_) {
    cnn_.push_back(init_conv(s, rng));
    cnn_grads_.push_back({zeros_like(cnn_.back().w), zeros_like(cnn_.back().b)});
  }
  imu_ = init_lstm(cfg_.imu_input, cfg_.imu_hidden, rng);
  imu_grads_ = zeros_like(imu_);
  std::size_t in = cfg_.core_input_size();
  for (std::size_t l = 0; l < cfg_.core_layers; ++l) {
    core_.push_back(init_lstm(in, cfg_.core_hidden, rng));
    core_grads_.push_back(zeros_like(core_.back()));
    in = cfg_.core_hidden;
  }
  head_ = init_dense(cfg_.core_hidden, 6, rng);
  head_grads_ = {zeros_like(head_.W), zeros_like(head_.b)};
}

RunState VinetModel::initial_state() const {
  RunState st;
  st.imu = LstmState(cfg_.imu_hidden);
  st.core.assign(cfg_.core_layers, LstmState(cfg_.core_hidden));
  st.pose = Pose();
  return st;
}

Tensor VinetModel::visual_forward(const Tensor& prev_img, const Tensor& curr_img,
                                  VisualCache* cache) const {
  const std::vector<std::size_t> want{cfg_.image_channels, cfg_.image_height,
                                      cfg_.image_width};
  require_shape(prev_img, want, "visual_forward prev image");
  require_shape(curr_img, want, "visual_forward curr image");
  Tensor x({2 * cfg_.image_channels, cfg_.image_height, cfg_.image_width});
  const std::size_t half = prev_img.numel();
  for (std::size_t i = 0; i < half; ++i) x[i] = prev_img[i];
  for (std::size_t i = 0; i < half; ++i) x[half + i] = curr_img[i];

  if (cache != nullptr) cache->conv.resize(conv_specs_.size());
  for (std::size_t l = 0; l < conv_specs_.size(); ++l) {
    x = conv2d_forward(x, conv_specs_[l], cnn_[l],
                       cache != nullptr ? &cache->conv[l] : nullptr);
  }
  return flatten(x);
}

Tensor VinetModel::imu_window_forward(std::span<const ImuSample> samples,
                                      LstmState& state,
                                      std::vector<LstmCache>* caches) const {
  double last_t = -std::numeric_limits<double>::infinity();
  for (const ImuSample& s : samples) {
    if (!(s.t > last_t)) {
      throw Error("imu_window_forward: non-monotonic IMU timestamps");
    }
    last_t = s.t;
    Tensor x({6});
    x[0] = s.a.x(); x[1] = s.a.y(); x[2] = s.a.z();
    x[3] = s.w.x(); x[4] = s.w.y(); x[5] = s.w.z();
    LstmCache* c = nullptr;
    if (caches != nullptr) {
      caches->emplace_back();
      c = &caches->back();
    }
    state = lstm_cell_forward(x, state, imu_, c);
    ++imu_step_count;
  }
  return state.h;
}

StepOutput VinetModel::core_step(const Tensor& visual_feat, const Tensor& imu_feat,
                                 const Pose& prev_pose,
                                 std::vector<LstmState>& core_state,
                                 StepCache* cache) const {
  require_shape(visual_feat, {cfg_.visual_feature_size()}, "core_step visual feat");
  require_shape(imu_feat, {cfg_.imu_hidden}, "core_step imu feat");
  if (core_state.size() != cfg_.core_layers) {
    throw ShapeError("core_step: core state layer count mismatch");
  }

  // pose feedback enters as a plain 7-vector, detached from the tape
  Tensor pose7({7});
  const Vec7 p7 = prev_pose.as7();
  for (int i = 0; i < 7; ++i) pose7[i] = p7[i];
  Tensor x = concat_forward({&visual_feat, &imu_feat, &pose7});

  if (cache != nullptr) cache->core.resize(cfg_.core_layers);
  for (std::size_t l = 0; l < cfg_.core_layers; ++l) {
    core_state[l] = lstm_cell_forward(x, core_state[l], core_[l],
                                      cache != nullptr ? &cache->core[l] : nullptr);
    x = core_state[l].h;
  }

  Tensor raw = dense_forward(x, head_, cache != nullptr ? &cache->head : nullptr);
  Vec3 omega, v;
  for (int i = 0; i < 3; ++i) {
    omega[i] = cfg_.omega_max * std::tanh(raw[i]);
    v[i] = raw[3 + i];
  }
  StepOutput out;
  out.xi = Twist(omega, v);
  out.pose = compose(prev_pose, exp_se3(out.xi));
  if (cache != nullptr) {
    cache->head_raw = raw;
    cache->xi = out.xi;
    cache->prev_pose = prev_pose;
    cache->step_pose = exp_se3(out.xi);
    cache->pose = out.pose;
  }
  return out;
}

std::vector<StepOutput> VinetModel::forward_steps(const SyncedSequence& seq,
                                                  std::size_t first_step,
                                                  std::size_t count, RunState& state,
                                                  SequenceCache* cache) const {
  if (first_step < 1 || first_step + count > seq.n_frames()) {
    throw Error("forward_steps: step range outside the sequence");
  }
  std::vector<StepOutput> outputs;
  outputs.reserve(count);
  for (std::size_t k = first_step; k < first_step + count; ++k) {
    StepCache* sc = nullptr;
    if (cache != nullptr) {
      cache->steps.emplace_back();
      sc = &cache->steps.back();
    }
    const Tensor vis = visual_forward(seq.images[k - 1], seq.images[k],
                                      sc != nullptr ? &sc->visual : nullptr);
    const auto [lo, hi] = imu_window(seq, k);
    const Tensor imuf = imu_window_forward(
        std::span<const ImuSample>(seq.imu.data() + lo, hi - lo), state.imu,
        sc != nullptr ? &sc->imu : nullptr);
    const StepOutput out = core_step(vis, imuf, state.pose, state.core, sc);
    state.pose = out.pose;
    outputs.push_back(out);
  }
  return outputs;
}

std::vector<StepOutput> VinetModel::sequence_forward(const SyncedSequence& seq,
                                                     RunState& state,
                                                     SequenceCache* cache) const {
  seq.validate();
  if (seq.n_steps() == 0) {
    throw Error("sequence_forward: need at least two frames");
  }
  return forward_steps(seq, 1, seq.n_steps(), state, cache);
}

void VinetModel::backward(const SequenceCache& cache, const StepSeeds& seeds) {
  const std::size_t T = cache.steps.size();
  if (T == 0) return;
  if (!seeds.d_xi.empty() && seeds.d_xi.size() != T) {
    throw ShapeError("backward: d_xi seed count mismatch");
  }
  if (!seeds.d_pose.empty() && seeds.d_pose.size() != T) {
    throw ShapeError("backward: d_pose seed count mismatch");
  }

  // Pose-chain backward: transport pose gradients down the composition chain
  // and convert to per-step twist gradients.
  std::vector<Vec6> d_xi(T, Vec6::Zero());
  if (!seeds.d_xi.empty()) {
    for (std::size_t k = 0; k < T; ++k) d_xi[k] = seeds.d_xi[k];
  }
  if (!seeds.d_pose.empty()) {
    Vec6 g_next = Vec6::Zero();  // flows into pose_k from the k+1 chain
    for (std::size_t k = T; k-- > 0;) {
      const StepCache& sc = cache.steps[k];
      Vec6 g = g_next + pose_components_backward(sc.pose, seeds.d_pose[k].dq,
                                                 seeds.d_pose[k].dt);
      const auto [g_prev, g_step] = compose_backward(sc.prev_pose, sc.step_pose, g);
      d_xi[k] += exp_se3_backward(sc.xi, g_step);
      g_next = g_prev;  // gradient into the carried pose of step k-1
    }
    // g_next now targets the window's carried-in pose, which is constant
  }

  // Network backward, t = T..1, with state gradients carried across steps.
  LstmState imu_carry(cfg_.imu_hidden);  // dh, dc flowing into the IMU LSTM
  std::vector<LstmState> core_carry(cfg_.core_layers, LstmState(cfg_.core_hidden));
  const std::size_t vis_size = cfg_.visual_feature_size();

  for (std::size_t k = T; k-- > 0;) {
    const StepCache& sc = cache.steps[k];

    // head: omega_i = omega_max * tanh(raw_i), v_i = raw_{3+i}
    Tensor d_raw({6});
    for (int i = 0; i < 3; ++i) {
      const double th = std::tanh(sc.head_raw[i]);
      d_raw[i] = d_xi[k][i] * cfg_.omega_max * (1.0 - th * th);
      d_raw[3 + i] = d_xi[k][3 + i];
    }
    Tensor dh_top = dense_backward(d_raw, head_, sc.head, head_grads_);

    // core stack, top layer first
    Tensor dx_lower;  // gradient into layer l's input
    for (std::size_t l = cfg_.core_layers; l-- > 0;) {
      Tensor dh = core_carry[l].h;
      if (l + 1 == cfg_.core_layers) {
        for (std::size_t i = 0; i < dh.numel(); ++i) dh[i] += dh_top[i];
      } else {
        for (std::size_t i = 0; i < dh.numel(); ++i) dh[i] += dx_lower[i];
      }
      const LstmStateGrads g =
          lstm_cell_backward(dh, core_carry[l].c, core_[l], sc.core[l], core_grads_[l]);
      core_carry[l].h = g.dh_prev;
      core_carry[l].c = g.dc_prev;
      dx_lower = g.dx;
    }

    // split the fused input gradient; the pose feedback slice is detached
    auto parts = concat_backward(dx_lower, {vis_size, cfg_.imu_hidden, 7});

    // IMU window backward (empty windows just carry the state gradient)
    for (std::size_t i = 0; i < cfg_.imu_hidden; ++i) {
      imu_carry.h[i] += parts[1][i];
    }
    for (std::size_t j = sc.imu.size(); j-- > 0;) {
      const LstmStateGrads g =
          lstm_cell_backward(imu_carry.h, imu_carry.c, imu_, sc.imu[j], imu_grads_);
      imu_carry.h = g.dh_prev;
      imu_carry.c = g.dc_prev;
    }

    // CNN backward
    const ConvCache& last = sc.visual.conv.back();
    const std::size_t lh = conv_specs_.back().out_h(last.input.extent(1));
    const std::size_t lw = conv_specs_.back().out_w(last.input.extent(2));
    Tensor d_feat = parts[0].reshaped({conv_specs_.back().out_maps, lh, lw});
    for (std::size_t l = conv_specs_.size(); l-- > 0;) {
      d_feat = conv2d_backward(d_feat, conv_specs_[l], cnn_[l], sc.visual.conv[l],
                               cnn_grads_[l]);
    }
  }
}

std::vector<VinetModel::ParamRef> VinetModel::param_refs() {
  std::vector<ParamRef> refs;
  auto add = [&refs](const std::string& name, std::size_t group, Tensor& v, Tensor& g) {
    refs.push_back({name, group, &v, &g});
  };
  for (std::size_t l = 0; l < cnn_.size(); ++l) {
    const std::string p = "cnn" + std::to_string(l);
    add(p + ".w", l, cnn_[l].w, cnn_grads_[l].w);
    add(p + ".b", l, cnn_[l].b, cnn_grads_[l].b);
  }
  const std::size_t imu_group = cnn_.size();
  auto add_lstm = [&](const std::string& prefix, std::size_t group, LstmParams& v,
                      LstmParams& g) {
    add(prefix + ".W_xi", group, v.W_xi, g.W_xi);
    add(prefix + ".W_hi", group, v.W_hi, g.W_hi);
    add(prefix + ".w_ci", group, v.w_ci, g.w_ci);
    add(prefix + ".b_i", group, v.b_i, g.b_i);
    add(prefix + ".W_xf", group, v.W_xf, g.W_xf);
    add(prefix + ".W_hf", group, v.W_hf, g.W_hf);
    add(prefix + ".w_cf", group, v.w_cf, g.w_cf);
    add(prefix + ".b_f", group, v.b_f, g.b_f);
    add(prefix + ".W_xc", group, v.W_xc, g.W_xc);
    add(prefix + ".W_hc", group, v.W_hc, g.W_hc);
    add(prefix + ".b_c", group, v.b_c, g.b_c);
    add(prefix + ".W_xo", group, v.W_xo, g.W_xo);
    add(prefix + ".W_ho", group, v.W_ho, g.W_ho);
    add(prefix + ".w_co", group, v.w_co, g.w_co);
    add(prefix + ".b_o", group, v.b_o, g.b_o);
  };
  add_lstm("imu", imu_group, imu_, imu_grads_);
  for (std::size_t l = 0; l < core_.size(); ++l) {
    add_lstm("core" + std::to_string(l), imu_group + 1 + l, core_[l], core_grads_[l]);
  }
  const std::size_t head_group = imu_group + 1 + core_.size();
  add("head.W", head_group, head_.W, head_grads_.W);
  add("head.b", head_group, head_.b, head_grads_.b);
  return refs;
}

std::vector<Tensor*> VinetModel::param_values() {
  std::vector<Tensor*> out;
  for (const ParamRef& r : param_refs()) out.push_back(r.value);
  return out;
}

std::vector<Tensor> VinetModel::grads_snapshot() {
  std::vector<Tensor> out;
  for (const ParamRef& r : param_refs()) out.push_back(*r.grad);
  return out;
}

void VinetModel::zero_grads() {
  for (ConvParams& g : cnn_grads_) {
    g.w.fill(0.0);
    g.b.fill(0.0);
  }
  zero_lstm(imu_grads_);
  for (LstmParams& g : core_grads_) zero_lstm(g);
  head_grads_.W.fill(0.0);
  head_grads_.b.fill(0.0);
}

std::size_t VinetModel::n_parameters() {
  std::size_t n = 0;
  for (const ParamRef& r : param_refs()) n += r.value->numel();
  return n;
}

}  // namespace vinet
