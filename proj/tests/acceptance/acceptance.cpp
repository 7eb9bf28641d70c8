// Copyright 2026 The csi4cast-workbench Authors
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

// Acceptance suite. Each criterion prints one PASS/FAIL line; the exit code is
// nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "csi4cast/acf.hpp"
#include "csi4cast/baselines.hpp"
#include "csi4cast/channel_sim.hpp"
#include "csi4cast/config.hpp"
#include "csi4cast/evaluation.hpp"
#include "csi4cast/metrics.hpp"
#include "csi4cast/model.hpp"
#include "csi4cast/noise.hpp"
#include "csi4cast/runtime.hpp"
#include "csi4cast/training.hpp"

using namespace csi4cast;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records a failed check; keeps the first few messages.
  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass || detail.size() < 400) detail += (detail.empty() ? "" : "; ") + what;
    pass = false;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

std::mt19937_64& rng() {
  static std::mt19937_64 r(20260101);
  return r;
}

std::vector<cdouble> random_complex(std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<cdouble> v(n);
  for (auto& x : v) x = {nd(rng()), nd(rng())};
  return v;
}

CsiSequence random_sequence(std::size_t m, std::size_t t, std::size_t n) {
  CsiSequence s(m, t, n);
  s.data() = random_complex(m * t * n);
  return s;
}

// ---------------------------------------------------------------------------

Outcome c1_nmse_identities() {
  Outcome o;
  for (int trial = 0; trial < 100; ++trial) {
    const CsiSequence h = random_sequence(4, 4, 32);
    CsiSequence zero(4, 4, 32), twice = h;
    for (auto& v : twice.data()) v *= 2.0;
    o.require(nmse_metric(h, h) == 0.0, "nmse(H,H) != 0");
    o.require(nmse_metric(zero, h) == 1.0, "nmse(0,H) != 1");
    o.require(nmse_metric(twice, h) == 1.0, "nmse(2H,H) != 1");
  }
  if (o.pass) o.detail = "100 random H: nmse(H,H)=0, nmse(0,H)=1, nmse(2H,H)=1 exactly";
  return o;
}

Outcome c2_dft_round_trip() {
  Outcome o;
  const std::size_t rows = 1000, n = 32;
  nn::Tensor x({rows, 2 * n});
  std::normal_distribution<double> nd;
  for (auto& v : x.data) v = nd(rng());
  const nn::Tensor d = idft_delay_transform(x);
  const nn::Tensor back = dft_transform(d);
  const nn::Tensor fwd_back = idft_delay_transform(dft_transform(x));
  double rt = 0.0, rt2 = 0.0, pars = 0.0;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    rt = std::max(rt, std::abs(back.data[i] - x.data[i]));
    rt2 = std::max(rt2, std::abs(fwd_back.data[i] - x.data[i]));
  }
  for (std::size_t r = 0; r < rows; ++r) {
    double ex = 0.0, ed = 0.0;
    for (std::size_t j = 0; j < 2 * n; ++j) {
      ex += x.data[r * 2 * n + j] * x.data[r * 2 * n + j];
      ed += d.data[r * 2 * n + j] * d.data[r * 2 * n + j];
    }
    pars = std::max(pars, std::abs(ed - ex) / ex);
  }
  o.require(rt <= 1e-12 && rt2 <= 1e-12, fmt("round trip error %.3g / %.3g", rt, rt2));
  o.require(pars <= 1e-12, fmt("Parseval relative error %.3g", pars));
  o.detail = fmt("1000 rows, N=32: max round-trip error %.2e, max Parseval error %.2e",
                 std::max(rt, rt2), pars);
  return o;
}

Csi4CastConfig tiny_csi4cast() {
  Csi4CastConfig c;
  c.acl_time.hidden = 4;
  c.acl_subcarrier.hidden = 4;
  c.shuffle_maps = 4;
  c.shuffle_groups = 2;
  c.shuffle_blocks = 1;
  c.shuffle_dropout = 0.0;
  c.latent = 8;
  c.encoder_layers = 1;
  c.heads = 2;
  c.ffn_hidden = 8;
  c.dropout = 0.0;
  return c;
}

SystemConfig tiny_system(Duplex duplex) {
  SystemConfig s;
  s.n_tx = 2;
  s.n_sc = 4;
  s.n_guard = 2;
  s.hist_len = 4;
  s.pred_len = 2;
  s.duplex = duplex;
  return s;
}

Outcome c3_gradient_check() {
  Outcome o;
  std::string detail;
  for (Duplex d : {Duplex::kTdd, Duplex::kFdd}) {
    ModelSpec spec;
    spec.kind = ModelKind::kCsi4Cast;
    spec.system = tiny_system(d);
    spec.csi4cast = tiny_csi4cast();
    GradientCheckOptions opt;
    opt.tolerance = 1e-4;
    opt.seed = 5;
    const auto r = gradient_check(spec, opt);
    o.require(r.passed(), std::string(to_string(d)) + fmt(" max rel error %.3g", r.max_rel_error));
    detail += std::string(detail.empty() ? "" : ", ") + std::string(to_string(d)) +
              fmt(" max rel error %.2e over %.0f tensors", r.max_rel_error,
                  static_cast<double>(r.per_parameter.size()));
  }
  if (o.pass) o.detail = detail;
  return o;
}

std::vector<CsiSequence> clean_histories(std::size_t count, const ScenarioDescriptor& sc,
                                         const SystemConfig& sys, std::uint64_t seed) {
  std::vector<CsiSequence> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(synthesize_clean_pair(sc, sys, seed + i).first);
  return out;
}

Outcome c4_noise_calibration() {
  Outcome o;
  const SystemConfig sys;
  ScenarioDescriptor sc;
  sc.velocity = 10.0;
  const auto clean = clean_histories(64, sc, sys, 4000);  // 64 * 2048 elements
  std::string detail;
  double worst = 0.0;
  for (double snr : {0.0, 5.0, 10.0, 15.0, 20.0, 25.0}) {
    std::vector<CsiSequence> noisy;
    for (std::size_t i = 0; i < clean.size(); ++i) noisy.push_back(apply_awgn(clean[i], snr, 900 + i));
    const double got = pooled_snr(clean, noisy);
    worst = std::max(worst, std::abs(got - snr));
    o.require(std::abs(got - snr) <= 0.5, fmt("AWGN %.0f dB measured %.3f dB", snr, got));
  }
  const std::size_t elements = clean.size() * clean[0].numel();
  o.require(elements >= 100000, "fewer than 1e5 elements");
  const auto reference = clean_histories(32, sc, sys, 7000);
  const NoiseParams p = calibrate_noise_degree(NoiseType::kPhase, 5.0, reference, 0.05, 3);
  o.require(std::abs(p.sigma_rad - 0.59) <= 0.05, fmt("phase sigma %.4f rad", p.sigma_rad));
  o.detail = fmt("AWGN worst |error| %.3f dB over %.0f elements; phase sigma at 5 dB = %.4f rad",
                 worst, static_cast<double>(elements), p.sigma_rad);
  return o;
}

Outcome c5_noise_structure() {
  Outcome o;
  // Phase noise keeps every magnitude.
  double mag_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    const CsiSequence h = random_sequence(4, 16, 32);
    const CsiSequence y = apply_phase_noise(h, 0.1 + 0.15 * i, 50 + i);
    for (std::size_t k = 0; k < h.numel(); ++k)
      mag_err = std::max(mag_err, std::abs(std::abs(y.data()[k]) - std::abs(h.data()[k])));
  }
  o.require(mag_err <= 1e-12, fmt("phase magnitude error %.3g", mag_err));

  // Burst noise: at most one contiguous window of at most L_burst slots per stream.
  std::size_t streams = 0, with_burst = 0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; streams < 10000; ++i) {
    const std::size_t len = 4 + i % 13;
    const CsiSequence h = random_sequence(4, len, 25);
    BurstParams bp;
    bp.length = 1 + static_cast<std::size_t>(i % 7);
    bp.amplitude = 0.5 + 3.0 * u(rng());
    bp.occur_prob = 0.2 + 0.8 * u(rng());
    const CsiSequence y = apply_burst_noise(h, bp, 10000 + i);
    for (std::size_t m = 0; m < 4; ++m)
      for (std::size_t k = 0; k < 25; ++k, ++streams) {
        std::vector<std::size_t> hit;
        for (std::size_t t = 0; t < len; ++t)
          if (y.at(m, t, k) != h.at(m, t, k)) hit.push_back(t);
        if (hit.empty()) continue;
        ++with_burst;
        const bool contiguous = hit.back() - hit.front() + 1 == hit.size();
        o.require(contiguous && hit.size() <= bp.length, "burst not one window within L_burst");
      }
  }
  o.require(with_burst > 1000, "too few bursts to be meaningful");

  // Packet-drop imputation on every mask up to length 6.
  std::size_t masks = 0;
  for (std::size_t len = 1; len <= 6; ++len) {
    for (std::uint32_t bits = 0; bits < (1u << len); ++bits, ++masks) {
      CsiSequence noisy(2, len, 3);
      DropMask mask(len);
      for (std::size_t t = 0; t < len; ++t) mask[t] = (bits >> t) & 1u;
      for (std::size_t m = 0; m < 2; ++m)
        for (std::size_t t = 0; t < len; ++t)
          for (std::size_t k = 0; k < 3; ++k)
            noisy.at(m, t, k) = mask[t] ? cdouble{-99.0, 99.0} : cdouble{1.0 + t, 10.0 * m + k};
      const CsiSequence got = impute_dropped(noisy, mask);
      for (std::size_t t = 0; t < len; ++t) {
        // Last observed at or before t, else first observed after t, else zero.
        std::ptrdiff_t src = -1;
        for (std::size_t s = 0; s <= t; ++s)
          if (!mask[s]) src = static_cast<std::ptrdiff_t>(s);
        if (src < 0)
          for (std::size_t s = t + 1; s < len && src < 0; ++s)
            if (!mask[s]) src = static_cast<std::ptrdiff_t>(s);
        for (std::size_t m = 0; m < 2; ++m)
          for (std::size_t k = 0; k < 3; ++k) {
            const cdouble want = src < 0 ? cdouble{0.0, 0.0}
                                         : noisy.at(m, static_cast<std::size_t>(src), k);
            o.require(got.at(m, t, k) == want, "imputation mismatch at len " + std::to_string(len));
          }
      }
    }
  }
  o.detail = fmt("phase |mag| error %.2e; %.0f burst streams (%.0f hit) all single windows; "
                 "%.0f drop masks match",
                 mag_err, static_cast<double>(streams), static_cast<double>(with_burst),
                 static_cast<double>(masks));
  return o;
}

Outcome c6_rank_metrics() {
  Outcome o;
  const std::size_t n_models = 5, n_scen = 20;
  std::vector<std::string> models;
  for (std::size_t i = 0; i < n_models; ++i) models.push_back("model" + std::to_string(i));
  std::uniform_int_distribution<int> level(0, 5);
  std::size_t tables_with_ties = 0;
  for (int table = 0; table < 200; ++table) {
    const RankOrder order = table % 2 ? RankOrder::kDescending : RankOrder::kAscending;
    std::vector<std::vector<double>> v(n_scen, std::vector<double>(n_models));
    bool ties = false;
    for (auto& row : v) {
      for (auto& x : row) x = 0.25 * level(rng());
      for (std::size_t i = 0; i < n_models; ++i)
        for (std::size_t j = i + 1; j < n_models; ++j) ties = ties || row[i] == row[j];
    }
    tables_with_ties += ties;
    std::vector<std::vector<std::size_t>> ranks;
    for (const auto& row : v) ranks.push_back(scenario_rank(models, row, order));
    const auto summary = rank_summaries(models, ranks);
    for (std::size_t i = 0; i < n_models; ++i) {
      double sum = 0.0, firsts = 0.0;
      for (std::size_t s = 0; s < n_scen; ++s) {
        std::size_t better = 0;
        for (std::size_t j = 0; j < n_models; ++j)
          better += order == RankOrder::kAscending ? v[s][j] < v[s][i] : v[s][j] > v[s][i];
        o.require(ranks[s][i] == better + 1, "scenario_rank differs from the oracle");
        sum += static_cast<double>(better + 1);
        firsts += better == 0;
      }
      const double mean = sum / n_scen;
      o.require(std::abs(summary[i].mean_rank - mean) <= 1e-12, "MeanRank differs");
      o.require(std::abs(summary[i].rank_score - (n_models - mean)) <= 1e-12, "RankScore differs");
      o.require(std::abs(summary[i].p_rank1 - firsts / n_scen) <= 1e-12, "P_rank1 differs");
      o.require(std::abs(summary[i].rank_score + summary[i].mean_rank - n_models) <= 1e-12,
                "RankScore + MeanRank != |models|");
    }
  }
  o.require(tables_with_ties == 200, "some tables had no ties");
  if (o.pass) o.detail = fmt("200 tables (5 x 20), %.0f with ties, all match", tables_with_ties);
  return o;
}

Outcome c7_se_properties() {
  Outcome o;
  const std::size_t n_ant = 4, n_sc = 8;
  std::uniform_real_distribution<double> u(0.01, 10.0);
  double worst_gap = -1e300, worst_eq = 0.0, worst_orth = 0.0;
  for (int pair = 0; pair < 10000; ++pair) {
    const auto h = random_complex(n_ant * n_sc);
    const auto h_hat = random_complex(n_ant * n_sc);
    const double nv = u(rng());
    const double se = spectral_efficiency(h, n_ant, nv);
    const double gap = predicted_se(h_hat, h, n_ant, nv) - se;
    worst_gap = std::max(worst_gap, gap);
    o.require(gap <= 1e-12, "predicted_se exceeds spectral_efficiency");

    auto scaled = h;
    const cdouble c = random_complex(1, 3.0)[0];
    for (auto& x : scaled) x *= c;
    const double eq = std::abs(predicted_se(scaled, h, n_ant, nv) - se) / std::max(se, 1e-300);
    worst_eq = std::max(worst_eq, eq);
    o.require(eq <= 1e-12, "c*h does not reach spectral_efficiency");

    // Project h_hat off h on every subcarrier.
    auto orth = h_hat;
    for (std::size_t k = 0; k < n_sc; ++k) {
      cdouble ip{0.0, 0.0};
      double nh = 0.0;
      for (std::size_t m = 0; m < n_ant; ++m) {
        ip += std::conj(h[k * n_ant + m]) * orth[k * n_ant + m];
        nh += std::norm(h[k * n_ant + m]);
      }
      for (std::size_t m = 0; m < n_ant; ++m) orth[k * n_ant + m] -= ip / nh * h[k * n_ant + m];
    }
    const double z = predicted_se(orth, h, n_ant, nv);
    worst_orth = std::max(worst_orth, z);
    o.require(z <= 1e-12, "orthogonal prediction gives nonzero SE");
  }
  o.detail = fmt("10000 pairs: max(SE_hat - SE) %.2e, max rel |SE(c h) - SE| %.2e, "
                 "max orthogonal SE %.2e",
                 worst_gap, worst_eq, worst_orth);
  return o;
}

// ---------------------------------------------------------------------------
// Trend reproduction on the 27-scenario grid.

struct ModelStats {
  double mean = 0.0;
  std::map<double, double> by_velocity;
  std::map<std::string, double> by_profile;
};

std::map<std::string, ModelStats> run_trend(Duplex duplex, std::ostream& log) {
  SystemConfig sys;
  sys.duplex = duplex;
  GridConfig grid = grid_preset("train");  // 3 profiles x 3 spreads x 3 velocities, AWGN
  const auto scenarios = grid.scenarios(duplex);
  DatasetOptions opt;
  opt.awgn_snr_range = std::pair{grid.train_snr_min, grid.train_snr_max};
  const std::size_t n = 200;
  CsiDataset train_set;
  train_set.config = sys;
  std::vector<CsiDataset> test_sets;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    ScenarioDescriptor s = scenarios[i];
    s.noise_degree = grid.train_snr_min;
    CsiDataset d = make_dataset(s, sys, n, derive_seed(1000 + i, 1), opt);
    for (auto& smp : d.samples) train_set.samples.push_back(std::move(smp));
    test_sets.push_back(make_dataset(s, sys, n, derive_seed(1000 + i, 2), opt));
  }

  std::vector<std::pair<std::string, std::unique_ptr<Predictor>>> models;
  models.emplace_back("np", std::make_unique<NpBaseline>(sys));
  for (ModelKind kind : {ModelKind::kCsi4Cast, ModelKind::kRnn, ModelKind::kCnn}) {
    ModelSpec spec;
    spec.kind = kind;
    spec.system = sys;
    spec.csi4cast.shuffle_maps = 8;
    spec.csi4cast.shuffle_groups = 2;
    spec.csi4cast.shuffle_blocks = 1;
    spec.csi4cast.latent = 32;
    spec.csi4cast.encoder_layers = 1;
    spec.csi4cast.heads = 2;
    spec.csi4cast.ffn_hidden = 64;
    spec.rnn.hidden = 64;
    spec.cnn.filters = {16, 16};
    auto model = make_predictor(spec, 1);
    TrainConfig tc;
    tc.max_epochs = 5;
    tc.batch_size = 32;
    tc.lr = 3e-3;
    tc.early_stop_patience = 2;
    const auto t0 = std::chrono::steady_clock::now();
    const TrainHistory h = train(*model, train_set, tc);
    log << "    " << to_string(duplex) << ' ' << to_string(kind) << ": " << h.epochs()
        << " epochs, best val NMSE " << h.best_val_nmse() << ", "
        << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
    models.emplace_back(std::string(to_string(kind)), std::move(model));
  }

  std::map<std::string, ModelStats> out;
  for (const auto& [name, model] : models) {
    ModelStats& st = out[name];
    std::map<double, std::size_t> nv;
    std::map<std::string, std::size_t> np;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      const double e = evaluate_model(*model, name, test_sets[i]).nmse;
      const std::string prof(to_string(scenarios[i].channel_profile));
      st.mean += e / static_cast<double>(scenarios.size());
      st.by_velocity[scenarios[i].velocity] += e;
      ++nv[scenarios[i].velocity];
      st.by_profile[is_los(scenarios[i].channel_profile) ? "LOS" : "NLOS"] += e;
      ++np[is_los(scenarios[i].channel_profile) ? "LOS" : "NLOS"];
    }
    for (auto& [v, s] : st.by_velocity) s /= static_cast<double>(nv[v]);
    for (auto& [p, s] : st.by_profile) s /= static_cast<double>(np[p]);
    log << "    " << to_string(duplex) << ' ' << name << ": mean " << st.mean << "  v1 "
        << st.by_velocity[1.0] << "  v10 " << st.by_velocity[10.0] << "  v30 "
        << st.by_velocity[30.0] << "  LOS " << st.by_profile["LOS"] << "  NLOS "
        << st.by_profile["NLOS"] << "\n";
  }
  return out;
}

Outcome c8_trend_reproduction() {
  Outcome o;
  std::ostringstream log;
  const auto tdd = run_trend(Duplex::kTdd, log);
  const auto fdd = run_trend(Duplex::kFdd, log);
  std::cout << log.str();
  for (const auto* res : {&tdd, &fdd}) {
    const std::string dx = res == &tdd ? "TDD " : "FDD ";
    const double np = res->at("np").mean;
    for (const auto& [name, st] : *res) {
      if (name != "np") {
        o.require(st.mean < np, dx + name + " does not beat NP");
        o.require(st.by_profile.at("LOS") < st.by_profile.at("NLOS"), dx + name + " LOS >= NLOS");
      }
      o.require(st.by_velocity.at(1.0) <= st.by_velocity.at(10.0) &&
                    st.by_velocity.at(10.0) <= st.by_velocity.at(30.0),
                dx + name + " NMSE not monotone in velocity");
    }
  }
  for (const auto& [name, st] : tdd) o.require(fdd.at(name).mean > st.mean, name + " FDD <= TDD");
  o.detail = fmt("mean NMSE TDD/FDD: csi4cast %.3f/%.3f, np %.3f/%.3f", tdd.at("csi4cast").mean,
                 fdd.at("csi4cast").mean, tdd.at("np").mean, fdd.at("np").mean);
  return o;
}

// ---------------------------------------------------------------------------
// Efficiency accounting on five layer stacks.

/// Wraps a hand-built layer stack as a Predictor so the evaluation counters apply.
class StackPredictor final : public Predictor {
 public:
  using Build = std::function<nn::Var(nn::Graph&, nn::Var)>;
  explicit StackPredictor(const SystemConfig& s) : system_(s) {}
  void set_forward(Build f) { fwd_ = std::move(f); }
  ModelKind kind() const override { return ModelKind::kCnn; }
  const SystemConfig& system() const override { return system_; }
  nn::ParameterSet& parameters() override { return params_; }
  const nn::ParameterSet& parameters() const override { return params_; }
  nn::Var forward(nn::Graph& g, nn::Var x) const override { return fwd_(g, x); }
  std::vector<std::pair<std::string, std::string>> describe() const override { return {}; }

 private:
  SystemConfig system_;
  nn::ParameterSet params_;
  Build fwd_;
};

double lin(double rows, double in, double out, bool bias = true) {
  return 2 * rows * in * out + (bias ? rows * out : 0.0);
}

struct Expect {
  std::string name;
  std::size_t trainable, total;
  double flops;
  const Predictor* model;
};

double csi4cast_hand_flops(const SystemConfig& s, const Csi4CastConfig& c) {
  const double B = s.n_tx, T = s.hist_len, N = s.n_sc, P = s.pred_len, TN = T * N;
  const double rho = c.shuffle_maps, eta = c.shuffle_groups, mu = c.shuffle_kernel;
  const double sq = std::max<std::size_t>(1, c.shuffle_maps / 4), gam = c.latent;
  const double heads = c.heads, dh = gam / heads, F = c.ffn_hidden, H = c.acl_time.hidden;
  const double Hs = c.acl_subcarrier.hidden;
  double f = B * 2 * TN;
  f += 2 * (B * 4 * TN) * 2 * 9 + 2 * (B * 4 * TN) + B * 4 * TN;  // conv, bn, relu
  f += 2 * (B * 2 * TN) * 4 * 9 + B * 2 * TN + B * 2 * TN;        // conv with bias, residual
  f += lin(B * T, 2 * N, 2 * N, false);
  double branch = lin(B * 2 * N, T, H) + B * 2 * N * H + lin(B * 2 * N, H, T) + B * T * 2 * N;
  if (s.duplex == Duplex::kFdd)
    branch += lin(B * T, 2 * N, Hs) + B * T * Hs + lin(B * T, Hs, 2 * N) + B * T * 2 * N;
  const double maps = B * rho * TN;
  branch += 2 * maps * 2 + maps;
  branch += c.shuffle_blocks * (2 * (2 * maps * (rho / eta) + maps) + 2 * maps * mu * mu + maps +
                                maps + lin(B, rho, sq) + B * sq + lin(B, sq, rho) + B * rho + maps);
  branch += 2 * (B * 2 * TN) * rho + B * 2 * TN;
  f += 2 * branch + B * T * 2 * N;
  f += lin(B * T, 2 * N, gam) + B * T * gam;
  double enc = 3 * lin(B * T, gam, gam) + lin(B * T, gam, gam, false);
  enc += 2 * (B * heads) * T * T * dh * 2 + 4 * (B * heads) * T * T;
  enc += 2 * (B * T * gam + 5 * B * T * gam);
  enc += lin(B * T, gam, F) + B * T * F + lin(B * T, F, gam);
  f += c.encoder_layers * enc;
  f += lin(B * T, gam, 2 * N) + lin(B * 2 * N, T, P);
  return f + B * 2 * P * N;
}

std::size_t csi4cast_hand_params(const SystemConfig& s, const Csi4CastConfig& c) {
  const std::size_t T = s.hist_len, N = s.n_sc, P = s.pred_len, rho = c.shuffle_maps;
  const std::size_t eta = c.shuffle_groups, mu = c.shuffle_kernel, sq = std::max<std::size_t>(1, rho / 4);
  const std::size_t gam = c.latent, F = c.ffn_hidden, H = c.acl_time.hidden, Hs = c.acl_subcarrier.hidden;
  std::size_t p = 2 * 4 * 9 + 2 * 4 + (4 * 2 * 9 + 2);
  std::size_t branch = (T * H + H) + (H * T + T);
  if (s.duplex == Duplex::kFdd) branch += (2 * N * Hs + Hs) + (Hs * 2 * N + 2 * N);
  branch += (2 * rho + rho) + (rho * 2 + 2);
  branch += c.shuffle_blocks * (2 * (rho * (rho / eta) + rho) + (rho * mu * mu + rho) +
                                (rho * sq + sq) + (sq * rho + rho));
  p += 2 * branch;
  p += 2 * N * gam + gam;
  p += c.encoder_layers * ((4 * gam * gam + 3 * gam) + 4 * gam + (gam * F + F) + (F * gam + gam));
  return p + (gam * 2 * N + 2 * N) + (T * P + P);
}

Outcome c9_efficiency() {
  Outcome o;
  Engine eng = make_engine(1, 0);
  std::vector<Expect> cases;

  // 1. Single dense layer a x b with bias, one row.
  SystemConfig s1;
  s1.n_tx = 1;
  s1.hist_len = 4;
  s1.n_sc = 3;
  s1.pred_len = 2;
  const std::size_t a = 2 * 4 * 3, b = 5;
  StackPredictor dense(s1);
  nn::Linear fc(dense.parameters(), "fc", a, b, eng);
  dense.set_forward([fc, a](nn::Graph& g, nn::Var x) { return fc(g, nn::reshape(x, {1, a})); });
  cases.push_back({"dense 24x5", a * b + b, a * b + b, 2.0 * a * b + b, &dense});

  // 2. Conv stack: 3x3 conv without bias, batch norm, relu, grouped 1x1, depthwise 3x3.
  SystemConfig s2;
  s2.n_tx = 3;
  s2.hist_len = 6;
  s2.n_sc = 5;
  s2.pred_len = 2;
  StackPredictor convs(s2);
  nn::Conv2d c0(convs.parameters(), "c0", 2, 8, 3, 3, 1, eng, false);
  nn::BatchNorm2d bn(convs.parameters(), "bn", 8);
  nn::Conv2d c1(convs.parameters(), "c1", 8, 8, 1, 1, 4, eng);
  nn::Conv2d c2(convs.parameters(), "c2", 8, 8, 3, 3, 8, eng);
  convs.set_forward([=](nn::Graph& g, nn::Var x) {
    return c2(g, c1(g, nn::relu(bn(g, c0(g, x)))));
  });
  {
    const double out = 3.0 * 8 * 6 * 5;
    const std::size_t tr = 2 * 8 * 9 + 2 * 8 + (8 * 2 + 8) + (8 * 9 + 8);
    const double fl = 2 * out * 2 * 9 + 2 * out + out + (2 * out * 2 + out) + (2 * out * 9 + out);
    cases.push_back({"conv stack", tr, tr + 16, fl, &convs});
  }

  // 3. CNN baseline.
  SystemConfig s3 = tiny_system(Duplex::kTdd);
  CnnConfig cc;
  cc.filters = {4, 6};
  CnnBaseline cnn(cc, s3, 1);
  {
    const double B = 2, T = 4, N = 4, P = 2;
    const std::size_t tr = (2 * 4 * 9 + 4) + (4 * 6 * 9 + 6) + (6 * 2 + 2) + (4 * 2 + 2);
    const double fl = (2 * B * 4 * T * N * 2 * 9 + B * 4 * T * N) + B * 4 * T * N +
                      (2 * B * 6 * T * N * 4 * 9 + B * 6 * T * N) + B * 6 * T * N +
                      lin(B * T * N, 6, 2) + lin(B * 2 * N, T, P);
    cases.push_back({"cnn baseline", tr, tr, fl, &cnn});
  }

  // 4. RNN baseline, two GRU layers.
  RnnConfig rc;
  rc.hidden = 5;
  rc.layers = 2;
  RnnBaseline rnn(rc, s3, 1);
  {
    const double B = 2, T = 4, N = 4, P = 2, H = 5;
    const std::size_t Hs = 5, in = 8;
    const std::size_t tr = (in * 3 * Hs + 3 * Hs) + (Hs * 3 * Hs + 3 * Hs) +
                           (Hs * 3 * Hs + 3 * Hs) + (Hs * 3 * Hs + 3 * Hs) +
                           (Hs * 2 * 2 * 4 + 2 * 2 * 4);
    const double step0 = lin(B, 2 * N, 3 * H) + lin(B, H, 3 * H) + 10 * B * H;
    const double step1 = lin(B, H, 3 * H) + lin(B, H, 3 * H) + 10 * B * H;
    const double fl = T * (step0 + step1) + lin(B, H, P * 2 * N);
    cases.push_back({"rnn baseline", tr, tr, fl, &rnn});
  }

  // 5. Tiny CSI-4CAST in both duplex modes.
  Csi4CastModel tdd(tiny_csi4cast(), tiny_system(Duplex::kTdd), 1);
  Csi4CastModel fdd(tiny_csi4cast(), tiny_system(Duplex::kFdd), 1);
  for (const Csi4CastModel* m : {&tdd, &fdd}) {
    const std::size_t tr = csi4cast_hand_params(m->system(), m->config());
    cases.push_back({std::string("csi4cast ") + std::string(to_string(m->system().duplex)), tr,
                     tr + 8, csi4cast_hand_flops(m->system(), m->config()), m});
  }

  for (const auto& c : cases) {
    const ParamCount pc = count_params(*c.model);
    const double fl = count_flops(*c.model);
    o.require(pc.trainable == c.trainable && pc.total == c.total && fl == c.flops,
              c.name + ": got (" + std::to_string(pc.trainable) + ", " + std::to_string(pc.total) +
                  ", " + fmt("%.0f", fl) + ") want (" + std::to_string(c.trainable) + ", " +
                  std::to_string(c.total) + ", " + fmt("%.0f", c.flops) + ")");
  }

  NpBaseline np(s3);
  const ParamCount pnp = count_params(np);
  o.require(pnp.trainable == 0 && pnp.total == 0 && count_flops(np) == 0.0, "NP is not (0, 0, 0)");
  const auto e = eff_score({0.0, 50.0, 100.0});
  o.require(e[0] == 1.0 && e[1] == 0.5 && e[2] == 0.0, "eff_score endpoints");
  const auto e2 = eff_score({7.0, 3.0});
  o.require(e2[0] == 0.0 && e2[1] > 0.0 && e2[1] < 1.0, "eff_score max cost is not 0");
  if (o.pass) {
    o.detail = std::to_string(cases.size()) + " stacks match hand counts; NP = (0, 0, 0); "
               "eff_score endpoints 1 and 0";
  }
  return o;
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome c10_reproducibility(const fs::path& cli, const fs::path& work) {
  Outcome o;
  fs::remove_all(work);
  fs::create_directories(work);
  {
    std::ofstream cfg(work / "run.cfg");
    cfg << "run.seed = 17\n"
           "system.n_tx = 2\nsystem.n_sc = 8\nsystem.n_guard = 2\n"
           "system.hist_len = 8\nsystem.pred_len = 2\n"
           "grid.velocities = 1,10,30\ngrid.delay_spreads_ns = 30\ngrid.profiles = NLOS-A\n"
           "grid.noise_types = AWGN\ngrid.snr_db = 10\ngrid.samples = 24\n"
           "model.shuffle_maps = 4\nmodel.shuffle_groups = 2\nmodel.shuffle_blocks = 1\n"
           "model.latent = 8\nmodel.encoder_layers = 1\nmodel.heads = 2\nmodel.ffn_hidden = 16\n"
           "rnn.hidden = 8\ncnn.filters = 4\n"
           "train.max_epochs = 2\ntrain.batch_size = 8\n"
           "eval.timing_reps = 2\n";
  }
  auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli.string() + "\" " + args + " > \"" +
                            (work / "cli.log").string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    o.require(rc == 0, "command failed: " + args);
  };
  const std::string cfg = " --config \"" + (work / "run.cfg").string() + "\"";
  for (const char* r : {"a", "b"}) {
    const fs::path d = work / r;
    run("generate" + cfg + " --jobs 2 --out \"" + (d / "data").string() + "\"");
    std::string ckpts;
    for (const char* m : {"csi4cast", "rnn", "cnn"}) {
      run("train" + cfg + " --model " + m + " --manifest \"" + (d / "data/manifest.json").string() +
          "\" --out \"" + (d / "models").string() + "\"");
      ckpts += " --checkpoint \"" + (d / "models" / (std::string(m) + ".ckpt")).string() + "\"";
    }
    run("evaluate" + cfg + ckpts + " --jobs 2 --manifest \"" +
        (d / "data/manifest.json").string() + "\" --out \"" + (d / "eval").string() + "\"");
  }
  // Every file except the wall-clock timing table must match byte for byte.
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(work / "a")) {
    if (!e.is_regular_file() || e.path().filename() == "timing.csv") continue;
    const fs::path rel = fs::relative(e.path(), work / "a");
    o.require(fs::exists(work / "b" / rel), rel.string() + " missing in second run");
    o.require(slurp(e.path()) == slurp(work / "b" / rel), rel.string() + " differs");
    ++compared;
  }
  o.require(compared >= 3 + 1 + 6 + 5, "fewer files than expected");
  if (o.pass) {
    o.detail = std::to_string(compared) +
               " files (datasets, manifest, checkpoints, histories, metric CSVs) identical";
    fs::remove_all(work);
  }
  return o;
}

CsiSequence two_path_grid() {
  CsiSequence s(1, 4, 8);
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t k = 0; k < 8; ++k)
      s.at(0, t, k) = std::polar(1.0, 0.4 * t - 0.9 * k) + 0.6 * std::polar(1.0, -0.25 * t - 2.1 * k + 1.0);
  return s;
}

Outcome c11_acf() {
  Outcome o;
  const SystemConfig sys;
  std::string detail;
  for (const char* prof : {"NLOS-A", "NLOS-B", "NLOS-C"}) {
    std::vector<double> lag1;
    for (double v : {1.0, 10.0, 30.0}) {
      ScenarioDescriptor sc;
      sc.channel_profile = parse_profile(prof);
      sc.velocity = v;
      const auto acf = temporal_acf(clean_histories(100, sc, sys, 300), 4);
      o.require(acf[0] == 1.0, "lag 0 is not 1");
      lag1.push_back(acf[1]);
    }
    o.require(lag1[0] >= lag1[1] && lag1[1] >= lag1[2], std::string(prof) + " lag-1 ACF not monotone");
    detail += std::string(detail.empty() ? "" : "; ") + prof +
              fmt(" lag-1 %.3f >= %.3f >= %.3f", lag1[0], lag1[1], lag1[2]);
  }
  // Brute-force estimator on a 4 x 8 grid.
  const CsiSequence s = two_path_grid();
  const auto grid = acf_2d({s}, 3, 7);
  cdouble mu{0.0, 0.0};
  for (const auto& v : s.data()) mu += v;
  mu /= 32.0;
  double var = 0.0;
  for (const auto& v : s.data()) var += std::norm(v - mu);
  var /= 32.0;
  double err = 0.0;
  for (std::size_t dt = 0; dt < 4; ++dt)
    for (std::size_t df = 0; df < 8; ++df) {
      cdouble r{0.0, 0.0};
      for (std::size_t t = dt; t < 4; ++t)
        for (std::size_t k = df; k < 8; ++k)
          r += (s.at(0, t, k) - mu) * std::conj(s.at(0, t - dt, k - df) - mu);
      r /= static_cast<double>((4 - dt) * (8 - df));
      err = std::max(err, std::abs(grid[dt * 8 + df] - std::abs(r) / var));
    }
  o.require(err <= 1e-12, fmt("2D ACF differs from brute force by %.3g", err));
  o.require(frequency_acf({s}, 3)[0] == 1.0 && grid[0] == 1.0, "lag 0 is not 1");
  o.detail = detail + fmt("; brute-force 4x8 max error %.2e", err);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"acceptance criteria"};
  int only = 0;
  std::string cli = CSI4CAST_CLI_PATH;
  std::string work = (fs::temp_directory_path() / "csi4cast_acceptance").string();
  app.add_option("--criterion", only, "run one criterion (1-11); 0 runs all")->check(CLI::Range(0, 11));
  app.add_option("--cli", cli, "path of the csi4cast command-line tool");
  app.add_option("--work-dir", work, "scratch directory for the reproducibility run");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "NMSE identities", 1.0, c1_nmse_identities},
      {2, "IDFT round trip and Parseval", 5.0, c2_dft_round_trip},
      {3, "gradient check", 120.0, c3_gradient_check},
      {4, "noise calibration", 60.0, c4_noise_calibration},
      {5, "noise structure", 60.0, c5_noise_structure},
      {6, "rank metrics", 10.0, c6_rank_metrics},
      {7, "SE properties", 10.0, c7_se_properties},
      {8, "trend reproduction", 3600.0, c8_trend_reproduction},
      {9, "efficiency accounting", 1.0, c9_efficiency},
      {10, "reproducibility", 600.0,
       [&] { return c10_reproducibility(cli, fs::path(work) / std::to_string(::getpid())); }},
      {11, "ACF diagnostics", 60.0, c11_acf},
  };

  int failures = 0;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= c.budget_s) {
      o.pass = false;
      o.detail += fmt(" (over the %.0f s budget)", c.budget_s);
    }
    std::printf("criterion %2d %-30s %s  %.2fs  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs,
                o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
