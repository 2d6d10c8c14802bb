#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "c3/numkern.hpp"
#include "c3/rng.hpp"

namespace c3::synth {

inline constexpr std::size_t kModalities = 3;

/// How the noisy block vector v is squashed into features.
///   Shift:   sigmoid(u1(v) + u2(v)), every entry moved 0.5 toward zero.
///   Product: sigmoid(u1(v) * u2(v)). u1 and u2 are never both non-zero, so
///            every feature is exactly 0.5; kept for reference only.
/// u1(v) = v - 0.5 if v > 0 else 0;  u2(v) = v + 0.5 if v < 0 else 0.
enum class Mixing { Shift, Product };

struct SynthConfig {
  std::size_t n_train = 1000;
  std::size_t n_eval = 200;
  std::array<double, kModalities> xi_a{0.5, 0.5, 0.5};  // SNC / SC resampling
  double xi_label = 0.15;                               // label flip probability
  std::array<double, kModalities> xi_b{0.5, 0.7, 0.9};  // NC retention
  double omega = 0.3;                                   // spurious strength
  std::size_t block_dim = 5;
  double noise_var = 0.4;
  std::uint64_t seed = 0;
  Mixing mixing = Mixing::Shift;

  void validate() const;
  std::size_t modality_dim() const { return 4 * block_dim; }
};

/// Ground-truth factors of one sample. SNC is shared by all modalities and
/// replicated into each slot.
struct FactorRecord {
  std::array<std::uint8_t, kModalities> snc{};
  std::array<std::uint8_t, kModalities> sc{};
  std::array<std::uint8_t, kModalities> nc{};
  std::array<std::vector<double>, kModalities> sp;
  std::uint8_t label = 0;

  /// snc = 1 implies sc = 1; snc = 0 implies nc = 0.
  bool consistent() const;
};

struct MultiModalBatch {
  std::vector<Matrix> modalities;  // one (rows x 4d) matrix each
  std::vector<int> labels;
  std::vector<int> env_tags;

  Index rows() const { return modalities.empty() ? 0 : modalities.front().rows(); }
  /// Modalities concatenated column-wise, the encoder input.
  Matrix fused() const;
  MultiModalBatch subset(std::span<const std::size_t> indices) const;
  void validate() const;
};

struct FactorMatrices {
  Matrix snc;  // n x 1
  Matrix sc;   // n x 3
  Matrix nc;   // n x 3
  Matrix sp;   // n x 3d
};

struct Dataset {
  SynthConfig config;
  MultiModalBatch train;
  MultiModalBatch eval;
  std::vector<FactorRecord> train_factors;
  std::vector<FactorRecord> eval_factors;
};

/// Factors for sample `index`, drawn from per-factor substreams of `rng` so
/// each sample (and each factor type) is independent of the others.
FactorRecord draw_factors(const SynthConfig& cfg, const CounterRng& rng, std::uint64_t index);
std::vector<FactorRecord> gen_factors(const SynthConfig& cfg, const CounterRng& rng, std::size_t n);

double mix_feature(double v, Mixing mixing);

/// Per-modality feature vectors (length 4d) for one factor record.
std::array<std::vector<double>, kModalities> assemble_sample(const FactorRecord& f, const SynthConfig& cfg,
                                                             CounterRng& rng);

/// Spurious-group tag: 1 when the SNC-independent part of the sample's SP
/// values, sp - omega * snc, has a positive sum.
int env_tag(const FactorRecord& f, const SynthConfig& cfg);

Dataset generate_dataset(const SynthConfig& cfg);

FactorMatrices factor_matrices(std::span<const FactorRecord> factors);

/// On-disk layout: config.json, and train/ eval/ each holding
/// modality_<k>.c3mm, labels.csv (index,label,env_tag) and factors.csv.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace c3::synth
