#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "c3/errors.hpp"
#include "c3/io.hpp"
#include "c3/synthdata.hpp"

using namespace c3;
using namespace c3::synth;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("c3r_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

}  // namespace

TEST(GenFactors, FullSpuriousStrengthCopiesSnc) {
  SynthConfig cfg;
  cfg.omega = 1.0;
  const auto factors = gen_factors(cfg, CounterRng(3), 200);
  int seen = 0;
  for (const auto& f : factors) {
    if (f.snc[0] != 1) continue;
    ++seen;
    for (const auto& block : f.sp)
      for (double v : block) EXPECT_EQ(v, 1.0);
  }
  EXPECT_GT(seen, 0);
}

TEST(GenFactors, ConstructionalInvariantsHold) {
  const SynthConfig cfg;
  for (const auto& f : gen_factors(cfg, CounterRng(4), 5000)) {
    ASSERT_TRUE(f.consistent());
    if (f.snc[0] == 0)
      for (auto nc : f.nc) EXPECT_EQ(nc, 0);
    if (f.snc[0] == 1)
      for (auto sc : f.sc) EXPECT_EQ(sc, 1);
  }
}

TEST(GenFactors, MarginalFrequenciesMatchParameters) {
  const SynthConfig cfg;
  const std::size_t n = 100000;
  const auto factors = gen_factors(cfg, CounterRng(5), n);
  double snc = 0, sc_given_0 = 0, n0 = 0, flips = 0;
  std::array<double, 3> nc_given_1{};
  for (const auto& f : factors) {
    snc += f.snc[0];
    flips += f.label != f.snc[0];
    if (f.snc[0] == 0) {
      n0 += 1;
      sc_given_0 += f.sc[0];
    } else {
      for (std::size_t k = 0; k < 3; ++k) nc_given_1[k] += f.nc[k];
    }
  }
  EXPECT_NEAR(snc / n, 0.5, 0.01);
  EXPECT_NEAR(sc_given_0 / n0, cfg.xi_a[0], 0.01);
  EXPECT_NEAR(flips / n, cfg.xi_label, 0.01);
  const double n1 = n - n0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double p = cfg.xi_b[k];
    EXPECT_LT(std::abs(nc_given_1[k] / n1 - p), 3.0 * std::sqrt(p * (1 - p) / n1)) << "modality " << k;
  }
}

TEST(GenFactors, SpuriousCorrelationGrowsWithOmega) {
  double prev = -1.0;
  for (double omega : {0.1, 0.3, 0.6, 0.9}) {
    SynthConfig cfg;
    cfg.omega = omega;
    const auto factors = gen_factors(cfg, CounterRng(6), 10000);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (const auto& f : factors) {
      double m = 0;
      for (const auto& b : f.sp)
        for (double v : b) m += v;
      m /= 15.0;
      const double s = f.snc[0];
      sx += m, sy += s, sxx += m * m, syy += s * s, sxy += m * s;
    }
    const double n = 10000.0;
    const double r = (sxy / n - sx / n * sy / n) /
                     std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
    EXPECT_GT(r, prev) << "omega " << omega;
    prev = r;
  }
}

TEST(MixFeature, ZeroMapsToHalf) {
  EXPECT_EQ(mix_feature(0.0, Mixing::Product), 0.5);
  EXPECT_EQ(mix_feature(0.0, Mixing::Shift), 0.5);
}

TEST(MixFeature, ProductFormIsAlwaysHalf) {
  // u1 = 1.5, u2 = 0 at v = 2, so the product vanishes.
  EXPECT_EQ(mix_feature(2.0, Mixing::Product), 0.5);
  EXPECT_EQ(mix_feature(-0.7, Mixing::Product), 0.5);
}

TEST(MixFeature, ShiftFormMovesTowardZero) {
  EXPECT_DOUBLE_EQ(mix_feature(2.0, Mixing::Shift), 1.0 / (1.0 + std::exp(-1.5)));
  EXPECT_DOUBLE_EQ(mix_feature(-2.0, Mixing::Shift), 1.0 / (1.0 + std::exp(1.5)));
  EXPECT_DOUBLE_EQ(mix_feature(0.3, Mixing::Shift), 1.0 / (1.0 + std::exp(0.2)));
}

TEST(AssembleSample, FeaturesInOpenUnitInterval) {
  const SynthConfig cfg;
  CounterRng rng(8);
  for (const auto& f : gen_factors(cfg, CounterRng(9), 500)) {
    const auto s = assemble_sample(f, cfg, rng);
    for (const auto& v : s) {
      ASSERT_EQ(v.size(), 20u);
      for (double x : v) {
        EXPECT_GT(x, 0.0);
        EXPECT_LT(x, 1.0);
      }
    }
  }
}

TEST(AssembleSample, NoiselessBlocksFollowFactors) {
  SynthConfig cfg;
  cfg.noise_var = 0.0;
  FactorRecord f;
  f.snc.fill(1);
  f.sc.fill(1);
  f.nc = {1, 0, 1};
  for (auto& b : f.sp) b.assign(5, 0.3);
  CounterRng rng(1);
  const auto s = assemble_sample(f, cfg, rng);
  const double one = mix_feature(1.0, Mixing::Shift);
  EXPECT_DOUBLE_EQ(s[0][0], one);
  EXPECT_DOUBLE_EQ(s[0][5], one);
  EXPECT_DOUBLE_EQ(s[0][10], one);
  EXPECT_DOUBLE_EQ(s[1][10], 0.5);
  EXPECT_DOUBLE_EQ(s[2][19], mix_feature(0.3, Mixing::Shift));
}

TEST(GenerateDataset, DefaultSizes) {
  const Dataset ds = generate_dataset(SynthConfig{});
  ASSERT_EQ(ds.train.modalities.size(), 3u);
  for (const auto& m : ds.train.modalities) {
    EXPECT_EQ(m.rows(), 1000);
    EXPECT_EQ(m.cols(), 20);
  }
  for (const auto& m : ds.eval.modalities) EXPECT_EQ(m.rows(), 200);
  EXPECT_EQ(ds.train_factors.size(), 1000u);
  EXPECT_EQ(ds.eval_factors.size(), 200u);
  EXPECT_EQ(ds.train.fused().cols(), 60);
}

TEST(GenerateDataset, DeterministicPerSeed) {
  SynthConfig cfg;
  cfg.seed = 42;
  const Dataset a = generate_dataset(cfg);
  const Dataset b = generate_dataset(cfg);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_TRUE(same(a.train.modalities[k], b.train.modalities[k]));
  EXPECT_EQ(a.train.labels, b.train.labels);
  cfg.seed = 43;
  const Dataset c = generate_dataset(cfg);
  EXPECT_FALSE(same(a.train.modalities[0], c.train.modalities[0]));
}

TEST(GenerateDataset, EnvTagsSplitSpuriousNoiseNotLabel) {
  const Dataset ds = generate_dataset(SynthConfig{});
  double agree = 0, ones = 0;
  for (std::size_t i = 0; i < ds.train.labels.size(); ++i) {
    agree += ds.train.env_tags[i] == static_cast<int>(ds.train_factors[i].snc[0]);
    ones += ds.train.env_tags[i];
  }
  const double n = static_cast<double>(ds.train.labels.size());
  EXPECT_NEAR(ones / n, 0.5, 0.06);
  EXPECT_NEAR(agree / n, 0.5, 0.06);
}

TEST(Dataset, SaveLoadRoundTrip) {
  SynthConfig cfg;
  cfg.n_train = 50;
  cfg.n_eval = 10;
  cfg.omega = 0.6;
  const Dataset ds = generate_dataset(cfg);
  const auto dir = temp_dir("roundtrip");
  save_dataset(ds, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "config.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "train" / "modality_2.c3mm"));
  const Dataset back = load_dataset(dir);
  EXPECT_EQ(back.config.omega, 0.6);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_TRUE(same(ds.eval.modalities[k], back.eval.modalities[k]));
  EXPECT_EQ(ds.train.env_tags, back.train.env_tags);
  const auto fa = factor_matrices(ds.train_factors);
  const auto fb = factor_matrices(back.train_factors);
  EXPECT_TRUE(same(fa.sp, fb.sp));
  EXPECT_TRUE(same(fa.nc, fb.nc));
  std::filesystem::remove_all(dir);
}

TEST(Dataset, MatrixFileHeader) {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const auto bytes = io::encode_matrix(m);
  ASSERT_EQ(bytes.size(), 4u + 4u + 8u + 8u + 6u * 8u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "C3MM");
  EXPECT_EQ(bytes[4], 1);  // version, little-endian
  EXPECT_EQ(bytes[8], 2);  // rows
  EXPECT_EQ(bytes[16], 3); // cols
  EXPECT_TRUE(same(io::decode_matrix(bytes), m));
}

TEST(SynthConfig, RejectsInvalidValues) {
  SynthConfig cfg;
  cfg.omega = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.xi_b[1] = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.block_dim = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
