#include "c3/synthdata.hpp"

#include <cmath>
#include <sstream>

#include "c3/errors.hpp"
#include "c3/io.hpp"
#include "c3/json.hpp"

namespace c3::synth {
namespace {

bool open_unit(double p) { return p > 0.0 && p < 1.0; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::vector<std::string>> read_csv_body(const std::filesystem::path& path, std::size_t expected_cols) {
  std::istringstream in(io::read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != expected_cols)
      throw IoError(path.string() + ": expected " + std::to_string(expected_cols) + " columns, got " +
                    std::to_string(cells.size()));
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(path.string() + ": bad number '" + s + "'");
  }
}

std::string labels_csv(const MultiModalBatch& b) {
  std::string out = "index,label,env_tag\n";
  for (std::size_t i = 0; i < b.labels.size(); ++i)
    out += std::to_string(i) + ',' + std::to_string(b.labels[i]) + ',' + std::to_string(b.env_tags[i]) + '\n';
  return out;
}

std::string factors_csv(std::span<const FactorRecord> factors, std::size_t d) {
  std::string out = "index,snc";
  for (std::size_t k = 0; k < kModalities; ++k) out += ",sc_" + std::to_string(k);
  for (std::size_t k = 0; k < kModalities; ++k) out += ",nc_" + std::to_string(k);
  for (std::size_t k = 0; k < kModalities; ++k)
    for (std::size_t j = 0; j < d; ++j) out += ",sp_" + std::to_string(k) + "_" + std::to_string(j);
  out += ",label\n";
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto& f = factors[i];
    out += std::to_string(i) + ',' + std::to_string(f.snc[0]);
    for (auto v : f.sc) out += ',' + std::to_string(v);
    for (auto v : f.nc) out += ',' + std::to_string(v);
    for (const auto& sp : f.sp)
      for (double v : sp) out += ',' + io::format_double(v);
    out += ',' + std::to_string(f.label) + '\n';
  }
  return out;
}

void save_split(const MultiModalBatch& b, std::span<const FactorRecord> factors, std::size_t d,
                const std::filesystem::path& dir) {
  io::ensure_directory(dir);
  for (std::size_t k = 0; k < b.modalities.size(); ++k)
    io::write_matrix(dir / ("modality_" + std::to_string(k) + ".c3mm"), b.modalities[k]);
  io::write_text(dir / "labels.csv", labels_csv(b));
  io::write_text(dir / "factors.csv", factors_csv(factors, d));
}

void load_split(const std::filesystem::path& dir, std::size_t d, MultiModalBatch& b,
                std::vector<FactorRecord>& factors) {
  if (!std::filesystem::is_directory(dir)) throw IoError("missing dataset split " + dir.string());
  b.modalities.clear();
  for (std::size_t k = 0; k < kModalities; ++k)
    b.modalities.push_back(io::read_matrix(dir / ("modality_" + std::to_string(k) + ".c3mm")));

  const auto lpath = dir / "labels.csv";
  for (const auto& row : read_csv_body(lpath, 3)) {
    b.labels.push_back(static_cast<int>(parse_double(row[1], lpath)));
    b.env_tags.push_back(static_cast<int>(parse_double(row[2], lpath)));
  }

  const auto fpath = dir / "factors.csv";
  const std::size_t ncols = 1 + 1 + 2 * kModalities + kModalities * d + 1;
  for (const auto& row : read_csv_body(fpath, ncols)) {
    FactorRecord f;
    std::size_t c = 1;
    const auto snc = static_cast<std::uint8_t>(parse_double(row[c++], fpath));
    f.snc.fill(snc);
    for (auto& v : f.sc) v = static_cast<std::uint8_t>(parse_double(row[c++], fpath));
    for (auto& v : f.nc) v = static_cast<std::uint8_t>(parse_double(row[c++], fpath));
    for (auto& sp : f.sp) {
      sp.resize(d);
      for (auto& v : sp) v = parse_double(row[c++], fpath);
    }
    f.label = static_cast<std::uint8_t>(parse_double(row[c], fpath));
    factors.push_back(std::move(f));
  }
  b.validate();
  if (factors.size() != static_cast<std::size_t>(b.rows()))
    throw IoError(dir.string() + ": factor count does not match sample count");
}

}  // namespace

void SynthConfig::validate() const {
  for (double p : xi_a)
    if (!open_unit(p)) throw ConfigError("xi_a entries must lie in (0,1)");
  for (double p : xi_b)
    if (!open_unit(p)) throw ConfigError("xi_b entries must lie in (0,1)");
  if (!open_unit(xi_label)) throw ConfigError("xi_label must lie in (0,1)");
  if (!(omega >= 0.0 && omega <= 1.0)) throw ConfigError("omega must lie in [0,1]");
  if (block_dim < 1) throw ConfigError("block_dim must be >= 1");
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) throw ConfigError("noise_var must be >= 0");
}

bool FactorRecord::consistent() const {
  for (std::size_t k = 0; k < kModalities; ++k) {
    if (snc[k] != snc[0]) return false;
    if (snc[k] == 1 && sc[k] != 1) return false;
    if (snc[k] == 0 && nc[k] != 0) return false;
  }
  return true;
}

Matrix MultiModalBatch::fused() const {
  Index cols = 0;
  for (const auto& m : modalities) cols += m.cols();
  Matrix out(rows(), cols);
  Index off = 0;
  for (const auto& m : modalities) {
    out.middleCols(off, m.cols()) = m;
    off += m.cols();
  }
  return out;
}

MultiModalBatch MultiModalBatch::subset(std::span<const std::size_t> indices) const {
  MultiModalBatch out;
  for (const auto& m : modalities) {
    Matrix sub(static_cast<Index>(indices.size()), m.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) sub.row(static_cast<Index>(i)) = m.row(static_cast<Index>(indices[i]));
    out.modalities.push_back(std::move(sub));
  }
  for (auto i : indices) {
    out.labels.push_back(labels.at(i));
    out.env_tags.push_back(env_tags.at(i));
  }
  return out;
}

void MultiModalBatch::validate() const {
  if (modalities.empty()) throw ContractError("batch has no modalities");
  for (const auto& m : modalities)
    if (m.rows() != rows()) throw DimensionError("modalities have unequal row counts");
  if (labels.size() != static_cast<std::size_t>(rows())) throw DimensionError("label count != row count");
  if (env_tags.size() != labels.size()) throw DimensionError("env_tag count != row count");
}

FactorRecord draw_factors(const SynthConfig& cfg, const CounterRng& rng, std::uint64_t index) {
  CounterRng snc_rng = rng.substream("snc").substream(index);
  CounterRng label_rng = rng.substream("label").substream(index);
  CounterRng sc_rng = rng.substream("sc").substream(index);
  CounterRng nc_rng = rng.substream("nc").substream(index);
  CounterRng sp_rng = rng.substream("sp").substream(index);

  FactorRecord f;
  const auto snc = static_cast<std::uint8_t>(snc_rng.bernoulli(cfg.xi_a[0]));
  f.snc.fill(snc);
  f.label = static_cast<std::uint8_t>(snc ^ static_cast<std::uint8_t>(label_rng.bernoulli(cfg.xi_label)));
  for (std::size_t k = 0; k < kModalities; ++k) {
    // Draw unconditionally so the stream position never depends on SNC.
    const auto resample = static_cast<std::uint8_t>(sc_rng.bernoulli(cfg.xi_a[k]));
    f.sc[k] = snc == 1 ? std::uint8_t{1} : resample;
    f.nc[k] = static_cast<std::uint8_t>(snc * static_cast<std::uint8_t>(nc_rng.bernoulli(cfg.xi_b[k])));
    f.sp[k].resize(cfg.block_dim);
    for (auto& v : f.sp[k]) v = cfg.omega * snc + (1.0 - cfg.omega) * sp_rng.normal();
  }
  return f;
}

std::vector<FactorRecord> gen_factors(const SynthConfig& cfg, const CounterRng& rng, std::size_t n) {
  cfg.validate();
  std::vector<FactorRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw_factors(cfg, rng, i));
  return out;
}

double mix_feature(double v, Mixing mixing) {
  const double u1 = v > 0.0 ? v - 0.5 : 0.0;
  const double u2 = v < 0.0 ? v + 0.5 : 0.0;
  return logistic(mixing == Mixing::Product ? u1 * u2 : u1 + u2);
}

std::array<std::vector<double>, kModalities> assemble_sample(const FactorRecord& f, const SynthConfig& cfg,
                                                             CounterRng& rng) {
  const std::size_t d = cfg.block_dim;
  const double sd = std::sqrt(cfg.noise_var);
  std::array<std::vector<double>, kModalities> out;
  for (std::size_t k = 0; k < kModalities; ++k) {
    if (f.sp[k].size() != d) throw DimensionError("assemble_sample: SP block has wrong length");
    auto& v = out[k];
    v.resize(4 * d);
    for (std::size_t j = 0; j < d; ++j) {
      v[j] = f.snc[k];
      v[d + j] = f.sc[k];
      v[2 * d + j] = f.nc[k];
      v[3 * d + j] = f.sp[k][j];
    }
    for (auto& x : v) x = mix_feature(x + sd * rng.normal(), cfg.mixing);
  }
  return out;
}

int env_tag(const FactorRecord& f, const SynthConfig& cfg) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& sp : f.sp) {
    for (double v : sp) sum += v - cfg.omega * f.snc[0];
    n += sp.size();
  }
  return n > 0 && sum > 0.0 ? 1 : 0;
}

namespace {

MultiModalBatch build_split(const SynthConfig& cfg, const CounterRng& split_rng, std::size_t n,
                            std::vector<FactorRecord>& factors) {
  factors = gen_factors(cfg, split_rng.substream("factors"), n);
  const CounterRng noise_root = split_rng.substream("assembly");
  MultiModalBatch b;
  for (std::size_t k = 0; k < kModalities; ++k)
    b.modalities.emplace_back(static_cast<Index>(n), static_cast<Index>(cfg.modality_dim()));
  for (std::size_t i = 0; i < n; ++i) {
    if (!factors[i].consistent()) throw Error("generated factor record violates its construction invariants");
    CounterRng noise = noise_root.substream(i);
    const auto sample = assemble_sample(factors[i], cfg, noise);
    for (std::size_t k = 0; k < kModalities; ++k)
      for (std::size_t j = 0; j < sample[k].size(); ++j)
        b.modalities[k](static_cast<Index>(i), static_cast<Index>(j)) = sample[k][j];
    b.labels.push_back(factors[i].label);
    b.env_tags.push_back(env_tag(factors[i], cfg));
  }
  return b;
}

}  // namespace

Dataset generate_dataset(const SynthConfig& cfg) {
  cfg.validate();
  const CounterRng root(cfg.seed);
  Dataset ds;
  ds.config = cfg;
  ds.train = build_split(cfg, root.substream("train"), cfg.n_train, ds.train_factors);
  ds.eval = build_split(cfg, root.substream("eval"), cfg.n_eval, ds.eval_factors);
  return ds;
}

FactorMatrices factor_matrices(std::span<const FactorRecord> factors) {
  const auto n = static_cast<Index>(factors.size());
  const auto d = factors.empty() ? Index{0} : static_cast<Index>(factors.front().sp[0].size());
  FactorMatrices m{Matrix(n, 1), Matrix(n, kModalities), Matrix(n, kModalities),
                   Matrix(n, static_cast<Index>(kModalities) * d)};
  for (Index i = 0; i < n; ++i) {
    const auto& f = factors[static_cast<std::size_t>(i)];
    m.snc(i, 0) = f.snc[0];
    for (std::size_t k = 0; k < kModalities; ++k) {
      const auto kk = static_cast<Index>(k);
      m.sc(i, kk) = f.sc[k];
      m.nc(i, kk) = f.nc[k];
      for (Index j = 0; j < d; ++j) m.sp(i, kk * d + j) = f.sp[k][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  io::ensure_directory(dir);
  io::write_text(dir / "config.json", to_json(ds.config).dump(2) + "\n");
  save_split(ds.train, ds.train_factors, ds.config.block_dim, dir / "train");
  save_split(ds.eval, ds.eval_factors, ds.config.block_dim, dir / "eval");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());
  Dataset ds;
  Json j;
  try {
    j = Json::parse(io::read_text(dir / "config.json"));
  } catch (const Json::parse_error& e) {
    throw IoError((dir / "config.json").string() + ": " + e.what());
  }
  ds.config = synth_config_from_json(j);
  load_split(dir / "train", ds.config.block_dim, ds.train, ds.train_factors);
  load_split(dir / "eval", ds.config.block_dim, ds.eval, ds.eval_factors);
  return ds;
}

}  // namespace c3::synth
