#include "bisense/cnn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "bisense/errors.hpp"
#include "bisense/parallel.hpp"
#include "bisense/rng.hpp"

namespace bisense {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint and dataset binaries assume a little-endian host");

namespace {

struct Dims {
  int c = 0, h = 0, w = 0;
  int count() const { return c * h * w; }
};

struct ParamEntry {
  const char* name;
  std::size_t offset;
  std::size_t count;
  int fan_in;  // 0 for biases
};

// Static shape plan for one CnnConfig.
struct Arch {
  int kh = 0, kw = 0;  // conv kernel
  int ph = 0, pw = 0;  // pool window
  Dims in, c1, p1, c2, p2;
  int flat = 0;
  static constexpr int kC1 = 8;
  static constexpr int kC2 = 16;
  static constexpr int kFc1 = 32;
  std::vector<ParamEntry> table;
  std::size_t param_count = 0;

  std::size_t off(const char* name) const {
    for (const auto& e : table) {
      if (std::strcmp(e.name, name) == 0) return e.offset;
    }
    throw Error(std::string("internal: unknown parameter table entry ") + name);
  }
};

Arch make_arch(const CnnConfig& cfg) {
  Arch a;
  if (cfg.kind == InputKind::grid2d) {
    a.kh = 3;
    a.kw = 3;
    a.ph = 2;
    a.pw = 2;
    a.in = {1, cfg.input_rows, cfg.input_cols};
  } else {
    a.kh = 1;
    a.kw = 5;
    a.ph = 1;
    a.pw = 2;
    // Delay profiles arrive as a column vector; the network sees them as a
    // width-input_rows sequence.
    a.in = {1, 1, cfg.input_rows};
  }
  a.c1 = {Arch::kC1, a.in.h - a.kh + 1, a.in.w - a.kw + 1};
  a.p1 = {Arch::kC1, a.c1.h / a.ph, a.c1.w / a.pw};
  a.c2 = {Arch::kC2, a.p1.h - a.kh + 1, a.p1.w - a.kw + 1};
  a.p2 = {Arch::kC2, a.c2.h / a.ph, a.c2.w / a.pw};
  if (a.c1.h < 1 || a.c1.w < 1 || a.p1.h < 1 || a.p1.w < 1 || a.c2.h < 1 ||
      a.c2.w < 1 || a.p2.h < 1 || a.p2.w < 1) {
    throw ConfigError("input tensor too small for the detector architecture");
  }
  a.flat = a.p2.count();

  std::size_t off = 0;
  const auto add = [&](const char* name, std::size_t count, int fan_in) {
    a.table.push_back({name, off, count, fan_in});
    off += count;
  };
  const int k = a.kh * a.kw;
  add("conv1_w", static_cast<std::size_t>(Arch::kC1) * k, k);
  add("conv1_b", Arch::kC1, 0);
  add("conv2_w", static_cast<std::size_t>(Arch::kC2) * Arch::kC1 * k,
      Arch::kC1 * k);
  add("conv2_b", Arch::kC2, 0);
  add("fc1_w", static_cast<std::size_t>(Arch::kFc1) * a.flat, a.flat);
  add("fc1_b", Arch::kFc1, 0);
  add("fc2_w", Arch::kFc1, Arch::kFc1);
  add("fc2_b", 1, 0);
  a.param_count = off;
  return a;
}

template <typename T>
struct Workspace {
  std::vector<T> in, c1, p1, c2, p2, f1;
  std::vector<int> am1, am2;  // pool argmax (flat indices into c1 / c2)
  std::vector<T> d_f1, d_p2, d_c2, d_p1, d_c1;

  explicit Workspace(const Arch& a)
      : in(a.in.count()),
        c1(a.c1.count()),
        p1(a.p1.count()),
        c2(a.c2.count()),
        p2(a.p2.count()),
        f1(Arch::kFc1),
        am1(a.p1.count()),
        am2(a.p2.count()),
        d_f1(Arch::kFc1),
        d_p2(a.p2.count()),
        d_c2(a.c2.count()),
        d_p1(a.p1.count()),
        d_c1(a.c1.count()) {}
};

template <typename T>
void conv_forward(const Arch& a, const T* w, const T* b, const T* x,
                  const Dims& xd, T* y, const Dims& yd) {
  for (int oc = 0; oc < yd.c; ++oc) {
    T* ych = y + static_cast<std::size_t>(oc) * yd.h * yd.w;
    std::fill(ych, ych + static_cast<std::size_t>(yd.h) * yd.w, b[oc]);
    for (int ic = 0; ic < xd.c; ++ic) {
      const T* xch = x + static_cast<std::size_t>(ic) * xd.h * xd.w;
      const T* wk =
          w + (static_cast<std::size_t>(oc) * xd.c + ic) * a.kh * a.kw;
      for (int ky = 0; ky < a.kh; ++ky) {
        for (int kx = 0; kx < a.kw; ++kx) {
          const T wv = wk[ky * a.kw + kx];
          for (int oy = 0; oy < yd.h; ++oy) {
            const T* xrow = xch + static_cast<std::size_t>(oy + ky) * xd.w + kx;
            T* yrow = ych + static_cast<std::size_t>(oy) * yd.w;
            for (int ox = 0; ox < yd.w; ++ox) yrow[ox] += wv * xrow[ox];
          }
        }
      }
    }
  }
  const std::size_t n = static_cast<std::size_t>(yd.c) * yd.h * yd.w;
  for (std::size_t i = 0; i < n; ++i) y[i] = std::max(y[i], T{0});
}

// dY is the gradient at the (pre-activation == post-relu-masked) conv
// output; accumulates dW/dB at gw/gb and, unless skip_dx, the input gradient
// into dx (which must arrive zeroed).
template <typename T>
void conv_backward(const Arch& a, const T* w, const T* x, const Dims& xd,
                   const T* dy, const Dims& yd, T* gw, T* gb, T* dx,
                   bool skip_dx) {
  for (int oc = 0; oc < yd.c; ++oc) {
    const T* dych = dy + static_cast<std::size_t>(oc) * yd.h * yd.w;
    T acc{};
    const std::size_t n = static_cast<std::size_t>(yd.h) * yd.w;
    for (std::size_t i = 0; i < n; ++i) acc += dych[i];
    gb[oc] = acc;
    for (int ic = 0; ic < xd.c; ++ic) {
      const T* xch = x + static_cast<std::size_t>(ic) * xd.h * xd.w;
      T* dxch = skip_dx ? nullptr : dx + static_cast<std::size_t>(ic) * xd.h * xd.w;
      const std::size_t wbase =
          (static_cast<std::size_t>(oc) * xd.c + ic) * a.kh * a.kw;
      for (int ky = 0; ky < a.kh; ++ky) {
        for (int kx = 0; kx < a.kw; ++kx) {
          T gsum{};
          const T wv = w[wbase + ky * a.kw + kx];
          for (int oy = 0; oy < yd.h; ++oy) {
            const T* xrow = xch + static_cast<std::size_t>(oy + ky) * xd.w + kx;
            const T* dyrow = dych + static_cast<std::size_t>(oy) * yd.w;
            if (skip_dx) {
              for (int ox = 0; ox < yd.w; ++ox) gsum += dyrow[ox] * xrow[ox];
            } else {
              T* dxrow = dxch + static_cast<std::size_t>(oy + ky) * xd.w + kx;
              for (int ox = 0; ox < yd.w; ++ox) {
                gsum += dyrow[ox] * xrow[ox];
                dxrow[ox] += wv * dyrow[ox];
              }
            }
          }
          gw[wbase + ky * a.kw + kx] = gsum;
        }
      }
    }
  }
}

template <typename T>
void pool_forward(const Arch& a, const T* x, const Dims& xd, T* y,
                  const Dims& yd, int* argmax) {
  for (int c = 0; c < yd.c; ++c) {
    const std::size_t xbase = static_cast<std::size_t>(c) * xd.h * xd.w;
    for (int oy = 0; oy < yd.h; ++oy) {
      for (int ox = 0; ox < yd.w; ++ox) {
        int best_idx = -1;
        T best{};
        for (int dy = 0; dy < a.ph; ++dy) {
          for (int dx = 0; dx < a.pw; ++dx) {
            const int iy = oy * a.ph + dy;
            const int ix = ox * a.pw + dx;
            const std::size_t idx = xbase + static_cast<std::size_t>(iy) * xd.w + ix;
            if (best_idx < 0 || x[idx] > best) {
              best = x[idx];
              best_idx = static_cast<int>(idx);
            }
          }
        }
        const std::size_t o =
            static_cast<std::size_t>(c) * yd.h * yd.w +
            static_cast<std::size_t>(oy) * yd.w + ox;
        y[o] = best;
        argmax[o] = best_idx;
      }
    }
  }
}

template <typename T>
double sigmoid(T z) {
  const double zd = static_cast<double>(z);
  if (zd >= 0.0) return 1.0 / (1.0 + std::exp(-zd));
  const double e = std::exp(zd);
  return e / (1.0 + e);
}

double bce_loss(double z, int label) {
  return std::max(z, 0.0) - z * label + std::log1p(std::exp(-std::abs(z)));
}

// mean/scale may be null for an identity input transform.
template <typename T>
double forward_pass(const Arch& a, const T* p, const float* input,
                    const float* mean, const float* scale, Workspace<T>& ws) {
  const std::size_t nin = static_cast<std::size_t>(a.in.count());
  if (mean != nullptr) {
    for (std::size_t i = 0; i < nin; ++i) {
      ws.in[i] = (static_cast<T>(input[i]) - static_cast<T>(mean[i])) *
                 static_cast<T>(scale[i]);
    }
  } else {
    for (std::size_t i = 0; i < nin; ++i) ws.in[i] = static_cast<T>(input[i]);
  }

  conv_forward(a, p + a.table[0].offset, p + a.table[1].offset, ws.in.data(),
               a.in, ws.c1.data(), a.c1);
  pool_forward(a, ws.c1.data(), a.c1, ws.p1.data(), a.p1, ws.am1.data());
  conv_forward(a, p + a.table[2].offset, p + a.table[3].offset, ws.p1.data(),
               a.p1, ws.c2.data(), a.c2);
  pool_forward(a, ws.c2.data(), a.c2, ws.p2.data(), a.p2, ws.am2.data());

  const T* w1 = p + a.table[4].offset;
  const T* b1 = p + a.table[5].offset;
  for (int j = 0; j < Arch::kFc1; ++j) {
    T acc = b1[j];
    const T* row = w1 + static_cast<std::size_t>(j) * a.flat;
    for (int i = 0; i < a.flat; ++i) acc += row[i] * ws.p2[i];
    ws.f1[j] = std::max(acc, T{0});
  }
  const T* w2 = p + a.table[6].offset;
  T z = p[a.table[7].offset];
  for (int j = 0; j < Arch::kFc1; ++j) z += w2[j] * ws.f1[j];
  return static_cast<double>(z);
}

// Fills the full parameter gradient for one sample; dz = dL/dlogit.
template <typename T>
void backward_pass(const Arch& a, const T* p, double dz_in, Workspace<T>& ws,
                   T* g) {
  const T dz = static_cast<T>(dz_in);
  const T* w2 = p + a.table[6].offset;
  T* g_fc2w = g + a.table[6].offset;
  g[a.table[7].offset] = dz;
  for (int j = 0; j < Arch::kFc1; ++j) {
    g_fc2w[j] = dz * ws.f1[j];
    ws.d_f1[j] = ws.f1[j] > T{0} ? dz * w2[j] : T{0};
  }

  const T* w1 = p + a.table[4].offset;
  T* g_fc1w = g + a.table[4].offset;
  T* g_fc1b = g + a.table[5].offset;
  std::fill(ws.d_p2.begin(), ws.d_p2.end(), T{});
  for (int j = 0; j < Arch::kFc1; ++j) {
    const T d = ws.d_f1[j];
    g_fc1b[j] = d;
    const T* row = w1 + static_cast<std::size_t>(j) * a.flat;
    T* grow = g_fc1w + static_cast<std::size_t>(j) * a.flat;
    for (int i = 0; i < a.flat; ++i) {
      grow[i] = d * ws.p2[i];
      ws.d_p2[i] += d * row[i];
    }
  }

  // Un-pool into the conv2 activation grid, then mask by its relu.
  std::fill(ws.d_c2.begin(), ws.d_c2.end(), T{});
  for (std::size_t i = 0; i < ws.d_p2.size(); ++i) {
    ws.d_c2[ws.am2[i]] += ws.d_p2[i];
  }
  for (std::size_t i = 0; i < ws.d_c2.size(); ++i) {
    if (!(ws.c2[i] > T{0})) ws.d_c2[i] = T{};
  }
  std::fill(ws.d_p1.begin(), ws.d_p1.end(), T{});
  conv_backward(a, p + a.table[2].offset, ws.p1.data(), a.p1, ws.d_c2.data(),
                a.c2, g + a.table[2].offset, g + a.table[3].offset,
                ws.d_p1.data(), false);

  std::fill(ws.d_c1.begin(), ws.d_c1.end(), T{});
  for (std::size_t i = 0; i < ws.d_p1.size(); ++i) {
    ws.d_c1[ws.am1[i]] += ws.d_p1[i];
  }
  for (std::size_t i = 0; i < ws.d_c1.size(); ++i) {
    if (!(ws.c1[i] > T{0})) ws.d_c1[i] = T{};
  }
  conv_backward(a, p + a.table[0].offset, ws.in.data(), a.in, ws.d_c1.data(),
                a.c1, g + a.table[0].offset, g + a.table[1].offset,
                static_cast<T*>(nullptr), true);
}

void check_view(const CnnConfig& cfg, const FeatureView& x) {
  const Arch a = make_arch(cfg);
  if (x.rows * x.cols != a.in.count() || x.data == nullptr) {
    std::ostringstream os;
    os << "feature tensor " << x.rows << "x" << x.cols
       << " does not match detector input " << cfg.input_rows << "x"
       << cfg.input_cols;
    throw ShapeError(os.str());
  }
}

std::string kind_to_string(InputKind k) {
  return k == InputKind::grid2d ? "grid2d" : "sequence1d";
}

InputKind kind_from_string(const std::string& s) {
  if (s == "grid2d") return InputKind::grid2d;
  if (s == "sequence1d") return InputKind::sequence1d;
  throw CorruptDataError("unknown detector input kind: " + s);
}

}  // namespace

void CnnConfig::validate() const {
  if (input_rows <= 0 || input_cols <= 0) {
    throw ConfigError("detector input dimensions must be positive");
  }
  if (kind == InputKind::sequence1d && input_cols != 1) {
    throw ConfigError("sequence detectors take single-column tensors");
  }
  make_arch(*this);  // throws if any layer collapses
}

CnnConfig CnnConfig::for_moving() { return {InputKind::grid2d, 128, 128}; }

CnnConfig CnnConfig::for_stationary() {
  return {InputKind::sequence1d, 128, 1};
}

CnnModel CnnModel::init(const CnnConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Arch a = make_arch(cfg);
  CnnModel m;
  m.cfg_ = cfg;
  m.init_seed_ = seed;
  m.params_.assign(a.param_count, 0.0f);
  SplitMix64 rng = derive_stream(seed, Stream::kInit);
  for (const ParamEntry& e : a.table) {
    if (e.fan_in == 0) continue;  // biases stay zero
    const double limit = std::sqrt(6.0 / e.fan_in);
    for (std::size_t i = 0; i < e.count; ++i) {
      m.params_[e.offset + i] =
          static_cast<float>(rng.uniform(-limit, limit));
    }
  }
  return m;
}

void CnnModel::set_input_scaling(std::vector<float> mean,
                                 std::vector<float> scale) {
  const Arch a = make_arch(cfg_);
  const std::size_t nin = static_cast<std::size_t>(a.in.count());
  if (mean.size() != nin || scale.size() != nin) {
    throw ShapeError("input scaling vectors must match the input size");
  }
  for (std::size_t i = 0; i < nin; ++i) {
    if (!std::isfinite(mean[i]) || !std::isfinite(scale[i]) ||
        !(scale[i] > 0.0f)) {
      throw DomainError("input scaling needs finite means and positive "
                        "scales");
    }
  }
  in_mean_ = std::move(mean);
  in_scale_ = std::move(scale);
}

void CnnModel::clear_input_scaling() {
  in_mean_.clear();
  in_scale_.clear();
}

double CnnModel::prob(const FeatureView& x) const {
  check_view(cfg_, x);
  const Arch a = make_arch(cfg_);
  Workspace<float> ws(a);
  const double z = forward_pass(a, params_.data(), x.data,
                                has_input_scaling() ? in_mean_.data() : nullptr,
                                has_input_scaling() ? in_scale_.data() : nullptr,
                                ws);
  return sigmoid(z);
}

Prediction CnnModel::predict(const FeatureView& x) const {
  Prediction p;
  p.prob_h1 = prob(x);
  p.decision = p.prob_h1 >= 0.5 ? 1 : 0;
  return p;
}

void CnnModel::save(const std::string& dir) const {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  const Arch a = make_arch(cfg_);
  json j;
  j["schema_version"] = 1;
  j["input_kind"] = kind_to_string(cfg_.kind);
  j["input_rows"] = cfg_.input_rows;
  j["input_cols"] = cfg_.input_cols;
  j["param_count"] = params_.size();
  j["init_seed"] = init_seed_;
  json layers = json::array();
  for (const ParamEntry& e : a.table) {
    layers.push_back(
        {{"name", e.name}, {"offset", e.offset}, {"count", e.count}});
  }
  j["layers"] = layers;
  j["input_scaling"] = has_input_scaling();

  std::ofstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw IoError("cannot write model manifest in " + dir);
  mf << j.dump(2) << "\n";

  std::ofstream pf(fs::path(dir) / "params.bin", std::ios::binary);
  if (!pf) throw IoError("cannot write model parameters in " + dir);
  pf.write(reinterpret_cast<const char*>(params_.data()),
           static_cast<std::streamsize>(params_.size() * sizeof(float)));
  if (!pf) throw IoError("short write of model parameters in " + dir);

  if (has_input_scaling()) {
    std::ofstream sf(fs::path(dir) / "scaling.bin", std::ios::binary);
    if (!sf) throw IoError("cannot write model input scaling in " + dir);
    sf.write(reinterpret_cast<const char*>(in_mean_.data()),
             static_cast<std::streamsize>(in_mean_.size() * sizeof(float)));
    sf.write(reinterpret_cast<const char*>(in_scale_.data()),
             static_cast<std::streamsize>(in_scale_.size() * sizeof(float)));
    if (!sf) throw IoError("short write of model input scaling in " + dir);
  }
}

CnnModel CnnModel::load(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw IoError("cannot open model manifest in " + dir);
  json j;
  try {
    mf >> j;
  } catch (const json::parse_error& e) {
    throw CorruptDataError(std::string("model manifest malformed: ") + e.what());
  }
  if (j.value("schema_version", 0) != 1) {
    throw VersionError("unsupported model schema version");
  }
  CnnModel m;
  try {
    m.cfg_.kind = kind_from_string(j.at("input_kind").get<std::string>());
    m.cfg_.input_rows = j.at("input_rows").get<int>();
    m.cfg_.input_cols = j.at("input_cols").get<int>();
    m.init_seed_ = j.at("init_seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw CorruptDataError(std::string("model manifest incomplete: ") + e.what());
  }
  m.cfg_.validate();
  const Arch a = make_arch(m.cfg_);
  const std::size_t expect = j.value("param_count", std::size_t{0});
  if (expect != a.param_count) {
    throw CorruptDataError("model manifest parameter count disagrees with "
                           "the declared architecture");
  }
  std::ifstream pf(fs::path(dir) / "params.bin", std::ios::binary);
  if (!pf) throw IoError("cannot open model parameters in " + dir);
  pf.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(pf.tellg());
  pf.seekg(0);
  if (bytes != a.param_count * sizeof(float)) {
    throw CorruptDataError("model parameter file truncated or oversized");
  }
  m.params_.resize(a.param_count);
  pf.read(reinterpret_cast<char*>(m.params_.data()),
          static_cast<std::streamsize>(bytes));
  if (!pf) throw CorruptDataError("model parameter file unreadable");

  if (j.value("input_scaling", false)) {
    std::ifstream sf(fs::path(dir) / "scaling.bin", std::ios::binary);
    if (!sf) throw IoError("cannot open model input scaling in " + dir);
    const std::size_t nin = static_cast<std::size_t>(a.in.count());
    sf.seekg(0, std::ios::end);
    if (static_cast<std::size_t>(sf.tellg()) != 2 * nin * sizeof(float)) {
      throw CorruptDataError("model input scaling file truncated or "
                             "oversized");
    }
    sf.seekg(0);
    std::vector<float> mean(nin), scale(nin);
    sf.read(reinterpret_cast<char*>(mean.data()),
            static_cast<std::streamsize>(nin * sizeof(float)));
    sf.read(reinterpret_cast<char*>(scale.data()),
            static_cast<std::streamsize>(nin * sizeof(float)));
    if (!sf) throw CorruptDataError("model input scaling file unreadable");
    try {
      m.set_input_scaling(std::move(mean), std::move(scale));
    } catch (const DomainError& e) {
      throw CorruptDataError(std::string("model input scaling invalid: ") +
                             e.what());
    }
  }
  return m;
}

namespace {

struct Adam {
  std::vector<float> m, v;
  long t = 0;

  explicit Adam(std::size_t n) : m(n, 0.0f), v(n, 0.0f) {}

  void step(std::vector<float>& p, const std::vector<float>& g,
            const TrainHyperparams& hp) {
    ++t;
    const float b1 = static_cast<float>(hp.beta1);
    const float b2 = static_cast<float>(hp.beta2);
    const float lr = static_cast<float>(hp.learning_rate);
    const float eps = static_cast<float>(hp.epsilon);
    const float bc1 =
        static_cast<float>(1.0 - std::pow(hp.beta1, static_cast<double>(t)));
    const float bc2 =
        static_cast<float>(1.0 - std::pow(hp.beta2, static_cast<double>(t)));
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0f - b1) * g[i];
      v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
      const float mhat = m[i] / bc1;
      const float vhat = v[i] / bc2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
};

void validate_set(const CnnConfig& cfg, const LabeledSet& s,
                  const char* which, bool require_both_classes) {
  if (s.x.size() != s.y.size()) {
    throw ShapeError(std::string(which) + " set features and labels differ in "
                                          "length");
  }
  bool has0 = false, has1 = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    check_view(cfg, s.x[i]);
    if (s.y[i] == 0) has0 = true;
    else if (s.y[i] == 1) has1 = true;
    else throw DomainError("labels must be 0 or 1");
  }
  if (require_both_classes && (!has0 || !has1)) {
    throw DomainError(std::string(which) +
                      " set must contain both classes");
  }
}

// Per-element mean and spread of the training inputs, accumulated in fixed
// order so the fit is identical for any thread count.  Spreads are floored
// at 1e-3 of the largest so bins that are constant across the training set
// cannot blow up to unbounded gains.
void fit_input_scaling(CnnModel& model, const LabeledSet& train, int nin) {
  const double inv_n = 1.0 / static_cast<double>(train.size());
  std::vector<double> mean(nin, 0.0), var(nin, 0.0);
  for (std::size_t s = 0; s < train.size(); ++s) {
    const float* x = train.x[s].data;
    for (int i = 0; i < nin; ++i) mean[i] += x[i];
  }
  for (int i = 0; i < nin; ++i) mean[i] *= inv_n;
  for (std::size_t s = 0; s < train.size(); ++s) {
    const float* x = train.x[s].data;
    for (int i = 0; i < nin; ++i) {
      const double d = x[i] - mean[i];
      var[i] += d * d;
    }
  }
  double sd_max = 0.0;
  for (int i = 0; i < nin; ++i) {
    var[i] = std::sqrt(var[i] * inv_n);
    sd_max = std::max(sd_max, var[i]);
  }
  if (sd_max == 0.0) {
    // Fully constant training inputs carry no signal to rescale.
    model.clear_input_scaling();
    return;
  }
  const double floor = 1e-3 * sd_max;
  std::vector<float> m32(nin), s32(nin);
  for (int i = 0; i < nin; ++i) {
    m32[i] = static_cast<float>(mean[i]);
    s32[i] = static_cast<float>(1.0 / std::max(var[i], floor));
  }
  model.set_input_scaling(std::move(m32), std::move(s32));
}

}  // namespace

TrainReport train_cnn(CnnModel& model, const LabeledSet& train,
                      const LabeledSet& val, const TrainHyperparams& hp,
                      std::uint64_t seed, int num_threads) {
  if (train.size() == 0) throw DomainError("training set is empty");
  if (hp.batch_size < 1 || hp.max_epochs < 1 || hp.patience < 1 ||
      !(hp.learning_rate > 0.0)) {
    throw ConfigError("invalid training hyperparameters");
  }
  validate_set(model.config(), train, "training", true);
  validate_set(model.config(), val, "validation", false);

  const Arch a = make_arch(model.config());
  fit_input_scaling(model, train, a.in.count());
  const float* in_mean =
      model.has_input_scaling() ? model.input_mean().data() : nullptr;
  const float* in_scale =
      model.has_input_scaling() ? model.input_scale().data() : nullptr;
  const int n = static_cast<int>(train.size());
  const int bs = std::min(hp.batch_size, n);

  std::vector<Workspace<float>> ws;
  ws.reserve(bs);
  for (int i = 0; i < bs; ++i) ws.emplace_back(a);
  std::vector<std::vector<float>> grad_slots(
      bs, std::vector<float>(a.param_count, 0.0f));
  std::vector<double> loss_slots(bs, 0.0);
  std::vector<float> batch_grad(a.param_count, 0.0f);
  Adam opt(a.param_count);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainReport report;
  std::vector<float> best_params = model.params();
  std::vector<float> prev_epoch_params = model.params();
  double best_acc = -1.0;
  int best_epoch = -1;
  int since_best = 0;

  for (int epoch = 0; epoch < hp.max_epochs; ++epoch) {
    prev_epoch_params = model.params();
    SplitMix64 shuffle_rng = derive_stream(seed, Stream::kShuffle, epoch);
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.next() % (i + 1));
      std::swap(order[i], order[j]);
    }

    double epoch_loss = 0.0;
    for (int start = 0; start < n; start += bs) {
      const int b = std::min(bs, n - start);
      parallel_for(b, num_threads, [&](int s) {
        const int idx = order[start + s];
        const double z = forward_pass(a, model.params().data(),
                                      train.x[idx].data, in_mean, in_scale,
                                      ws[s]);
        const int label = train.y[idx];
        loss_slots[s] = bce_loss(z, label);
        const double dz = sigmoid(z) - label;
        backward_pass(a, model.params().data(), dz, ws[s],
                      grad_slots[s].data());
      });
      // Fixed-order reduction keeps the update identical for any thread
      // count.
      for (int s = 0; s < b; ++s) epoch_loss += loss_slots[s];
      const float inv_b = 1.0f / static_cast<float>(b);
      for (std::size_t i = 0; i < a.param_count; ++i) {
        float acc = 0.0f;
        for (int s = 0; s < b; ++s) acc += grad_slots[s][i];
        batch_grad[i] = acc * inv_b;
      }
      opt.step(model.params(), batch_grad, hp);
    }
    epoch_loss /= n;

    if (!std::isfinite(epoch_loss)) {
      model.params() = prev_epoch_params;
      std::ostringstream os;
      os << "training loss became non-finite in epoch " << epoch
         << "; model restored to the previous epoch";
      throw DivergenceError(os.str());
    }
    report.train_loss.push_back(epoch_loss);
    ++report.epochs_run;

    if (val.size() > 0) {
      const int vn = static_cast<int>(val.size());
      std::vector<int> correct(vn, 0);
      parallel_for(vn, num_threads, [&](int i) {
        Workspace<float> vws(a);
        const double z = forward_pass(a, model.params().data(), val.x[i].data,
                                      in_mean, in_scale, vws);
        const int decision = sigmoid(z) >= 0.5 ? 1 : 0;
        correct[i] = decision == val.y[i] ? 1 : 0;
      });
      int hits = 0;
      for (int c : correct) hits += c;
      const double acc = static_cast<double>(hits) / vn;
      report.val_accuracy.push_back(acc);
      if (acc > best_acc) {
        best_acc = acc;
        best_epoch = epoch;
        best_params = model.params();
        since_best = 0;
      } else {
        ++since_best;
        if (since_best >= hp.patience) break;
      }
    }
  }

  if (val.size() > 0) {
    model.params() = best_params;
    report.best_val_accuracy = best_acc;
    report.best_epoch = best_epoch;
  } else {
    report.best_val_accuracy = 0.0;
    report.best_epoch = report.epochs_run - 1;
  }
  return report;
}

std::pair<double, std::vector<double>> cnn_loss_gradient(
    const CnnModel& model, const FeatureView& x, int label) {
  check_view(model.config(), x);
  if (label != 0 && label != 1) {
    throw DomainError("labels must be 0 or 1");
  }
  const Arch a = make_arch(model.config());
  const float* mean =
      model.has_input_scaling() ? model.input_mean().data() : nullptr;
  const float* scale =
      model.has_input_scaling() ? model.input_scale().data() : nullptr;
  std::vector<double> p(model.params().begin(), model.params().end());
  Workspace<double> ws(a);
  std::vector<double> grad(a.param_count, 0.0);
  const double z = forward_pass(a, p.data(), x.data, mean, scale, ws);
  backward_pass(a, p.data(), sigmoid(z) - label, ws, grad.data());
  return {bce_loss(z, label), std::move(grad)};
}

double max_gradient_error(const CnnModel& model, const FeatureView& x,
                          int label, int per_layer, double step,
                          std::uint64_t seed) {
  check_view(model.config(), x);
  if (!(step > 0.0) || per_layer < 1) {
    throw ConfigError("gradient check needs a positive step and sample count");
  }
  const Arch a = make_arch(model.config());
  const float* mean =
      model.has_input_scaling() ? model.input_mean().data() : nullptr;
  const float* scale =
      model.has_input_scaling() ? model.input_scale().data() : nullptr;
  std::vector<double> p(model.params().begin(), model.params().end());
  Workspace<double> ws(a);
  std::vector<double> analytic(a.param_count, 0.0);
  const double z = forward_pass(a, p.data(), x.data, mean, scale, ws);
  backward_pass(a, p.data(), sigmoid(z) - label, ws, analytic.data());

  SplitMix64 rng = derive_stream(seed, Stream::kSelfTest);
  double worst = 0.0;
  for (const ParamEntry& e : a.table) {
    std::vector<std::size_t> picks;
    if (e.count <= static_cast<std::size_t>(per_layer)) {
      picks.resize(e.count);
      std::iota(picks.begin(), picks.end(), std::size_t{0});
    } else {
      std::vector<char> seen(e.count, 0);
      while (picks.size() < static_cast<std::size_t>(per_layer)) {
        const std::size_t i = rng.next() % e.count;
        if (!seen[i]) {
          seen[i] = 1;
          picks.push_back(i);
        }
      }
    }
    for (std::size_t i : picks) {
      const std::size_t idx = e.offset + i;
      const double save = p[idx];
      p[idx] = save + step;
      const double lp =
          bce_loss(forward_pass(a, p.data(), x.data, mean, scale, ws), label);
      p[idx] = save - step;
      const double lm =
          bce_loss(forward_pass(a, p.data(), x.data, mean, scale, ws), label);
      p[idx] = save;
      const double numeric = (lp - lm) / (2.0 * step);
      const double denom =
          std::max({std::abs(analytic[idx]), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(analytic[idx] - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace bisense
