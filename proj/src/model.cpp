#include "ccf/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "ccf/error.hpp"
#include "ccf/nn.hpp"

namespace ccf {

void CcfArch::validate() const {
  if (feature_dim == 0 || hidden_dim == 0 || n_base_classes == 0)
    throw std::invalid_argument("model arch: all dimensions must be positive");
  if (!(activation_slope >= 0.0))
    throw std::invalid_argument("model arch: activation slope must be nonnegative");
}

namespace {

Matrix glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix w(fan_in, fan_out);
  double* p = w.data();
  for (std::size_t i = 0; i < w.size(); ++i) p[i] = rng.uniform(-limit, limit);
  return w;
}

}  // namespace

CcfModel::CcfModel(const CcfArch& arch, Rng& rng) : arch_(arch) {
  arch.validate();
  w1 = glorot(arch.feature_dim, arch.hidden_dim, rng);
  b1 = Vector(arch.hidden_dim);
  w2 = glorot(arch.hidden_dim, arch.n_base_classes, rng);
  b2 = Vector(arch.n_base_classes);
  w3 = glorot(arch.n_base_classes, arch.feature_dim, rng);
  b3 = Vector(arch.feature_dim);
}

Vector CcfModel::encode(const Vector& x) const {
  if (x.dim() != arch_.feature_dim)
    throw std::invalid_argument("encode: input dim " + std::to_string(x.dim()) +
                                ", model expects " + std::to_string(arch_.feature_dim));
  Vector h = vecmat(x, w1);
  axpy(1.0, b1, h);
  h = leaky_relu(h, arch_.activation_slope);
  Vector z = vecmat(h, w2);
  axpy(1.0, b2, z);
  if (arch_.encoder_output_activation) z = leaky_relu(z, arch_.activation_slope);
  return z;
}

Vector CcfModel::decode(const Vector& z) const {
  if (z.dim() != arch_.n_base_classes)
    throw std::invalid_argument("decode: latent dim " + std::to_string(z.dim()) +
                                ", model expects " + std::to_string(arch_.n_base_classes));
  Vector x = vecmat(z, w3);
  axpy(1.0, b3, x);
  if (arch_.decoder_output_activation) x = leaky_relu(x, arch_.activation_slope);
  return x;
}

Vector CcfModel::rectify(const Vector& x) const { return decode(encode(x)); }

Matrix CcfModel::encode_rows(const Matrix& x) const {
  if (x.cols() != arch_.feature_dim)
    throw std::invalid_argument("encode_rows: feature dim mismatch");
  Matrix h = matmul(x, w1);
  add_to_rows(h, b1);
  leaky_relu_inplace(h, arch_.activation_slope);
  Matrix z = matmul(h, w2);
  add_to_rows(z, b2);
  if (arch_.encoder_output_activation) leaky_relu_inplace(z, arch_.activation_slope);
  return z;
}

Matrix CcfModel::rectify_rows(const Matrix& x) const {
  Matrix z = encode_rows(x);
  Matrix out = matmul(z, w3);
  add_to_rows(out, b3);
  if (arch_.decoder_output_activation) leaky_relu_inplace(out, arch_.activation_slope);
  return out;
}

bool CcfModel::all_finite() const noexcept {
  return w1.all_finite() && b1.all_finite() && w2.all_finite() && b2.all_finite() &&
         w3.all_finite() && b3.all_finite();
}

std::vector<std::span<double>> CcfModel::param_views() {
  return {{w1.data(), w1.size()}, b1.span(), {w2.data(), w2.size()},
          b2.span(), {w3.data(), w3.size()}, b3.span()};
}

std::vector<std::span<const double>> CcfModel::param_views() const {
  return {{w1.data(), w1.size()}, b1.span(), {w2.data(), w2.size()},
          b2.span(), {w3.data(), w3.size()}, b3.span()};
}

std::vector<std::size_t> CcfModel::param_sizes(const CcfArch& a) {
  return {a.feature_dim * a.hidden_dim, a.hidden_dim,
          a.hidden_dim * a.n_base_classes, a.n_base_classes,
          a.n_base_classes * a.feature_dim, a.feature_dim};
}

std::vector<std::span<const double>> CcfGradients::views() const {
  return {{w1.data(), w1.size()}, b1.span(), {w2.data(), w2.size()},
          b2.span(), {w3.data(), w3.size()}, b3.span()};
}

namespace {

struct Forward {
  Matrix h_pre, h;    // batch x hidden
  Matrix z_pre, z;    // batch x classes (z_pre reused as z when no output act)
  Matrix d_pre, xhat; // batch x features
};

Forward run_forward(const CcfModel& m, const Matrix& x) {
  const auto& a = m.arch();
  Forward f;
  f.h_pre = matmul(x, m.w1);
  add_to_rows(f.h_pre, m.b1);
  f.h = f.h_pre;
  leaky_relu_inplace(f.h, a.activation_slope);
  f.z_pre = matmul(f.h, m.w2);
  add_to_rows(f.z_pre, m.b2);
  f.z = f.z_pre;
  if (a.encoder_output_activation) leaky_relu_inplace(f.z, a.activation_slope);
  f.d_pre = matmul(f.z, m.w3);
  add_to_rows(f.d_pre, m.b3);
  f.xhat = f.d_pre;
  if (a.decoder_output_activation) leaky_relu_inplace(f.xhat, a.activation_slope);
  return f;
}

void check_batch(const CcfModel& m, const Matrix& x,
                 std::span<const std::uint32_t> labels, const LossConfig& cfg) {
  if (x.rows() == 0) throw std::invalid_argument("ccf_loss: empty batch");
  if (x.cols() != m.arch().feature_dim)
    throw std::invalid_argument("ccf_loss: feature dim mismatch");
  if (labels.size() != x.rows())
    throw std::invalid_argument("ccf_loss: one label required per sample");
  if (!(cfg.temperature > 0.0))
    throw std::invalid_argument("ccf_loss: temperature must be positive");
  if (!(cfg.beta >= 0.0)) throw std::invalid_argument("ccf_loss: beta must be >= 0");
  for (std::uint32_t y : labels)
    if (y >= m.arch().n_base_classes)
      throw std::invalid_argument("ccf_loss: label " + std::to_string(y) +
                                  " outside the base-class latent range");
}

LossBreakdown breakdown_from(const Forward& f, const Matrix& x,
                             std::span<const std::uint32_t> labels,
                             const LossConfig& cfg) {
  const double inv_b = 1.0 / static_cast<double>(x.rows());
  LossBreakdown lb;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x.data()[i] - f.xhat.data()[i];
    lb.mse += d * d;
  }
  lb.mse *= inv_b;
  for (std::size_t i = 0; i < f.z.size(); ++i) lb.frob += f.z.data()[i] * f.z.data()[i];
  lb.frob *= inv_b;
  if (cfg.ce_enabled) {
    std::vector<double> scaled(f.z.cols());
    for (std::size_t r = 0; r < f.z.rows(); ++r) {
      const auto zrow = f.z.row(r);
      for (std::size_t c = 0; c < zrow.size(); ++c) scaled[c] = zrow[c] / cfg.temperature;
      lb.ce += log_sum_exp(scaled) - scaled[labels[r]];
    }
    lb.ce *= inv_b;
  }
  lb.total = lb.mse + lb.ce + cfg.beta * lb.frob;
  return lb;
}

}  // namespace

LossBreakdown ccf_loss(const CcfModel& model, const Matrix& x,
                       std::span<const std::uint32_t> labels, const LossConfig& config) {
  check_batch(model, x, labels, config);
  const Forward f = run_forward(model, x);
  return breakdown_from(f, x, labels, config);
}

std::pair<LossBreakdown, CcfGradients> ccf_loss_gradients(
    const CcfModel& model, const Matrix& x, std::span<const std::uint32_t> labels,
    const LossConfig& config) {
  check_batch(model, x, labels, config);
  const auto& a = model.arch();
  const Forward f = run_forward(model, x);
  const LossBreakdown lb = breakdown_from(f, x, labels, config);
  const double inv_b = 1.0 / static_cast<double>(x.rows());
  const double slope = a.activation_slope;

  // Reconstruction path.
  Matrix d_dpre(x.rows(), a.feature_dim);
  for (std::size_t i = 0; i < x.size(); ++i)
    d_dpre.data()[i] = 2.0 * inv_b * (f.xhat.data()[i] - x.data()[i]);
  if (a.decoder_output_activation)
    for (std::size_t i = 0; i < d_dpre.size(); ++i)
      d_dpre.data()[i] *= leaky_relu_grad(f.d_pre.data()[i], slope);

  CcfGradients g;
  g.w3 = matmul(transpose(f.z), d_dpre);
  g.b3 = column_sums(d_dpre);

  // Latent gradient: decoder, cross-entropy (with the 1/T chain factor)
  // and Frobenius contributions.
  Matrix d_z = matmul(d_dpre, transpose(model.w3));
  if (config.ce_enabled) {
    Matrix yhat = f.z;
    softmax_t_rows(yhat, config.temperature);
    const double scale = inv_b / config.temperature;
    for (std::size_t r = 0; r < d_z.rows(); ++r) {
      auto drow = d_z.row(r);
      const auto prow = yhat.row(r);
      for (std::size_t c = 0; c < drow.size(); ++c) drow[c] += scale * prow[c];
      drow[labels[r]] -= scale;
    }
  }
  const double frob_scale = 2.0 * config.beta * inv_b;
  for (std::size_t i = 0; i < d_z.size(); ++i) d_z.data()[i] += frob_scale * f.z.data()[i];

  if (a.encoder_output_activation)
    for (std::size_t i = 0; i < d_z.size(); ++i)
      d_z.data()[i] *= leaky_relu_grad(f.z_pre.data()[i], slope);

  g.w2 = matmul(transpose(f.h), d_z);
  g.b2 = column_sums(d_z);

  Matrix d_h = matmul(d_z, transpose(model.w2));
  for (std::size_t i = 0; i < d_h.size(); ++i)
    d_h.data()[i] *= leaky_relu_grad(f.h_pre.data()[i], slope);

  g.w1 = matmul(transpose(x), d_h);
  g.b1 = column_sums(d_h);

  return {lb, std::move(g)};
}

// --- checkpoint io -----------------------------------------------------------

namespace {

constexpr char kCkptMagic[4] = {'C', 'C', 'F', '1'};
constexpr std::uint32_t kCkptVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_tensor(std::string& out, std::span<const double> t) {
  for (double v : t) put_f64(out, v);
}

class CkptReader {
 public:
  CkptReader(const std::string& buf, std::string ctx) : buf_(buf), ctx_(std::move(ctx)) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() {
    const char* p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(p[i])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const char* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(p[i])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::size_t n) { return std::string(take(n), n); }
  void tensor(std::span<double> t) {
    for (double& v : t) v = f64();
  }
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  const char* take(std::size_t n) {
    if (pos_ + n > buf_.size()) throw FormatError(ctx_ + ": truncated checkpoint");
    const char* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }
  const std::string& buf_;
  std::string ctx_;
  std::size_t pos_ = 0;
};

nlohmann::ordered_json train_config_json(const TrainConfig& c) {
  return nlohmann::ordered_json{{"temperature", c.temperature},
                                {"beta", c.beta},
                                {"learning_rate", c.learning_rate},
                                {"batch_size", c.batch_size},
                                {"max_epochs", c.max_epochs},
                                {"eval_every", c.eval_every},
                                {"patience", c.patience},
                                {"val_episodes", c.val_episodes},
                                {"seed", c.seed},
                                {"hidden_dim", c.hidden_dim},
                                {"activation_slope", c.activation_slope},
                                {"encoder_output_activation", c.encoder_output_activation},
                                {"decoder_output_activation", c.decoder_output_activation},
                                {"ce_enabled", c.ce_enabled},
                                {"adam_beta1", c.adam_beta1},
                                {"adam_beta2", c.adam_beta2},
                                {"adam_epsilon", c.adam_epsilon}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.temperature = j.at("temperature").get<double>();
  c.beta = j.at("beta").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.max_epochs = j.at("max_epochs").get<std::size_t>();
  c.eval_every = j.at("eval_every").get<std::size_t>();
  c.patience = j.at("patience").get<std::size_t>();
  c.val_episodes = j.at("val_episodes").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.activation_slope = j.at("activation_slope").get<double>();
  c.encoder_output_activation = j.at("encoder_output_activation").get<bool>();
  c.decoder_output_activation = j.at("decoder_output_activation").get<bool>();
  c.ce_enabled = j.at("ce_enabled").get<bool>();
  c.adam_beta1 = j.at("adam_beta1").get<double>();
  c.adam_beta2 = j.at("adam_beta2").get<double>();
  c.adam_epsilon = j.at("adam_epsilon").get<double>();
  return c;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto& a = ckpt.model.arch();
  std::string out;
  out.append(kCkptMagic, 4);
  put_u32(out, kCkptVersion);
  put_u32(out, static_cast<std::uint32_t>(a.feature_dim));
  put_u32(out, static_cast<std::uint32_t>(a.hidden_dim));
  put_u32(out, static_cast<std::uint32_t>(a.n_base_classes));
  const std::uint8_t flags = (a.encoder_output_activation ? 1 : 0) |
                             (a.decoder_output_activation ? 2 : 0);
  out.push_back(static_cast<char>(flags));
  put_f64(out, a.activation_slope);
  for (auto view : ckpt.model.param_views()) put_tensor(out, view);

  nlohmann::ordered_json trailer;
  trailer["train_config"] = train_config_json(ckpt.train_config);
  trailer["boxcox"] = {{"lambda", ckpt.boxcox.lambda}, {"shift", ckpt.boxcox.shift}};
  const std::string trailer_str = trailer.dump();
  put_u64(out, trailer_str.size());
  out.append(trailer_str);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("no such file: " + path.string());
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string buf = std::move(ss).str();

  CkptReader r(buf, path.string());
  if (r.bytes(4) != std::string(kCkptMagic, 4))
    throw FormatError(path.string() + ": bad magic, not a checkpoint");
  const std::uint32_t version = r.u32();
  if (version != kCkptVersion)
    throw FormatError(path.string() + ": unsupported checkpoint version " +
                      std::to_string(version));

  CcfArch arch;
  arch.feature_dim = r.u32();
  arch.hidden_dim = r.u32();
  arch.n_base_classes = r.u32();
  const std::uint8_t flags = r.u8();
  arch.encoder_output_activation = (flags & 1) != 0;
  arch.decoder_output_activation = (flags & 2) != 0;
  arch.activation_slope = r.f64();
  arch.validate();

  Checkpoint ckpt;
  Rng dummy(0);
  ckpt.model = CcfModel(arch, dummy);
  for (auto view : ckpt.model.param_views()) r.tensor(view);
  if (!ckpt.model.all_finite())
    throw DataError(path.string() + ": checkpoint holds non-finite weights");

  const std::uint64_t trailer_len = r.u64();
  if (trailer_len != r.remaining())
    throw FormatError(path.string() + ": trailer length mismatch");
  nlohmann::json trailer;
  try {
    trailer = nlohmann::json::parse(r.bytes(trailer_len));
    ckpt.train_config = train_config_from_json(trailer.at("train_config"));
    ckpt.boxcox.lambda = trailer.at("boxcox").at("lambda").get<double>();
    ckpt.boxcox.shift = trailer.at("boxcox").at("shift").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad checkpoint trailer: " + e.what());
  }
  return ckpt;
}

}  // namespace ccf
