#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ccf/matrix.hpp"
#include "ccf/model.hpp"
#include "ccf/rng.hpp"

namespace ccftest {

// Central finite differences of the total loss over every parameter,
// independent of the analytic backward path.
inline ccf::CcfGradients finite_difference_gradients(ccf::CcfModel model,
                                                     const ccf::Matrix& x,
                                                     const std::vector<std::uint32_t>& y,
                                                     const ccf::LossConfig& cfg,
                                                     double h = 1e-5) {
  ccf::CcfGradients g;
  g.w1 = ccf::Matrix(model.w1.rows(), model.w1.cols());
  g.b1 = ccf::Vector(model.b1.dim());
  g.w2 = ccf::Matrix(model.w2.rows(), model.w2.cols());
  g.b2 = ccf::Vector(model.b2.dim());
  g.w3 = ccf::Matrix(model.w3.rows(), model.w3.cols());
  g.b3 = ccf::Vector(model.b3.dim());

  auto params = model.param_views();
  std::vector<std::span<double>> grads = {
      {g.w1.data(), g.w1.size()}, g.b1.span(), {g.w2.data(), g.w2.size()},
      g.b2.span(), {g.w3.data(), g.w3.size()}, g.b3.span()};

  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double saved = params[t][i];
      params[t][i] = saved + h;
      const double up = ccf::ccf_loss(model, x, y, cfg).total;
      params[t][i] = saved - h;
      const double down = ccf::ccf_loss(model, x, y, cfg).total;
      params[t][i] = saved;
      grads[t][i] = (up - down) / (2.0 * h);
    }
  }
  return g;
}

inline double gradient_rel_error(const ccf::CcfGradients& a, const ccf::CcfGradients& b) {
  double worst = 0.0;
  auto va = a.views();
  auto vb = b.views();
  for (std::size_t t = 0; t < va.size(); ++t)
    for (std::size_t i = 0; i < va[t].size(); ++i) {
      const double denom = std::max({1e-6, std::abs(va[t][i]), std::abs(vb[t][i])});
      worst = std::max(worst, std::abs(va[t][i] - vb[t][i]) / denom);
    }
  return worst;
}

// Random small model + batch for gradient checking. Draws every
// architecture knob, including activation placement, from rng.
struct RandomCase {
  ccf::CcfModel model;
  ccf::Matrix x;
  std::vector<std::uint32_t> y;
  ccf::LossConfig cfg;
};

inline RandomCase random_gradient_case(ccf::Rng& rng) {
  ccf::CcfArch arch;
  arch.feature_dim = 2 + rng.below(7);       // <= 8
  arch.hidden_dim = 2 + rng.below(15);       // <= 16
  arch.n_base_classes = 2 + rng.below(4);    // <= 5
  arch.activation_slope = rng.uniform(0.0, 0.3);
  arch.encoder_output_activation = rng.below(2) == 1;
  arch.decoder_output_activation = rng.below(2) == 1;

  RandomCase c{ccf::CcfModel(arch, rng), {}, {}, {}};
  const std::size_t batch = 1 + rng.below(4);
  c.x = ccf::Matrix(batch, arch.feature_dim);
  for (std::size_t i = 0; i < c.x.size(); ++i) c.x.data()[i] = rng.uniform(-2.0, 2.0);
  c.y.resize(batch);
  for (auto& label : c.y)
    label = static_cast<std::uint32_t>(rng.below(arch.n_base_classes));
  c.cfg.temperature = rng.uniform(0.02, 2.0);
  c.cfg.beta = rng.uniform(0.0, 0.2);
  c.cfg.ce_enabled = rng.below(4) != 0;  // mostly on
  return c;
}

// Unique scratch directory under the current working dir, removed on
// destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    path_ = std::filesystem::current_path() / ("scratch_" + tag);
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace ccftest
