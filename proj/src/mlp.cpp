#include "lipirm/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lipirm {

std::size_t MlpModel::param_count(std::span<const std::size_t> sizes) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    n += sizes[l + 1] * sizes[l] + sizes[l + 1];
  return n;
}

std::size_t MlpModel::weight_offset(std::size_t l) const {
  std::size_t off = 0;
  for (std::size_t k = 0; k < l; ++k)
    off += layer_sizes[k + 1] * layer_sizes[k] + layer_sizes[k + 1];
  return off;
}

MlpModel MlpModel::create(std::vector<std::size_t> sizes, LabelKind kind, Rng &rng) {
  if (sizes.size() < 2 || sizes.back() != 1)
    throw std::invalid_argument("an MLP needs an input size and a scalar output");
  for (std::size_t s : sizes)
    if (s == 0)
      throw std::invalid_argument("layer sizes must be positive");
  MlpModel m;
  m.layer_sizes = std::move(sizes);
  m.kind = kind;
  m.params.assign(param_count(m.layer_sizes), 0.0);
  std::size_t off = 0;
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const std::size_t in = m.layer_sizes[l], out = m.layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t k = 0; k < in * out; ++k)
      m.params[off + k] = u(rng);
    off += in * out + out;
  }
  return m;
}

double forward(const MlpModel &model, std::span<const double> x, ForwardCache &cache) {
  if (x.size() != model.input_dim())
    throw std::invalid_argument("input has dimension " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(model.input_dim()));
  const std::size_t L = model.layer_count();
  cache.act.resize(L + 1);
  cache.act[0].assign(x.begin(), x.end());
  std::size_t off = 0;
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t in = model.layer_sizes[l], out = model.layer_sizes[l + 1];
    const double *w = model.params.data() + off;
    const double *b = w + in * out;
    const auto &a = cache.act[l];
    auto &z = cache.act[l + 1];
    z.resize(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      const double *row = w + o * in;
      for (std::size_t i = 0; i < in; ++i)
        s += row[i] * a[i];
      z[o] = (l + 1 < L) ? (s > 0.0 ? s : 0.0) : s;
    }
    off += in * out + out;
  }
  return cache.act[L][0];
}

double forward(const MlpModel &model, std::span<const double> x) {
  ForwardCache cache;
  return forward(model, x, cache);
}

double predict(const MlpModel &model, std::span<const double> x) {
  const double f = forward(model, x);
  return model.kind == LabelKind::Classification ? 1.0 / (1.0 + std::exp(-f)) : f;
}

void backward(const MlpModel &model, const ForwardCache &cache, double dout,
              std::span<double> grad) {
  const std::size_t L = model.layer_count();
  std::vector<double> delta{dout}, prev;
  for (std::size_t l = L; l-- > 0;) {
    const std::size_t in = model.layer_sizes[l], out = model.layer_sizes[l + 1];
    const std::size_t off = model.weight_offset(l);
    const double *w = model.params.data() + off;
    double *gw = grad.data() + off;
    double *gb = gw + in * out;
    const auto &a = cache.act[l];
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0)
        continue;
      gb[o] += d;
      double *grow = gw + o * in;
      for (std::size_t i = 0; i < in; ++i)
        grow[i] += d * a[i];
    }
    if (l == 0)
      break;
    prev.assign(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      if (d == 0.0)
        continue;
      const double *row = w + o * in;
      for (std::size_t i = 0; i < in; ++i)
        prev[i] += row[i] * d;
    }
    // ReLU derivative, taken as 0 at the kink.
    for (std::size_t i = 0; i < in; ++i)
      if (!(a[i] > 0.0))
        prev[i] = 0.0;
    delta.swap(prev);
  }
}

nlohmann::json to_json(const MlpModel &model) {
  return {{"layer_sizes", model.layer_sizes},
          {"kind", model.kind == LabelKind::Classification ? "classification" : "regression"},
          {"params", model.params}};
}

MlpModel model_from_json(const nlohmann::json &j) {
  MlpModel m;
  m.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  m.kind = j.at("kind").get<std::string>() == "classification" ? LabelKind::Classification
                                                               : LabelKind::Regression;
  m.params = j.at("params").get<std::vector<double>>();
  if (m.params.size() != MlpModel::param_count(m.layer_sizes))
    throw std::invalid_argument("parameter count does not match layer sizes");
  return m;
}

} // namespace lipirm
