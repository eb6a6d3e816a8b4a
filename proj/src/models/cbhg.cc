#include "pvc/models/cbhg.h"

namespace pvc {

Cbhg::Cbhg(const CbhgConfig& config, nn::ParameterSet& params, Rng& rng, std::string prefix)
    : config_(config), prefix_(std::move(prefix)) {
  const CbhgConfig& c = config;
  if (c.input_dim < 1 || c.bank_k < 1 || c.bank_filters < 1 || c.highway_units < 1 || c.gru_units < 1 ||
      c.output_dim < 1 || c.highway_layers < 0 || c.projection_filters < 1) {
    throw UsageError("invalid CBHG configuration");
  }
  const std::string& p = prefix_;
  for (int k = 1; k <= c.bank_k; ++k) {
    const int fan_in = k * c.input_dim;
    params.add_weight(p + ".bank" + std::to_string(k) + ".w", fan_in, c.bank_filters, fan_in, rng);
    params.add_weight(p + ".bank" + std::to_string(k) + ".b", 1, c.bank_filters, fan_in, rng);
  }
  const int bank_out = c.bank_k * c.bank_filters;
  params.add_weight(p + ".proj1.w", 3 * bank_out, c.projection_filters, 3 * bank_out, rng);
  params.add_weight(p + ".proj1.b", 1, c.projection_filters, 3 * bank_out, rng);
  params.add_weight(p + ".proj2.w", 3 * c.projection_filters, c.input_dim, 3 * c.projection_filters, rng);
  params.add_weight(p + ".proj2.b", 1, c.input_dim, 3 * c.projection_filters, rng);
  params.add_weight(p + ".pre.w", c.input_dim, c.highway_units, c.input_dim, rng);
  params.add_weight(p + ".pre.b", 1, c.highway_units, c.input_dim, rng);
  for (int i = 0; i < c.highway_layers; ++i) {
    const std::string n = p + ".highway" + std::to_string(i);
    params.add_weight(n + ".h.w", c.highway_units, c.highway_units, c.highway_units, rng);
    params.add_weight(n + ".h.b", 1, c.highway_units, c.highway_units, rng);
    params.add_weight(n + ".t.w", c.highway_units, c.highway_units, c.highway_units, rng);
    params.add_constant(n + ".t.b", 1, c.highway_units, -1.0f);
  }
  const int h = c.gru_units;
  for (const char* dir : {"fwd", "bwd"}) {
    const std::string n = p + ".gru_" + dir;
    params.add_weight(n + ".wi", c.highway_units, 3 * h, c.highway_units, rng);
    params.add_weight(n + ".bi", 1, 3 * h, h, rng);
    params.add_weight(n + ".wh", h, 3 * h, h, rng);
    params.add_weight(n + ".bh", 1, 3 * h, h, rng);
  }
  params.add_weight(p + ".out.w", 2 * h, c.output_dim, 2 * h, rng);
  params.add_weight(p + ".out.b", 1, c.output_dim, 2 * h, rng);
}

nn::Var Cbhg::forward(nn::Graph& g, nn::ParameterSet& params, nn::Var x, const nn::SeqLayout& layout) const {
  using namespace nn;
  const CbhgConfig& c = config_;
  const std::string& p = prefix_;
  if (g.value(x).cols() != c.input_dim) {
    throw DataError("CBHG expects input width " + std::to_string(c.input_dim) + ", got " +
                    std::to_string(g.value(x).cols()));
  }
  auto w = [&](const std::string& name) { return g.param(params.get(name)); };
  auto linear = [&](Var in, const std::string& name) {
    return add_row(g, matmul(g, in, w(name + ".w")), w(name + ".b"));
  };

  std::vector<Var> bank;
  for (int k = 1; k <= c.bank_k; ++k) {
    const std::string n = p + ".bank" + std::to_string(k);
    bank.push_back(relu(g, conv1d(g, x, w(n + ".w"), w(n + ".b"), layout, k)));
  }
  Var y = max_pool_time2(g, concat_cols(g, bank), layout);
  y = relu(g, conv1d(g, y, w(p + ".proj1.w"), w(p + ".proj1.b"), layout, 3));
  y = conv1d(g, y, w(p + ".proj2.w"), w(p + ".proj2.b"), layout, 3);
  y = add(g, y, x);
  y = linear(y, p + ".pre");
  for (int i = 0; i < c.highway_layers; ++i) {
    const std::string n = p + ".highway" + std::to_string(i);
    Var h = relu(g, linear(y, n + ".h"));
    Var t = sigmoid(g, linear(y, n + ".t"));
    y = add(g, mul(g, t, sub(g, h, y)), y);
  }
  auto direction = [&](const std::string& n, bool reverse) {
    Var proj = add_row(g, matmul(g, y, w(n + ".wi")), w(n + ".bi"));
    return gru(g, proj, w(n + ".wh"), w(n + ".bh"), layout, reverse);
  };
  Var fwd = direction(p + ".gru_fwd", false);
  Var bwd = direction(p + ".gru_bwd", true);
  return linear(concat_cols(g, {fwd, bwd}), p + ".out");
}

}  // namespace pvc
