#include <algorithm>
#include "net/flops.hpp"

#include <cstdio>
#include <sstream>

#include "common/error.hpp"

BNAS_NS_BEGIN

void FlopsReport::add(LayerCost c) {
  float_ops += c.float_ops;
  scale_ops += c.scale_ops;
  binary_ops += c.binary_ops;
  params_float += c.params_float;
  params_binary_bits += c.params_binary_bits;
  betas += c.betas;
  twin_float_ops += c.twin_float_ops;
  twin_params += c.twin_params;
  layers.push_back(std::move(c));
}

LayerCost binary_conv_cost(const std::string& name, int in, int out, int h, int w, const ConvGeometry& g,
                           int groups) {
  const double oh = g.out_h(h), ow = g.out_w(w), taps = g.taps();
  LayerCost c{name, "binary_conv"};
  c.binary_ops = oh * ow * out * (in / groups) * taps;
  c.params_binary_bits = static_cast<double>(out) * (in / groups) * taps;
  c.betas = out;
  // D: |A| channel mean; K: tap average; output: beta * K * popcount result.
  c.scale_ops = static_cast<double>(in) * h * w + oh * ow * taps + 2.0 * out * oh * ow;
  c.float_ops = c.scale_ops;
  c.twin_float_ops = c.binary_ops;
  c.twin_params = c.params_binary_bits;
  return c;
}

LayerCost float_conv_cost(const std::string& name, int in, int out, int h, int w, const ConvGeometry& g, int groups) {
  LayerCost c{name, "float_conv"};
  c.float_ops = static_cast<double>(g.out_h(h)) * g.out_w(w) * out * (in / groups) * g.taps();
  c.params_float = static_cast<double>(out) * (in / groups) * g.taps();
  c.twin_float_ops = c.float_ops;
  c.twin_params = c.params_float;
  return c;
}

LayerCost batchnorm_cost(const std::string& name, int channels, int h, int w, bool affine) {
  LayerCost c{name, "batchnorm"};
  c.float_ops = 2.0 * channels * h * w;
  c.params_float = affine ? 2.0 * channels : 0.0;
  c.twin_float_ops = c.float_ops;
  c.twin_params = c.params_float;
  return c;
}

LayerCost elementwise_cost(const std::string& name, const std::string& kind, double elements) {
  LayerCost c{name, kind};
  c.float_ops = elements;
  c.twin_float_ops = elements;
  return c;
}

LayerCost pool_cost(const std::string& name, int channels, int h, int w, int kernel, int stride, int padding) {
  const double oh = (h + 2 * padding - kernel) / stride + 1, ow = (w + 2 * padding - kernel) / stride + 1;
  return elementwise_cost(name, "pool", static_cast<double>(channels) * oh * ow * kernel * kernel);
}

LayerCost linear_cost(const std::string& name, int in, int out) {
  LayerCost c{name, "linear"};
  c.float_ops = static_cast<double>(in) * out + out;
  c.params_float = static_cast<double>(in) * out + out;
  c.twin_float_ops = c.float_ops;
  c.twin_params = c.params_float;
  return c;
}

namespace {

// Binary conv block: batchnorm in front, then the binary conv.
void binary_block(std::vector<LayerCost>& out, const std::string& name, int in, int o, int h, int w,
                  const ConvGeometry& g, int groups = 1) {
  out.push_back(batchnorm_cost(name + ".bn", in, h, w));
  out.push_back(binary_conv_cost(name + ".conv", in, o, h, w, g, groups));
}

}  // namespace

std::vector<LayerCost> edge_op_cost(const std::string& name, LayerType t, int channels, int h, int w, int stride,
                                    Precision precision) {
  std::vector<LayerCost> out;
  const ConvGeometry g = op_geometry(t, stride);
  const int oh = strided_extent(h, stride), ow = strided_extent(w, stride);
  switch (t) {
    case LayerType::Zeroise:
      break;
    case LayerType::MaxPool3x3:
    case LayerType::AvgPool3x3:
      out.push_back(pool_cost(name, channels, h, w, 3, stride, 1));
      break;
    case LayerType::SepConv3x3:
    case LayerType::SepConv5x5:
      if (precision == Precision::Binary) {
        out.push_back(batchnorm_cost(name + ".bn", channels, h, w));
        out.push_back(binary_conv_cost(name + ".depthwise", channels, channels, h, w, g, channels));
        out.push_back(binary_conv_cost(name + ".pointwise", channels, channels, oh, ow, ConvGeometry{}));
      } else {
        out.push_back(elementwise_cost(name + ".relu", "relu", static_cast<double>(channels) * h * w));
        out.push_back(float_conv_cost(name + ".depthwise", channels, channels, h, w, g, channels));
        out.push_back(float_conv_cost(name + ".pointwise", channels, channels, oh, ow, ConvGeometry{}));
        out.push_back(batchnorm_cost(name + ".bn", channels, oh, ow));
      }
      break;
    default:
      if (precision == Precision::Binary) {
        binary_block(out, name, channels, channels, h, w, g);
      } else {
        out.push_back(elementwise_cost(name + ".relu", "relu", static_cast<double>(channels) * h * w));
        out.push_back(float_conv_cost(name + ".conv", channels, channels, h, w, g));
        out.push_back(batchnorm_cost(name + ".bn", channels, oh, ow));
      }
  }
  return out;
}

FlopsReport count_flops(const NetworkSpec& spec) {
  const NetworkPlan plan = plan_network(spec);
  FlopsReport r;
  r.add(float_conv_cost("stem.conv", spec.in_channels, plan.stem_channels, spec.height, spec.width,
                        ConvGeometry{3, 3, 1, 1, 1}));
  r.add(batchnorm_cost("stem.bn", plan.stem_channels, spec.height, spec.width));

  auto preprocess = [&](const std::string& name, int in, int out, int h, int w, int stride) {
    const ConvGeometry g{1, 1, stride, 1, 0};
    if (spec.precision == Precision::Binary) {
      r.add(batchnorm_cost(name + ".bn", in, h, w));
      r.add(binary_conv_cost(name + ".conv", in, out, h, w, g));
    } else {
      r.add(elementwise_cost(name + ".relu", "relu", static_cast<double>(in) * h * w));
      r.add(float_conv_cost(name + ".conv", in, out, h, w, g));
      r.add(batchnorm_cost(name + ".bn", out, strided_extent(h, stride), strided_extent(w, stride)));
    }
  };

  for (const CellPlan& cp : plan.cells) {
    const std::string cell = "cell" + std::to_string(cp.index);
    preprocess(cell + ".pre0", cp.c_pp, cp.c, cp.h_pp, cp.w_pp, cp.reduction_prev ? 2 : 1);
    preprocess(cell + ".pre1", cp.c_p, cp.c, cp.h, cp.w, 1);
    const auto& nodes = spec.genotype.cell(cp.reduction);
    int edge = 0;
    for (const auto& n : nodes) {
      int live_terms = 0;
      for (const auto& e : n.edges) {
        // Sources 0/1 sit at the input resolution; intermediate nodes at the output one.
        const bool from_input = e.from < 2;
        const int stride = cp.reduction && from_input ? 2 : 1;
        const int h = from_input ? cp.h : cp.out_h, w = from_input ? cp.w : cp.out_w;
        const std::string name = cell + ".edge" + std::to_string(edge++) + "." + layer_name(e.op);
        for (auto& c : edge_op_cost(name, e.op, cp.c, h, w, stride, spec.precision)) r.add(std::move(c));
        live_terms += e.op != LayerType::Zeroise;
      }
      if (live_terms > 1)
        r.add(elementwise_cost(cell + ".node" + std::to_string(n.node) + ".add", "add",
                               (live_terms - 1.0) * cp.c * cp.out_h * cp.out_w));
    }
    if (spec.inter_cell_skip) {
      if (cp.reduction) r.add(pool_cost(cell + ".skip.pool", cp.c_p, cp.h, cp.w, 2, 2, cp.h % 2));
      r.add(elementwise_cost(cell + ".skip.add", "add",
                             static_cast<double>(std::max(cp.out_channels(), cp.c_p)) * cp.out_h * cp.out_w));
    }
  }
  const CellPlan& last = plan.cells.back();
  r.add(elementwise_cost("gap", "pool", static_cast<double>(plan.final_channels) * last.out_h * last.out_w));
  r.add(linear_cost("classifier", plan.final_channels, spec.num_classes));
  return r;
}

double memory_savings(const FlopsReport& report, const FlopsReport* reference) {
  const double twin = (reference ? reference : &report)->twin_params;
  const double bits = 32.0 * report.params_float + report.params_binary_bits + 32.0 * report.betas;
  BNAS_EXPECT(bits > 0, ContractViolation, "memory_savings: empty network");
  return 32.0 * twin / bits;
}

double inference_speedup(const FlopsReport& report, const FlopsReport* reference) {
  const double twin = (reference ? reference : &report)->twin_float_ops;
  const double eff = report.effective_flops();
  BNAS_EXPECT(eff > 0, ContractViolation, "inference_speedup: empty network");
  return twin / eff;
}

std::string FlopsReport::text() const {
  std::ostringstream os;
  char line[160];
  auto row = [&](const char* label, double v) {
    std::snprintf(line, sizeof line, "%-22s %18.0f\n", label, v);
    os << line;
  };
  row("float_ops", float_ops);
  row("  of which scaling", scale_ops);
  row("binary_ops", binary_ops);
  std::snprintf(line, sizeof line, "%-22s %18.1f\n", "effective_flops", effective_flops());
  os << line;
  row("params_float", params_float);
  row("params_binary_bits", params_binary_bits);
  row("beta_scalars", betas);
  row("twin_float_ops", twin_float_ops);
  row("twin_params", twin_params);
  std::snprintf(line, sizeof line, "%-22s %18.2fx\n", "memory_savings", memory_savings(*this));
  os << line;
  std::snprintf(line, sizeof line, "%-22s %18.2fx\n", "inference_speedup", inference_speedup(*this));
  os << line;
  return os.str();
}

std::string FlopsReport::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "layer,kind,float_ops,scale_ops,binary_ops,effective_flops,params_float,params_binary_bits,betas\n";
  for (const auto& c : layers)
    os << c.name << ',' << c.kind << ',' << c.float_ops << ',' << c.scale_ops << ',' << c.binary_ops << ','
       << c.effective_flops() << ',' << c.params_float << ',' << c.params_binary_bits << ',' << c.betas << '\n';
  return os.str();
}

BNAS_NS_END
