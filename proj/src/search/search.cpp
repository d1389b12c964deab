#include "search/search.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "autodiff/checkpoint.hpp"
#include "autodiff/optim.hpp"
#include "common/error.hpp"

BNAS_NS_BEGIN

void SearchConfig::validate() const {
  BNAS_EXPECT(tau > 0, ContractViolation, "search: tau must be > 0");
  BNAS_EXPECT(lambda >= 0, ContractViolation, "search: lambda must be >= 0");
  BNAS_EXPECT(epochs >= 0, ContractViolation, "search: epochs must be >= 0");
  BNAS_EXPECT(batch >= 1, ContractViolation, "search: batch must be >= 1");
  BNAS_EXPECT(cells >= 3 && channels >= 1 && nodes >= 1, ContractViolation, "search: bad network size");
}

std::string SearchLog::csv() const {
  std::ostringstream os;
  os.precision(9);
  os << "epoch,train_loss,val_loss,entropy,div_coeff,param_op_fraction,grad_mag_sum,argmax_ops\n";
  for (const auto& r : records) {
    os << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.entropy << ',' << r.div_coeff << ','
       << r.param_op_fraction << ',' << r.grad_mag_sum << ',';
    for (std::size_t i = 0; i < r.argmax_ops.size(); ++i) os << (i ? ";" : "") << r.argmax_ops[i];
    os << '\n';
  }
  return os.str();
}

void SearchLog::write_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << csv();
}

double arch_entropy(const ArchParams& arch) {
  double h = 0;
  for (bool red : {false, true})
    for (int e = 0; e < arch.edges; ++e)
      for (double p : arch.probs(red, e))
        if (p > 0) h -= p * std::log(p);
  return h;
}

double diversity_coefficient(double lambda, double tau, double t) {
  BNAS_EXPECT(t >= 0, ContractViolation, "diversity coefficient: t must be >= 0");
  BNAS_EXPECT(tau > 0, ContractViolation, "diversity coefficient: tau must be > 0");
  return lambda * std::exp(-t / tau);
}

Var search_loss(const Var& ce, const ArchParams& arch, double lambda, double tau, double t) {
  const double coeff = diversity_coefficient(lambda, tau, t);
  if (coeff == 0) return ce;
  Var h = add(softmax_entropy_sum(arch.normal->var), softmax_entropy_sum(arch.reduce->var));
  return add(ce, scale(h, static_cast<real>(-coeff)));
}

std::vector<int> argmax_ops(const ArchParams& arch) {
  std::vector<int> out;
  for (bool red : {false, true})
    for (int e = 0; e < arch.edges; ++e) {
      const auto p = arch.probs(red, e);
      std::size_t best = 0;
      for (std::size_t o = 1; o < p.size(); ++o)
        if (p[o] > p[best]) best = o;
      out.push_back(static_cast<int>(arch.ops[best]));
    }
  return out;
}

double param_op_fraction(const ArchParams& arch) {
  const auto ids = argmax_ops(arch);
  if (ids.empty()) return 0;
  std::size_t n = 0;
  for (int id : ids) n += is_parameterized(static_cast<LayerType>(id));
  return static_cast<double>(n) / static_cast<double>(ids.size());
}

namespace {

void set_trainable(const std::vector<Parameter*>& params, bool on) {
  for (Parameter* p : params) p->var->requires_grad = on;
}

double checked(const Var& loss, const char* what, int epoch, long batch) {
  const double v = loss->value.item();
  if (!std::isfinite(v))
    throw NumericError(std::string("search diverged: non-finite ") + what + " at epoch " + std::to_string(epoch) +
                       ", batch " + std::to_string(batch));
  return v;
}

}  // namespace

SearchResult run_search(const SearchConfig& config, const Dataset& data, const SearchObserver& observer) {
  config.validate();
  const Dataset pool = subset(data, config.max_images, 0, config.seed);
  BNAS_EXPECT(pool.train.size() >= 2, InvalidArgument, "search: dataset is empty (need at least 2 training images)");

  SuperNetConfig net_cfg;
  net_cfg.cells = config.cells;
  net_cfg.channels = config.channels;
  net_cfg.nodes = config.nodes;
  net_cfg.num_classes = data.num_classes;
  net_cfg.in_channels = pool.train.channels;
  net_cfg.flags = config.flags;
  net_cfg.precision = config.precision;
  Rng init_rng(config.seed, "search-init");
  SuperNet net(net_cfg, init_rng);

  StateList state = net.state();
  const auto weights = state.select(ParamRole::Weight);
  const auto arch = state.select(ParamRole::Arch);

  SearchSplit split = search_split(pool.train.size(), config.seed);
  const std::size_t per_side = std::min(split.train.size(), split.val.size());
  const std::size_t batch = std::min<std::size_t>(config.batch, per_side);
  const long batches = static_cast<long>(per_side / batch);
  LrSchedule sched{ScheduleKind::Cosine, config.lr, std::max(1L, batches * config.epochs)};
  LrSchedule arch_sched{ScheduleKind::Cosine, config.arch_lr, sched.total_steps};

  Rng order_rng(config.seed, "search-order");
  Rng aug_rng(config.seed, "search-augment");
  const Augment aug{config.augment};
  const Context train_ctx{true};

  SearchResult result{{}, {}};
  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(split.train.begin(), split.train.end());
    order_rng.shuffle(split.val.begin(), split.val.end());
    double train_loss = 0, val_loss = 0, grad_mag = 0;
    for (long b = 0; b < batches; ++b, ++step) {
      const double t = epoch + static_cast<double>(b) / static_cast<double>(batches);
      const auto vi = std::span(split.val).subspan(b * batch, batch);
      const auto ti = std::span(split.train).subspan(b * batch, batch);

      // Architecture step: weights frozen, entropy-regularised loss on a validation batch.
      {
        set_trainable(weights, false);
        set_trainable(arch, true);
        Batch vb = make_batch(pool, pool.train, vi, aug, &aug_rng);
        Var ce = softmax_cross_entropy(net.forward(constant(std::move(vb.images)), train_ctx), vb.labels);
        Var loss = search_loss(ce, net.arch(), config.lambda, config.tau, t);
        val_loss += checked(ce, "validation loss", epoch, b);
        state.zero_grad();
        backward(loss);
        sgd_step(arch, static_cast<real>(arch_sched.at(step)), static_cast<real>(config.arch_momentum), 0);
      }
      // Weight step: architecture frozen, plain cross-entropy on a training batch.
      {
        set_trainable(weights, true);
        set_trainable(arch, false);
        Batch tb = make_batch(pool, pool.train, ti, aug, &aug_rng);
        Var ce = softmax_cross_entropy(net.forward(constant(std::move(tb.images)), train_ctx), tb.labels);
        train_loss += checked(ce, "training loss", epoch, b);
        state.zero_grad();
        backward(ce);
        grad_mag += conv_grad_magnitude(state);
        sgd_step(weights, static_cast<real>(sched.at(step)), static_cast<real>(config.momentum),
                 static_cast<real>(config.weight_decay));
      }
    }
    set_trainable(arch, true);
    SearchRecord r;
    r.epoch = epoch;
    r.train_loss = train_loss / static_cast<double>(batches);
    r.val_loss = val_loss / static_cast<double>(batches);
    r.entropy = arch_entropy(net.arch());
    r.div_coeff = diversity_coefficient(config.lambda, config.tau, epoch);
    r.argmax_ops = argmax_ops(net.arch());
    r.param_op_fraction = param_op_fraction(net.arch());
    r.grad_mag_sum = grad_mag / static_cast<double>(batches);
    result.log.records.push_back(r);
    if (observer) observer(r, net);
  }
  set_trainable(weights, true);
  set_trainable(arch, true);
  result.arch = net.arch().clone();
  return result;
}

void save_arch(const std::string& path, const ArchParams& arch, const Metadata& meta) {
  Tensor ops({static_cast<int>(arch.ops.size()), 1, 1, 1});
  for (std::size_t i = 0; i < arch.ops.size(); ++i) ops.data()[i] = static_cast<real>(arch.ops[i]);
  write_checkpoint(path, {{"arch.ops", ops}, {"arch.normal", arch.normal->value()}, {"arch.reduce", arch.reduce->value()}},
                   meta);
}

ArchParams load_arch(const std::string& path, Metadata* meta) {
  const auto entries = read_checkpoint(path, meta);
  const Tensor *ops = nullptr, *normal = nullptr, *reduce = nullptr;
  for (const auto& e : entries) {
    if (e.name == "arch.ops") ops = &e.tensor;
    else if (e.name == "arch.normal") normal = &e.tensor;
    else if (e.name == "arch.reduce") reduce = &e.tensor;
  }
  if (!ops || !normal || !reduce)
    throw ParseError(path + ": not an architecture checkpoint (needs arch.ops, arch.normal, arch.reduce)");
  std::vector<LayerType> list;
  for (real v : ops->span()) {
    const int id = static_cast<int>(v);
    if (id < 0 || id > static_cast<int>(LayerType::SepConv5x5) || static_cast<real>(id) != v)
      throw ParseError(path + ": arch.ops holds an invalid op id");
    list.push_back(static_cast<LayerType>(id));
  }
  const int k = static_cast<int>(list.size());
  if (normal->shape() != reduce->shape() || normal->shape().c != k || normal->shape().h != 1 || normal->shape().w != 1)
    throw ParseError(path + ": architecture tables do not match the op list");
  ArchParams a(list, normal->shape().n);
  a.normal->value() = *normal;
  a.reduce->value() = *reduce;
  return a;
}

BNAS_NS_END
