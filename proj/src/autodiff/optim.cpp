#include "autodiff/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/error.hpp"

BNAS_NS_BEGIN

void sgd_step(std::span<Parameter* const> params, real lr, real momentum, real weight_decay) {
  for (Parameter* p : params) {
    Tensor& v = p->value();
    const Tensor& g = p->grad();
    Tensor& buf = p->momentum;
    for (std::size_t i = 0; i < v.size(); ++i) {
      buf[i] = momentum * buf[i] + (g[i] + weight_decay * v[i]);
      v[i] -= lr * buf[i];
    }
  }
}

double LrSchedule::at(long step) const {
  BNAS_EXPECT(step >= 0 && step <= total_steps, ContractViolation,
              "lr_at: step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) + "]");
  const double t = total_steps > 0 ? static_cast<double>(step) / static_cast<double>(total_steps) : 0.0;
  switch (kind) {
    case ScheduleKind::Constant:
      return base_lr;
    case ScheduleKind::Cosine:
      return std::max(0.0, 0.5 * base_lr * (1.0 + std::cos(std::numbers::pi * t)));
    case ScheduleKind::OneCycle: {
      const double start = base_lr / initial_div, end = base_lr / final_div;
      if (t <= warmup_fraction) return start + (base_lr - start) * (t / warmup_fraction);
      return base_lr + (end - base_lr) * ((t - warmup_fraction) / (1.0 - warmup_fraction));
    }
  }
  return base_lr;
}

ScheduleKind parse_schedule(const std::string& name) {
  if (name == "cosine") return ScheduleKind::Cosine;
  if (name == "one_cycle") return ScheduleKind::OneCycle;
  if (name == "constant") return ScheduleKind::Constant;
  throw UsageError("unknown lr schedule '" + name + "' (expected cosine, one_cycle or constant)");
}

const char* schedule_name(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Cosine: return "cosine";
    case ScheduleKind::OneCycle: return "one_cycle";
    case ScheduleKind::Constant: return "constant";
  }
  return "?";
}

BNAS_NS_END
