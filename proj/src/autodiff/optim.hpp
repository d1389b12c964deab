#pragma once

#include <span>

#include "autodiff/module.hpp"

BNAS_NS_BEGIN

/// buf <- momentum * buf + (grad + weight_decay * value); value <- value - lr * buf.
void sgd_step(std::span<Parameter* const> params, real lr, real momentum, real weight_decay);

enum class ScheduleKind { Cosine, OneCycle, Constant };

/// Learning rate as a function of the optimisation step in [0, total_steps].
///
/// cosine:    0.5 * base * (1 + cos(pi * step / total)), floored at 0.
/// one_cycle: linear warmup from base/initial_div to base over the first
///            warmup_fraction of the steps, then linear decay to base/final_div.
struct LrSchedule {
  ScheduleKind kind = ScheduleKind::Cosine;
  double base_lr = 0.025;
  long total_steps = 1;
  double warmup_fraction = 0.3;
  double initial_div = 25.0;
  double final_div = 100.0;

  double at(long step) const;
};

ScheduleKind parse_schedule(const std::string& name);
const char* schedule_name(ScheduleKind kind);

BNAS_NS_END
