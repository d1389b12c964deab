#pragma once

#include <string>

// Built against the binary64 core; only standard types cross this boundary.
struct GradientVerdict {
  int cases = 0;
  int instances = 0;
  double worst = 0;
  std::string worst_case;
  bool ste_bitwise = false;
};

GradientVerdict run_gradient_criterion(int instances_per_case);
