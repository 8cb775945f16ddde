#include "consroute/threshold.hpp"

#include <string>

#include "consroute/error.hpp"
#include "consroute/format.hpp"

namespace consroute {

ThresholdPair ThresholdPair::make(double tau1, double tau2) {
  if (!feasible(tau1, tau2)) {
    throw Error(ErrorKind::out_of_range, "infeasible threshold pair (" + fmt_real(tau1) + ", " +
                                             fmt_real(tau2) + "); need 1 >= tau1 > tau2 >= 0");
  }
  return {tau1, tau2};
}

}  // namespace consroute
