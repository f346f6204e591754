#include "backend_scalar.hpp"
#include "interval_kernel.hpp"

namespace etsim::kernel::detail {

IntervalResult run_scalar(const KernelArgs& args, double* dev) { return dispatch_variant<Scalar16>(args, dev); }

}  // namespace etsim::kernel::detail
