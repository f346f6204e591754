// Built with -mavx2 only; must not be entered unless the CPU reports AVX2.
#include "backend_avx2.hpp"
#include "interval_kernel.hpp"

namespace etsim::kernel::detail {

IntervalResult run_avx2(const KernelArgs& args, double* dev) { return dispatch_variant<Avx2>(args, dev); }

}  // namespace etsim::kernel::detail
