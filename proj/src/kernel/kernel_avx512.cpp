// Built with -mavx512f only; must not be entered unless the CPU reports AVX-512F.
#include "backend_avx512.hpp"
#include "interval_kernel.hpp"

namespace etsim::kernel::detail {

IntervalResult run_avx512(const KernelArgs& args, double* dev) { return dispatch_variant<Avx512>(args, dev); }

}  // namespace etsim::kernel::detail
