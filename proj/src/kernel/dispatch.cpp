#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "etsim/kernel.hpp"
#include "interval_kernel.hpp"

namespace etsim::kernel {

namespace {

bool cpu_has(Isa isa) noexcept {
#if defined(__x86_64__) || defined(__i386__)
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return __builtin_cpu_supports("avx2");
    case Isa::avx512: return __builtin_cpu_supports("avx512f");
  }
  return false;
#else
  return isa == Isa::scalar;
#endif
}

bool compiled_in(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return true;
#ifdef ETSIM_HAVE_AVX2
    case Isa::avx2: return true;
#endif
#ifdef ETSIM_HAVE_AVX512
    case Isa::avx512: return true;
#endif
    default: return false;
  }
}

void validate(const IntervalRequest& rq) {
  if (rq.n_agents == 0) throw std::invalid_argument("interval kernel: n_agents must be >= 1");
  if (!(rq.dt > 0.0) || !std::isfinite(rq.dt)) throw std::invalid_argument("interval kernel: dt must be finite and > 0");
  if (rq.max_steps == 0 || rq.max_steps > kMaxKernelSteps)
    throw std::invalid_argument("interval kernel: max_steps out of range");
  if (rq.event_triggered) {
    if (!(rq.threshold > 0.0) || !std::isfinite(rq.threshold))
      throw std::invalid_argument("interval kernel: threshold must be finite and > 0");
  } else if (rq.period_steps == 0) {
    throw std::invalid_argument("interval kernel: period_steps must be >= 1");
  }
}

}  // namespace

#ifndef ETSIM_HAVE_AVX2
IntervalResult detail::run_avx2(const KernelArgs&, double*) { throw std::logic_error("AVX2 kernel not built"); }
#endif
#ifndef ETSIM_HAVE_AVX512
IntervalResult detail::run_avx512(const KernelArgs&, double*) { throw std::logic_error("AVX-512 kernel not built"); }
#endif

bool isa_available(Isa isa) noexcept { return compiled_in(isa) && cpu_has(isa); }

Isa best_isa() noexcept {
  static const Isa best = [] {
    if (isa_available(Isa::avx512)) return Isa::avx512;
    if (isa_available(Isa::avx2)) return Isa::avx2;
    return Isa::scalar;
  }();
  return best;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::avx512}) {
    if (isa_available(isa)) out.push_back(isa);
  }
  return out;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::avx512: return "avx512";
  }
  return "unknown";
}

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  if (name == "avx512") return Isa::avx512;
  throw std::invalid_argument("unknown ISA '" + std::string(name) + "' (expected scalar, avx2 or avx512)");
}

IntervalResult run_interval(Isa isa, const IntervalRequest& request, std::span<double> scratch) {
  validate(request);
  if (scratch.size() < padded_agents(request.n_agents))
    throw std::invalid_argument("interval kernel: scratch buffer too small");
  if (!isa_available(isa))
    throw std::invalid_argument("interval kernel: ISA " + std::string(isa_name(isa)) + " not available");

  const KernelArgs args{request, std::sqrt(request.dt), 0.5 * request.dt, -2.0 / request.dt};
  switch (isa) {
    case Isa::avx512: return detail::run_avx512(args, scratch.data());
    case Isa::avx2: return detail::run_avx2(args, scratch.data());
    case Isa::scalar: break;
  }
  return detail::run_scalar(args, scratch.data());
}

IntervalResult run_interval(const IntervalRequest& request) {
  std::vector<double> scratch(padded_agents(request.n_agents == 0 ? 1 : request.n_agents));
  return run_interval(best_isa(), request, scratch);
}

}  // namespace etsim::kernel
