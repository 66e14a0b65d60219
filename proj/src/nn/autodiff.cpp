#include "msr/nn/autodiff.hpp"

namespace msr::nn {
namespace {

thread_local bool t_grad_enabled = true;
#ifdef NDEBUG
thread_local bool t_numeric_checks = false;
#else
thread_local bool t_numeric_checks = true;
#endif

}  // namespace

bool grad_enabled() noexcept { return t_grad_enabled; }
void set_grad_enabled(bool on) noexcept { t_grad_enabled = on; }
bool numeric_checks_enabled() noexcept { return t_numeric_checks; }
void set_numeric_checks(bool on) noexcept { t_numeric_checks = on; }

}  // namespace msr::nn
