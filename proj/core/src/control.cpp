// Control primitives are header-inline (hot path); this TU anchors the
// module so the library exposes a stable object for it.
#include "dcsim/control.hpp"

namespace dcsim {
namespace detail {
// Keep one out-of-line symbol so the archive member is never empty.
double control_module_anchor() { return kTwoPi; }
} // namespace detail
} // namespace dcsim
