#pragma once

namespace csplat {

// Worker-count control shared by all parallel kernels. The cap comes from
// the CONIC_SPLAT_THREADS environment variable (0 = auto) and can be
// overridden programmatically. Kernel outputs never depend on the value.
int thread_cap();
void set_thread_cap(int cap);
int effective_threads();

} // namespace csplat
