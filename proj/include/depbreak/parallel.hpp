#pragma once

namespace depbreak {

/// Caps the number of OpenMP workers used by every parallel kernel. Values < 1
/// restore the runtime default. Results never depend on this setting.
void set_worker_count(int workers);
int worker_count();

}  // namespace depbreak
