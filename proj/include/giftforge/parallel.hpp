#pragma once

namespace gf {

// Worker-count resolution: explicit flag > GIFTFORGE_WORKERS > config file >
// all hardware threads. 0 means "use all".
int resolve_workers(int configured);

// Pins the OpenMP thread count for every kernel in this process.
void set_workers(int workers);

int env_workers();  // 0 when GIFTFORGE_WORKERS is unset or invalid

}  // namespace gf
