#include <benchmark/benchmark.h>

// Own entry point: the distribution's benchmark_main archive carries LTO bytecode
// from a different compiler patch release.
BENCHMARK_MAIN();
