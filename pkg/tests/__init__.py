"""
nibblegemm Test Suite

Unit tests, hypothesis property suites and integration tests for the
quantized GEMM core, the networks and the benchmark harness.
"""
