#!/usr/bin/env python3
"""
Quick manual test for development.
Run this to quickly verify everything is working.
"""

import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))


def quick_test():
    """Quick test of core functionality."""
    print("nibblegemm Quick Test\n")

    try:
        # Test 1: Import check
        print("1. Testing imports...")
        import numpy as np

        from nibblegemm.bench import build_bench_config, verify_engines
        from nibblegemm.gemm import QuantizedMatrix, max_safe_depth, qgemm
        from nibblegemm.nn import (
            Tensor,
            argmax_agreement,
            build_demo_network,
            build_toy_classifier,
            network_forward,
            toy_inputs,
        )
        print("   All imports successful")

        # Test 2: Worked example
        print("\n2. Testing the corrected product...")
        w = QuantizedMatrix.from_integers([[3, 5]], scale=0.5, zero_point=1)
        x = QuantizedMatrix.from_integers([[2], [7]], scale=0.25, zero_point=2)
        result = qgemm(w, x)
        print(f"   [[3, 5]] x [[2], [7]] -> {result.values.tolist()} at scale {result.result_scale}")
        assert result.values.tolist() == [[20]]

        # Test 3: Overflow bounds
        print("\n3. Testing accumulator bounds...")
        for mode in ("signed16", "unsigned16_extended"):
            print(f"   {mode}: max depth {max_safe_depth(4, mode)}")

        # Test 4: Small verification grid
        print("\n4. Verifying engines on a small grid...")
        report = verify_engines(build_bench_config(heights=[8, 24], widths=[13], depths=[10, 145]))
        print(f"   {len(report.results) - len(report.failures)}/{len(report.results)} checks matched")
        assert report.passed

        # Test 5: Networks
        print("\n5. Testing networks...")
        toy = build_toy_classifier()
        agreement = argmax_agreement(toy, toy_inputs(count=30))
        print(f"   Toy classifier argmax agreement: {agreement:.0%}")

        net = build_demo_network(seed=0)
        image = Tensor(np.random.default_rng(0).uniform(size=net.input_shape))
        output = network_forward(net, image)
        print(f"   Demo network: {net.parameter_count()} parameters, top class {int(np.argmax(output))}")
        print(f"   Layer shapes: {net.output_shapes()}")

        print("\nAll checks passed! nibblegemm is ready to use.")

    except Exception as e:
        print(f"\nTest failed: {e}")
        import traceback
        traceback.print_exc()
        return False

    return True


if __name__ == "__main__":
    success = quick_test()
    sys.exit(0 if success else 1)
