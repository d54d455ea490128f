#!/usr/bin/env python3
"""
nibblegemm Demo Model Generator

Writes the 7-layer demo character classifier (six 4-bit quantized
convolutions and a float SoftMax layer) with seeded random weights, so the
`infer` command and the model loader have a ready-made file to work with.
"""

import argparse
import logging
import sys
from pathlib import Path

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from nibblegemm.nn import build_demo_network, load_model, save_model

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def generate_demo_model(path: Path, seed: int) -> None:
    """Build, save and reload the demo network to confirm the file is usable."""
    net = build_demo_network(seed)
    save_model(net, path)

    reloaded = load_model(path)
    if reloaded != net:
        raise RuntimeError(f"Round trip of {path} changed the network")

    for index, (layer, shape) in enumerate(zip(net.layers, net.output_shapes())):
        logger.info(
            f"Layer {index}: {layer.kind.value} {layer.filters} filters "
            f"{layer.kernel[0]}x{layer.kernel[1]} stride {layer.stride[0]} -> {shape}"
        )
    logger.info(f"Parameters: {net.parameter_count()}")


def main():
    """Main function to generate the demo model."""
    parser = argparse.ArgumentParser(description="Write the seeded demo network as JSON")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--output",
        type=Path,
        default=Path(__file__).parent.parent / "data" / "demo_network.json",
    )
    args = parser.parse_args()

    generate_demo_model(args.output, args.seed)

    print(f"Demo model written to: {args.output}")
    print(f"File size: {args.output.stat().st_size / 1024:.1f} KB")


if __name__ == "__main__":
    main()
