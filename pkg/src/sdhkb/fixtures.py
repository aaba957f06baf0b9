"""Hand-built reference knowledge bases.

``node-classification`` is a graph node-classification workflow with four
steps (neighbour sampling, loss, gradient, inference). Inference needs only
8-bit precision, so its forward propagation kernel has a quantized FPGA
mapping that beats the GPU for it.

``convolution`` holds one step with two decompositions: a frequency-domain
pipeline (FFT, pointwise multiply, inverse FFT) and a sliding-window one.
"""

from __future__ import annotations

from .errors import UnknownEntityError
from .graph import KnowledgeBase, Workflow
from .perfmodel import CostModel

FIXTURES = ("node-classification", "convolution")


def _model(time: tuple[float, ...], energy: tuple[float, ...]) -> CostModel:
    return CostModel(time, energy)


def node_classification() -> tuple[KnowledgeBase, Workflow]:
    kb = KnowledgeBase()
    # features: access irregularity, precision (bits), compute/communication
    sampling = kb.add_step("sampling", [0.9, 32.0, 0.5])
    loss = kb.add_step("loss", [0.2, 32.0, 4.0])
    gradient = kb.add_step("gradient", [0.2, 32.0, 3.5])
    inference = kb.add_step("inference", [0.2, 8.0, 4.0])

    bfs = kb.add_kernel("BFS-tree sampling", identified=True)
    forward = kb.add_kernel("forward propagation", identified=True)
    backward = kb.add_kernel("backward propagation", identified=True)

    cpu = kb.add_hardware("CPU", {"cores": 32.0, "clock_ghz": 2.4}, 0.0)
    gpu = kb.add_hardware("GPU", {"sms": 80.0, "memory_gb": 32.0}, 5.0)
    fpga = kb.add_hardware("FPGA", {"luts": 1_182_000.0, "dsps": 6_840.0}, 40.0)

    kb.link_step_kernel(sampling, bfs, 0, 0, {"fanout": 10.0, "depth": 2.0})
    kb.link_step_kernel(loss, forward, 0, 0, {"batch": 512.0})
    kb.link_step_kernel(gradient, backward, 0, 0, {"batch": 512.0})
    kb.link_step_kernel(inference, forward, 0, 0, {"batch": 4096.0, "quantize_bits": 8.0})

    kb.link_kernel_hardware(bfs, cpu, [_model((1.0, 4.0, 0.0, 0.1), (20.0, 50.0, 0.0, 1.0))])
    kb.link_kernel_hardware(forward, cpu, [_model((6.0, 0.0, 0.05, 0.5), (150.0, 0.0, 1.0, 5.0))])
    kb.link_kernel_hardware(forward, gpu, [_model((1.5, 0.0, 0.0, 0.0), (90.0, 0.0, 0.0, 0.0))])
    # quantized datapath: cost grows with precision
    kb.link_kernel_hardware(forward, fpga, [_model((0.2, 0.0, 0.1, 0.0), (2.0, 0.0, 0.5, 0.0))])
    kb.link_kernel_hardware(backward, cpu, [_model((9.0, 0.0, 0.05, 0.5), (220.0, 0.0, 1.0, 5.0))])
    kb.link_kernel_hardware(backward, gpu, [_model((2.5, 0.0, 0.0, 0.0), (140.0, 0.0, 0.0, 0.0))])

    workflow = Workflow(
        id=0,
        states=[sampling, loss, gradient, inference],
        transitions=[(0, 1, "sampled"), (1, 2, "evaluated"), (2, 0, "continue"), (2, 3, "converged")],
        initial=0,
        terminal=frozenset({3}),
    )
    return kb, workflow


def convolution() -> KnowledgeBase:
    kb = KnowledgeBase()
    conv = kb.add_step("convolution", [0.1, 32.0, 2.0])
    fft = kb.add_kernel("FFT", identified=True)
    mult = kb.add_kernel("pointwise-multiply", identified=True)
    ifft = kb.add_kernel("inverse-FFT", identified=True)
    sliding = kb.add_kernel("sliding-window-dot-product", identified=True)
    cpu = kb.add_hardware("CPU", {"cores": 32.0}, 0.0)
    fpga = kb.add_hardware("FPGA-A", {"luts": 100_000.0}, 50.0)

    kb.link_step_kernel(conv, fft, 0, 0, {"n": 4096.0})
    kb.link_step_kernel(conv, mult, 0, 1, {"n": 4096.0})
    kb.link_step_kernel(conv, ifft, 0, 2, {"n": 4096.0})
    kb.link_step_kernel(conv, sliding, 1, 0, {"window": 9.0})

    kb.link_kernel_hardware(
        fft, fpga, [_model((1.0, 0.0, 0.02, 0.0), (5.0, 0.0, 0.1, 0.0)), _model((0.8, 0.0, 0.04, 0.0), (7.0, 0.0, 0.1, 0.0))]
    )
    kb.link_kernel_hardware(fft, cpu, [_model((3.0, 0.0, 0.0, 0.2), (60.0, 0.0, 0.0, 1.0))])
    kb.link_kernel_hardware(mult, fpga, [_model((0.3, 0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0))])
    kb.link_kernel_hardware(mult, cpu, [_model((0.5, 0.0, 0.0, 0.0), (10.0, 0.0, 0.0, 0.0))])
    kb.link_kernel_hardware(ifft, fpga, [_model((1.0, 0.0, 0.02, 0.0), (5.0, 0.0, 0.1, 0.0))])
    kb.link_kernel_hardware(ifft, cpu, [_model((3.0, 0.0, 0.0, 0.2), (60.0, 0.0, 0.0, 1.0))])
    kb.link_kernel_hardware(sliding, cpu, [_model((4.0, 2.0, 0.0, 0.0), (80.0, 10.0, 0.0, 0.0))])
    return kb


def build_fixture(name: str) -> KnowledgeBase:
    if name == "node-classification":
        return node_classification()[0]
    if name == "convolution":
        return convolution()
    raise UnknownEntityError(f"unknown fixture {name!r} (choose from {', '.join(FIXTURES)})")
