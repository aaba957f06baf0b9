"""Workflow coverage and the synthetic workload model behind uncoverage curves.

Each simulated workflow has a fixed number of steps; every step links to a
geometrically distributed number of kernels picked by preferential
attachment over a kernel universe, with usage counts carried across all
workflows of a replicate. A knowledge base of size ``s`` knows the ``s``
most used kernels of that replicate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Sequence

import numpy as np

from . import _backend
from .errors import InvalidArgumentError

DEFAULT_LAMBDA = 2.5
DEFAULT_P = 2 / 3


@dataclass(frozen=True)
class WorkloadParams:
    lam: float = DEFAULT_LAMBDA
    p: float = DEFAULT_P
    n_workflows: int = 200
    steps_per_workflow: int = 4
    universe_kernels: int = 100
    # Kernels enter the pool only when first drawn (a new one has weight lam).
    open_universe: bool = False

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise InvalidArgumentError(f"lambda must be > 0, got {self.lam}")
        _check_p(self.p)
        for name in ("n_workflows", "steps_per_workflow", "universe_kernels"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{name} must be positive")


@dataclass(frozen=True)
class UncoveragePoint:
    kb_kernel_count: int
    mean_uncoverage: float
    stddev: float = 0.0


def _check_p(p: float) -> None:
    if not 0.0 < p <= 1.0:
        raise InvalidArgumentError(f"p must be in (0, 1], got {p}")


def coverage(workflow_kernel_links: Collection[int], kb_identified_kernels: Collection[int]) -> float:
    """Fraction of a workflow's linked kernels that the knowledge base identifies."""
    links = set(workflow_kernel_links)
    if not links:
        raise InvalidArgumentError("workflow has no linked kernels")
    return len(links & set(kb_identified_kernels)) / len(links)


def sample_kernel_count(p: float, rng: np.random.Generator) -> int:
    """Geometric draw on {1, 2, ...}: P(k) = (1-p)^(k-1) p, mean 1/p."""
    _check_p(p)
    return int(rng.geometric(p))


def select_kernel_preferential(
    frequencies: Sequence[int], lam: float, rng: np.random.Generator
) -> int:
    """Index ``i`` with probability (f_i + lam) / sum_j (f_j + lam).

    The caller owns the frequencies and bumps the chosen one afterwards.
    """
    if len(frequencies) == 0:
        raise InvalidArgumentError("cannot select from an empty kernel set")
    if not lam > 0:
        raise InvalidArgumentError(f"lambda must be > 0, got {lam}")
    freqs = np.array(frequencies, dtype=np.int64)
    choices, _ = _backend.attach_draws(
        np.array([rng.random()]), freqs, len(freqs), float(lam), False
    )
    return int(choices[0])


def _frequency_ranks(freqs: np.ndarray) -> np.ndarray:
    # most used first; ties go to the lower kernel index
    order = np.lexsort((np.arange(len(freqs)), -freqs))
    ranks = np.empty(len(freqs), dtype=np.int64)
    ranks[order] = np.arange(len(freqs))
    return ranks


def simulate_replicate(
    params: WorkloadParams, kb_sizes: Sequence[int], rng: np.random.Generator, backend=None
) -> np.ndarray:
    """Mean uncoverage for each KB size over one generated workload."""
    kernels = backend or _backend
    n_steps = params.n_workflows * params.steps_per_workflow
    counts = rng.geometric(params.p, size=n_steps)
    uniforms = rng.random(int(counts.sum()))
    freqs = np.zeros(params.universe_kernels, dtype=np.int64)
    n_active = 0 if params.open_universe else params.universe_kernels
    choices, _ = kernels.attach_draws(uniforms, freqs, n_active, float(params.lam), params.open_universe)

    ranks = _frequency_ranks(freqs)
    per_workflow = counts.reshape(params.n_workflows, params.steps_per_workflow).sum(axis=1)
    bounds = np.concatenate(([0], np.cumsum(per_workflow)))
    link_ranks = []
    offsets = [0]
    for w in range(params.n_workflows):
        links = np.unique(choices[bounds[w] : bounds[w + 1]])
        link_ranks.append(ranks[links])
        offsets.append(offsets[-1] + len(links))
    return kernels.uncoverage_by_size(
        np.ascontiguousarray(np.concatenate(link_ranks), dtype=np.int64),
        np.asarray(offsets, dtype=np.int64),
        np.asarray(kb_sizes, dtype=np.int64),
    )


def simulate_uncoverage(
    params: WorkloadParams,
    kb_sizes: Sequence[int],
    seed: int = 0,
    replicates: int = 1,
    backend=None,
) -> list[UncoveragePoint]:
    """Uncoverage curve averaged over independent replicates.

    Replicate ``r`` draws from the ``r``-th child of ``SeedSequence(seed)``,
    so replicates can run in any order and still give the same result.
    """
    sizes = [int(s) for s in kb_sizes]
    if replicates < 1:
        raise InvalidArgumentError("replicates must be positive")
    if not sizes:
        raise InvalidArgumentError("kb_sizes is empty")
    if any(b < a for a, b in zip(sizes, sizes[1:])):
        raise InvalidArgumentError("kb_sizes must be ascending")
    if sizes[0] < 0 or sizes[-1] > params.universe_kernels:
        raise InvalidArgumentError(f"kb sizes must lie in [0, {params.universe_kernels}]")
    children = np.random.SeedSequence(seed).spawn(replicates)
    curves = np.array(
        [
            simulate_replicate(params, sizes, np.random.default_rng(child), backend)
            for child in children
        ]
    )
    mean = curves.mean(axis=0)
    std = curves.std(axis=0)
    return [UncoveragePoint(s, float(m), float(d)) for s, m, d in zip(sizes, mean, std)]
