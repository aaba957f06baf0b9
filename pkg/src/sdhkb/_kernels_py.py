"""Pure-Python twins of the compiled loops in ``_kernels.pyx``.

Arithmetic is performed in the same order as the compiled version so the
two backends agree bit for bit.
"""

from __future__ import annotations

import numpy as np


def attach_draws(uniforms, freqs, n_active, lam, grow):
    """Draw kernels by preferential attachment, one per uniform variate.

    Kernel ``j < n_active`` has weight ``freqs[j] + lam``. With ``grow`` set
    and spare capacity in ``freqs``, one extra unseen kernel carries weight
    ``lam`` and is minted when drawn. ``freqs`` is updated in place.
    Returns ``(choices, n_active)``.
    """
    cap = len(freqs)
    f = [int(v) for v in freqs]
    lam = float(lam)
    mass = sum(f[:n_active])
    choices = []
    for u in uniforms.tolist():
        can_grow = bool(grow) and n_active < cap
        total = float(mass) + lam * float(n_active + can_grow)
        target = u * total
        cum = 0.0
        chosen = -1
        for j in range(n_active):
            cum += float(f[j]) + lam
            if target < cum:
                chosen = j
                break
        if chosen < 0:
            if can_grow:
                chosen = n_active
                n_active += 1
            else:
                chosen = n_active - 1
        f[chosen] += 1
        mass += 1
        choices.append(chosen)
    freqs[:] = f
    return np.asarray(choices, dtype=np.int64), n_active


def uncoverage_by_size(link_ranks, offsets, kb_sizes):
    """Mean fraction of each workflow's links ranked at or beyond each KB size."""
    ranks = link_ranks.tolist()
    offs = offsets.tolist()
    out = []
    n_wf = len(offs) - 1
    for size in kb_sizes.tolist():
        acc = 0.0
        for w in range(n_wf):
            lo, hi = offs[w], offs[w + 1]
            missing = 0
            for j in range(lo, hi):
                if ranks[j] >= size:
                    missing += 1
            acc += float(missing) / float(hi - lo)
        out.append(acc / float(n_wf))
    return np.asarray(out, dtype=np.float64)
