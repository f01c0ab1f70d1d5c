"""Quantitative checks of the physics claims.

Order-parameter sweep across the transition, largest Lyapunov exponent,
loopback-fidelity profile and its maximum loopback time, single-site
detuning sensitivity, and domain statistics comparing candidate images
with the true imprinted state.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import ndimage

from .errors import DegenerateSeparation, DimMismatch
from . import lattice as lat
from .lattice import LatticeState, SignField, SimParams
from .glyphs import GlyphMask, layout_masks, imprint

FIDELITY_THRESHOLD = 0.99  # mask fidelity defining the maximum loopback time


@dataclass
class SweepResult:
    temperatures: list[float]
    m_mean: list[float]
    m_std: list[float]
    replicas: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("T,M_mean,M_std,replicas\n")
        for t, m, s in zip(self.temperatures, self.m_mean, self.m_std):
            buf.write(f"{t},{m},{s},{self.replicas}\n")
        return buf.getvalue()


@dataclass
class LoopbackProfile:
    taus: list[float]
    fidelity_mask: list[float]
    fidelity_full: list[float]
    tau_star: Optional[float]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("tau,fidelity_mask,fidelity_full\n")
        for t, fm, ff in zip(self.taus, self.fidelity_mask, self.fidelity_full):
            buf.write(f"{t},{fm},{ff}\n")
        return buf.getvalue()


@dataclass
class DomainStats:
    cluster_sizes: np.ndarray        # size of every same-sign cluster
    mean_domain_size: float
    correlations: np.ndarray         # two-point sign correlation, lags 1..N/2

    @property
    def n_clusters(self) -> int:
        return int(self.cluster_sizes.size)


def recovery_fidelity(a: SignField, b: SignField,
                      region: Optional[GlyphMask] = None) -> float:
    """Fraction of sites where the two sign fields agree."""
    if a.bits.shape != b.bits.shape:
        raise DimMismatch("sign fields have different dimensions")
    agree = a.bits == b.bits
    if region is not None:
        if region.bits.shape != a.bits.shape:
            raise DimMismatch("region mask has different dimensions")
        agree = agree[region.bits]
    return float(np.mean(agree))


def sweep_order_parameter(t_list: Sequence[float], replicas: int, seed: int,
                          base: SimParams = SimParams(),
                          sample_time: float = 100.0) -> SweepResult:
    """Time-averaged order parameter at each temperature.

    Each replica thermalizes independently, then M is sampled every 1 t.u.
    for `sample_time` further time units and averaged; snapshots near T_c
    fluctuate too much to use directly.
    """
    if replicas < 3:
        raise ValueError("need at least 3 replicas")
    means, stds = [], []
    steps_per_tu = int(round(1.0 / base.h))
    n_samples = int(round(sample_time))
    for idx, t in enumerate(t_list):
        params = replace(base, temperature=float(t))
        ms = []
        for r in range(replicas):
            state = lat.thermalize(params, seed + 1000 * idx + r)
            acc = 0.0
            for _ in range(n_samples):
                state = lat.integrate(state, steps_per_tu)
                acc += lat.order_parameter(state)
            ms.append(acc / n_samples)
        means.append(float(np.mean(ms)))
        stds.append(float(np.std(ms)))
    return SweepResult(list(map(float, t_list)), means, stds, replicas)


def _separation(a: LatticeState, b: LatticeState) -> float:
    du = a.u - b.u
    dp = a.p - b.p
    return math.sqrt(float(np.sum(du * du) + np.sum(dp * dp)))


def estimate_lyapunov(params: SimParams, seed: int, horizon: float = 200.0,
                      delta0: float = 1e-8,
                      force_override: Optional[Callable] = None) -> float:
    """Largest Lyapunov exponent by two-trajectory renormalization.

    A thermalized state is cloned, one coordinate is perturbed by delta0,
    both copies are evolved, and the separation is rescaled back to delta0
    every 1 t.u.; the mean log expansion rate is returned.  force_override
    replaces the lattice force (test hook for non-chaotic controls).
    """
    if horizon < 100.0:
        raise ValueError("horizon must be >= 100 t.u.")
    if not (0.0 < delta0 <= 1e-8):
        raise ValueError("delta0 must be in (0, 1e-8]")
    ref = lat.thermalize(params, seed)
    pert = ref.copy()
    pert.u[0, 0] += delta0
    steps_per_tu = int(round(1.0 / params.h))
    intervals = int(round(horizon))
    log_sum = 0.0
    step = _step_with_force(force_override) if force_override else None
    for _ in range(intervals):
        if step is None:
            ref = lat.integrate(ref, steps_per_tu)
            pert = lat.integrate(pert, steps_per_tu)
        else:
            ref = step(ref, steps_per_tu)
            pert = step(pert, steps_per_tu)
        d = _separation(ref, pert)
        if d == 0.0:
            raise DegenerateSeparation("trajectories collapsed to zero separation")
        log_sum += math.log(d / delta0)
        scale = delta0 / d
        pert.u = ref.u + (pert.u - ref.u) * scale
        pert.p = ref.p + (pert.p - ref.p) * scale
    return log_sum / horizon


def _step_with_force(force: Callable) -> Callable:
    def run(state: LatticeState, steps: int) -> LatticeState:
        u, p, h = state.u, state.p, state.params.h
        for _ in range(steps):
            p_half = p + 0.5 * h * force(u)
            u = u + h * p_half
            p = p_half + 0.5 * h * force(u)
        return LatticeState(u, p, state.t + steps * h, state.params)
    return run


def loopback_once(isk: LatticeState, tau_steps: int) -> LatticeState:
    """Evolve forward tau_steps, reverse momenta, evolve back the same count."""
    fwd = lat.integrate(isk, tau_steps)
    return lat.integrate(lat.time_reverse(fwd), tau_steps)


def estimate_loopback(params: SimParams, seed: int, tau_grid: Sequence[float],
                      sk, deform_seed: int) -> LoopbackProfile:
    """Recovery fidelity after forward-then-backward evolution at each tau.

    tau_star is the largest grid tau whose mask-region fidelity still
    reaches the 0.99 threshold.
    """
    taus = [float(t) for t in tau_grid]
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("tau grid must be strictly increasing")
    mask = layout_masks(sk, params.n, deform_seed)
    isk = imprint(lat.thermalize(params, seed), mask)
    target = lat.sign_field(isk)
    fid_mask, fid_full = [], []
    for tau in taus:
        steps = int(round(tau / params.h))
        back = loopback_once(isk, steps)
        recovered = lat.sign_field(back)
        fid_mask.append(recovery_fidelity(target, recovered, mask))
        fid_full.append(recovery_fidelity(target, recovered))
    passing = [t for t, f in zip(taus, fid_mask) if f >= FIDELITY_THRESHOLD]
    return LoopbackProfile(taus, fid_mask, fid_full, max(passing) if passing else None)


def detune_experiment(state_fs: LatticeState, site: tuple[int, int],
                      delta: float, tau_steps: Optional[int] = None) -> SignField:
    """Perturb one coordinate of the final state, then integrate back.

    Returns the recovered sign field; compare against the stored ISK to
    measure how completely the image is lost.
    """
    i, j = site
    if not (0 <= i < state_fs.params.n and 0 <= j < state_fs.params.n):
        raise ValueError("site out of range")
    steps = state_fs.params.tau_steps if tau_steps is None else tau_steps
    detuned = state_fs.copy()
    detuned.u[i, j] += delta
    return lat.sign_field(lat.integrate(lat.time_reverse(detuned), steps))


def _periodic_label(plus: np.ndarray) -> np.ndarray:
    """4-connected labeling of True regions with periodic wrap-around."""
    labels, n = ndimage.label(plus)
    if n == 0:
        return labels
    parent = list(range(n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for a, b in zip(labels[0, :], labels[-1, :]):
        if a and b:
            union(int(a), int(b))
    for a, b in zip(labels[:, 0], labels[:, -1]):
        if a and b:
            union(int(a), int(b))
    remap = np.array([0] + [find(x) for x in range(1, n + 1)])
    return remap[labels]


def domain_size_stats(field: SignField) -> DomainStats:
    """Cluster sizes of same-sign regions and two-point sign correlations."""
    sizes = []
    for value in (True, False):
        labels = _periodic_label(field.bits == value)
        if labels.max() > 0:
            counts = np.bincount(labels.ravel())[1:]
            sizes.extend(int(c) for c in counts if c > 0)
    sizes = np.array(sorted(sizes), dtype=np.int64)
    s = np.where(field.bits, 1.0, -1.0)
    n = field.n
    lags = range(1, n // 2 + 1)
    corr = []
    for lag in lags:
        c = 0.5 * (np.mean(s * np.roll(s, lag, axis=0)) +
                   np.mean(s * np.roll(s, lag, axis=1)))
        corr.append(float(c))
    return DomainStats(sizes, float(np.mean(sizes)) if sizes.size else 0.0,
                       np.array(corr))
