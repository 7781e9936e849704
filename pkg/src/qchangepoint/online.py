"""Measure-as-you-go strategies on the qubit sequence.

Two online policies: measure every particle in the computational basis and
guess the first click (basic local), or run the per-step optimal two-state
measurement between the default and mutated states with Bayesian posterior
updates in between (greedy).  A seeded, counter-based Monte Carlo harness
estimates their success probabilities; for small n an exact walk of the
binary outcome tree provides the oracle value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional

import numpy as np

from .exceptions import ImpossibleOutcomeError
from .rng import CounterRng, trial_seed_array, uniform_array

__all__ = [
    "PosteriorDistribution",
    "TwoOutcomeMeasurement",
    "TrialRecord",
    "GreedyPriors",
    "qubit_pair",
    "basic_local_closed_form",
    "simulate_basic_local",
    "greedy_priors",
    "helstrom_measurement",
    "bayes_update",
    "simulate_greedy_trial",
    "exact_greedy_enumeration",
    "monte_carlo",
    "iter_trial_records",
]

_ENUMERATION_MAX_N = 12
_CHUNK_SIZE = 32768


def _check_overlap(c: float) -> None:
    if not 0.0 <= c < 1.0:
        raise ValueError(f"overlap c must lie in [0, 1), got {c}")


def qubit_pair(c: float) -> tuple[np.ndarray, np.ndarray]:
    """Default and mutated single-particle states as real 2-vectors.

    The default state is (1, 0); the mutated state (c, sqrt(1-c^2)) has
    overlap c with it.
    """
    _check_overlap(c)
    return np.array([1.0, 0.0]), np.array([c, math.sqrt(1.0 - c * c)])


@dataclass(frozen=True)
class PosteriorDistribution:
    """Probability vector over candidate change points after step-1 updates.

    step is the index s of the next particle to be measured (1-based);
    eta[k-1] is the posterior probability that the change happened at k.
    """

    eta: np.ndarray
    step: int

    @classmethod
    def uniform(cls, n: int) -> "PosteriorDistribution":
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        return cls(eta=np.full(n, 1.0 / n), step=1)


@dataclass(frozen=True)
class TwoOutcomeMeasurement:
    """Projective two-outcome measurement on one qubit."""

    projector_phi: np.ndarray
    projector_zero: np.ndarray


@dataclass(frozen=True)
class TrialRecord:
    """One Monte Carlo trial: hidden change point, outcomes, and the guess."""

    true_k: int
    guess: int
    outcomes: str
    success: bool
    seed: int


class GreedyPriors(NamedTuple):
    p0: float
    pphi: float
    r0: Optional[int]
    rphi: int


def basic_local_closed_form(n: int, c: float) -> float:
    """Exact success probability 1 - c^2 + c^2/n of the basic local strategy."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    _check_overlap(c)
    return 1.0 - c * c + c * c / n


def simulate_basic_local(n: int, c: float, true_k: int, rng: CounterRng) -> TrialRecord:
    """One trial of the computational-basis strategy.

    Particles before the change always read 0; particles from the change on
    read 1 with probability 1-c^2.  The guess is the first position that
    reads 1, or n when nothing fires.
    """
    if not 1 <= true_k <= n:
        raise ValueError(f"true_k must lie in [1, {n}], got {true_k}")
    _check_overlap(c)
    fire_prob = 1.0 - c * c
    bits = []
    for j in range(1, n + 1):
        bit = j >= true_k and rng.uniform(j) < fire_prob
        bits.append("1" if bit else "0")
    first = next((j for j, b in enumerate(bits, start=1) if b == "1"), None)
    guess = first if first is not None else n
    return TrialRecord(
        true_k=true_k,
        guess=guess,
        outcomes="".join(bits),
        success=guess == true_k,
        seed=rng.seed,
    )


def greedy_priors(posterior: PosteriorDistribution, s: int) -> GreedyPriors:
    """Largest posterior mass on either side of the current particle.

    pphi is the maximum over change points k <= s (particle s already
    mutated), p0 the maximum over k > s (particle s still default; zero when
    that range is empty at s = n).  Ties break toward the smallest index.
    """
    eta = posterior.eta
    n = eta.shape[0]
    if not 1 <= s <= n:
        raise ValueError(f"step s must lie in [1, {n}], got {s}")
    rphi = int(np.argmax(eta[:s])) + 1
    pphi = float(eta[rphi - 1])
    if s < n:
        r0 = s + 1 + int(np.argmax(eta[s:]))
        p0 = float(eta[r0 - 1])
    else:
        r0 = None
        p0 = 0.0
    return GreedyPriors(p0=p0, pphi=pphi, r0=r0, rphi=rphi)


def _outcome_phi_likelihoods(p0, pphi, c: float):
    """Click probabilities of the phi-projector under each particle state.

    Returns (a, b) with a = <0|P_phi|0> and b = <phi|P_phi|phi> for the
    measurement that projects onto the strictly positive subspace of
    pphi |phi><phi| - p0 |0><0|.  Accepts scalars or arrays for p0/pphi.
    """
    s2 = 1.0 - c * c
    g00 = pphi * c * c - p0
    g11 = pphi * s2
    disc = np.hypot(g00 - g11, 2.0 * pphi * c * math.sqrt(s2))
    lam_minus = 0.5 * ((pphi - p0) - disc)
    safe = np.where(disc > 0.0, disc, 1.0)
    a = (g00 - lam_minus) / safe
    b = ((pphi - p0 * c * c) - lam_minus) / safe
    zero = np.asarray(pphi) == 0.0
    return np.where(zero, 0.0, a), np.where(zero, 0.0, b)


def helstrom_measurement(p0: float, pphi: float, c: float) -> tuple[TwoOutcomeMeasurement, float]:
    """Optimal two-outcome measurement for weighted states |0> and |phi>.

    Diagonalizes the 2x2 matrix pphi |phi><phi| - p0 |0><0| and projects
    onto its strictly positive subspace (a zero eigenvalue goes to the
    0-outcome projector).  Also returns the per-step success probability
    (pphi + p0 + tr|Gamma|) / 2.
    """
    if p0 < 0.0 or pphi < 0.0:
        raise ValueError(f"priors must be >= 0, got p0={p0}, pphi={pphi}")
    if p0 == 0.0 and pphi == 0.0:
        raise ValueError("priors p0 and pphi must not both be zero")
    _check_overlap(c)
    s = math.sqrt(1.0 - c * c)
    identity = np.eye(2)
    if pphi == 0.0:
        projector_phi = np.zeros((2, 2))
        disc = p0
    elif p0 == 0.0:
        phi = np.array([c, s])
        projector_phi = np.outer(phi, phi)
        disc = pphi
    else:
        gamma = np.array(
            [
                [pphi * c * c - p0, pphi * c * s],
                [pphi * c * s, pphi * s * s],
            ]
        )
        disc = math.hypot(gamma[0, 0] - gamma[1, 1], 2.0 * gamma[0, 1])
        lam_minus = 0.5 * ((pphi - p0) - disc)
        projector_phi = (gamma - lam_minus * identity) / disc
    measurement = TwoOutcomeMeasurement(
        projector_phi=projector_phi,
        projector_zero=identity - projector_phi,
    )
    return measurement, 0.5 * (pphi + p0 + disc)


def bayes_update(
    posterior: PosteriorDistribution,
    s: int,
    measurement: TwoOutcomeMeasurement,
    outcome: int,
    c: float,
) -> PosteriorDistribution:
    """Posterior after observing the outcome of the step-s measurement.

    The particle at step s is |0> under hypotheses k > s and |phi> under
    k <= s, so the likelihood of the observed projector is the matching
    quadratic form.  outcome=1 means the phi-projector clicked.
    """
    _check_overlap(c)
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome}")
    projector = measurement.projector_phi if outcome == 1 else measurement.projector_zero
    _, phi = qubit_pair(c)
    like_zero = float(projector[0, 0])
    like_phi = float(phi @ projector @ phi)
    n = posterior.eta.shape[0]
    likelihood = np.where(np.arange(n) < s, like_phi, like_zero)
    unnormalized = likelihood * posterior.eta
    norm = unnormalized.sum()
    if norm <= 0.0:
        raise ImpossibleOutcomeError(
            f"outcome {outcome} at step {s} has zero predicted probability"
        )
    return PosteriorDistribution(eta=unnormalized / norm, step=s + 1)


def simulate_greedy_trial(n: int, c: float, true_k: int, rng: CounterRng) -> TrialRecord:
    """One trial of the greedy strategy with per-step optimal measurements.

    At each step the two-state measurement for the current greedy priors is
    applied, the outcome sampled under the true particle state, and the
    posterior updated; the final guess maximizes the posterior (smallest
    index on ties).
    """
    if not 1 <= true_k <= n:
        raise ValueError(f"true_k must lie in [1, {n}], got {true_k}")
    _check_overlap(c)
    posterior = PosteriorDistribution.uniform(n)
    _, phi = qubit_pair(c)
    bits = []
    for s in range(1, n + 1):
        priors = greedy_priors(posterior, s)
        measurement, _ = helstrom_measurement(priors.p0, priors.pphi, c)
        projector = measurement.projector_phi
        if true_k <= s:
            click_prob = float(phi @ projector @ phi)
        else:
            click_prob = float(projector[0, 0])
        outcome = 1 if rng.uniform(s) < click_prob else 0
        bits.append("1" if outcome else "0")
        posterior = bayes_update(posterior, s, measurement, outcome, c)
    guess = int(np.argmax(posterior.eta)) + 1
    return TrialRecord(
        true_k=true_k,
        guess=guess,
        outcomes="".join(bits),
        success=guess == true_k,
        seed=rng.seed,
    )


def exact_greedy_enumeration(n: int, c: float) -> float:
    """Exact greedy success probability by walking the full outcome tree.

    Propagates the outcome-sequence probability under every hypothesis k
    down both branches of each step; the number of branches doubles per
    step, so n is capped at 12.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > _ENUMERATION_MAX_N:
        raise ValueError(
            f"enumeration is limited to n <= {_ENUMERATION_MAX_N} "
            f"(2^n outcome branches), got {n}"
        )
    _check_overlap(c)
    k_index = np.arange(n)
    total = 0.0
    # stack holds (step, P(outcomes so far | k)); uniform prior folds in at the leaves
    stack: list[tuple[int, np.ndarray]] = [(1, np.ones(n))]
    while stack:
        s, path_prob = stack.pop()
        if s > n:
            total += path_prob.max() / n
            continue
        eta = path_prob / path_prob.sum()
        pphi = float(eta[:s].max())
        p0 = float(eta[s:].max()) if s < n else 0.0
        a, b = _outcome_phi_likelihoods(p0, pphi, c)
        like_phi = np.where(k_index < s, b, a)
        for like in (like_phi, 1.0 - like_phi):
            child = path_prob * like
            if child.max() > 0.0:
                stack.append((s + 1, child))
    return total


def _draw_true_k(n: int, seeds: np.ndarray) -> np.ndarray:
    u0 = uniform_array(seeds, 0)
    return np.minimum(n, 1 + (u0 * n).astype(np.int64))


def _simulate_basic_chunk(n: int, c: float, seeds: np.ndarray):
    true_k = _draw_true_k(n, seeds)
    steps = np.arange(1, n + 1)
    us = uniform_array(seeds[:, np.newaxis], steps[np.newaxis, :])
    fires = (steps[np.newaxis, :] >= true_k[:, np.newaxis]) & (us < 1.0 - c * c)
    any_fire = fires.any(axis=1)
    guess = np.where(any_fire, fires.argmax(axis=1) + 1, n)
    return true_k, guess, fires.astype(np.uint8)


def _simulate_greedy_chunk(n: int, c: float, seeds: np.ndarray):
    m = seeds.shape[0]
    true_k = _draw_true_k(n, seeds)
    eta = np.full((m, n), 1.0 / n)
    outcomes = np.zeros((m, n), dtype=np.uint8)
    k_index = np.arange(n)
    for s in range(1, n + 1):
        pphi = eta[:, :s].max(axis=1)
        p0 = eta[:, s:].max(axis=1) if s < n else np.zeros(m)
        a, b = _outcome_phi_likelihoods(p0, pphi, c)
        click_prob = np.where(true_k <= s, b, a)
        clicked = uniform_array(seeds, s) < click_prob
        like_phi = np.where(k_index[np.newaxis, :] < s, b[:, np.newaxis], a[:, np.newaxis])
        likelihood = np.where(clicked[:, np.newaxis], like_phi, 1.0 - like_phi)
        eta *= likelihood
        norm = eta.sum(axis=1, keepdims=True)
        if not np.all(norm > 0.0):
            raise ImpossibleOutcomeError(
                f"sampled outcome with zero posterior mass at step {s}"
            )
        eta /= norm
        outcomes[:, s - 1] = clicked
    guess = eta.argmax(axis=1) + 1
    return true_k, guess, outcomes


_CHUNK_FUNCS = {"basic": _simulate_basic_chunk, "greedy": _simulate_greedy_chunk}


def _chunked_trials(strategy: str, n: int, c: float, trials: int, base_seed: int, chunk_size: int):
    simulate = _CHUNK_FUNCS[strategy]
    for start in range(0, trials, chunk_size):
        idx = np.arange(start, min(start + chunk_size, trials), dtype=np.uint64)
        seeds = trial_seed_array(base_seed, idx)
        true_k, guess, outcomes = simulate(n, c, seeds)
        yield seeds, true_k, guess, outcomes


def monte_carlo(
    strategy: str,
    n: int,
    c: float,
    trials: int,
    base_seed: int,
    chunk_size: int = _CHUNK_SIZE,
) -> tuple[float, float]:
    """Monte Carlo estimate of a strategy's success probability.

    The change point of each trial is drawn uniformly; every random variate
    is a pure function of (base_seed, trial index, step index), so the
    estimate does not depend on chunking or execution order.  Returns the
    success fraction and its binomial standard error.
    """
    if strategy not in _CHUNK_FUNCS:
        raise ValueError(f"strategy must be one of {sorted(_CHUNK_FUNCS)}, got {strategy!r}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    _check_overlap(c)
    successes = 0
    for _, true_k, guess, _ in _chunked_trials(strategy, n, c, trials, base_seed, chunk_size):
        successes += int((guess == true_k).sum())
    estimate = successes / trials
    return estimate, math.sqrt(estimate * (1.0 - estimate) / trials)


def iter_trial_records(
    strategy: str,
    n: int,
    c: float,
    trials: int,
    base_seed: int,
    chunk_size: int = _CHUNK_SIZE,
) -> Iterator[TrialRecord]:
    """Per-trial records from the same engine and stream as monte_carlo."""
    if strategy not in _CHUNK_FUNCS:
        raise ValueError(f"strategy must be one of {sorted(_CHUNK_FUNCS)}, got {strategy!r}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    _check_overlap(c)
    bit_chars = np.array(["0", "1"])
    for seeds, true_k, guess, outcomes in _chunked_trials(
        strategy, n, c, trials, base_seed, chunk_size
    ):
        for row in range(seeds.shape[0]):
            yield TrialRecord(
                true_k=int(true_k[row]),
                guess=int(guess[row]),
                outcomes="".join(bit_chars[outcomes[row]]),
                success=bool(guess[row] == true_k[row]),
                seed=int(seeds[row]),
            )
