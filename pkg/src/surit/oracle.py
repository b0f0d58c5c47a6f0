"""Brute-force references: explicit alignment enumeration and central differences.

These deliberately share no dynamic-programming code with ``surit.lattice``;
node distributions are evaluated one node at a time through the scalar
per-node functions.
"""

import itertools
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from math import comb
from typing import TypeVar

import numpy as np

from surit.errors import InvalidConfigError, TooLargeError
from surit.lattice import (
    AlignmentLattice,
    LatticeMode,
    hat_node_logprobs,
    rnnt_node_logprobs,
)

ENUMERATION_BOUND = 20

P = TypeVar("P", bound=Mapping)


@dataclass(frozen=True)
class Blank:
    """Advance one frame without emitting."""


@dataclass(frozen=True)
class Label:
    """Emit reference label y_{u+1} and advance u."""

    u: int


Move = Blank | Label


@dataclass(frozen=True)
class PathEnumeration:
    T: int
    U: int
    paths: list[tuple[Move, ...]]

    @property
    def count(self) -> int:
        return len(self.paths)


def path_count(T: int, U: int) -> int:
    return comb(T - 1 + U, U)


def enumerate_paths(T: int, U: int) -> PathEnumeration:
    """Every ordering of T-1 blanks and U labels."""
    if T < 1 or U < 0:
        raise InvalidConfigError(f"need T >= 1 and U >= 0, got T={T}, U={U}")
    if T - 1 + U > ENUMERATION_BOUND:
        raise TooLargeError(
            f"T-1+U = {T - 1 + U} exceeds the enumeration bound {ENUMERATION_BOUND}"
        )
    n_moves = T - 1 + U
    paths = []
    for label_slots in itertools.combinations(range(n_moves), U):
        slots = set(label_slots)
        moves: list[Move] = []
        u = 0
        for position in range(n_moves):
            if position in slots:
                moves.append(Label(u))
                u += 1
            else:
                moves.append(Blank())
        paths.append(tuple(moves))
    return PathEnumeration(T=T, U=U, paths=paths)


def _node_tables(lattice: AlignmentLattice) -> tuple[np.ndarray, np.ndarray]:
    node_fn = rnnt_node_logprobs if lattice.mode is LatticeMode.RNNT else hat_node_logprobs
    blank = np.empty((lattice.T, lattice.U + 1))
    labels = np.empty((lattice.T, lattice.U + 1, lattice.n_labels))
    for t in range(lattice.T):
        for u in range(lattice.U + 1):
            blank[t, u], labels[t, u] = node_fn(lattice.node(t, u))
    return blank, labels


def path_logprob(lattice: AlignmentLattice, path: tuple[Move, ...], tables=None) -> float:
    blank, labels = tables if tables is not None else _node_tables(lattice)
    penalty = lattice.label_penalty
    t = u = 0
    total = 0.0
    for move in path:
        if isinstance(move, Blank):
            total += blank[t, u]
            t += 1
        else:
            total += labels[t, u, lattice.targets[move.u]]
            if penalty is not None:
                total -= penalty[t]
            u += 1
    return total


def enumerate_loss(lattice: AlignmentLattice) -> float:
    """-log of the explicit sum over every alignment path."""
    enumeration = enumerate_paths(lattice.T, lattice.U)
    tables = _node_tables(lattice)
    scores = np.array([path_logprob(lattice, path, tables) for path in enumeration.paths])
    return -float(np.logaddexp.reduce(scores))


def finite_diff(
    loss_fn: Callable[[P], float] | Callable[[np.ndarray], float],
    params: P | np.ndarray,
    step: float = 1e-5,
) -> P | np.ndarray:
    """Central differences (f(p+h) - f(p-h)) / 2h for every coordinate.

    ``params`` is either one array or a name -> array mapping; the result has
    the same structure. The caller's arrays are left untouched.
    """
    if not step > 0.0:
        raise InvalidConfigError(f"finite-difference step must be > 0, got {step}")

    if isinstance(params, np.ndarray):
        work = np.array(params, dtype=np.float64, copy=True)
        return _central(lambda: loss_fn(work), work, step)

    work = type(params)((name, np.array(value, dtype=np.float64, copy=True)) for name, value in params.items())
    return type(params)(
        (name, _central(lambda: loss_fn(work), array, step)) for name, array in work.items()
    )


def _central(evaluate: Callable[[], float], array: np.ndarray, step: float) -> np.ndarray:
    grad = np.zeros_like(array)
    for index in np.ndindex(array.shape):
        original = array[index]
        array[index] = original + step
        upper = evaluate()
        array[index] = original - step
        lower = evaluate()
        array[index] = original
        grad[index] = (upper - lower) / (2.0 * step)
    return grad


@dataclass(frozen=True)
class GradientCheck:
    n_checked: int
    n_failed: int
    max_rel_error: float

    @property
    def passed(self) -> bool:
        return self.n_failed == 0


def compare_gradients(
    analytic: np.ndarray | Mapping[str, np.ndarray],
    numeric: np.ndarray | Mapping[str, np.ndarray],
    rtol: float,
    atol: float = 1e-9,
    floor: float = 1e-8,
) -> GradientCheck:
    """Coordinatewise |a - n| <= rtol * max(|a|, |n|) + atol.

    Coordinates where both magnitudes are at or below ``floor`` are skipped.
    """
    if isinstance(analytic, np.ndarray):
        pairs = [(np.asarray(analytic), np.asarray(numeric))]
    else:
        pairs = [(np.asarray(analytic[name]), np.asarray(numeric[name])) for name in analytic]

    checked = failed = 0
    worst = 0.0
    for a, n in pairs:
        a, n = a.ravel(), n.ravel()
        scale = np.maximum(np.abs(a), np.abs(n))
        mask = scale > floor
        if not np.any(mask):
            continue
        diff = np.abs(a[mask] - n[mask])
        checked += int(mask.sum())
        failed += int(np.sum(diff > rtol * scale[mask] + atol))
        worst = max(worst, float(np.max(diff / scale[mask])))
    return GradientCheck(n_checked=checked, n_failed=failed, max_rel_error=worst)
