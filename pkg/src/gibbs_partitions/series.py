"""Exact truncated power-series algebra.

Independent oracle for partition functions ``u_n = [z^n] V(W(z))`` and for
product / extended schemes.  Plain O(n^2) Cauchy products, summed in a fixed
order for reproducibility; desk-scale truncations (n <= 1e4) keep this fast
and auditable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .weights import WeightSequence

__all__ = ["TruncatedSeries", "mul", "compose", "pow_coeff", "series_of"]


@dataclass(frozen=True)
class TruncatedSeries:
    """Coefficients indexed 0..n_max."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.coeffs, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", arr)

    @property
    def n_max(self) -> int:
        return self.coeffs.size - 1

    def __getitem__(self, n: int) -> float:
        return float(self.coeffs[n]) if n <= self.n_max else 0.0


def series_of(seq: WeightSequence, n_max: int) -> TruncatedSeries:
    """Truncation of a weight sequence to degree n_max."""
    return TruncatedSeries(np.array([seq.term(n) for n in range(n_max + 1)]))


def mul(a: TruncatedSeries, b: TruncatedSeries, n_max: int) -> TruncatedSeries:
    """Cauchy product truncated at degree n_max."""
    ca = a.coeffs[: n_max + 1]
    cb = b.coeffs[: n_max + 1]
    out = np.convolve(ca, cb)[: n_max + 1]
    if out.size < n_max + 1:
        out = np.pad(out, (0, n_max + 1 - out.size))
    return TruncatedSeries(out)


def compose(v: WeightSequence, w: WeightSequence, n_max: int) -> TruncatedSeries:
    """Coefficients of V(W(z)) up to degree n_max.

    Requires w_0 = 0, so that the composition is well defined on truncations
    and v contributes only through degrees <= n_max.  Evaluated by Horner
    over the reversed v-truncation:
    V(W) = v_0 + W (v_1 + W (v_2 + ...)).
    """
    if w.term(0) != 0.0:
        raise ValueError(
            "composition requires w_0 = 0; use the stopped-sum law for w_0 > 0"
        )
    ws = series_of(w, n_max)
    acc = TruncatedSeries(np.array([v.term(n_max)]))
    for ell in range(n_max - 1, 0, -1):
        acc = mul(acc, ws, n_max)
        coeffs = acc.coeffs.copy()
        coeffs[0] += v.term(ell)
        acc = TruncatedSeries(coeffs)
    acc = mul(acc, ws, n_max)
    coeffs = acc.coeffs.copy()
    coeffs[0] += v.term(0)
    return TruncatedSeries(coeffs)


def pow_coeff(w: WeightSequence, ell: int, n: int) -> float:
    """``[z^n] W(z)**ell`` via repeated truncated multiplication."""
    if ell < 1:
        raise ValueError("power must be a positive integer")
    ws = series_of(w, n)
    acc = ws
    for _ in range(ell - 1):
        acc = mul(acc, ws, n)
    return acc[n]
