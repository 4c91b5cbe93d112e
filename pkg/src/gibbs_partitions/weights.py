"""Weight sequences and composition schemes.

A composition scheme pairs an outer weight sequence ``v`` (which weights the
number of components) with an inner sequence ``w`` (which weights component
sizes); the partition function of the associated random partition model is
``u_n = [z^n] V(W(z))``.

Weight sequences come in two kinds:

* ``explicit`` -- a finite array of nonnegative coefficients (radius +inf);
* ``closed_form`` -- a regularly varying tail

      term(n) = L(n) * n**(-e) * rho**(-n),   L(n) = c * log(2 + n)**log_exp,

  for ``n >= max(start_index, 1)``, with finitely many per-index overrides
  taking precedence and an explicit value at index 0.  ``log(2 + n)`` keeps
  the slowly varying factor positive and finite at every index.

Series evaluation returns certified partial sums: the reported value differs
from the infinite sum by at most ``tol``.  Away from the radius a geometric
ratio bound controls the tail; on the radius an integral comparison does.
Divergence (``t > rho``, or ``t = rho`` with tail exponent <= 1) is signalled
by returning ``+inf``, never by a fabricated number.

All values are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad as _quad

__all__ = ["SlowVarying", "WeightSequence", "SchemeSpec"]

# Relative slack used to decide whether an evaluation point sits on the
# radius of convergence; configs build rho_v = W(rho_w) in floating point.
_RADIUS_RTOL = 1e-13


@dataclass(frozen=True)
class SlowVarying:
    """Slowly varying factor ``L(n) = c * log(2 + n)**log_exp``, c > 0."""

    c: float
    log_exp: float = 0.0

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise ValueError(f"slowly varying constant must be positive, got {self.c}")

    def __call__(self, n):
        if self.log_exp == 0.0:
            return self.c * np.ones_like(np.asarray(n, dtype=float))
        return self.c * np.log(2.0 + np.asarray(n, dtype=float)) ** self.log_exp

    def log_value(self, n):
        """log L(n), vectorized."""
        base = math.log(self.c)
        if self.log_exp == 0.0:
            return base + np.zeros_like(np.asarray(n, dtype=float))
        return base + self.log_exp * np.log(np.log(2.0 + np.asarray(n, dtype=float)))

    @property
    def is_constant(self) -> bool:
        return self.log_exp == 0.0

    def to_config(self) -> dict:
        return {"c": self.c, "log_exp": self.log_exp}


@dataclass(frozen=True)
class WeightSequence:
    """A nonnegative coefficient sequence, explicit or regularly varying.

    Use the :meth:`explicit` / :meth:`closed_form` constructors rather than
    the raw dataclass fields.
    """

    kind: str
    coeffs: tuple[float, ...] | None = None
    L: SlowVarying | None = None
    e: float | None = None
    rho: float | None = None
    start_index: int = 1
    term0: float = 0.0
    overrides: tuple[tuple[int, float], ...] = ()

    # -- constructors -----------------------------------------------------

    @staticmethod
    def explicit(coeffs) -> "WeightSequence":
        arr = tuple(float(x) for x in coeffs)
        if not arr:
            raise ValueError("explicit sequences need at least one coefficient")
        if any(x < 0 or not math.isfinite(x) for x in arr):
            raise ValueError("explicit coefficients must be finite and nonnegative")
        return WeightSequence(kind="explicit", coeffs=arr)

    @staticmethod
    def closed_form(
        c: float = 1.0,
        e: float = 0.0,
        rho: float = 1.0,
        log_exp: float = 0.0,
        start_index: int = 1,
        term0: float = 0.0,
        overrides: dict[int, float] | None = None,
    ) -> "WeightSequence":
        if not rho > 0:
            raise ValueError(f"rho must be positive, got {rho}")
        if start_index < 0:
            raise ValueError("start_index must be nonnegative")
        if term0 < 0:
            raise ValueError("term(0) must be nonnegative")
        ov = tuple(sorted((int(k), float(val)) for k, val in (overrides or {}).items()))
        if any(k < 1 or val < 0 for k, val in ov):
            raise ValueError("overrides must map positive indices to nonnegative values")
        return WeightSequence(
            kind="closed_form",
            L=SlowVarying(float(c), float(log_exp)),
            e=float(e),
            rho=float(rho),
            start_index=int(start_index),
            term0=float(term0),
            overrides=ov,
        )

    # -- basic accessors ---------------------------------------------------

    @property
    def is_explicit(self) -> bool:
        return self.kind == "explicit"

    def radius(self) -> float:
        """Radius of convergence: +inf for explicit (polynomial) sequences."""
        return math.inf if self.is_explicit else self.rho

    def term(self, n: int) -> float:
        """The n-th coefficient."""
        if n < 0:
            raise ValueError("index must be nonnegative")
        if self.is_explicit:
            return self.coeffs[n] if n < len(self.coeffs) else 0.0
        if n == 0:
            return self.term0
        for k, val in self.overrides:
            if k == n:
                return val
        if n < max(self.start_index, 1):
            return 0.0
        return float(self.L(n)) * n ** (-self.e) * self.rho ** (-n)

    def log_term(self, n: int) -> float:
        """log term(n); -inf when the coefficient vanishes."""
        t = self.term(n)
        return math.log(t) if t > 0 else -math.inf

    # -- transforms --------------------------------------------------------

    def tilt(self, t: float) -> "WeightSequence":
        """Sequence with coefficients ``term(n) * t**n``.

        Closed forms map rho to rho / t; the model built from a tilted inner
        sequence is distributionally unchanged.
        """
        if not t > 0:
            raise ValueError("tilt parameter must be positive")
        if self.is_explicit:
            # log-space product: c * t**n can overflow the intermediate
            # power even when the product is representable
            logt = math.log(t)
            return WeightSequence.explicit(
                [
                    math.exp(math.log(c) + n * logt) if c > 0 else 0.0
                    for n, c in enumerate(self.coeffs)
                ]
            )
        ov = tuple((k, val * t**k) for k, val in self.overrides)
        return replace(self, rho=self.rho / t, overrides=ov)

    # -- series evaluation ---------------------------------------------------

    def weighted_terms(self, x: float, n_max: int) -> np.ndarray:
        """Array of ``term(n) * x**n`` for n = 0..n_max, computed in log space.

        This is the backbone for probability vectors: for closed forms with
        x near rho the product ``n**(-e) * (x/rho)**n`` is formed without
        intermediate overflow.
        """
        if x < 0:
            raise ValueError("evaluation point must be nonnegative")
        out = np.zeros(n_max + 1)
        if self.is_explicit:
            m = min(len(self.coeffs), n_max + 1)
            cs = np.asarray(self.coeffs[:m])
            if x == 0.0:
                out[0] = cs[0] if m > 0 else 0.0
                return out
            with np.errstate(divide="ignore"):
                logs = np.where(cs > 0, np.log(np.where(cs > 0, cs, 1.0)), -np.inf)
            out[:m] = np.exp(logs + np.arange(m) * math.log(x))
            out[:m][cs == 0] = 0.0
            return out
        out[0] = self.term0
        if x == 0.0 or n_max == 0:
            return out
        n = np.arange(1, n_max + 1, dtype=float)
        logx = math.log(x)
        logs = self.L.log_value(n) - self.e * np.log(n) + n * (logx - math.log(self.rho))
        vals = np.exp(logs)
        if self.start_index > 1:
            vals[: min(self.start_index - 1, n_max)] = 0.0
        for k, val in self.overrides:
            if 1 <= k <= n_max:
                vals[k - 1] = val * math.exp(k * logx) if val > 0 else 0.0
        out[1:] = vals
        return out

    def weighted_moment(self, t: float, k: int = 0, tol: float = 1e-12) -> float:
        """Certified value of ``sum_n n**k * term(n) * t**n``, or +inf.

        Diverges (returns +inf) for t above the radius, and on the radius
        when the effective tail exponent e - k is <= 1.
        """
        if t < 0:
            raise ValueError("evaluation point must be nonnegative")
        if k < 0:
            raise ValueError("moment order must be nonnegative")
        if self.is_explicit:
            if t == 0.0:
                return float(self.coeffs[0]) if k == 0 else 0.0
            arr = self.weighted_terms(t, len(self.coeffs) - 1)
            n = np.arange(arr.size, dtype=float)
            weights = n**k if k > 0 else np.ones_like(n)
            return float(np.sum(arr * weights))
        base = _closed_moment_sum(self.L, self.e, self.rho, max(self.start_index, 1), t, k, tol)
        if math.isinf(base):
            return math.inf
        total = base
        # Override adjustments replace finitely many closed-form terms.
        for j, val in self.overrides:
            if j >= max(self.start_index, 1):
                closed = float(self.L(j)) * j ** (-self.e) * self.rho ** (-j)
            else:
                closed = 0.0
            total += (val - closed) * j**k * t**j
        if k == 0:
            total += self.term0
        return max(total, 0.0)

    def series_value(self, t: float, tol: float = 1e-12) -> float:
        """Certified value of ``sum_n term(n) * t**n``, or +inf on divergence."""
        return self.weighted_moment(t, 0, tol)

    # -- config round trip -------------------------------------------------

    def to_config(self) -> dict:
        if self.is_explicit:
            return {"kind": "explicit", "coeffs": list(self.coeffs)}
        cfg = {
            "kind": "closed_form",
            "c": self.L.c,
            "log_exp": self.L.log_exp,
            "e": self.e,
            "rho": self.rho,
            "start_index": self.start_index,
            "term0": self.term0,
            "overrides": {str(k): v for k, v in self.overrides},
        }
        return cfg

    @staticmethod
    def from_config(cfg: dict) -> "WeightSequence":
        kind = cfg.get("kind")
        if kind == "explicit":
            return WeightSequence.explicit(cfg["coeffs"])
        if kind == "closed_form":
            return WeightSequence.closed_form(
                c=cfg.get("c", 1.0),
                e=cfg["e"],
                rho=cfg["rho"],
                log_exp=cfg.get("log_exp", 0.0),
                start_index=cfg.get("start_index", 1),
                term0=cfg.get("term0", 0.0),
                overrides={int(k): float(v) for k, v in cfg.get("overrides", {}).items()},
            )
        raise ValueError(f"unknown weight sequence kind: {kind!r}")


def _closed_moment_sum(
    L: SlowVarying,
    e: float,
    rho: float,
    n0: int,
    t: float,
    k: int,
    tol: float,
) -> float:
    """``sum_{n >= n0} n**k L(n) n**(-e) (t/rho)**n`` with tail error <= tol.

    Below the radius the term ratio is eventually bounded by

        r(N) = q * (1 + 1/N)**max(k-e, 0) * (log(3+N)/log(2+N))**max(log_exp, 0)

    giving the geometric tail bound term(N) / (1 - r(N)).  On the radius the
    tail from N is replaced by the Euler-Maclaurin estimate

        sum_{m >= N} f(m) = integral_N^inf f + f(N)/2 - f'(N)/12 + R,
        |R| <= |f'(N)| / 12,

    valid once f' is monotone; the integral is evaluated by adaptive
    quadrature whose error estimate joins the budget.
    """
    if t == 0.0:
        return 0.0
    q = t / rho
    e_eff = e - k
    lam = L.log_exp
    lam_pos = max(lam, 0.0)
    at_radius = abs(q - 1.0) <= _RADIUS_RTOL
    if q > 1.0 and not at_radius:
        return math.inf
    if at_radius and e_eff <= 1.0:
        return math.inf
    logq = 0.0 if at_radius else math.log(q)

    def f(x):
        return np.exp(L.log_value(x) - e_eff * np.log(x))

    def f_prime_abs(x: float) -> float:
        return float(f(x)) * (abs(lam) / ((2.0 + x) * math.log(2.0 + x)) + e_eff / x)

    # Index past which f is decreasing and f' monotone (crude but safe).
    n_dec = max(n0, 16)
    if lam_pos > 0 and e_eff > 0:
        n_dec = max(n_dec, int(math.exp(lam_pos / e_eff)) + 2)
    total = 0.0
    n = n0
    block = 64
    max_index = 10**9
    while n < max_index:
        hi = n + block
        idx = np.arange(n, hi, dtype=float)
        logs = L.log_value(idx) - e_eff * np.log(idx) + idx * logq
        total += float(np.sum(np.exp(logs)))
        n = hi
        block = min(block * 2, 1 << 16)
        if n < n_dec:
            continue
        if at_radius:
            # -f'(N)/12 is folded into the remainder budget (|.| <= |f'|/6).
            rem_bound = f_prime_abs(n) / 6.0
            if rem_bound > tol / 2.0:
                continue
            if L.log_exp == 0.0:
                integral = L.c * n ** (1.0 - e_eff) / (e_eff - 1.0)
                int_err = 0.0
            else:
                # x = N/u maps the tail onto (0, 1] with an integrable
                # endpoint singularity u^(e_eff - 2) that quad resolves.
                integral, int_err = _quad(
                    lambda u: float(f(n / u)) * n / (u * u),
                    0.0,
                    1.0,
                    epsabs=tol / 4.0,
                    epsrel=1e-12,
                    limit=300,
                )
            if int_err + rem_bound > tol:
                continue
            return total + integral + float(f(n)) / 2.0
        r = (
            q
            * (1.0 + 1.0 / n) ** max(-e_eff, 0.0)
            * (math.log(3.0 + n) / math.log(2.0 + n)) ** lam_pos
        )
        if r >= 1.0:
            continue
        term_n = math.exp(float(L.log_value(n)) - e_eff * math.log(n) + n * logq)
        if term_n / (1.0 - r) <= tol:
            return total
    raise RuntimeError("series truncation failed to certify the requested tolerance")


@dataclass(frozen=True)
class SchemeSpec:
    """A composition scheme: outer weights v, inner weights w.

    Optionally carries an extended-scheme prefactor ``h`` and a list of
    product factors (for partition functions of the form prod_k W_k(z)).
    The outer series starts at index 1, so v must have v_0 = 0.
    """

    v: WeightSequence
    w: WeightSequence
    h: WeightSequence | None = None
    product_factors: tuple[WeightSequence, ...] | None = None

    def __post_init__(self) -> None:
        if self.v.term(0) != 0.0:
            raise ValueError("outer sequence must have v_0 = 0")

    def to_config(self) -> dict:
        cfg = {"v": self.v.to_config(), "w": self.w.to_config()}
        if self.h is not None:
            cfg["h"] = self.h.to_config()
        if self.product_factors is not None:
            cfg["product_factors"] = [f.to_config() for f in self.product_factors]
        return cfg

    @staticmethod
    def from_config(cfg: dict) -> "SchemeSpec":
        h = cfg.get("h")
        pf = cfg.get("product_factors")
        return SchemeSpec(
            v=WeightSequence.from_config(cfg["v"]),
            w=WeightSequence.from_config(cfg["w"]),
            h=WeightSequence.from_config(h) if h else None,
            product_factors=tuple(WeightSequence.from_config(f) for f in pf) if pf else None,
        )

    def fingerprint(self) -> str:
        import hashlib
        import json

        blob = json.dumps(self.to_config(), sort_keys=True)
        return hashlib.sha1(blob.encode()).hexdigest()[:12]
