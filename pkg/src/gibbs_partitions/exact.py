"""Exact finite-n laws for composition-scheme partition models.

Everything here is dynamic programming on probability vectors: the component
size law X, the component count laws N / N-hat, iterated convolutions
P(S_l = m), the stopped sum S_N, the conditioned count law N_n, prefix laws,
the giant-component deficit, and product-structure coordinate laws.  These
are the ground truth against which limit theorems are verified.

Conventions:

* ``DiscreteLaw`` carries a pmf on 0..n_max plus explicit mass bookkeeping;
  truncation deficits are reported, never silently renormalized, except
  where an operation is defined as a conditional law.
* With w_0 = 0 every stopped-sum truncation at l = n is exact, since
  P(S_l = n) = 0 for l > n.  With w_0 > 0 the truncation tail is certified
  by a Chernoff bound on the number of nonzero summands.
* All laws are invariant under tilting of the inner weights; callers may
  pass any evaluation radius rho with W(rho) finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .weights import SchemeSpec, WeightSequence

__all__ = [
    "DiscreteLaw",
    "ConvolutionTable",
    "StoppedSumLaw",
    "PrefixLaw",
    "ProductLaw",
    "tv_distance",
    "default_rho",
    "law_X",
    "law_N",
    "law_Nhat",
    "convolution_table",
    "stopped_sum_law",
    "law_Nn",
    "extended_law_Nn",
    "brute_force_partition_law",
    "prefix_law",
    "giant_deficit_law",
    "product_law",
]

# Above this (row length * kernel length) product, row convolutions switch to
# FFT.  Direct convolution keeps exact zero patterns and ~1e-16 relative
# accuracy, which the 1e-12 invariance contracts rely on at n <= 1500.
_DIRECT_CONV_LIMIT = 4_000_000

_DEFICIT_N_CAP = 4000


class TailCertificationError(RuntimeError):
    """The stopped-sum truncation tail could not be certified."""


class BudgetExceededError(RuntimeError):
    """A table or DP exceeded its configured size guard."""


@dataclass
class DiscreteLaw:
    """A (sub-)probability mass function on 0..n_max.

    ``mass_accounted`` is the total mass captured by the array; the deficit
    ``1 - mass_accounted`` is reported to callers rather than renormalized.
    """

    pmf: np.ndarray
    mass_accounted: float

    def __post_init__(self) -> None:
        self.pmf = np.asarray(self.pmf, dtype=float)
        if np.any(self.pmf < -1e-12):
            raise ValueError("pmf entries must be nonnegative")
        np.clip(self.pmf, 0.0, None, out=self.pmf)
        if self.mass_accounted > 1.0 + 1e-9:
            raise ValueError(f"mass accounted {self.mass_accounted} exceeds 1")

    @classmethod
    def from_pmf(cls, pmf: np.ndarray) -> "DiscreteLaw":
        pmf = np.asarray(pmf, dtype=float)
        return cls(pmf, float(pmf.sum()))

    @property
    def deficit(self) -> float:
        return max(0.0, 1.0 - self.mass_accounted)

    @property
    def n_max(self) -> int:
        return self.pmf.size - 1

    def mean(self) -> float:
        return float(np.dot(np.arange(self.pmf.size), self.pmf))

    def moment(self, k: int) -> float:
        return float(np.dot(np.arange(self.pmf.size, dtype=float) ** k, self.pmf))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pmf)


def tv_distance(a: DiscreteLaw, b: DiscreteLaw) -> float:
    """Total variation distance; an upper bound when either law is deficient.

    Exact whenever both laws are fully accounted within their arrays.
    """
    m = max(a.pmf.size, b.pmf.size)
    pa = np.pad(a.pmf, (0, m - a.pmf.size))
    pb = np.pad(b.pmf, (0, m - b.pmf.size))
    return 0.5 * (float(np.abs(pa - pb).sum()) + a.deficit + b.deficit)


# ---------------------------------------------------------------------------
# building blocks


def _conv_row(row: np.ndarray, kernel: np.ndarray, n: int, direct: bool) -> np.ndarray:
    if direct:
        out = np.convolve(row, kernel)[: n + 1]
    else:
        out = fftconvolve(row, kernel)[: n + 1]
        np.clip(out, 0.0, None, out=out)
    if out.size < n + 1:
        out = np.pad(out, (0, n + 1 - out.size))
    return out


def _trim(kernel: np.ndarray) -> np.ndarray:
    nz = np.nonzero(kernel)[0]
    return kernel[: nz[-1] + 1] if nz.size else kernel[:1]


def _use_direct(n: int, kernel_len: int, method: str) -> bool:
    if method == "direct":
        return True
    if method == "fft":
        return False
    return (n + 1) * kernel_len <= _DIRECT_CONV_LIMIT


def _saddle_rho(scheme: SchemeSpec, n: int) -> float:
    """Tilt radius putting the mean of S_N near n (Boltzmann calibration).

    For entire generating series (explicit sequences) any radius is legal,
    but conditioning on S_N = n is representable in double precision only
    near the saddle where E[N] E[X] = n.
    """
    def mean_sn(r: float) -> float:
        W = scheme.w.series_value(r)
        if not math.isfinite(W) or W <= 0:
            return math.inf
        VW = scheme.v.series_value(W)
        if not math.isfinite(VW) or VW <= 0:
            return math.inf
        en = scheme.v.weighted_moment(W, 1) / VW
        ex = scheme.w.weighted_moment(r, 1) / W
        return en * ex

    lo, hi = 1e-9, 1.0
    for _ in range(200):
        if mean_sn(hi) >= n or hi > 1e9:
            break
        hi *= 2.0
    if mean_sn(hi) < n:
        return hi  # bounded support: the closest reachable calibration
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mean_sn(mid) < n:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return 0.5 * (lo + hi)


def default_rho(scheme: SchemeSpec, n: int | None = None) -> float:
    """An evaluation radius with both W(rho) and V(W(rho)) finite.

    All conditioned laws are tilt invariant, so the choice only affects
    numerical range.  Uses rho_w when W(rho_w) stays within the outer
    radius, else the point where W(t) = rho_v (the composition's own
    singularity, i.e. rho_u).  When both series are entire and a target
    size is given, the saddle calibration keeps the conditioning event
    representable.
    """
    w = scheme.w
    rho_v = scheme.v.radius()
    rho_w = w.radius()
    w_at = w.series_value(rho_w) if math.isfinite(rho_w) else (
        math.inf if any(c > 0 for c in w.coeffs[1:]) else w.term(0)
    )
    if math.isinf(rho_v):
        if math.isfinite(rho_w):
            return rho_w
        return 1.0 if n is None else _saddle_rho(scheme, n)
    if math.isfinite(w_at) and w_at <= rho_v * (1 + 1e-9):
        return rho_w
    # supercritical: solve W(t) = rho_v on (0, rho_w)
    hi = min(rho_w, 1.0)
    while math.isfinite(rho_w) is False and w.series_value(hi) < rho_v:
        hi *= 2.0
    if math.isfinite(rho_w):
        hi = rho_w
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = w.series_value(mid)
        if val < rho_v:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(hi, 1e-300):
            break
    return lo


def law_X(scheme: SchemeSpec, rho: float, n_max: int) -> DiscreteLaw:
    """Law of a single component size: P(X=k) = w_k rho^k / W(rho)."""
    W = scheme.w.series_value(rho)
    if not math.isfinite(W) or W <= 0:
        raise ValueError(f"W({rho}) must be positive and finite, got {W}")
    terms = scheme.w.weighted_terms(rho, n_max)
    return DiscreteLaw(terms / W, float(terms.sum() / W))


def law_N(scheme: SchemeSpec, rho: float, ell_max: int) -> DiscreteLaw:
    """Law of the unconditioned count: P(N=l) = v_l W(rho)^l / V(W(rho))."""
    W = scheme.w.series_value(rho)
    if not math.isfinite(W):
        raise ValueError("W(rho) diverges")
    VW = scheme.v.series_value(W)
    if not math.isfinite(VW) or VW <= 0:
        raise ValueError(f"V(W(rho)) must be positive and finite, got {VW}")
    terms = scheme.v.weighted_terms(W, ell_max)
    return DiscreteLaw(terms / VW, float(terms.sum() / VW))


def law_Nhat(scheme: SchemeSpec, ell_max: int, rho: float | None = None) -> DiscreteLaw:
    """Size-biased count law: P(N-hat = l) = l P(N=l) / E[N]."""
    rho = default_rho(scheme) if rho is None else rho
    W = scheme.w.series_value(rho)
    VW = scheme.v.series_value(W)
    EN = scheme.v.weighted_moment(W, 1) / VW
    if not math.isfinite(EN):
        raise ValueError("E[N] diverges; size-biased law undefined")
    base = law_N(scheme, rho, ell_max)
    pmf = np.arange(ell_max + 1) * base.pmf / EN
    return DiscreteLaw(pmf, float(pmf.sum()))


@dataclass
class ConvolutionTable:
    """Rows P(S_l = m) for l = 0..ell_max, m = 0..n."""

    rows: np.ndarray

    @property
    def ell_max(self) -> int:
        return self.rows.shape[0] - 1

    @property
    def n(self) -> int:
        return self.rows.shape[1] - 1


def convolution_table(
    law_x: DiscreteLaw, ell_max: int, n: int, method: str = "auto"
) -> ConvolutionTable:
    """Iterated convolution table of a component-size law."""
    if (ell_max + 1) * (n + 1) > 400_000_000:
        raise BudgetExceededError("convolution table too large")
    kernel = _trim(law_x.pmf[: n + 1])
    direct = _use_direct(n, kernel.size, method)
    rows = np.zeros((ell_max + 1, n + 1))
    rows[0, 0] = 1.0
    for ell in range(1, ell_max + 1):
        rows[ell] = _conv_row(rows[ell - 1], kernel, n, direct)
    return ConvolutionTable(rows)


def _ell_cap(scheme: SchemeSpec, rho: float, n: int, law_x: DiscreteLaw) -> int:
    """Truncation point for sums over l with certified neglected mass.

    With P(X=0) = 0 the cap l = n is exact.  Otherwise the number of nonzero
    summands among l draws is Binomial(l, 1 - p0), and P(S_l = n) decays
    like exp(-(1-p0) l / 8) once l >= 4n/(1-p0); the cap is sized so the
    neglected mass is below 1e-16 absolutely.
    """
    p0 = float(law_x.pmf[0])
    if p0 == 0.0:
        return n
    if p0 >= 1.0 - 1e-9:
        raise TailCertificationError("component size is 0 almost surely")
    cap = int(math.ceil(max(4.0 * n, 8.0 * (n + 40 * math.log(10))) / (1.0 - p0)))
    if cap > 4 * n and cap > 100_000:
        raise TailCertificationError(
            "cannot certify stopped-sum tail within the 4n row budget"
        )
    return cap


def _sweep(
    scheme: SchemeSpec,
    n: int,
    rho: float | None = None,
    method: str = "auto",
    column_weights: list[np.ndarray] | None = None,
):
    """One pass over convolution rows, harvesting several quantities at once.

    Returns a dict with:
      column  -- P(S_l = n) for l = 0..cap
      pmf_n   -- P(N = l) for l = 0..cap
      green   -- for each weight array c in column_weights, the vector
                 G[m] = sum_l c[l] P(S_l = m), m = 0..n
    """
    rho = default_rho(scheme, n) if rho is None else rho
    lx = law_X(scheme, rho, n)
    cap = _ell_cap(scheme, rho, n, lx)
    ln = law_N(scheme, rho, cap)
    kernel = _trim(lx.pmf)
    direct = _use_direct(n, kernel.size, method)

    column = np.zeros(cap + 1)
    greens = None
    if column_weights is not None:
        greens = [np.zeros(n + 1) for _ in column_weights]
    row = np.zeros(n + 1)
    row[0] = 1.0
    for ell in range(cap + 1):
        column[ell] = row[n]
        if greens is not None:
            for g, cw in zip(greens, column_weights):
                if ell < cw.size and cw[ell] != 0.0:
                    g += cw[ell] * row
        if ell < cap:
            row = _conv_row(row, kernel, n, direct)
    out = {
        "column": column,
        "pmf_n": ln.pmf,
        "law_x": lx,
        "rho": rho,
        "W": scheme.w.series_value(rho),
    }
    if greens is not None:
        out["green"] = greens
    return out


@dataclass
class StoppedSumLaw:
    """P(S_N = m) for m = 0..n, with partition-function reconstruction."""

    s_n: np.ndarray
    u: np.ndarray
    rho: float
    vw: float


def stopped_sum_law(
    scheme: SchemeSpec, rho: float | None = None, n: int = 0, method: str = "auto"
) -> StoppedSumLaw:
    """Law of the randomly stopped sum plus u_m = V(W(rho)) rho^-m P(S_N=m)."""
    rho = default_rho(scheme, n) if rho is None else rho
    lx = law_X(scheme, rho, n)
    cap = _ell_cap(scheme, rho, n, lx)
    ln = law_N(scheme, rho, cap)
    kernel = _trim(lx.pmf)
    direct = _use_direct(n, kernel.size, method)
    acc = np.zeros(n + 1)
    row = np.zeros(n + 1)
    row[0] = 1.0
    for ell in range(cap + 1):
        if ln.pmf[ell] != 0.0:
            acc += ln.pmf[ell] * row
        if ell < cap:
            row = _conv_row(row, kernel, n, direct)
    W = scheme.w.series_value(rho)
    vw = scheme.v.series_value(W)
    m = np.arange(n + 1, dtype=float)
    with np.errstate(divide="ignore"):
        log_s = np.where(acc > 0, np.log(np.where(acc > 0, acc, 1.0)), -np.inf)
    u = np.exp(math.log(vw) - m * math.log(rho) + log_s)
    u[acc == 0] = 0.0
    return StoppedSumLaw(acc, u, rho, vw)


def law_Nn(
    scheme: SchemeSpec, n: int, rho: float | None = None, method: str = "auto"
) -> DiscreteLaw:
    """Exact conditioned count law P(N_n = l) = P(N = l | S_N = n).

    Normalized by construction (conditioning contract).
    """
    res = _sweep(scheme, n, rho=rho, method=method)
    num = res["pmf_n"] * res["column"]
    z = float(num.sum())
    if z <= 0.0:
        raise ValueError(f"partition function vanishes at n={n}")
    return DiscreteLaw(num / z, 1.0)


def extended_law_Nn(
    scheme: SchemeSpec, n: int, rho: float | None = None, method: str = "auto"
) -> DiscreteLaw:
    """Count law of W-components in the extended scheme H(z) V(W(z)).

    P(N~_n = l) is proportional to P(N=l) * sum_j h_j rho^j P(S_l = n - j).
    """
    if scheme.h is None:
        raise ValueError("scheme has no extended prefactor h")
    rho = default_rho(scheme, n) if rho is None else rho
    h_terms = scheme.h.weighted_terms(rho, n)
    lx = law_X(scheme, rho, n)
    cap = _ell_cap(scheme, rho, n, lx)
    ln = law_N(scheme, rho, cap)
    kernel = _trim(lx.pmf)
    direct = _use_direct(n, kernel.size, method)
    h_rev = h_terms[::-1]  # h_rev[m] = h_{n-m} rho^{n-m}
    num = np.zeros(cap + 1)
    row = np.zeros(n + 1)
    row[0] = 1.0
    for ell in range(cap + 1):
        if ln.pmf[ell] != 0.0:
            num[ell] = ln.pmf[ell] * float(np.dot(row, h_rev))
        if ell < cap:
            row = _conv_row(row, kernel, n, direct)
    z = float(num.sum())
    if z <= 0.0:
        raise ValueError(f"extended partition function vanishes at n={n}")
    return DiscreteLaw(num / z, 1.0)


# ---------------------------------------------------------------------------
# brute force oracle


def _set_partitions(n: int):
    """Yield block-size tuples of all set partitions of {0..n-1}.

    Enumerates restricted growth strings so every set partition appears
    exactly once (sizes repeat across different partitions, as they must).
    """
    sizes = [0] * n

    def rec(i: int, k: int):
        if i == n:
            yield tuple(sizes[:k])
            return
        for j in range(k):
            sizes[j] += 1
            yield from rec(i + 1, k)
            sizes[j] -= 1
        sizes[k] = 1
        yield from rec(i + 1, k + 1)
        sizes[k] = 0

    yield from rec(0, 0)


def brute_force_partition_law(scheme: SchemeSpec, n: int):
    """Exact laws of (N_n, size multiset) by summation over set partitions.

    Returns (law of N_n, dict mapping sorted size tuples to probabilities,
    partition function u_n).  Refuses n > 9 (enumeration cost) and w_0 > 0
    (set-partition components are nonempty; the conditioned-sum law is the
    model's semantics in that case).
    """
    if n > 9:
        raise BudgetExceededError("brute force enumeration limited to n <= 9")
    if n < 1:
        raise ValueError("n must be >= 1")
    if scheme.w.term(0) != 0.0:
        raise ValueError("brute force oracle requires w_0 = 0")
    v_cache = [scheme.v.term(k) for k in range(n + 1)]
    w_cache = [scheme.w.term(k) for k in range(n + 1)]
    fact = [math.factorial(k) for k in range(n + 1)]
    count_weight = np.zeros(n + 1)
    multiset_weight: dict[tuple[int, ...], float] = {}
    total = 0.0
    for sizes in _set_partitions(n):
        k = len(sizes)
        u = fact[k] * v_cache[k]
        if u == 0.0:
            continue
        for s in sizes:
            u *= fact[s] * w_cache[s]
            if u == 0.0:
                break
        if u == 0.0:
            continue
        total += u
        count_weight[k] += u
        key = tuple(sorted(sizes, reverse=True))
        multiset_weight[key] = multiset_weight.get(key, 0.0) + u
    if total <= 0.0:
        raise ValueError(f"partition function vanishes at n={n}")
    u_n = total / fact[n]
    law_n = DiscreteLaw(count_weight / total, 1.0)
    multiset_law = {key: val / total for key, val in sorted(multiset_weight.items())}
    return law_n, multiset_law, u_n


def _integer_partitions(n: int, max_part: int | None = None):
    """Yield the integer partitions of n as nonincreasing tuples."""
    if n == 0:
        yield ()
        return
    top = n if max_part is None else min(max_part, n)
    for first in range(top, 0, -1):
        for rest in _integer_partitions(n - first, first):
            yield (first,) + rest


def profile_law(scheme: SchemeSpec, n: int) -> dict[tuple[int, ...], float]:
    """Law of the multiset of component sizes via the count-law formula.

    P(profile) = r! v_r / u_n * prod_i w_i^(n_i) / n_i!  over the integer
    partitions of n, with u_n from the series composition.  An independent
    route to the same object the set-partition enumeration produces.
    Requires w_0 = 0.
    """
    if scheme.w.term(0) != 0.0:
        raise ValueError("profile law requires w_0 = 0")
    if n > 40:
        raise BudgetExceededError("profile enumeration limited to n <= 40")
    from .series import compose

    u_n = compose(scheme.v, scheme.w, n)[n]
    if u_n <= 0:
        raise ValueError(f"partition function vanishes at n={n}")
    out: dict[tuple[int, ...], float] = {}
    for sizes in _integer_partitions(n):
        r = len(sizes)
        weight = math.factorial(r) * scheme.v.term(r) / u_n
        if weight == 0.0:
            continue
        mult: dict[int, int] = {}
        for s in sizes:
            mult[s] = mult.get(s, 0) + 1
        for s, cnt in mult.items():
            weight *= scheme.w.term(s) ** cnt / math.factorial(cnt)
            if weight == 0.0:
                break
        if weight > 0.0:
            out[sizes] = weight
    return out


# ---------------------------------------------------------------------------
# prefix laws


@dataclass
class PrefixLaw:
    """Joint law of the first m component sizes (m = 1 or 2).

    ``joint`` has shape (n+1,) or (n+1, n+1); its total mass is
    P(N_n >= m), with the remainder reported as deficit.
    ``tv_to_iid`` is the total variation distance to the i.i.d. product of
    single-component laws.
    """

    joint: np.ndarray
    mass_accounted: float
    tv_to_iid: float


def prefix_law(
    scheme: SchemeSpec, n: int, m: int, rho: float | None = None, method: str = "auto"
) -> PrefixLaw:
    """Joint law P(K_1..K_m = k_1..k_m) of the first m components.

    Equals prod_i P(X=k_i) * sum_{l >= m} P(N=l) P(S_{l-m} = n - sum k_i)
    divided by P(S_N = n); exchangeable, so the coordinate order is
    immaterial.
    """
    if m not in (1, 2):
        raise ValueError("prefix laws implemented for m in {1, 2}")
    if m == 2 and n > 3000:
        raise BudgetExceededError("m=2 joint table limited to n <= 3000")
    # G[x] = sum_{l >= m} P(N=l) P(S_{l-m} = x): weight row j by P(N = j+m).
    probe = _sweep(scheme, n, rho=rho, method=method)
    pmf_n = probe["pmf_n"]
    shifted = pmf_n[m:].copy()
    res = _sweep(scheme, n, rho=rho, method=method, column_weights=[shifted])
    green = res["green"][0]
    denom = float(np.dot(pmf_n, probe["column"]))
    if denom <= 0:
        raise ValueError(f"partition function vanishes at n={n}")
    px = res["law_x"].pmf
    if m == 1:
        joint = px * green[::-1] / denom  # green[n-k]
        mass = float(joint.sum())
        tv = 0.5 * (float(np.abs(joint - px).sum()) + res["law_x"].deficit)
    else:
        # joint[k1, k2] = P(X=k1) P(X=k2) G[n-k1-k2] / denom
        joint = np.zeros((n + 1, n + 1))
        for k1 in range(n + 1):
            if px[k1] == 0.0:
                continue
            lim = n - k1
            joint[k1, : lim + 1] = px[k1] * px[: lim + 1] * green[lim::-1] / denom
        mass = float(joint.sum())
        iid = np.outer(px, px)
        tv = 0.5 * (float(np.abs(joint - iid).sum()) + max(0.0, 1.0 - float(iid.sum())))
    return PrefixLaw(joint, mass, tv)


# ---------------------------------------------------------------------------
# giant component deficit


def giant_deficit_law(
    scheme: SchemeSpec,
    n: int,
    rho: float | None = None,
    method: str = "auto",
    ell_filter=None,
):
    """Exact law of n - M_n (deficit of the largest component) and its limit.

    The exact pmf covers d < n/2, where the event {M_n = n - d} decomposes
    uniquely into one macroscopic part and l - 1 parts summing to d (the
    "sizes <= n/2 split"); the remaining mass P(n - M_n >= n/2) stays in the
    deficit bookkeeping.  The limit law is that of a sum of N-hat - 1
    independent component sizes.

    ``ell_filter`` optionally restricts the count to l in [lo, hi) for the
    conditional variants; the exact law is then conditioned on that event.
    """
    if n > _DEFICIT_N_CAP:
        raise BudgetExceededError(f"deficit DP limited to n <= {_DEFICIT_N_CAP}")
    rho = default_rho(scheme, n) if rho is None else rho
    d_max = (n - 1) // 2
    full = _sweep(scheme, n, rho=rho, method=method)
    pmf_n = full["pmf_n"]
    column = full["column"]
    if ell_filter is not None:
        lo, hi = ell_filter
        mask = np.zeros_like(pmf_n)
        sl = slice(max(lo, 0), min(hi, pmf_n.size))
        mask[sl] = 1.0
        denom = float(np.dot(pmf_n * mask, column))
        weights_exact = (pmf_n * mask)[1:] * np.arange(1, pmf_n.size)
    else:
        denom = float(np.dot(pmf_n, column))
        weights_exact = pmf_n[1:] * np.arange(1, pmf_n.size)
    if denom <= 0:
        raise ValueError("conditioning event has zero probability")

    # G[d] = sum_l P(N=l) l P(S_{l-1} = d): rows only to column d_max needed.
    W = full["W"]
    VW = scheme.v.series_value(W)
    EN = scheme.v.weighted_moment(W, 1) / VW
    nhat = None
    if math.isfinite(EN):
        nhat = np.arange(pmf_n.size) * pmf_n / EN
    lx_small = law_X(scheme, rho, d_max)
    kernel = _trim(lx_small.pmf)
    direct = _use_direct(d_max, kernel.size, method)
    g_exact = np.zeros(d_max + 1)
    g_limit = np.zeros(d_max + 1)
    row = np.zeros(d_max + 1)
    row[0] = 1.0
    # Row j holds P(S_j = d); with no zero-size components rows past d_max
    # vanish on the kept columns.
    if float(full["law_x"].pmf[0]) == 0.0:
        cap = min(weights_exact.size - 1, d_max)
    else:
        cap = weights_exact.size - 1
    for j in range(cap + 1):  # j = l - 1 small summands
        if weights_exact[j] != 0.0:
            g_exact += weights_exact[j] * row
        if nhat is not None and j + 1 < nhat.size and nhat[j + 1] != 0.0:
            g_limit += nhat[j + 1] * row
        if j < cap:
            row = _conv_row(row, kernel, d_max, direct)

    px_full = full["law_x"].pmf
    big = px_full[n - d_max : n + 1][::-1]  # P(X = n - d), d = 0..d_max
    pmf_exact = g_exact * big / denom
    exact = DiscreteLaw(pmf_exact, float(pmf_exact.sum()))
    limit = DiscreteLaw(g_limit, float(g_limit.sum())) if nhat is not None else None
    return exact, limit


# ---------------------------------------------------------------------------
# product structures


@dataclass
class ProductLaw:
    """Coordinate marginals of (P_1..P_l) and the macroscopic-index limits."""

    marginals: list[DiscreteLaw]
    p: tuple[float, ...] | None
    o_n: float


def _tail_class(seq: WeightSequence):
    """(rho, e, log_exp, c): smaller rho, then smaller e, then larger log_exp
    means an asymptotically heavier coefficient tail."""
    if seq.is_explicit:
        return None
    return (seq.rho, seq.e, seq.L.log_exp, seq.L.c)


def product_law(factors, n: int) -> ProductLaw:
    """Exact coordinate marginals of the conditioned product structure.

    The laws are computed from truncated series after a common tilt to the
    smallest factor radius (distributionally a no-op); the macroscopic-index
    probabilities p_k come from the closed-form tail classes and satisfy
    sum p_k = 1 by construction, which is asserted rather than enforced.
    """
    factors = list(factors)
    if len(factors) < 2:
        raise ValueError("product structures need at least two factors")
    radii = [f.radius() for f in factors]
    t = min(r for r in radii if math.isfinite(r)) if any(map(math.isfinite, radii)) else 1.0
    tilted = [f.tilt(t) for f in factors]
    arrays = [np.array([f.term(k) for k in range(n + 1)]) for f in tilted]
    # suffix[j] = conv of arrays[j:], prefix[j] = conv of arrays[:j]
    ell = len(arrays)
    prefix = [None] * (ell + 1)
    suffix = [None] * (ell + 1)
    unit = np.zeros(n + 1)
    unit[0] = 1.0
    prefix[0] = unit
    for j in range(ell):
        prefix[j + 1] = np.convolve(prefix[j], arrays[j])[: n + 1]
    suffix[ell] = unit
    for j in range(ell - 1, -1, -1):
        suffix[j] = np.convolve(arrays[j], suffix[j + 1])[: n + 1]
    o_n = float(suffix[0][n])
    if o_n <= 0:
        raise ValueError(f"product partition function vanishes at n={n}")
    marginals = []
    for j in range(ell):
        others = np.convolve(prefix[j], suffix[j + 1])[: n + 1]
        pmf = arrays[j] * others[::-1] / o_n
        marginals.append(DiscreteLaw(pmf, float(pmf.sum())))

    p = None
    if all(not f.is_explicit for f in factors):
        rho_o = min(radii)
        classes = [_tail_class(f) for f in factors]
        heaviest = min(classes, key=lambda cl: (cl[0], cl[1], -cl[2]))
        w_vals = []
        for f, cl in zip(factors, classes):
            wf = f.series_value(rho_o)
            if not math.isfinite(wf):
                raise ValueError("factor series diverges at the product radius")
            in_class = cl[0] == heaviest[0] and cl[1] == heaviest[1] and cl[2] == heaviest[2]
            w_vals.append(cl[3] / wf if in_class else 0.0)
        total = sum(w_vals)
        p = tuple(x / total for x in w_vals)
        assert abs(sum(p) - 1.0) < 1e-12
    return ProductLaw(marginals, p, o_n)
