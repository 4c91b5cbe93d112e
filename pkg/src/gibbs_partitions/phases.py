"""Phase classification of composition schemes.

Decides which asymptotic regime a scheme occupies (dense, convergent,
mixture, dilute, or unclassified) and computes every constant the limit
statements need: the stable index alpha, the mean component size mu, the
scale constant gamma, the evaluation radius rho_u, fluctuation scales, the
mixture weight p, and the dilute rate lambda.

Classification is syntactic on the closed forms (it reads the exponents
a, b, the radii, and the slowly varying factors); it never sniffs
asymptotics numerically, and it reports "unclassified" rather than guess.
Explicit (polynomial) sequences participate only through the special cases
they genuinely support: a polynomial outer series yields a convergent
scheme, a polynomial inner series an aperiodic supercritical dense one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .weights import SchemeSpec, WeightSequence

__all__ = [
    "Phase",
    "Criticality",
    "Scale",
    "PhaseReport",
    "solve_rho_u",
    "mu_of",
    "mixture_p",
    "classify",
]

_CRIT_RTOL = 1e-9


class Phase(str, Enum):
    dense_critical = "dense_critical"
    dense_supercritical = "dense_supercritical"
    convergent = "convergent"
    mixture = "mixture"
    dilute = "dilute"
    unclassified = "unclassified"


class Criticality(str, Enum):
    subcritical = "subcritical"
    critical = "critical"
    supercritical = "supercritical"


@dataclass(frozen=True)
class Scale:
    """Shape of a fluctuation scale.

    ``total(n, alpha)`` evaluates the full scale including the n**(1/alpha)
    growth: a ``constant`` shape means a constant slowly varying part in
    front of n**(1/alpha); ``sqrt_n_log_n`` already embeds the growth
    (the infinite-variance alpha = 2 case); ``power`` is fully explicit.
    """

    shape: str  # "constant" | "sqrt_n_log_n" | "power"
    coeff: float
    exponent: float | None = None

    def total(self, n: float, alpha: float) -> float:
        if self.shape == "constant":
            return self.coeff * n ** (1.0 / alpha)
        if self.shape == "sqrt_n_log_n":
            return self.coeff * math.sqrt(n * math.log(n))
        if self.shape == "power":
            return self.coeff * n**self.exponent
        raise ValueError(f"unknown scale shape {self.shape!r}")

    def to_json(self) -> dict:
        out = {"shape": self.shape, "coeff": self.coeff}
        if self.exponent is not None:
            out["exponent"] = self.exponent
        return out


@dataclass(frozen=True)
class PhaseReport:
    """Classification outcome with every derived constant.

    Absent fields mean the quantity diverges or is not defined in the
    reported phase; they are never replaced by fabricated numbers.
    """

    phase: Phase
    criticality: Criticality
    a: float | None = None
    b: float | None = None
    alpha: float | None = None
    mu: float | None = None
    gamma: float | None = None
    rho_u: float | None = None
    w_value: float | None = None  # W(rho_u)
    c_w: float | None = None
    v_prime: float | None = None  # V'(W(rho_w))
    scale_g: Scale | None = None
    scale_L: Scale | None = None
    mixture_p: float | None = None
    mixture_p_frac: float | None = None
    dilute_lambda: float | None = None
    convergent_condition: str | None = None

    def sn_scale(self, n: float) -> float:
        """Fluctuation scale of the partial sums S_l: g(n) * n**(1/alpha)."""
        if self.scale_g is None or self.alpha is None:
            raise ValueError("no partial-sum scale in this phase")
        return self.scale_g.total(n, self.alpha)

    def nn_scale(self, n: float) -> float:
        """Fluctuation scale of the count N_n: L(n) * n**(1/alpha)."""
        if self.scale_L is None or self.alpha is None:
            raise ValueError("no count scale in this phase")
        return self.scale_L.total(n, self.alpha)

    def to_json(self) -> dict:
        out = {
            "phase": self.phase.value,
            "criticality": self.criticality.value,
            "a": self.a,
            "b": self.b,
            "alpha": self.alpha,
            "mu": self.mu,
            "gamma": self.gamma,
            "rho_u": self.rho_u,
            "w_value": self.w_value,
            "c_w": self.c_w,
            "v_prime": self.v_prime,
            "mixture_p": self.mixture_p,
            "mixture_p_frac": self.mixture_p_frac,
            "dilute_lambda": self.dilute_lambda,
            "convergent_condition": self.convergent_condition,
        }
        for name, scale in (("scale_g", self.scale_g), ("scale_L", self.scale_L)):
            if scale is None:
                out[f"{name}_shape"] = None
                out[f"{name}_coeff"] = None
                out[f"{name}_exponent"] = None
            else:
                out[f"{name}_shape"] = scale.shape
                out[f"{name}_coeff"] = scale.coeff
                out[f"{name}_exponent"] = scale.exponent
        return out


# ---------------------------------------------------------------------------
# elementary scheme quantities


def _w_at_radius(w: WeightSequence) -> float:
    """W evaluated at its radius; +inf for divergent or polynomial-with-tail."""
    if w.is_explicit:
        # A polynomial has infinite radius; W(t) -> inf iff any positive
        # coefficient sits at index >= 1.
        return math.inf if any(c > 0 for c in w.coeffs[1:]) else w.term(0)
    return w.series_value(w.rho)


def criticality_of(scheme: SchemeSpec) -> Criticality:
    w_val = _w_at_radius(scheme.w)
    rho_v = scheme.v.radius()
    if math.isinf(w_val) and math.isinf(rho_v):
        raise ValueError("criticality undefined: both W(rho_w) and rho_v are infinite")
    if math.isinf(rho_v):
        return Criticality.subcritical
    if math.isinf(w_val):
        return Criticality.supercritical
    if abs(w_val - rho_v) <= _CRIT_RTOL * max(rho_v, 1.0):
        return Criticality.critical
    return Criticality.subcritical if w_val < rho_v else Criticality.supercritical


def solve_rho_u(scheme: SchemeSpec) -> float:
    """Radius of convergence of U = V(W(.)).

    Critical and subcritical schemes keep rho_u = rho_w; supercritical ones
    solve W(rho_u) = rho_v by bisection (W is strictly increasing) to
    relative tolerance 1e-12.
    """
    crit = criticality_of(scheme)
    rho_w = scheme.w.radius()
    if crit is not Criticality.supercritical:
        return rho_w
    rho_v = scheme.v.radius()
    lo = 0.0
    hi = min(rho_w, 1e18) if math.isinf(rho_w) else rho_w
    if math.isfinite(rho_w) and scheme.w.series_value(rho_w) < rho_v:
        raise ValueError("no root: W(rho_w) < rho_v in a supercritical scheme")
    while math.isinf(scheme.w.series_value(hi)) and hi > 1e-300:
        # keep the bracket where W is finite (divergent at the radius)
        probe = hi * (1 - 1e-9)
        if math.isinf(scheme.w.series_value(probe)):
            hi = 0.5 * (lo + hi) if lo > 0 else hi / 2
        else:
            hi = probe
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = scheme.w.series_value(mid)
        if val < rho_v:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(hi, 1e-300):
            break
    root = 0.5 * (lo + hi)
    return root


def mu_of(scheme: SchemeSpec, rho_u: float) -> float:
    """Mean component size mu = sum_n n w_n rho_u^n / W(rho_u); +inf allowed."""
    W = scheme.w.series_value(rho_u)
    if not math.isfinite(W) or W <= 0:
        raise ValueError(f"W(rho_u) must be positive finite, got {W}")
    m1 = scheme.w.weighted_moment(rho_u, 1)
    return m1 / W


def _v_prime(scheme: SchemeSpec, w_val: float) -> float:
    """V'(W(rho_w)) = sum_l l v_l W^(l-1); +inf when divergent."""
    m1 = scheme.v.weighted_moment(w_val, 1)
    return m1 / w_val if math.isfinite(m1) else math.inf


def _little_o(num: WeightSequence, den: WeightSequence) -> bool:
    """L_num(n) = o(L_den(n)) for the representable log-power factors."""
    return num.L.log_exp < den.L.log_exp


def _gcd_of_support(w: WeightSequence, count: int = 1000, scan: int = 100000) -> int:
    g = 0
    found = 0
    for n in range(1, scan + 1):
        if w.term(n) > 0:
            g = math.gcd(g, n)
            found += 1
            if g == 1 or found >= count:
                break
    return g


def mixture_p(scheme: SchemeSpec) -> tuple[float, float]:
    """The mixture constants (p, p / (1 + p)).

    p = mu^(a-1) / V'(W(rho_w)) * lim L_v(n) / L_w(n).  Both p and the
    alternative candidate p/(1+p) are returned; the stopped-sum asymptotics
    split P(S_N = n) into a dense and a convergent term whose ratio tends
    to p, which makes p/(1+p) the natural candidate for lim P(E_n), and the
    verifier measures which one matches.
    """
    v, w = scheme.v, scheme.w
    if v.is_explicit or w.is_explicit:
        raise ValueError("mixture constants need closed-form sequences")
    if v.L.log_exp != w.L.log_exp:
        raise ValueError("L_v / L_w has no positive finite limit")
    a = w.e
    rho_u = solve_rho_u(scheme)
    mu = mu_of(scheme, rho_u)
    w_val = w.series_value(w.rho)
    vp = _v_prime(scheme, w_val)
    if not math.isfinite(vp) or vp <= 0:
        raise ValueError(f"V'(W(rho_w)) must be positive finite, got {vp}")
    p = mu ** (a - 1.0) / vp * (v.L.c / w.L.c)
    return p, p / (1.0 + p)


# ---------------------------------------------------------------------------
# dense-scale helpers


def _dense_scales(
    scheme: SchemeSpec, rho_u: float, alpha: float, mu: float
) -> tuple[Scale | None, Scale | None]:
    """(scale_g, scale_L) for a dense or mixture scheme; None when the
    constants are not expressible (non-constant L_w in the infinite
    variance cases)."""
    w = scheme.w
    W = w.series_value(rho_u)
    m2 = w.weighted_moment(rho_u, 2)
    if math.isfinite(m2):
        var = m2 / W - mu * mu
        g = Scale("constant", math.sqrt(var / 2.0))
    else:
        if w.is_explicit or not w.L.is_constant:
            return None, None
        c_w = w.L.c
        if alpha == 2.0:
            # K(x) ~ (c_w / W) log x; normalizing to the variance-2 limit
            # gives the combined scale (1/2) sqrt(c_w n log n / W).
            g = Scale("sqrt_n_log_n", 0.5 * math.sqrt(c_w / W))
        else:
            # P(X >= x) ~ c_w / (W alpha) x^-alpha; Levy-measure matching
            # gives g = (c_w |Gamma(1-alpha)| / (W alpha))^(1/alpha).
            g = Scale(
                "constant",
                (c_w * abs(math.gamma(1.0 - alpha)) / (W * alpha)) ** (1.0 / alpha),
            )
    factor = mu ** (-1.0 - 1.0 / alpha)
    L = Scale(g.shape, factor * g.coeff, g.exponent)
    return g, L


def _gamma_dense(alpha: float) -> float:
    return (-math.cos(math.pi * alpha / 2.0)) ** (1.0 / alpha)


# ---------------------------------------------------------------------------
# the classifier


def _convergent_condition(scheme: SchemeSpec, crit: Criticality) -> str | None:
    """First matching sufficient condition (checked syntactically), or None."""
    v, w = scheme.v, scheme.w
    # i) critical, regularly varying, b > 2 and lighter inner tail
    if (
        crit is Criticality.critical
        and not v.is_explicit
        and not w.is_explicit
        and v.e > 2.0
        and (1.0 < w.e < v.e or (w.e == v.e and _little_o(v, w)))
    ):
        return "i"
    # ii) strictly subcritical with a subexponential inner sequence
    if crit is Criticality.subcritical and not w.is_explicit and w.e > 1.0:
        return "ii"
    if crit is not Criticality.critical or w.is_explicit or v.is_explicit:
        return None
    a, b = w.e, v.e
    # iii) E[N^(1+a+delta)] < inf for some delta > 0
    if a > 1.0 and b > 2.0 + a:
        return "iii"
    # iv) constant c_w with one of the moment/subtail conditions
    if w.L.is_constant and a > 1.0:
        if b - (1.0 + a) > 1.0 or (b - (1.0 + a) == 1.0 and v.L.log_exp < -1.0):
            return "iv-a"
        if 1.0 < a < 2.0:
            return "iv-b"
        if a == 2.0 and b > 2.0:
            return "iv-c"
        if 2.0 < a < 3.0 and (b > a or (b == a and v.L.log_exp < w.L.log_exp)):
            return "iv-d"
        if a == 3.0 and (b > 3.0 or (b == 3.0 and v.L.log_exp < 0.0)):
            return "iv-e"
    return None


def classify(scheme: SchemeSpec) -> PhaseReport:
    """Phase decision tree with all derived constants.

    Order: dilute, dense (critical), dense (supercritical), mixture,
    convergent, unclassified.  Divergent prerequisite quantities appear as
    absent fields, never as fabricated numbers.
    """
    v, w = scheme.v, scheme.w
    try:
        crit = criticality_of(scheme)
    except ValueError:
        return PhaseReport(Phase.unclassified, Criticality.subcritical)

    w_val = _w_at_radius(w)
    a = w.e if not w.is_explicit else None
    b = v.e if not v.is_explicit else None

    # --- dilute: critical with both exponents in (1, 2), constant c_w
    if (
        crit is Criticality.critical
        and a is not None
        and b is not None
        and 1.0 < a < 2.0
        and 1.0 < b < 2.0
        and w.L.is_constant
    ):
        alpha = a - 1.0
        c_w = w.L.c
        lam = c_w * math.gamma(1.0 - alpha) / (w_val * alpha)
        gamma = (lam * math.cos(math.pi * alpha / 2.0)) ** (1.0 / alpha)
        return PhaseReport(
            Phase.dilute,
            crit,
            a=a,
            b=b,
            alpha=alpha,
            mu=None,  # E[X] diverges for a < 2
            gamma=gamma,
            rho_u=w.rho,
            w_value=w_val,
            c_w=c_w,
            dilute_lambda=lam,
        )

    # --- dense case i: critical with heavy enough outer tail
    if (
        crit is Criticality.critical
        and a is not None
        and b is not None
        and a > 2.0
        and b > 1.0
        and (b < a or (b == a and _little_o(w, v)))
    ):
        alpha = min(a - 1.0, 2.0)
        rho_u = w.radius()
        mu = mu_of(scheme, rho_u)
        scale_g, scale_L = _dense_scales(scheme, rho_u, alpha, mu)
        return PhaseReport(
            Phase.dense_critical,
            crit,
            a=a,
            b=b,
            alpha=alpha,
            mu=mu,
            gamma=_gamma_dense(alpha),
            rho_u=rho_u,
            w_value=w.series_value(rho_u),
            c_w=w.L.c if w.L.is_constant else None,
            scale_g=scale_g,
            scale_L=scale_L,
        )

    # --- dense case ii: supercritical and aperiodic
    if crit is Criticality.supercritical and b is not None and b > 1.0:
        if _gcd_of_support(w) == 1:
            alpha = 2.0
            rho_u = solve_rho_u(scheme)
            mu = mu_of(scheme, rho_u)
            scale_g, scale_L = _dense_scales(scheme, rho_u, alpha, mu)
            return PhaseReport(
                Phase.dense_supercritical,
                crit,
                a=a,
                b=b,
                alpha=alpha,
                mu=mu,
                gamma=_gamma_dense(alpha),
                rho_u=rho_u,
                w_value=scheme.w.series_value(rho_u),
                c_w=w.L.c if (not w.is_explicit and w.L.is_constant) else None,
                scale_g=scale_g,
                scale_L=scale_L,
            )
        return PhaseReport(Phase.unclassified, crit, a=a, b=b)

    # --- mixture: critical, equal exponents above 2, comparable L's
    if (
        crit is Criticality.critical
        and a is not None
        and b is not None
        and a == b
        and a > 2.0
        and v.L.log_exp == w.L.log_exp
    ):
        vp = _v_prime(scheme, w_val)
        if math.isfinite(vp) and vp > 0:
            alpha = min(a - 1.0, 2.0)
            rho_u = w.radius()
            mu = mu_of(scheme, rho_u)
            p, p_frac = mixture_p(scheme)
            scale_g, scale_L = _dense_scales(scheme, rho_u, alpha, mu)
            return PhaseReport(
                Phase.mixture,
                crit,
                a=a,
                b=b,
                alpha=alpha,
                mu=mu,
                gamma=_gamma_dense(alpha),
                rho_u=rho_u,
                w_value=w_val,
                c_w=w.L.c if w.L.is_constant else None,
                v_prime=vp,
                scale_g=scale_g,
                scale_L=scale_L,
                mixture_p=p,
                mixture_p_frac=p_frac,
            )

    # --- convergent: finite positive V'(W(rho_w)) plus a sufficient condition
    if math.isfinite(w_val) and w_val > 0:
        vp = _v_prime(scheme, w_val)
        if math.isfinite(vp) and vp > 0:
            cond = _convergent_condition(scheme, crit)
            if cond is not None:
                return PhaseReport(
                    Phase.convergent,
                    crit,
                    a=a,
                    b=b,
                    rho_u=w.radius(),
                    w_value=w_val,
                    c_w=w.L.c if (not w.is_explicit and w.L.is_constant) else None,
                    v_prime=vp,
                    convergent_condition=cond,
                )

    return PhaseReport(Phase.unclassified, crit, a=a, b=b)
