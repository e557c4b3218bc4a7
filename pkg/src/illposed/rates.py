"""Algebra of decay rates and modulus-of-continuity classes.

Two symbolic families cover everything the laboratory needs: polynomial
decay c*k^(-m) and stretched-exponential decay C*exp(-rho*k^mu).  The
module translates singular-value rates into entropy rates, entropy-rate
pairs into modulus lower bounds, composes rates under operator
composition, runs the N-fold self-composition optimization that turns a
small per-step regularity gain into a stretched-exponential law, and
catalogues the closed-form exponents of the model problems.

Amplitudes and coefficients are tracked through every operation but are
certified only "up to absolute constants" (``exact_constants=False``)
whenever a translation step does not pin them; exponents are always exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np


class RateError(ValueError):
    """Invalid rate parameters or an ill-typed rate operation."""


@dataclass(frozen=True)
class Rate:
    """A one-sided decay law for a nonnegative sequence indexed k = 1, 2, ...

    variant "poly":       amplitude * k^(-exponent)
    variant "stretched":  amplitude * exp(-coefficient * k^exponent)

    ``direction`` records whether the law is an upper or a lower bound, so
    composition rules never mix an upper bound into a lower-bound slot.
    """

    variant: str
    amplitude: float
    exponent: float
    coefficient: float = 1.0
    direction: str = "upper"
    exact_constants: bool = True

    def __post_init__(self):
        if self.variant not in ("poly", "stretched"):
            raise RateError(f"unknown rate variant {self.variant!r}")
        if self.direction not in ("upper", "lower"):
            raise RateError(f"direction must be 'upper' or 'lower', got {self.direction!r}")
        if self.amplitude <= 0:
            raise RateError("amplitude must be positive")
        if self.variant == "stretched" and (self.coefficient <= 0 or self.exponent <= 0):
            raise RateError("stretched rate needs coefficient > 0 and exponent > 0")
        if self.variant == "poly" and self.exponent < 0:
            raise RateError("poly rate needs exponent >= 0")

    def evaluate(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        if self.variant == "poly":
            return self.amplitude * k**-self.exponent
        return self.amplitude * np.exp(-self.coefficient * k**self.exponent)

    def to_json_dict(self) -> dict:
        return {
            "variant": self.variant,
            "amplitude": self.amplitude,
            "exponent": self.exponent,
            "coefficient": self.coefficient,
            "direction": self.direction,
            "exact_constants": self.exact_constants,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @staticmethod
    def from_json_dict(d: dict) -> "Rate":
        return Rate(
            d["variant"],
            d["amplitude"],
            d["exponent"],
            d.get("coefficient", 1.0),
            d.get("direction", "upper"),
            d.get("exact_constants", True),
        )


def poly_rate(exponent: float, amplitude: float = 1.0, direction: str = "upper") -> Rate:
    return Rate("poly", amplitude, exponent, direction=direction)


def stretched_rate(
    exponent: float, coefficient: float = 1.0, amplitude: float = 1.0, direction: str = "upper"
) -> Rate:
    return Rate("stretched", amplitude, exponent, coefficient, direction=direction)


@dataclass(frozen=True)
class ModulusBound:
    """A lower bound on a modulus of continuity omega(t) as t -> 0+.

    variant "holder":  t^alpha            (param = alpha in (0, 1])
    variant "log":     |log t|^(-mu)      (param = mu > 0)
    variant "logexp":  exp(-c|log t|^beta)  (param = beta > 0, constant c > 0)
    """

    variant: str
    param: float
    constant: float = 1.0
    direction: str = "lower"
    exact_constants: bool = True

    def __post_init__(self):
        if self.variant not in ("holder", "log", "logexp"):
            raise RateError(f"unknown modulus variant {self.variant!r}")
        if self.direction != "lower":
            raise RateError("modulus bounds are lower bounds")
        if self.variant == "holder" and not 0 < self.param <= 1:
            raise RateError("holder exponent must lie in (0, 1]")
        if self.variant in ("log", "logexp") and self.param <= 0:
            raise RateError("modulus exponent must be positive")
        if self.constant <= 0:
            raise RateError("modulus constant must be positive")

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0) or np.any(t >= 1):
            raise RateError("modulus curves are evaluated for t in (0, 1)")
        if self.variant == "holder":
            return t**self.param
        if self.variant == "log":
            return np.abs(np.log(t)) ** -self.param
        return np.exp(-self.constant * np.abs(np.log(t)) ** self.param)

    def to_json_dict(self) -> dict:
        return {
            "variant": self.variant,
            "param": self.param,
            "constant": self.constant,
            "direction": self.direction,
            "exact_constants": self.exact_constants,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "ModulusBound":
        return ModulusBound(
            d["variant"], d["param"], d.get("constant", 1.0), d.get("direction", "lower"),
            d.get("exact_constants", True),
        )


def singular_to_entropy(r: Rate) -> Rate:
    """Translate a singular-value rate into the induced entropy-number rate.

    Polynomial rates keep their exponent; a stretched rate with exponent mu
    becomes one with exponent mu/(1+mu).  Constants survive only up to
    absolute factors.
    """
    if r.variant == "poly":
        return replace(r, exact_constants=False)
    mu = r.exponent
    return replace(r, exponent=mu / (1.0 + mu), exact_constants=False)


def entropy_pair_to_modulus(lower_i: Rate, upper_j: Rate) -> ModulusBound:
    """Modulus lower bound from an entropy pair.

    ``lower_i`` is a lower bound on the entropy numbers of the a-priori-set
    inclusion; ``upper_j`` an upper bound on those of the image-space
    inclusion.  The combinations are
        (poly m, poly s)        -> holder(m/s),
        (poly m, stretched a)   -> log(m/a),
        (stretched b, stretched a) -> logexp(b/a).
    """
    if lower_i.direction != "lower":
        raise RateError("first argument must be a lower bound")
    if upper_j.direction != "upper":
        raise RateError("second argument must be an upper bound")
    if lower_i.variant == "poly" and upper_j.variant == "poly":
        alpha = lower_i.exponent / upper_j.exponent
        if alpha > 1:
            alpha = 1.0  # a modulus steeper than Lipschitz is reported as Lipschitz
        return ModulusBound("holder", alpha, exact_constants=False)
    if lower_i.variant == "poly" and upper_j.variant == "stretched":
        return ModulusBound("log", lower_i.exponent / upper_j.exponent, exact_constants=False)
    if lower_i.variant == "stretched" and upper_j.variant == "stretched":
        return ModulusBound("logexp", lower_i.exponent / upper_j.exponent, exact_constants=False)
    raise RateError(
        f"unsupported entropy pair ({lower_i.variant} lower, {upper_j.variant} upper)"
    )


# --- closed-form exponent catalogue -------------------------------------

def _pos(name, value):
    if value <= 0:
        raise RateError(f"{name} must be positive, got {value}")
    return float(value)


def _dim(name, value):
    v = int(value)
    if v < 1:
        raise RateError(f"{name} must be a dimension >= 1, got {value}")
    return v


_CATALOGUE = {}


def _catalogued(name, formula):
    def register(fn):
        fn.formula = formula
        _CATALOGUE[name] = fn
        return fn

    return register


@_catalogued("lowreg_sobolev", "m*(mu+1)/mu")
def _lowreg_sobolev(m, mu):
    return _pos("m", m) * (_pos("mu", mu) + 1.0) / mu


@_catalogued("lowreg_calderon", "m*(mu+2)/mu")
def _lowreg_calderon(m, mu):
    return _pos("m", m) * (_pos("mu", mu) + 2.0) / mu


@_catalogued("backward_heat_modulus", "ell*(n+4)/(2*n)")
def _backward_heat_modulus(ell, n):
    return _pos("ell", ell) * (_dim("n", n) + 4.0) / (2.0 * n)


@_catalogued("backward_heat_time_indep", "(n+2)/(2*n)")
def _backward_heat_time_indep(n):
    n = _dim("n", n)
    return (n + 2.0) / (2.0 * n)


@_catalogued("calderon_lowreg_eps", "n/(delta*(2*n+1))")
def _calderon_lowreg_eps(n, delta):
    n = _dim("n", n)
    return n / (_pos("delta", delta) * (2.0 * n + 1.0))


@_catalogued("calderon_analytic", "delta*(2*n-1)/n")
def _calderon_analytic(n, delta):
    n = _dim("n", n)
    return _pos("delta", delta) * (2.0 * n - 1.0) / n


@_catalogued("ucp_boundary_a", "2*(n-1)/(n+1)")
def _ucp_boundary_a(n):
    n = _dim("n", n)
    if n < 2:
        raise RateError("boundary unique continuation needs n >= 2")
    return 2.0 * (n - 1.0) / (n + 1.0)


@_catalogued("ucp_boundary_b", "(n-1)/n")
def _ucp_boundary_b(n):
    n = _dim("n", n)
    if n < 2:
        raise RateError("boundary unique continuation needs n >= 2")
    return (n - 1.0) / n


@_catalogued("radon_limited", "delta*(2*mu+1)/2")
def _radon_limited(delta, mu):
    if mu <= 1:
        raise RateError("limited-data exponent needs a regularity index mu > 1")
    return _pos("delta", delta) * (2.0 * float(mu) + 1.0) / 2.0


@_catalogued("control_cost_eps", "(1/delta)*n/(n+2)")
def _control_cost_eps(n, delta):
    n = _dim("n", n)
    return (1.0 / _pos("delta", delta)) * n / (n + 2.0)


@_catalogued("carleman_lower", "mu*s")
def _carleman_lower(mu, s):
    return _pos("mu", mu) * _pos("s", s)


@_catalogued("dn_smoothing", "delta*(2*sigma*dim_out+1)/dim_in")
def _dn_smoothing(delta, sigma, dim_out, dim_in):
    if sigma < 1:
        raise RateError("regularity index sigma must be >= 1")
    return _pos("delta", delta) * (2.0 * float(sigma) * _dim("dim_out", dim_out) + 1.0) / _dim(
        "dim_in", dim_in
    )


@_catalogued("sobolev_smoothing", "delta*(sigma*dim_out+1)/dim_in")
def _sobolev_smoothing(delta, sigma, dim_out, dim_in):
    if sigma < 1:
        raise RateError("regularity index sigma must be >= 1")
    return _pos("delta", delta) * (float(sigma) * _dim("dim_out", dim_out) + 1.0) / _dim(
        "dim_in", dim_in
    )


def theorem_exponent(problem: str, **params) -> float:
    """Evaluate one of the catalogued closed-form exponents.

    Available problems: see ``exponent_catalogue()``.
    """
    try:
        fn = _CATALOGUE[problem]
    except KeyError:
        raise RateError(
            f"unknown problem {problem!r}; known: {sorted(_CATALOGUE)}"
        ) from None
    return float(fn(**params))


def exponent_catalogue() -> dict:
    """Mapping problem name -> closed-form formula string."""
    return {name: fn.formula for name, fn in sorted(_CATALOGUE.items())}


# --- composition --------------------------------------------------------

def compose_rate(a: Rate, c: Rate) -> Rate:
    """Upper rate for sigma_N of a composition from upper rates of the factors.

    Uses sigma_{j+k-1}(A o C) <= sigma_j(A) sigma_k(C) at the balanced split
    j = k = floor((N+1)/2) >= N/2, which turns the split into an explicit
    index-halving penalty on the constants.
    """
    if a.direction != "upper" or c.direction != "upper":
        raise RateError("compose_rate needs two upper bounds")
    exact = a.exact_constants and c.exact_constants
    if a.variant == "poly" and c.variant == "poly":
        m = a.exponent + c.exponent
        return Rate("poly", a.amplitude * c.amplitude * 2.0**m, m, exact_constants=exact)
    if a.variant == "stretched" and c.variant == "stretched":
        mu = min(a.exponent, c.exponent)
        rho = (a.coefficient + c.coefficient) * 2.0**-mu
        return Rate("stretched", a.amplitude * c.amplitude, mu, rho, exact_constants=exact)
    # mixed: the polynomial factor is bounded by its amplitude (k >= 1)
    s = a if a.variant == "stretched" else c
    return Rate(
        "stretched",
        a.amplitude * c.amplitude,
        s.exponent,
        s.coefficient * 2.0**-s.exponent,
        exact_constants=exact,
    )


@dataclass(frozen=True)
class CompositionStep:
    """Per-step singular value law sigma_k <= amplitude * k^(-a) * t^(-b).

    ``t`` is the step length; an N-fold splitting of a unit interval uses
    t = 1/N and index k/N per factor.
    """

    amplitude: float
    index_exponent: float  # a
    step_cost_exponent: float  # b

    def __post_init__(self):
        if self.amplitude <= 0 or self.index_exponent <= 0 or self.step_cost_exponent <= 0:
            raise RateError("composition step needs positive amplitude and exponents")


def heat_composition_step(n: int, delta: float = 0.5, amplitude: float = 1.0) -> CompositionStep:
    """Step law for one parabolic smoothing interval in dimension n."""
    n = _dim("n", n)
    delta = _pos("delta", delta)
    return CompositionStep(amplitude, delta / n, delta / 2.0)


def foliation_composition_step(n: int, delta: float = 0.5, amplitude: float = 1.0) -> CompositionStep:
    """Step law for one annular layer of a boundary foliation in dimension n."""
    n = _dim("n", n)
    if n < 2:
        raise RateError("the foliation model needs n >= 2")
    delta = _pos("delta", delta)
    return CompositionStep(amplitude, delta / (n - 1.0), delta)


@dataclass(frozen=True)
class IterationResult:
    """Output of the N-fold self-composition optimization."""

    points: tuple  # (k, N_opt, log_sigma_bound) triples
    rate: Rate  # fitted stretched upper rate (or the bare step rate if max_steps=1)
    fit_exponent: float  # log-log slope of -log sigma_bound against k


def _log_sigma_bound(step: CompositionStep, N: int, k: float) -> float:
    # N-fold product of sigma_{k/N} <= C (k/N)^-a N^b
    C, a, b = step.amplitude, step.index_exponent, step.step_cost_exponent
    return N * (math.log(C) + (a + b) * math.log(N) - a * math.log(k))


def _optimize_steps(step: CompositionStep, k: int, n_max: int) -> tuple:
    """Golden-section search on log N, then exhaustive +-2 refinement."""
    f = lambda N: _log_sigma_bound(step, N, k)
    lo, hi = 0.0, math.log(n_max)
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - gr * (hi - lo)
    x2 = lo + gr * (hi - lo)
    f1, f2 = f(max(1, round(math.exp(x1)))), f(max(1, round(math.exp(x2))))
    for _ in range(60):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - gr * (hi - lo)
            f1 = f(max(1, round(math.exp(x1))))
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + gr * (hi - lo)
            f2 = f(max(1, round(math.exp(x2))))
        if hi - lo < 1e-3:
            break
    n_star = max(1, round(math.exp((lo + hi) / 2.0)))
    best = (f(n_star), n_star)
    for N in range(max(1, n_star - 2), min(n_max, n_star + 2) + 1):
        best = min(best, (f(N), N))
    return best[1], best[0]


def iterate_composition(step: CompositionStep, k_values=None, max_steps: int | None = None) -> IterationResult:
    """Optimize the N-fold self-composition bound over integer N in [1, k].

    For each index k the bound [C (k/N)^(-a) N^b]^N is minimized over N;
    the minima obey -log sigma ~ const * k^(a/(a+b)) and the function
    returns the stretched rate fitted to them.  ``max_steps=1`` disables
    iteration and returns the single-step law itself.
    """
    if max_steps is not None and max_steps < 1:
        raise RateError("max_steps must be >= 1")
    if max_steps == 1:
        rate = Rate("poly", step.amplitude, step.index_exponent, exact_constants=True)
        return IterationResult(points=(), rate=rate, fit_exponent=step.index_exponent)

    if k_values is None:
        k_values = [2**e for e in range(6, 15)]
    k_values = sorted(int(k) for k in k_values)
    if any(k < 2 for k in k_values):
        raise RateError("composition indices must be >= 2")

    points = []
    for k in k_values:
        n_max = k if max_steps is None else min(k, max_steps)
        n_opt, log_sigma = _optimize_steps(step, k, n_max)
        points.append((k, n_opt, log_sigma))

    usable = [(k, ls) for k, _, ls in points if ls < 0]
    if len(usable) < 2:
        raise RateError("composition bound never drops below 1 on the given index range")
    logk = np.log([k for k, _ in usable])
    loglog = np.log([-ls for _, ls in usable])
    mu, logrho = np.polyfit(logk, loglog, 1)
    rate = Rate("stretched", 1.0, float(mu), float(np.exp(logrho)), exact_constants=False)
    return IterationResult(points=tuple(points), rate=rate, fit_exponent=float(mu))
