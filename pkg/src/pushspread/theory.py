"""Broadcast-time constants and the deterministic mean-field recursion.

The recursion tracks ``p`` (unexposed clone-ends of informed vertices) and
``u`` (uninformed vertices)::

    f      = 1 - p / (d (p + d u))
    p'     = (1 - 1/d) f p + d u (f - f**d)
    u'     = f**d u
"""

import logging
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import DivergenceError, DomainError, InputError
from .push import phase_threshold

log = logging.getLogger(__name__)

DRIFT_CHECK_EVERY = 64
DRIFT_ALARM = 1e-8
COMPLETE_GRAPH_CONSTANT = 1 / math.log(2) + 1


def c_d(d):
    """Leading constant of the broadcast time on random d-regular graphs."""
    if d <= 2:
        raise DomainError(f"C_d is defined for d > 2, got {d}")
    return 1 / math.log(2 * (1 - 1 / d)) - 1 / (d * math.log(1 - 1 / d))


def f_of(p, u, d):
    if p < 0 or u < 0:
        raise DomainError("p and u must be nonnegative")
    if p + d * u <= 0:
        raise DomainError("f undefined at p = u = 0")
    return 1 - p / (d * (p + d * u))


def step(p, u, d):
    f = f_of(p, u, d)
    delta = p / (d * (p + d * u))
    # f - f**d = f (1 - f**(d-1)); the expm1 form keeps it accurate when f ~ 1
    one_minus = -math.expm1((d - 1) * math.log1p(-delta))
    return (1 - 1 / d) * f * p + d * u * f * one_minus, f**d * u, f


def _step_mp(p, u, d):
    with mpmath.workdps(50):
        p, u = mpmath.mpf(p), mpmath.mpf(u)
        f = 1 - p / (d * (p + d * u))
        fd = f**d
        return (1 - mpmath.mpf(1) / d) * f * p + d * u * (f - fd), fd * u


def g_ratio(x, d):
    """Growth factor r'/r of the ratio r = p/u as a function of r.

    g(x) = (1 - 1/d + d/x) (1 - 1/(d (1 + d/x)))**(1-d) - d/x, with g(0) taken
    as its limit 2(1 - 1/d).
    """
    if x < 0:
        raise DomainError("g is defined for x >= 0")
    if x == 0:
        return 2 * (1 - 1 / d)
    if math.isinf(x):
        return (1 - 1 / d) ** (2 - d)
    y = x / (d * (x + d))
    # T - 1 with T = (1 - y)**(1 - d), kept accurate for tiny y
    tm1 = math.expm1(-(d - 1) * math.log1p(-y))
    return (1 - 1 / d) * (1 + tm1) + (d / x) * tm1


@dataclass
class TheoryParams:
    n: int
    d: int
    p_start: float = None
    u_start: float = None
    eps: float = 0.01
    phase_exponent: float = 7.0

    def __post_init__(self):
        if self.d < 3:
            raise InputError("d >= 3 required")
        tau, _ = phase_threshold(self.n, self.phase_exponent)
        if self.p_start is None:
            self.p_start = self.d * tau
        if self.u_start is None:
            self.u_start = self.n - tau
        if not self.p_start > 0:
            raise InputError("p_start must be positive")
        if not 0 < self.u_start < self.n:
            hint = "; ln(n)^phase_exponent reaches n, lower the exponent" if tau >= self.n else ""
            raise InputError(f"u_start must lie in (0, n){hint}")


@dataclass
class TheoryTrajectory:
    params: TheoryParams
    p: np.ndarray
    u: np.ndarray
    f: np.ndarray
    r: np.ndarray
    t1: int
    t2: int
    middle_length: int
    threshold: float
    envelope_ok: bool = True
    max_drift: float = 0.0
    drift_alarms: list = field(default_factory=list)

    @property
    def steps(self):
        return len(self.p) - 1


def default_horizon(n, d):
    return int(math.ceil(10 * c_d(d) * math.log(n)))


def integrate(params, horizon=None, stop="threshold"):
    """Run the recursion from (p_start, u_start) at relative time 0.

    Stops once u <= threshold (``stop="threshold"``) or after exactly
    ``horizon`` steps (``stop="horizon"``). Marks t_1, the last t with
    q**t <= eps n / threshold (q = 2(1 - 1/d)), and t_2, the first t with
    p >= u ln^2 n, and checks p_t <= p_0 q**t for t <= t_1.
    """
    n, d = params.n, params.d
    limit = default_horizon(n, d)
    if horizon is None:
        horizon = limit
    elif horizon > limit:
        raise InputError(f"horizon {horizon} exceeds the guard 10 C_d ln n = {limit}")
    tau, _ = phase_threshold(n, params.phase_exponent)
    q = 2 * (1 - 1 / d)
    L2 = math.log(n) ** 2
    p, u = float(params.p_start), float(params.u_start)
    ps, us, fs = [p], [u], []
    t2 = None
    envelope_ok = True
    max_drift = 0.0
    alarms = []
    target = params.eps * n / tau
    t1 = max(0, math.floor(math.log(target) / math.log(q))) if target > 1 else 0
    t = 0
    while True:
        if t2 is None and p >= u * L2:
            t2 = t
        if t <= t1 and p > params.p_start * q**t * (1 + 1e-12):
            envelope_ok = False
        if stop == "threshold" and u <= tau:
            break
        if t >= horizon:
            if stop == "horizon":
                break
            raise DivergenceError(f"u did not fall to {tau:.3g} within {horizon} steps")
        if p == 0 and u == 0:
            break
        p_next, u_next, f = step(p, u, d)
        if t % DRIFT_CHECK_EVERY == 0:
            pm, um = _step_mp(p, u, d)
            drift = max(_rel(p_next, pm), _rel(u_next, um))
            max_drift = max(max_drift, drift)
            if drift > DRIFT_ALARM:
                alarms.append((t, drift))
                log.warning("recursion drift %.3g at step %d", drift, t)
        fs.append(f)
        p, u = p_next, u_next
        ps.append(p)
        us.append(u)
        t += 1
    if not envelope_ok:
        raise AssertionError("first-phase envelope p_t <= p_0 q^t violated")
    p_arr, u_arr = np.array(ps), np.array(us)
    f_last = f_of(p, u, d) if p + d * u > 0 else 1 - 1 / d
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(u_arr > 0, p_arr / u_arr, np.inf)
    return TheoryTrajectory(
        params=params,
        p=p_arr,
        u=u_arr,
        f=np.array(fs + [f_last]),
        r=r,
        t1=t1,
        t2=t2,
        middle_length=t,
        threshold=tau,
        envelope_ok=envelope_ok,
        max_drift=max_drift,
        drift_alarms=alarms,
    )


def _rel(x, ref):
    ref = float(ref)
    if ref == 0:
        return abs(x)
    return abs(x - ref) / abs(ref)


@dataclass
class Prediction:
    leading: float
    middle_length: int
    prelim_band: tuple
    final_band: tuple
    band_multiplier: float
    note: str = "bands carry a heuristic multiplier on (ln ln n)^2; the true constant is unspecified"


def predict_T(n, d, band_multiplier=10.0, phase_exponent=7.0):
    """C_d ln n plus a phase breakdown.

    The middle phase is the recursion's length from the default start; the
    preliminary and final phases are O((ln ln n)^2) and reported only as bands.
    """
    if n < 10:
        raise InputError("predict_T needs n >= 10")
    lead = c_d(d) * math.log(n)
    try:
        middle = integrate(TheoryParams(n, d, phase_exponent=phase_exponent)).middle_length
    except (InputError, DivergenceError):
        middle = None
    band = (0.0, band_multiplier * math.log(math.log(n)) ** 2)
    return lead, Prediction(lead, middle, band, band, band_multiplier)
