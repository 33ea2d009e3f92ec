"""Rate and noise budget of a photon-pair source.

Forward model (rates in Hz, window in s)::

    M_S  = eta_S (P + N_S) + B_S
    M_AS = eta_AS (P + N_AS) + B_AS
    C_sg = eta_S eta_AS P
    C_ns = [eta_S eta_AS (P N_S + P N_AS + N_S N_AS)
            + eta_S (P + N_S) B_AS + eta_AS (P + N_AS) B_S + B_S B_AS] * dt

and the zero-delay cross-correlation ``g2 = 1 + C_sg / C_ns``.
"""

from dataclasses import dataclass, replace

from .errors import DomainError, InconsistentMeasurementError, InfeasibleError, NoiselessError


@dataclass(frozen=True)
class RateBudget:
    pair_rate: float
    noise_stokes: float
    noise_antistokes: float
    eta_stokes: float
    eta_antistokes: float
    background_stokes: float
    background_antistokes: float
    window: float
    # Optional split of the noise rates: share due to competing SFWM (Raman) processes
    raman_stokes: float | None = None
    raman_antistokes: float | None = None

    def __post_init__(self):
        rates = (
            self.pair_rate,
            self.noise_stokes,
            self.noise_antistokes,
            self.background_stokes,
            self.background_antistokes,
        )
        if min(rates) < 0:
            raise DomainError("rates must be >= 0")
        for eta in (self.eta_stokes, self.eta_antistokes):
            if not 0.0 < eta <= 1.0:
                raise DomainError("efficiencies must lie in (0, 1]")
        if self.window <= 0:
            raise DomainError("coincidence window must be > 0")
        for raman, total in (
            (self.raman_stokes, self.noise_stokes),
            (self.raman_antistokes, self.noise_antistokes),
        ):
            if raman is not None and not 0.0 <= raman <= total:
                raise DomainError("competing-process noise share must lie in [0, total noise]")

    @property
    def residual_noise(self):
        """Noise not attributed to competing processes, (N_S, N_AS); None if no split given."""
        if self.raman_stokes is None or self.raman_antistokes is None:
            return None
        return self.noise_stokes - self.raman_stokes, self.noise_antistokes - self.raman_antistokes


@dataclass(frozen=True)
class CorrelationSummary:
    g2_cross_peak: float
    g2_ss: float
    g2_asas: float
    cs_factor: float
    g2_heralded: float

    @classmethod
    def from_measurements(cls, g2_cross, g2_ss, g2_asas):
        return cls(
            g2_cross_peak=g2_cross,
            g2_ss=g2_ss,
            g2_asas=g2_asas,
            cs_factor=cs_violation(g2_cross, g2_ss, g2_asas),
            g2_heralded=heralded_g2(g2_asas, g2_cross),
        )


def forward_singles(b):
    m_s = b.eta_stokes * (b.pair_rate + b.noise_stokes) + b.background_stokes
    m_as = b.eta_antistokes * (b.pair_rate + b.noise_antistokes) + b.background_antistokes
    return m_s, m_as


def forward_coincidences(b):
    """Signal and accidental coincidence rates (C_sg, C_ns) within the window."""
    es, ea = b.eta_stokes, b.eta_antistokes
    p, ns, na = b.pair_rate, b.noise_stokes, b.noise_antistokes
    bs, ba = b.background_stokes, b.background_antistokes
    c_sg = es * ea * p
    c_ns = (
        es * ea * (p * ns + p * na + ns * na)
        + es * (p + ns) * ba
        + ea * (p + na) * bs
        + bs * ba
    ) * b.window
    return c_sg, c_ns


def g2_peak(b):
    c_sg, c_ns = forward_coincidences(b)
    if c_ns == 0:
        raise NoiselessError("no accidental coincidences: g2 diverges for a noiseless ideal source")
    return 1.0 + c_sg / c_ns


def accidental_noise_share(b):
    """Fraction of C_ns coming from noise-noise photon pairs."""
    _, c_ns = forward_coincidences(b)
    if c_ns == 0:
        return 0.0
    nn = b.eta_stokes * b.eta_antistokes * b.noise_stokes * b.noise_antistokes * b.window
    return nn / c_ns


def _coincidences_given_pairs(p, xs, xa, es, ea, bs, ba, dt):
    # P + N = x is pinned by the singles; substitute into C_sg + C_ns.
    return es * ea * p + dt * (es * ea * (xs * xa - p * p) + es * xs * ba + ea * xa * bs + bs * ba)


def solve_budget(m_s, m_as, c, eta_s, eta_as, b_s, b_as, window):
    """Invert measured singles and coincidences into (P, N_S, N_AS).

    Bisection on P over [0, min((M - B) / eta)], run until the bracket stops
    shrinking; the substituted coincidence equation is increasing on that
    interval whenever P < 1 / (2 window).
    """
    if not (0 < eta_s <= 1 and 0 < eta_as <= 1) or window <= 0:
        raise DomainError("efficiencies must lie in (0, 1] and the window must be > 0")
    if min(b_s, b_as) < 0:
        raise DomainError("backgrounds must be >= 0")
    if c <= 0:
        raise InconsistentMeasurementError("coincidence rate must be > 0")
    if m_s <= b_s or m_as <= b_as:
        raise InconsistentMeasurementError("singles must exceed the background rates")

    xs = (m_s - b_s) / eta_s
    xa = (m_as - b_as) / eta_as
    p_max = min(xs, xa)
    if p_max >= 0.5 / window:
        raise InfeasibleError("pair rate bound exceeds the window-limited monotone range")

    def excess(p):
        return _coincidences_given_pairs(p, xs, xa, eta_s, eta_as, b_s, b_as, window) - c

    lo, hi = 0.0, p_max
    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo > 0:
        raise InconsistentMeasurementError(
            f"coincidences ({c:.6g} Hz) below the accidental floor implied by the singles "
            f"({c + f_lo:.6g} Hz)"
        )
    if f_hi < 0:
        raise InfeasibleError(
            f"coincidences ({c:.6g} Hz) need a pair rate above the singles bound "
            f"(M - B) / eta = {p_max:.6g} Hz"
        )
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if excess(mid) < 0:
            lo = mid
        else:
            hi = mid
    p = lo if abs(excess(lo)) <= abs(excess(hi)) else hi
    return p, max(xs - p, 0.0), max(xa - p, 0.0)


def budget_from_measurements(m_s, m_as, c, eta_s, eta_as, b_s, b_as, window):
    p, ns, na = solve_budget(m_s, m_as, c, eta_s, eta_as, b_s, b_as, window)
    return RateBudget(p, ns, na, eta_s, eta_as, b_s, b_as, window)


def cs_violation(g2_cross, g2_ss, g2_asas):
    """Cauchy-Schwarz factor g2_cross^2 / (g2_ss g2_asas); > 1 is nonclassical."""
    if min(g2_cross, g2_ss, g2_asas) <= 0:
        raise DomainError("correlation values must be > 0")
    return g2_cross**2 / (g2_ss * g2_asas)


def heralded_g2(g2_asas, g2_cross):
    """Heralded anti-Stokes autocorrelation estimate 2 g2_asas / g2_cross."""
    if g2_cross <= 0:
        raise DomainError("g2_cross must be > 0")
    return 2.0 * g2_asas / g2_cross


def background_correct(g2_raw, m_s, m_as, b_s, b_as):
    """Rescale the excess correlation after removing uncorrelated background singles."""
    if m_s <= b_s or m_as <= b_as:
        raise InfeasibleError("singles must exceed the background rates")
    return 1.0 + (g2_raw - 1.0) * (m_s * m_as) / ((m_s - b_s) * (m_as - b_as))


def scale_budget(b, density_factor=1.0, power_factor=1.0):
    """Scale pair and noise rates linearly with atom number and pump power."""
    if density_factor <= 0 or power_factor <= 0:
        raise DomainError("scale factors must be > 0")
    k = density_factor * power_factor
    return replace(
        b,
        pair_rate=b.pair_rate * k,
        noise_stokes=b.noise_stokes * k,
        noise_antistokes=b.noise_antistokes * k,
        raman_stokes=None if b.raman_stokes is None else b.raman_stokes * k,
        raman_antistokes=None if b.raman_antistokes is None else b.raman_antistokes * k,
    )
