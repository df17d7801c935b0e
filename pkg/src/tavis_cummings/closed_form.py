"""Closed-form propagators exp(-i tau B_j) for j = 1/2, 1, 3/2, 2.

Each propagator is an :class:`OperatorValuedMatrix`: a small matrix whose
entries are normal-ordered terms ``phi(N + c) a^k`` (or ``(a^dagger)^k``).
Materializing on a truncated Fock space gives the exact matrix elements of
the infinite-dimensional operator between the retained photon states.

Scalar coefficient families are written in terms of eigenvalue functions
``lambda(N)`` that can be zero or negative at small N.  Every family only
involves cos(tau sqrt(lam)), sin(tau sqrt(lam)) / sqrt(lam) and
sqrt(lam) sin(tau sqrt(lam)), which are entire in ``lam``; they are evaluated
with the principal complex square root plus series near ``lam = 0``, so the
results stay real on every reachable argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .decomposition import block_operator, conjugate_atomic, decomposition
from .operators import ModelParams, _check_atoms, excitation_values

HALF = Fraction(1, 2)
ONE = Fraction(1)
THREE_HALF = Fraction(3, 2)
TWO = Fraction(2)

_SMALL = 1e-4


def _sinc(x):
    """sin(x)/x for complex arrays, with a series near the origin."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < _SMALL
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1 - x2 / 6 + x2 * x2 / 120, np.sin(safe) / safe)


def _csqrt(lam):
    return np.sqrt(np.asarray(lam, dtype=complex))


def cos_root(tau, lam):
    """cos(tau sqrt(lam))."""
    return np.cos(tau * _csqrt(lam))


def sin_over_root(tau, lam):
    """sin(tau sqrt(lam)) / sqrt(lam); equals tau at lam = 0."""
    return tau * _sinc(tau * _csqrt(lam))


def root_sin(tau, lam):
    """sqrt(lam) sin(tau sqrt(lam))."""
    return np.asarray(lam, dtype=complex) * sin_over_root(tau, lam)


def cos_minus_one_over(tau, lam):
    """(cos(tau sqrt(lam)) - 1) / lam; equals -tau^2/2 at lam = 0."""
    return -0.5 * tau**2 * _sinc(0.5 * tau * _csqrt(lam)) ** 2


def _ladder_factor(m_in, m_out):
    """sqrt(max! / min!) for the Fock-basis matrix element of a^k or (a^dagger)^k."""
    lo = np.minimum(m_in, m_out)
    hi = np.maximum(m_in, m_out)
    out = np.ones(lo.shape)
    for step in range(int(np.max(hi - lo, initial=0))):
        out *= np.where(lo + step < hi, np.sqrt(lo + step + 1.0), 1.0)
    return out


@dataclass(frozen=True)
class LadderMonomial:
    """``scale * coeff(N + offset) * a^shift`` (``(a^dagger)^-shift`` if shift < 0).

    ``coeff`` takes an integer array and returns a (nominally real) array.
    """

    shift: int
    coeff: Callable[[np.ndarray], np.ndarray]
    offset: int = 0
    scale: complex = 1.0

    def _support(self, nmax):
        m_in = np.arange(nmax + 1)
        m_out = m_in - self.shift
        ok = (m_out >= 0) & (m_out <= nmax)
        return m_in[ok], m_out[ok]

    def coefficient_values(self, nmax: int):
        """Arguments and raw coefficient values reached on photons 0..nmax."""
        _, m_out = self._support(nmax)
        args = m_out + self.offset
        return args, np.asarray(self.coeff(args), dtype=complex)

    def materialize(self, nmax: int) -> np.ndarray:
        m_in, m_out = self._support(nmax)
        out = np.zeros((nmax + 1, nmax + 1), dtype=complex)
        if m_in.size:
            vals = np.asarray(self.coeff(m_out + self.offset), dtype=complex)
            out[m_out, m_in] = self.scale * vals * _ladder_factor(m_in, m_out)
        return out


def _const(value):
    return lambda N: np.full(np.shape(N), value, dtype=complex)


IDENTITY_TERM = LadderMonomial(0, _const(1.0))


@dataclass
class OperatorValuedMatrix:
    """r x r matrix of sums of :class:`LadderMonomial` terms.

    Materialization orders the result as (matrix row, photon number), which
    is the layout of a spin block inside ``(T (x) 1)^dagger A (T (x) 1)``.
    """

    dim: int
    entries: dict[tuple[int, int], list[LadderMonomial]] = field(default_factory=dict)
    spin: Fraction | None = None
    tau: float | None = None

    def add(self, r, c, term: LadderMonomial):
        self.entries.setdefault((r, c), []).append(term)
        return self

    def materialize(self, nmax: int) -> np.ndarray:
        P = nmax + 1
        out = np.zeros((self.dim, P, self.dim, P), dtype=complex)
        for (r, c), terms in self.entries.items():
            for term in terms:
                out[r, :, c, :] += term.materialize(nmax)
        return out.reshape(self.dim * P, self.dim * P)

    def coefficient_values(self, nmax: int) -> list[tuple[tuple[int, int], np.ndarray, np.ndarray]]:
        return [
            ((r, c), *term.coefficient_values(nmax))
            for (r, c), terms in self.entries.items()
            for term in terms
        ]


# ---------------------------------------------------------------------------
# one and two atoms


def propagator_b_half(tau: float) -> OperatorValuedMatrix:
    """exp(-i tau B_{1/2}) (single-atom Rabi form)."""
    C = lambda N: cos_root(tau, N)
    S = lambda N: sin_over_root(tau, N)
    U = OperatorValuedMatrix(2, spin=HALF, tau=tau)
    U.add(0, 0, LadderMonomial(0, C, offset=1))
    U.add(0, 1, LadderMonomial(1, S, offset=1, scale=-1j))
    U.add(1, 0, LadderMonomial(-1, S, offset=0, scale=-1j))
    U.add(1, 1, LadderMonomial(0, C, offset=0))
    return U


def b_one_f(tau, N):
    """(cos(tau sqrt(2(2N+1))) - 1) / 2."""
    return 0.5 * (cos_root(tau, 2 * (2 * np.asarray(N) + 1)) - 1)


def b_one_h(tau, N):
    """sin(tau sqrt(2(2N+1))) / sqrt(2N+1)."""
    return np.sqrt(2.0) * sin_over_root(tau, 2 * (2 * np.asarray(N) + 1))


def propagator_b_one(tau: float) -> OperatorValuedMatrix:
    """exp(-i tau B_1); coefficients written in the sector argument M."""
    f = lambda M: b_one_f(tau, M)
    h = lambda M: b_one_h(tau, M)
    U = OperatorValuedMatrix(3, spin=ONE, tau=tau)
    # row 0 uses M = N + 1, row 2 uses M = N - 1
    U.add(0, 0, LadderMonomial(0, lambda M: 1 + 2 * M / (2 * M + 1) * f(M), offset=1))
    U.add(0, 1, LadderMonomial(1, h, offset=1, scale=-1j))
    U.add(0, 2, LadderMonomial(2, lambda M: 2 / (2 * M + 1) * f(M), offset=1))
    U.add(1, 0, LadderMonomial(-1, h, offset=0, scale=-1j))
    U.add(1, 1, LadderMonomial(0, lambda M: 1 + 2 * f(M), offset=0))
    U.add(1, 2, LadderMonomial(1, h, offset=0, scale=-1j))
    U.add(2, 0, LadderMonomial(-2, lambda M: 2 / (2 * M + 1) * f(M), offset=-1))
    U.add(2, 1, LadderMonomial(-1, h, offset=-1, scale=-1j))
    U.add(2, 2, LadderMonomial(0, lambda M: 1 + (2 * M + 2) / (2 * M + 1) * f(M), offset=-1))
    return U


# ---------------------------------------------------------------------------
# three atoms


class Spectral3:
    """Eigenvalue and weight functions of the spin-3/2 block."""

    def __init__(self, tau: float = 0.0):
        self.tau = tau

    @staticmethod
    def d(N):
        N = np.asarray(N, dtype=float)
        return 16 * N**2 + 9

    def lam(self, N, sign):
        return 5 * np.asarray(N, dtype=float) + sign * np.sqrt(self.d(N))

    def v(self, N, sign):
        return -2 * np.asarray(N, dtype=float) - 3 + sign * np.sqrt(self.d(N))

    def w(self, N, sign):
        return 2 * np.asarray(N, dtype=float) - 3 + sign * np.sqrt(self.d(N))

    def _norm(self, N):
        return 2 * np.sqrt(self.d(N))

    def _parts(self, N, kernel):
        return kernel(self.tau, self.lam(N, +1)), kernel(self.tau, self.lam(N, -1))

    def _pair(self, N, wp, wm, kernel, swap=False):
        kp, km = self._parts(N, kernel)
        if swap:
            kp, km = km, kp
        return (wp * kp - wm * km) / self._norm(N)

    def f2(self, N):
        return self._pair(N, self.v(N, 1), self.v(N, -1), cos_root)

    def f1(self, N):
        return self._pair(N, self.w(N, 1), self.w(N, -1), cos_root)

    def f0(self, N):
        return self._pair(N, self.v(N, 1), self.v(N, -1), cos_root, swap=True)

    def fm1(self, N):
        return self._pair(N, self.w(N, 1), self.w(N, -1), cos_root, swap=True)

    def h1(self, N):
        return self._pair(N, 1.0, 1.0, cos_root)

    def F1(self, N):
        return self._pair(N, self.w(N, 1), self.w(N, -1), sin_over_root)

    def F0(self, N):
        return self._pair(N, self.v(N, 1), self.v(N, -1), sin_over_root, swap=True)

    def H1(self, N):
        return self._pair(N, 1.0, 1.0, root_sin)

    def H0(self, N):
        return self._pair(N, 1.0, 1.0, sin_over_root)


def propagator_b_three_half(tau: float) -> OperatorValuedMatrix:
    """exp(-i tau B_{3/2}); row r evaluates its coefficients at N + 2 - r."""
    s = Spectral3(tau)
    r3 = np.sqrt(3.0)
    U = OperatorValuedMatrix(4, spin=THREE_HALF, tau=tau)
    table = [
        # (row, col, shift, family, scale)
        (0, 0, 0, s.f2, 1), (0, 1, 1, s.F1, -r3 * 1j), (0, 2, 2, s.h1, 2 * r3), (0, 3, 3, s.H0, -6j),
        (1, 0, -1, s.F1, -r3 * 1j), (1, 1, 0, s.f1, 1), (1, 2, 1, s.H1, -2j), (1, 3, 2, s.h1, 2 * r3),
        (2, 0, -2, s.h1, 2 * r3), (2, 1, -1, s.H1, -2j), (2, 2, 0, s.f0, 1), (2, 3, 1, s.F0, -r3 * 1j),
        (3, 0, -3, s.H0, -6j), (3, 1, -2, s.h1, 2 * r3), (3, 2, -1, s.F0, -r3 * 1j), (3, 3, 0, s.fm1, 1),
    ]
    for r, c, k, fn, scale in table:
        U.add(r, c, LadderMonomial(k, fn, offset=2 - r, scale=scale))
    return U


# ---------------------------------------------------------------------------
# four atoms


class Spectral4:
    """Eigenvalue and weight functions of the spin-2 block.

    ``printed=True`` reproduces two coefficient expressions exactly as they
    were originally printed (see ERRATA.md); the default uses the
    corrected forms that match the exact exponential.
    """

    def __init__(self, tau: float = 0.0, printed: bool = False):
        self.tau = tau
        self.printed = printed

    @staticmethod
    def d(N):
        N = np.asarray(N, dtype=float)
        return 4 * N**2 + 4 * N + 9

    def lam(self, N, sign):
        return 10 * np.asarray(N, dtype=float) + 5 + sign * 3 * np.sqrt(self.d(N))

    def u(self, N, sign):
        return 0.5 * (-3 + sign * np.sqrt(self.d(N)))

    def v(self, N, sign):
        return np.sqrt(1.5) * (2 * np.asarray(N, dtype=float) - 1 + sign * np.sqrt(self.d(N)))

    def w(self, N, sign):
        return np.sqrt(1.5) * (2 * np.asarray(N, dtype=float) + 3 + sign * np.sqrt(self.d(N)))

    def _rd(self, N):
        return np.sqrt(self.d(N))

    def _k(self, N, kernel):
        return kernel(self.tau, self.lam(N, +1)), kernel(self.tau, self.lam(N, -1))

    def f2(self, N):
        Qp, Qm = self._k(N, cos_minus_one_over)
        N = np.asarray(N, dtype=float)
        return 1 + 4 * (N - 1) * (self.u(N, 1) * Qp - self.u(N, -1) * Qm) / self._rd(N)

    def f1(self, N):
        Cp, Cm = self._k(N, cos_root)
        return (self.u(N, 1) * Cp - self.u(N, -1) * Cm) / self._rd(N)

    def f0(self, N):
        Qp, Qm = self._k(N, cos_minus_one_over)
        weight = 2.0 if self.printed else 1.0
        vw_p = self.v(N, 1) * self.w(N, 1)
        vw_m = self.v(N, -1) * self.w(N, -1)
        return 1 + weight * (vw_p * Qp - vw_m * Qm) / self._rd(N)

    def fm1(self, N):
        Cp, Cm = self._k(N, cos_root)
        return (self.u(N, 1) * Cm - self.u(N, -1) * Cp) / self._rd(N)

    def fm2(self, N):
        Qp, Qm = self._k(N, cos_minus_one_over)
        N = np.asarray(N, dtype=float)
        return 1 + 4 * (N + 2) * (self.u(N, 1) * Qm - self.u(N, -1) * Qp) / self._rd(N)

    def h1(self, N):
        Qp, Qm = self._k(N, cos_minus_one_over)
        return 2 * (self.v(N, 1) * Qp - self.v(N, -1) * Qm) / self._rd(N)

    def h0(self, N):
        Cp, Cm = self._k(N, cos_root)
        return (Cp - Cm) / self._rd(N)

    def hm1(self, N):
        Qp, Qm = self._k(N, cos_minus_one_over)
        return 2 * (self.w(N, 1) * Qp - self.w(N, -1) * Qm) / self._rd(N)

    def k0(self, N):
        Qp, Qm = self._k(N, cos_minus_one_over)
        return 4 * (Qp - Qm) / self._rd(N)

    def F1(self, N):
        Sp, Sm = self._k(N, sin_over_root)
        return (self.u(N, 1) * Sp - self.u(N, -1) * Sm) / self._rd(N)

    def Fm1(self, N):
        if self.printed:
            lp, lm = _csqrt(self.lam(N, 1)), _csqrt(self.lam(N, -1))
            num = (self.u(N, 1) / lp * np.sin(self.tau * lm)
                   - self.u(N, -1) / lm * np.sin(self.tau * lp))
            return num / self._rd(N)
        Sp, Sm = self._k(N, sin_over_root)
        return (self.u(N, 1) * Sm - self.u(N, -1) * Sp) / self._rd(N)

    def H1(self, N):
        Sp, Sm = self._k(N, sin_over_root)
        return 2 * (self.v(N, 1) * Sp - self.v(N, -1) * Sm) / self._rd(N)

    def H0(self, N):
        Sp, Sm = self._k(N, sin_over_root)
        return (Sp - Sm) / self._rd(N)

    def Hm1(self, N):
        Sp, Sm = self._k(N, sin_over_root)
        return 2 * (self.w(N, 1) * Sp - self.w(N, -1) * Sm) / self._rd(N)


def propagator_b_two(tau: float, printed: bool = False) -> OperatorValuedMatrix:
    """exp(-i tau B_2); row r evaluates its coefficients at N + 2 - r."""
    s = Spectral4(tau, printed=printed)
    U = OperatorValuedMatrix(5, spin=TWO, tau=tau)
    even = [
        (0, 0, s.f2), (0, 2, s.h1), (0, 4, s.k0),
        (1, 1, s.f1), (1, 3, s.h0),
        (2, 0, s.h1), (2, 2, s.f0), (2, 4, s.hm1),
        (3, 1, s.h0), (3, 3, s.fm1),
        (4, 0, s.k0), (4, 2, s.hm1), (4, 4, s.fm2),
    ]
    odd = [
        (0, 1, s.F1, -2j), (0, 3, s.H0, -2j),
        (1, 0, s.F1, -2j), (1, 2, s.H1, -0.5j), (1, 4, s.H0, -2j),
        (2, 1, s.H1, -0.5j), (2, 3, s.Hm1, -0.5j),
        (3, 0, s.H0, -2j), (3, 2, s.Hm1, -0.5j), (3, 4, s.Fm1, -2j),
        (4, 1, s.H0, -2j), (4, 3, s.Fm1, -2j),
    ]
    for r, c, fn in even:
        U.add(r, c, LadderMonomial(c - r, fn, offset=2 - r))
    for r, c, fn, scale in odd:
        U.add(r, c, LadderMonomial(c - r, fn, offset=2 - r, scale=scale))
    return U


def block_propagator(j, tau: float, printed: bool = False) -> OperatorValuedMatrix:
    """Closed-form exp(-i tau B_j); the scalar j = 0 block is the identity."""
    j = Fraction(j)
    if j == 0:
        return OperatorValuedMatrix(1, {(0, 0): [IDENTITY_TERM]}, spin=j, tau=tau)
    if j == HALF:
        return propagator_b_half(tau)
    if j == ONE:
        return propagator_b_one(tau)
    if j == THREE_HALF:
        return propagator_b_three_half(tau)
    if j == TWO:
        return propagator_b_two(tau, printed=printed)
    raise ValueError(f"no closed form for spin {j}")


# ---------------------------------------------------------------------------
# power formulas


def _b_one_D(r):
    return lambda N: 2.0 * (2 * np.asarray(N, dtype=float) + 3 - 2 * r)


def b_one_power(p: int) -> OperatorValuedMatrix:
    """B_1^p from B_1^3 = D B_1 with D = diag(2(2N+3), 2(2N+1), 2(2N-1))."""
    if p < 0:
        raise ValueError("power must be >= 0")
    M = OperatorValuedMatrix(3, spin=ONE)
    if p == 0:
        for r in range(3):
            M.add(r, r, IDENTITY_TERM)
        return M
    n, odd = divmod(p, 2)
    r2 = np.sqrt(2.0)
    if odd:
        for r, c in [(0, 1), (1, 0), (1, 2), (2, 1)]:
            D = _b_one_D(r)
            M.add(r, c, LadderMonomial(c - r, lambda N, D=D: D(N) ** n, scale=r2))
        return M
    square = {
        (0, 0): lambda N: 2 * (np.asarray(N, dtype=float) + 1),
        (0, 2): _const(2.0),
        (1, 1): lambda N: 2 * (2 * np.asarray(N, dtype=float) + 1),
        (2, 0): _const(2.0),
        (2, 2): lambda N: 2 * np.asarray(N, dtype=float),
    }
    for (r, c), sq in square.items():
        D = _b_one_D(r)
        M.add(r, c, LadderMonomial(c - r, lambda N, D=D, sq=sq: D(N) ** (n - 1) * sq(N)))
    return M


class PowerCoefficients:
    """alpha_n, beta_n, gamma_n, delta_n, xi_n for powers of B_{3/2}."""

    def __init__(self):
        self.s = Spectral3()

    def _combo(self, N, wp, wm, n, swap=False):
        lp, lm = self.s.lam(N, 1), self.s.lam(N, -1)
        if swap:
            lp, lm = lm, lp
        return (wp * lp**n - wm * lm**n) / (2 * np.sqrt(self.s.d(N)))

    def alpha(self, n, N):
        return self._combo(N, self.s.v(N, 1), self.s.v(N, -1), n)

    def beta(self, n, N):
        return self._combo(N, self.s.w(N, 1), self.s.w(N, -1), n)

    def gamma(self, n, N):
        return self._combo(N, self.s.v(N, 1), self.s.v(N, -1), n, swap=True)

    def delta(self, n, N):
        return self._combo(N, self.s.w(N, 1), self.s.w(N, -1), n, swap=True)

    def xi(self, n, N):
        return self._combo(N, 1.0, 1.0, n)


def power_recurrence_step(pc: PowerCoefficients, n: int, M):
    """Coefficients of B^{2n+2} obtained from those of B^{2n} via B^2 B^{2n}.

    Returns a dict with keys alpha, beta, gamma, delta, xi at argument M.
    """
    M = np.asarray(M, dtype=float)
    a, b, g, dl, x = (pc.alpha(n, M), pc.beta(n, M), pc.gamma(n, M), pc.delta(n, M), pc.xi(n, M))
    return {
        "alpha": 3 * (M - 1) * a + 12 * (M - 1) * M * x,
        "beta": (7 * M - 3) * b + 12 * M * (M + 1) * x,
        "gamma": (7 * M + 3) * g + 12 * M * (M - 1) * x,
        "delta": 3 * (M + 1) * dl + 12 * (M + 1) * M * x,
        "xi": 3 * (M - 1) * x + g,
    }


def b_three_half_power(p: int) -> OperatorValuedMatrix:
    """B_{3/2}^p from the alpha..xi coefficient families."""
    if p < 0:
        raise ValueError("power must be >= 0")
    pc = PowerCoefficients()
    n, odd = divmod(p, 2)
    r3 = np.sqrt(3.0)
    M = OperatorValuedMatrix(4, spin=THREE_HALF)

    def fam(name, k):
        return lambda N: getattr(pc, name)(k, N)

    if odd:
        table = [
            (0, 1, fam("beta", n), r3), (0, 3, fam("xi", n), 6.0),
            (1, 0, fam("beta", n), r3), (1, 2, fam("xi", n + 1), 2.0),
            (2, 1, fam("xi", n + 1), 2.0), (2, 3, fam("gamma", n), r3),
            (3, 0, fam("xi", n), 6.0), (3, 2, fam("gamma", n), r3),
        ]
    else:
        table = [
            (0, 0, fam("alpha", n), 1.0), (0, 2, fam("xi", n), 2 * r3),
            (1, 1, fam("beta", n), 1.0), (1, 3, fam("xi", n), 2 * r3),
            (2, 0, fam("xi", n), 2 * r3), (2, 2, fam("gamma", n), 1.0),
            (3, 1, fam("xi", n), 2 * r3), (3, 3, fam("delta", n), 1.0),
        ]
    for r, c, fn, scale in table:
        M.add(r, c, LadderMonomial(c - r, fn, offset=2 - r, scale=scale))
    return M


def b_three_half_square_printed() -> OperatorValuedMatrix:
    """B_{3/2}^2 written out entry by entry."""
    r3 = np.sqrt(3.0)
    F = lambda a, b: (lambda N: a * np.asarray(N, dtype=float) + b)
    M = OperatorValuedMatrix(4, spin=THREE_HALF)
    M.add(0, 0, LadderMonomial(0, F(3, 3)))
    M.add(0, 2, LadderMonomial(2, _const(1.0), scale=2 * r3))
    M.add(1, 1, LadderMonomial(0, F(7, 4)))
    M.add(1, 3, LadderMonomial(2, _const(1.0), scale=2 * r3))
    M.add(2, 0, LadderMonomial(-2, _const(1.0), scale=2 * r3))
    M.add(2, 2, LadderMonomial(0, F(7, 3)))
    M.add(3, 1, LadderMonomial(-2, _const(1.0), scale=2 * r3))
    M.add(3, 3, LadderMonomial(0, F(3, 0)))
    return M


def b_three_half_cube_printed() -> OperatorValuedMatrix:
    """B_{3/2}^3 written out entry by entry."""
    r3 = np.sqrt(3.0)
    F = lambda a, b: (lambda N: a * np.asarray(N, dtype=float) + b)
    M = OperatorValuedMatrix(4, spin=THREE_HALF)
    M.add(0, 1, LadderMonomial(1, F(7, 11), scale=r3))
    M.add(0, 3, LadderMonomial(3, _const(6.0)))
    M.add(1, 0, LadderMonomial(-1, F(7, 4), scale=r3))
    M.add(1, 2, LadderMonomial(1, F(20, 20)))
    M.add(2, 1, LadderMonomial(-1, F(20, 0)))
    M.add(2, 3, LadderMonomial(1, F(7, 3), scale=r3))
    M.add(3, 0, LadderMonomial(-3, _const(6.0)))
    M.add(3, 2, LadderMonomial(-1, F(7, -4), scale=r3))
    return M


def power_formula(j, p: int) -> OperatorValuedMatrix:
    j = Fraction(j)
    if j == ONE:
        return b_one_power(p)
    if j == THREE_HALF:
        return b_three_half_power(p)
    raise ValueError(f"no power formula for spin {j}")


def b_power_check(p: int, nmax: int, spin=THREE_HALF) -> float:
    """Deviation between B_j^p computed by matrix power and by formula.

    Only columns with photon number <= nmax - p are compared; a power p
    never reaches beyond p extra photons, so those columns are exact.  The
    result is the max entrywise difference divided by the largest entry of
    the direct power (entries of B^7 reach 1e8 and beyond).
    """
    if p > 7:
        raise ValueError("power formulas are checked for p <= 7")
    if nmax < p + 2:
        raise ValueError(f"nmax must be >= p + 2, got nmax={nmax}, p={p}")
    B = block_operator(spin, nmax)
    direct = np.linalg.matrix_power(B, p)
    formula = power_formula(spin, p).materialize(nmax)
    dim = B.shape[0] // (nmax + 1)
    cols = np.tile(np.arange(nmax + 1) <= nmax - p, dim)
    scale = max(float(np.max(np.abs(direct[:, cols]))), 1.0)
    return float(np.max(np.abs(direct[:, cols] - formula[:, cols]))) / scale


# ---------------------------------------------------------------------------
# assembly


def block_propagators(n: int, tau: float, nmax: int, printed: bool = False, dec=None):
    dec = dec or decomposition(n)
    return [block_propagator(b.spin, tau, printed=printed).materialize(nmax) for b in dec.blocks]


def block_basis_propagator(n: int, tau: float, nmax: int, printed: bool = False, dec=None) -> np.ndarray:
    """Direct sum of block propagators in the block basis."""
    dec = dec or decomposition(n)
    L = 2**n
    P = nmax + 1
    out = np.zeros((L, P, L, P), dtype=complex)
    for b, Ub in zip(dec.blocks, block_propagators(n, tau, nmax, printed, dec)):
        out[b.slice, :, b.slice, :] = Ub.reshape(b.dim, P, b.dim, P)
    return out.reshape(L * P, L * P)


def assemble_propagator(n: int, t: float, g: float, nmax: int, printed: bool = False, dec=None) -> np.ndarray:
    """exp(-i t g A_n) on the truncated space from the closed-form blocks."""
    _check_atoms(n)
    if t * g == 0:
        # exact identity; the round trip through T would add a few ulps
        return np.eye(2**n * (nmax + 1), dtype=complex)
    dec = dec or decomposition(n)
    Ublk = block_basis_propagator(n, t * g, nmax, printed, dec)
    return conjugate_atomic(dec.T, Ublk, nmax)


def free_phases(n: int, t: float, omega: float, nmax: int) -> np.ndarray:
    """Diagonal of exp(-i t omega S_3) (x) exp(-i t omega N)."""
    return np.exp(-1j * t * omega * excitation_values(n, nmax))


def full_evolution(p: ModelParams, t: float, printed: bool = False) -> np.ndarray:
    """Resonant evolution operator: free phases times exp(-i t g A_n)."""
    if not p.resonant:
        raise ValueError(f"closed-form evolution needs delta == omega, got delta={p.delta}, omega={p.omega}")
    U = assemble_propagator(p.n_atoms, t, p.g, p.nmax, printed=printed)
    return free_phases(p.n_atoms, t, p.omega, p.nmax)[:, None] * U


def propagate_state(p: ModelParams, t: float, psi: np.ndarray) -> np.ndarray:
    """Apply the resonant evolution operator to a state without forming it densely."""
    if not p.resonant:
        raise ValueError(f"closed-form evolution needs delta == omega, got delta={p.delta}, omega={p.omega}")
    dec = decomposition(p.n_atoms)
    L, P = 2**p.n_atoms, p.nmax + 1
    tau = t * p.g
    phi = (dec.T.conj().T @ psi.reshape(L, P))
    out = np.zeros_like(phi)
    for b in dec.blocks:
        if b.spin == 0:
            out[b.slice] = phi[b.slice]
            continue
        Ub = block_propagator(b.spin, tau).materialize(p.nmax)
        out[b.slice] = (Ub @ phi[b.slice].ravel()).reshape(b.dim, P)
    out = (dec.T @ out).ravel()
    return free_phases(p.n_atoms, t, p.omega, p.nmax) * out


def reached_coefficients(n: int, tau: float, nmax: int, printed: bool = False) -> list[dict]:
    """Every scalar coefficient evaluation made while materializing the
    propagators for ``n`` atoms, with its block, entry and argument."""
    out = []
    for b in decomposition(n).blocks:
        U = block_propagator(b.spin, tau, printed=printed)
        for (r, c), args, vals in U.coefficient_values(nmax):
            for a, v in zip(args, vals):
                out.append({"spin": b.spin, "entry": (r, c), "arg": int(a), "value": complex(v)})
    return out

