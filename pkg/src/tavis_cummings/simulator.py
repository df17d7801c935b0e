"""Time evolution of product initial states and verification reports."""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction

import numpy as np
from scipy.special import gammainc, gammaln

from . import closed_form, operators as ops, oracle
from .decomposition import block_report, decomposition
from .decomposition import unitarity_error as transform_unitarity_error

NORM_TOL = 1e-10
TAIL_TOL = 1e-10
# auto-sized cutoffs leave this much coherent weight outside fully
# contained excitation sectors
AUTO_TAIL_TOL = 1e-13


class ConfigError(ValueError):
    pass


def parse_field(spec: str) -> tuple[str, float]:
    """``"fock:3"`` -> ("fock", 3); ``"coherent:1.5"`` -> ("coherent", 1.5)."""
    m = re.fullmatch(r"\s*(fock|coherent)\s*:\s*([0-9.eE+-]+)\s*", spec or "")
    if not m:
        raise ConfigError(f"field spec must be fock:<m> or coherent:<alpha>, got {spec!r}")
    kind, raw = m.groups()
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"bad field parameter {raw!r}") from None
    if value < 0:
        raise ConfigError(f"field parameter must be >= 0, got {value}")
    if kind == "fock":
        if value != int(value):
            raise ConfigError(f"Fock photon number must be an integer, got {raw}")
        return kind, int(value)
    return kind, value


def coherent_tail(alpha: float, cutoff: int) -> float:
    """Poisson weight sum_{m > cutoff} |c_m|^2 of a coherent state."""
    if cutoff < 0:
        return 1.0
    if alpha == 0:
        return 0.0
    return float(gammainc(cutoff + 1, alpha**2))


def coherent_cutoff(alpha: float, n_atoms: int, tol: float = AUTO_TAIL_TOL) -> int:
    """Smallest nmax whose fully contained sectors hold all but ``tol`` of the state."""
    nmax = n_atoms
    while coherent_tail(alpha, nmax - n_atoms) >= tol:
        nmax += 1
    return nmax


def parse_time_grid(spec: str) -> tuple[float, float, float]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"time grid must be start:end:dt, got {spec!r}")
    try:
        return tuple(float(x) for x in parts)
    except ValueError:
        raise ConfigError(f"bad time grid {spec!r}") from None


@dataclass
class SimConfig:
    params: ops.ModelParams
    t_start: float = 0.0
    t_end: float = 10.0
    dt: float = 0.1
    time_units: str = "absolute"  # or "inverse_g": times are multiples of 1/g
    atoms: str | None = None
    field: str = "fock:0"
    fmt: str = "csv"
    mode: str = "evolve"
    auto_nmax: bool = True

    def __post_init__(self):
        n = self.params.n_atoms
        if self.atoms is None:
            self.atoms = "u" * n
        if not re.fullmatch(r"[ud]+", self.atoms) or len(self.atoms) != n:
            raise ConfigError(f"atomic state must be {n} characters from 'u'/'d', got {self.atoms!r}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if self.t_end < self.t_start:
            raise ConfigError(f"t_end ({self.t_end}) is before t_start ({self.t_start})")
        if self.time_units not in ("absolute", "inverse_g"):
            raise ConfigError(f"unknown time units {self.time_units!r}")
        if self.time_units == "inverse_g" and self.params.g == 0:
            raise ConfigError("time units of 1/g need g != 0")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.fmt!r}")
        if self.mode not in ("evolve", "verify"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        kind, value = parse_field(self.field)
        if kind == "coherent":
            if self.auto_nmax:
                need = coherent_cutoff(value, n)
                if need > self.params.nmax:
                    self.params = replace(self.params, nmax=need)
            elif coherent_tail(value, self.params.nmax) >= TAIL_TOL:
                raise ConfigError(
                    f"coherent amplitude {value} needs a larger cutoff than nmax={self.params.nmax}"
                )
        elif value > self.params.nmax:
            raise ConfigError(f"Fock state {value} exceeds nmax={self.params.nmax}")

    def times(self) -> np.ndarray:
        """Absolute sample times, end point included when it lies on the grid."""
        count = int(np.floor((self.t_end - self.t_start) / self.dt + 1e-9)) + 1
        t = self.t_start + self.dt * np.arange(count)
        if self.time_units == "inverse_g":
            t = t / self.params.g
        return t

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        """Build from a flat JSON-style mapping (keys as in :meth:`to_dict`)."""
        d = dict(d)
        if "t" in d:
            d["t_start"], d["t_end"], d["dt"] = parse_time_grid(d.pop("t"))
        if "init" in d:
            d.update(parse_init(d.pop("init")))
        omega = float(d.pop("omega", 0.0))
        try:
            params = ops.ModelParams(
                n_atoms=int(d.pop("n_atoms", 1)),
                omega=omega,
                delta=float(d.pop("delta", omega)),
                g=float(d.pop("g", 1.0)),
                nmax=int(d.pop("nmax", 16)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        if "format" in d:
            d["fmt"] = d.pop("format")
        known = {"t_start", "t_end", "dt", "time_units", "atoms", "field", "fmt", "mode", "auto_nmax"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(params=params, **d)

    def to_dict(self) -> dict:
        out = asdict(self.params)
        out.update(
            t_start=self.t_start, t_end=self.t_end, dt=self.dt, time_units=self.time_units,
            atoms=self.atoms, field=self.field, format=self.fmt, mode=self.mode,
        )
        return out


def parse_init(spec) -> dict:
    """``"atoms=ud,field=coherent:2"`` (or an equivalent mapping) -> config keys."""
    if isinstance(spec, dict):
        items = spec
    else:
        items = {}
        for part in str(spec).split(","):
            if not part.strip():
                continue
            key, sep, value = part.partition("=")
            if not sep:
                raise ConfigError(f"init entries must be key=value, got {part!r}")
            items[key.strip()] = value.strip()
    unknown = set(items) - {"atoms", "field"}
    if unknown:
        raise ConfigError(f"unknown init keys: {sorted(unknown)}")
    return dict(items)


@dataclass
class QuantumState:
    amplitudes: np.ndarray
    n_atoms: int
    nmax: int

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def build_initial_state(atoms: str, field_spec: str, n: int, nmax: int) -> QuantumState:
    """Normalized product state |atoms> (x) |field>."""
    if len(atoms) != n or not re.fullmatch(r"[ud]+", atoms):
        raise ConfigError(f"atomic state must be {n} characters from 'u'/'d', got {atoms!r}")
    kind, value = parse_field(field_spec)
    P = nmax + 1
    field_amp = np.zeros(P, dtype=complex)
    if kind == "fock":
        if value > nmax:
            raise ConfigError(f"Fock state {value} exceeds nmax={nmax}")
        field_amp[value] = 1.0
    else:
        tail = coherent_tail(value, nmax)
        if tail >= TAIL_TOL:
            raise ConfigError(f"coherent tail {tail:.2e} beyond nmax={nmax} exceeds {TAIL_TOL:g}")
        if value == 0:
            field_amp[0] = 1.0
        else:
            m = np.arange(P)
            field_amp[:] = np.exp(-0.5 * value**2 + m * np.log(value) - 0.5 * gammaln(m + 1))
        field_amp /= np.linalg.norm(field_amp)
    atomic = int(atoms.replace("u", "0").replace("d", "1"), 2)
    amps = np.zeros(2**n * P, dtype=complex)
    amps[atomic * P:(atomic + 1) * P] = field_amp
    return QuantumState(amps, n, nmax)


@dataclass
class TimeSeriesRecord:
    t: float
    s3: float
    photons: float
    populations: tuple[float, ...]
    norm_deficit: float

    @property
    def excitation(self) -> float:
        return self.s3 + self.photons

    def as_dict(self) -> dict:
        out = {"t": self.t, "S3": self.s3, "N": self.photons}
        out.update({f"pop_{k}": p for k, p in enumerate(self.populations)})
        out["norm_deficit"] = self.norm_deficit
        return out


def observables(psi: np.ndarray, n: int, nmax: int, t: float = 0.0) -> TimeSeriesRecord:
    prob = np.abs(psi.reshape(2**n, nmax + 1)) ** 2
    total = prob.sum()
    pops = prob.sum(axis=1) / total
    photons = (prob.sum(axis=0) @ np.arange(nmax + 1)) / total
    s3 = pops @ (ops.excited_count(n) - n / 2)
    return TimeSeriesRecord(float(t), float(s3), float(photons), tuple(map(float, pops)), float(1 - total))


def evolve_states(config: SimConfig):
    """Yield ``(t, psi(t))`` using the closed-form propagator at every grid time."""
    p = config.params
    if not p.resonant:
        raise ConfigError(f"closed-form evolution needs delta == omega (got {p.delta} vs {p.omega})")
    psi0 = build_initial_state(config.atoms, config.field, p.n_atoms, p.nmax).amplitudes
    for t in config.times():
        yield float(t), closed_form.propagate_state(p, t, psi0)


def evolve(config: SimConfig) -> list[TimeSeriesRecord]:
    p = config.params
    return [observables(psi, p.n_atoms, p.nmax, t) for t, psi in evolve_states(config)]


def columns(n: int) -> list[str]:
    return ["t", "S3", "N", *[f"pop_{k}" for k in range(2**n)], "norm_deficit"]


def write_csv(records, n: int, stream) -> None:
    writer = csv.writer(stream)
    writer.writerow(columns(n))
    for rec in records:
        writer.writerow([repr(v) for v in rec.as_dict().values()])


def write_json(records, config: SimConfig, stream) -> None:
    json.dump({"config": config.to_dict(), "columns": columns(config.params.n_atoms),
               "records": [r.as_dict() for r in records]}, stream, indent=1)
    stream.write("\n")


def render(records, config: SimConfig) -> str:
    buf = io.StringIO()
    if config.fmt == "csv":
        write_csv(records, config.params.n_atoms, buf)
    else:
        write_json(records, config, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# verification


BLOCK_TOL = 1e-13
POWER_TOL = 1e-12
EXACT_TOL = 1e-14


@dataclass
class Check:
    name: str
    value: float
    tol: float
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.value < self.tol) or (self.tol == 0 and self.value == 0)

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tol": self.tol, "passed": self.passed, **self.detail}


def su2_error(n: int) -> float:
    sp, sm, s3 = ops.collective_spin(n)
    c = ops.commutator
    return float(max(np.max(np.abs(c(s3, sp) - sp)), np.max(np.abs(c(s3, sm) + sm)),
                     np.max(np.abs(c(sp, sm) - 2 * s3))))


def excitation_commutator_error(n: int, nmax: int) -> float:
    """[A_n, E] on states below the top photon level."""
    C = ops.commutator(ops.interaction_A(n, nmax), ops.excitation_operator(n, nmax))
    keep = ops.photon_numbers(n, nmax) < nmax
    return float(np.max(np.abs(C[np.ix_(keep, keep)])))


def unitarity_error(U: np.ndarray, mask: np.ndarray) -> float:
    Um = U[:, mask]
    return float(np.max(np.abs(Um.conj().T @ Um - np.eye(Um.shape[1]))))


def verify(atoms=(1, 2, 3, 4), taus=(0.1, 1.0, 5.0), nmax: int = 16, tol: float = 1e-10,
           omega: float = 1.0, transforms: dict | None = None) -> dict:
    """Run the oracle comparison and invariant suites.

    ``transforms`` maps an atom count to a replacement block transform,
    which is how corrupted matrices are injected in tests.
    """
    transforms = transforms or {}
    checks: list[Check] = []
    for n in atoms:
        checks.append(Check(f"su2[n={n}]", su2_error(n), EXACT_TOL))
        checks.append(Check(f"excitation_commutator[n={n}]", excitation_commutator_error(n, nmax), BLOCK_TOL))
        dec = decomposition(n, transforms.get(n))
        if n >= 2:
            checks.append(Check(f"transform_unitarity[n={n}]", transform_unitarity_error(dec.T), EXACT_TOL))
            for row in block_report(dec, nmax):
                label = f"block[n={n},j={row['spin']},offset={row['offset']}]"
                checks.append(Check(label + ".leakage", row["leakage"], BLOCK_TOL))
                checks.append(Check(label + ".shape", row["block_error"], BLOCK_TOL))
        mask = ops.contained_mask(n, nmax)
        for tau in taus:
            U = closed_form.assemble_propagator(n, tau, 1.0, nmax, dec=dec)
            dev, loc = oracle.compare_propagators(n, tau, 1.0, nmax, U=U)
            checks.append(Check(f"oracle[n={n},tau={tau}]", dev, tol, {"location": loc}))
            phases = closed_form.free_phases(n, tau, omega, nmax)
            checks.append(Check(f"unitarity[n={n},tau={tau}]", unitarity_error(phases[:, None] * U, mask), tol))
    for spin in (Fraction(1), Fraction(3, 2)):
        for power in range(8):
            if nmax >= power + 2:
                checks.append(Check(f"power[j={spin},p={power}]", closed_form.b_power_check(power, nmax, spin), POWER_TOL))
    return {
        "passed": all(c.passed for c in checks),
        "settings": {"atoms": list(atoms), "taus": list(taus), "nmax": nmax, "tol": tol, "omega": omega},
        "checks": [c.as_dict() for c in checks],
    }
