"""``tc`` command line: closed-form evolution and verification reports.

Exit codes: 0 success, 1 configuration error, 2 verification failure.
"""

from __future__ import annotations

import json
import sys

import click

from . import simulator
from .simulator import ConfigError, SimConfig

EXIT_CONFIG = 1
EXIT_VERIFY = 2


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _emit(text, out):
    if out in (None, "-"):
        click.echo(text, nl=False)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _float_list(raw):
    try:
        return [float(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {raw!r}") from None


def _int_list(raw):
    try:
        return [int(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of integers, got {raw!r}") from None


@click.group()
def cli():
    """Closed-form Tavis-Cummings dynamics for 1 to 4 atoms."""


@cli.command()
@click.option("--config", "config_path", type=click.Path(), help="JSON file with SimConfig fields.")
@click.option("--atoms", type=int, help="Number of atoms (1-4).")
@click.option("--g", type=float, help="Coupling constant.")
@click.option("--omega", type=float, help="Field frequency (atoms are resonant).")
@click.option("--delta", type=float, help="Atomic splitting; must equal omega.")
@click.option("--t", "tgrid", help="Time grid start:end:dt.")
@click.option("--time-units", type=click.Choice(["absolute", "inverse-g"]), help="Interpret times as absolute or in units of 1/g.")
@click.option("--init", help="Initial state, e.g. atoms=ud,field=coherent:2.")
@click.option("--nmax", type=int, help="Photon cutoff (raised automatically for coherent fields).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), help="Output format.")
@click.option("--out", default="-", show_default=True, help="Output path, '-' for stdout.")
def evolve(config_path, atoms, g, omega, delta, tgrid, time_units, init, nmax, fmt, out):
    """Evolve a product state and write observable time series."""
    data = _load_config(config_path)
    overrides = {
        "n_atoms": atoms, "g": g, "omega": omega, "delta": delta, "t": tgrid, "nmax": nmax,
        "format": fmt, "init": init,
        "time_units": time_units.replace("-", "_") if time_units else None,
    }
    if "t" in data and tgrid is None:
        overrides["t"] = data.pop("t")
    elif tgrid is not None:
        for key in ("t_start", "t_end", "dt"):
            data.pop(key, None)
    if init is not None:
        data.pop("atoms", None)
        data.pop("field", None)
    data.update({k: v for k, v in overrides.items() if v is not None})
    data.setdefault("mode", "evolve")
    config = SimConfig.from_dict(data)
    records = simulator.evolve(config)
    _emit(simulator.render(records, config), out)


@cli.command()
@click.option("--atoms", default="1,2,3,4", show_default=True, help="Atom counts to check.")
@click.option("--tau", default="0.1,1,5", show_default=True, help="Values of t*g.")
@click.option("--nmax", default=16, show_default=True, type=int)
@click.option("--tol", default=1e-10, show_default=True, type=float, help="Oracle/unitarity tolerance.")
@click.option("--format", "fmt", type=click.Choice(["json"]), default="json", show_default=True)
@click.option("--out", default="-", show_default=True)
def verify(atoms, tau, nmax, tol, fmt, out):
    """Compare closed forms with the exact oracle and run invariant checks."""
    counts = _int_list(atoms)
    if not counts or any(not 1 <= n <= 4 for n in counts):
        raise ConfigError(f"atom counts must lie in 1..4, got {atoms!r}")
    if nmax < 0:
        raise ConfigError("nmax must be >= 0")
    report = simulator.verify(counts, _float_list(tau), nmax=nmax, tol=tol)
    _emit(json.dumps(report, indent=1) + "\n", out)
    if not report["passed"]:
        sys.exit(EXIT_VERIFY)


def main(argv=None):
    try:
        cli.main(args=argv, prog_name="tc", standalone_mode=False)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except click.exceptions.Abort:
        sys.exit(EXIT_CONFIG)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_CONFIG)
    sys.exit(0)


if __name__ == "__main__":
    main()
