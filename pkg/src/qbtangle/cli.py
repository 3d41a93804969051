"""``qbtangle`` command line.

Subcommands ``trajectory``, ``optimal``, ``sweep`` and ``verify``. Every
option may also come from a ``--config`` file of ``key=value`` lines (keys
are the long option names, with ``-`` or ``_``); options given on the
command line win.

Exit status: 0 success, 1 usage or configuration error, 2 domain error.
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass
import math
from pathlib import Path
import sys

import numpy as np

from .errors import ConfigError, DomainError, NegativeBzSquared, QBError
from .model import ChainParams, FieldParams, omega_k_sq
from .optimal import classify_b2, optimal_plan, tau_star_b2
from .propagator import StateClass, evolve_class, representative_state
from .tangle import tau13_closed, tau123_closed, three_tangle, two_tangle_13

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2
MODES = ("closed", "chain", "oracle")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def fmt(x) -> str:
    """17 significant digits, round-trip exact for doubles."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _csv(rows, header):
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) if not isinstance(v, str) else v for v in row) for row in rows)
    return "\n".join(lines) + "\n"


# --- configuration --------------------------------------------------------------


def _boolean(text):
    t = str(text).strip().lower()
    if t in ("1", "yes", "true", "on"):
        return True
    if t in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _positive_int(text):
    n = int(text)
    if n < 2:
        raise ValueError(f"must be at least 2, got {n}")
    return n


def state_class(text):
    return StateClass.parse(text)


def _mode(text):
    t = str(text).strip().lower()
    if t not in MODES:
        raise ValueError(f"mode must be one of {', '.join(MODES)}, got {text!r}")
    return t


_KEY_TYPES = {
    "class": state_class,
    "omega_sq": float,
    "k": float,
    "phi": float,
    "omega_big": float,
    "theta0": float,
    "optimal": _boolean,
    "tau_max": float,
    "steps": _positive_int,
    "mode": _mode,
    "j12_hz": float,
    "out": str,
    "plot": str,
    "k_min": float,
    "k_max": float,
    "k_steps": _positive_int,
    "scenarios": str,
    "fig_dir": str,
    "search": _boolean,
}


def read_config(path) -> dict:
    """Parse a ``key=value`` file into typed values; errors name file and line."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{path}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower().replace("-", "_")
        if key not in _KEY_TYPES:
            raise ConfigError(f"{where}: unknown key {key!r}")
        try:
            out[key] = _KEY_TYPES[key](value)
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {key}: {exc}") from None
    return out


def _merge(ns, config):
    """Command line first, then config file, then the built-in default."""
    for key, value in config.items():
        if getattr(ns, key, None) is None:
            setattr(ns, key, value)
    return ns


# --- run configuration --------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    cls: StateClass
    omega_hat_sq: float
    k_ratio: float
    field: FieldParams | None  # None means the optimal plan
    tau_max: float
    steps: int
    mode: str
    j12_hz: float | None = None


def _require(ns, *keys):
    missing = [k for k in keys if getattr(ns, k, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def run_config(ns) -> tuple[RunConfig, object]:
    _require(ns, "cls", "omega_sq", "k")
    explicit = any(getattr(ns, k) is not None for k in ("phi", "omega_big", "theta0"))
    if ns.optimal and explicit:
        raise UsageError("--optimal cannot be combined with --phi/--omega-big/--theta0")
    plan = None
    if ns.optimal:
        plan = optimal_plan(ns.cls, ns.omega_sq, ns.k)
        field = plan.field
    else:
        field = FieldParams(ns.phi or 0.0, ns.omega_big or 0.0, ns.theta0 or 0.0)
    tau_max = ns.tau_max
    if tau_max is None:
        if plan is None:
            raise UsageError("--tau-max is required without --optimal")
        tau_max = 2.0 * plan.tau_star
    if not tau_max > 0:
        raise UsageError(f"--tau-max must be positive, got {tau_max}")
    if ns.j12_hz is not None and not ns.j12_hz > 0:
        raise UsageError(f"--j12-hz must be positive, got {ns.j12_hz}")
    cfg = RunConfig(ns.cls, ns.omega_sq, ns.k, field, tau_max, ns.steps or 1001, ns.mode or "closed", ns.j12_hz)
    return cfg, plan


def trajectory(cfg: RunConfig):
    """Return (taus, tau13, tau123) sampled uniformly on [0, tau_max]."""
    p = ChainParams(cfg.k_ratio, cfg.omega_hat_sq)
    omega_k_sq(p)
    taus = np.linspace(0.0, cfg.tau_max, cfg.steps)
    if cfg.mode == "closed":
        return taus, tau13_closed(cfg.cls, p, cfg.field, taus), tau123_closed(cfg.cls, p, cfg.field, taus)
    if cfg.mode == "chain":
        psi = evolve_class(cfg.cls, p, cfg.field, taus)
    else:
        from .oracle import integrate_path

        psi = integrate_path(p, cfg.field, taus) @ representative_state(cfg.cls)
    return taus, two_tangle_13(psi), three_tangle(psi)


# --- subcommands ----------------------------------------------------------------------


def _write(text, out):
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8", newline="\n")
        except OSError as exc:
            raise ConfigError(f"{out}: cannot write: {exc}") from None
    else:
        sys.stdout.write(text)


def cmd_trajectory(ns):
    cfg, _ = run_config(ns)
    taus, t13, t123 = trajectory(cfg)
    header = ["tau", "tau13", "tau123"]
    cols = [taus, t13, t123]
    if cfg.j12_hz is not None:
        header.append("t_seconds")
        cols.append(taus / cfg.j12_hz)
    _write(_csv(zip(*cols), header), ns.out)
    if ns.plot:
        from .plotting import plot_trajectory

        title = f"{cfg.cls.value}  omega_hat^2={cfg.omega_hat_sq:g}  K={cfg.k_ratio:g}"
        plot_trajectory(taus, t13, t123, ns.plot, title)
    return EXIT_OK


def cmd_optimal(ns):
    _require(ns, "cls", "omega_sq", "k")
    try:
        plan = optimal_plan(ns.cls, ns.omega_sq, ns.k)
    except NegativeBzSquared as exc:
        lines = [
            f"branch={exc.branch}",
            f"bz_squared={fmt(exc.radicand)}",
            "diagnostics=NegativeBzSquared",
        ]
        _write("\n".join(lines) + "\n", ns.out)
        raise
    lines = [
        f"branch={plan.branch}",
        f"tau_star={fmt(plan.tau_star)}",
        f"B0={fmt(plan.b0)}",
        f"Bz={fmt(plan.bz)}",
        f"Omega={fmt(plan.omega_big)}",
        f"phi={fmt(plan.field.phi)}",
        "diagnostics=" + (",".join(plan.diagnostics) or "none"),
    ]
    for j, alt in enumerate(plan.alternatives, start=1):
        lines.append(f"alternative{j}.Omega={fmt(alt.omega_big)}")
    if ns.j12_hz is not None:
        lines.append(f"t_star_seconds={fmt(plan.tau_star / ns.j12_hz)}")
    _write("\n".join(lines) + "\n", ns.out)
    return EXIT_OK


def sweep_rows(cls, omega_hat_sq, k_min, k_max, k_steps):
    """One row per K on an inclusive uniform grid; failures give valid=0."""
    ks = np.linspace(k_min, k_max, k_steps)
    ks[0], ks[-1] = k_min, k_max
    rows = []
    for k in ks:
        k = float(k)
        branch, tau_star, b0, bz, om, valid = "OutOfRange", math.nan, math.nan, math.nan, math.nan, False
        try:
            plan = optimal_plan(cls, omega_hat_sq, k)
            branch, tau_star, b0, bz, om = str(plan.branch), plan.tau_star, plan.b0, plan.bz, plan.omega_big
            valid = plan.valid
        except NegativeBzSquared as exc:
            branch = str(exc.branch)
            if cls in (StateClass.B2, StateClass.W):
                try:
                    tau_star = tau_star_b2(omega_hat_sq, k)
                except DomainError:
                    pass
        except DomainError:
            if cls in (StateClass.B2, StateClass.W):
                try:
                    branch = str(classify_b2(omega_hat_sq, k))
                except DomainError:
                    pass
        rows.append((k, branch, tau_star, b0, bz, om, valid))
    return rows


def cmd_sweep(ns):
    _require(ns, "cls", "omega_sq", "k_min", "k_max", "k_steps")
    if not ns.k_max > ns.k_min:
        raise UsageError("--k-max must exceed --k-min")
    rows = sweep_rows(ns.cls, ns.omega_sq, ns.k_min, ns.k_max, ns.k_steps)
    _write(_csv(rows, ["K", "branch", "tau_star", "B0", "Bz", "Omega", "valid"]), ns.out)
    return EXIT_OK


def cmd_verify(ns):
    from .verify import DEFAULT_SCENARIOS, parse_scenarios, verify_report

    scenarios = DEFAULT_SCENARIOS
    if ns.scenarios:
        try:
            text = Path(ns.scenarios).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ConfigError(f"{ns.scenarios}: cannot read scenarios: {exc}") from None
        scenarios = parse_scenarios(text, ns.scenarios)
    search = True if ns.search is None else ns.search
    report = verify_report(scenarios, search=search)
    _write(report.to_text(), ns.out)
    if ns.fig_dir:
        _verify_figures(scenarios, ns.fig_dir)
    return EXIT_OK if report.ok else EXIT_USAGE


def _verify_figures(scenarios, fig_dir):
    from .plotting import plot_trajectory

    for sc in scenarios:
        try:
            field = sc.field
            tau_max = sc.tau_max
            if field is None:
                plan = optimal_plan(sc.cls, sc.omega_hat_sq, sc.k)
                field, tau_max = plan.field, tau_max or 2.0 * plan.tau_star
            cfg = RunConfig(sc.cls, sc.omega_hat_sq, sc.k, field, tau_max or 1.0, 1001, "closed")
            taus, t13, t123 = trajectory(cfg)
        except QBError:
            continue
        title = f"{sc.name}: {sc.cls.value}  omega_hat^2={sc.omega_hat_sq:g}  K={sc.k:g}"
        plot_trajectory(taus, t13, t123, Path(fig_dir) / f"{sc.name}.png", title)


# --- parser ----------------------------------------------------------------------------


def _add_physics(p, with_fields=True):
    p.add_argument("--class", dest="cls", type=state_class, help="initial state class: s, b1, b2, b3, w, ghz")
    p.add_argument("--omega-sq", dest="omega_sq", type=float, help="rescaled energy omega_hat^2")
    if with_fields:
        p.add_argument("--k", type=float, help="coupling ratio K = J23/J12")
        p.add_argument("--phi", type=float, help="field tilt: B0 = omega_k cos(phi), Bz = omega_k sin(phi)")
        p.add_argument("--omega-big", dest="omega_big", type=float, help="precession rate Omega")
        p.add_argument("--theta0", type=float, help="initial precession phase")
        p.add_argument("--optimal", action="store_const", const=True, help="use the optimal plan fields")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qbtangle", description="Time-optimal three-qubit Ising chain: tangles and optimal plans.")
    parser.add_argument("--config", help="key=value file; command-line options override it")
    parser.add_argument("--out", help="write output here instead of stdout")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    t = sub.add_parser("trajectory", help="CSV of tau, tau13, tau123 along the evolution")
    _add_physics(t)
    t.add_argument("--tau-max", dest="tau_max", type=float, help="end time (default 2 tau* with --optimal)")
    t.add_argument("--steps", type=_positive_int, help="number of grid points (default 1001)")
    t.add_argument("--mode", type=_mode, help="closed (default), chain or oracle")
    t.add_argument("--j12-hz", dest="j12_hz", type=float, help="J12 in Hz; adds a t_seconds column")
    t.add_argument("--plot", help="also render a figure to this path (needs matplotlib)")

    o = sub.add_parser("optimal", help="optimal time and fields as key=value lines")
    _add_physics(o, with_fields=False)
    o.add_argument("--k", type=float, help="coupling ratio K = J23/J12")
    o.add_argument("--j12-hz", dest="j12_hz", type=float, help="J12 in Hz; adds t_star_seconds")

    s = sub.add_parser("sweep", help="optimal plan over a K grid, as CSV")
    _add_physics(s, with_fields=False)
    s.add_argument("--k-min", dest="k_min", type=float)
    s.add_argument("--k-max", dest="k_max", type=float)
    s.add_argument("--k-steps", dest="k_steps", type=_positive_int)

    v = sub.add_parser("verify", help="check formulas against the numerical oracle")
    v.add_argument("--scenarios", help="scenario file (default: the four figure configurations)")
    v.add_argument("--no-search", dest="search", action="store_const", const=False, help="skip the optimum search")
    v.add_argument("--fig-dir", dest="fig_dir", help="also render one figure per scenario here (needs matplotlib)")

    for p in (t, o, s, v):
        p.add_argument("--config", dest="sub_config", help=argparse.SUPPRESS)
        p.add_argument("--out", dest="sub_out", help=argparse.SUPPRESS)
    return parser


_COMMANDS = {"trajectory": cmd_trajectory, "optimal": cmd_optimal, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError("qbtangle: a subcommand is required (trajectory, optimal, sweep, verify)")
        ns.config = ns.sub_config or ns.config
        ns.out = ns.sub_out or ns.out
        for key in _KEY_TYPES:
            if not hasattr(ns, key):
                setattr(ns, key, None)
        ns.cls = getattr(ns, "cls", None)
        if ns.config:
            config = read_config(ns.config)
            if "class" in config:
                config["cls"] = config.pop("class")
            _merge(ns, config)
        return _COMMANDS[ns.command](ns)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"domain error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except QBError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
