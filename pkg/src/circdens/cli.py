"""Command-line front end: density profiles, orbit tables and shell energies."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import orbits as orb
from . import quantum as qm
from . import semiclassical as sc
from .units import R

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VALIDITY = 3


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    meta: dict = field(default_factory=dict)


# ------------------------------------------------------------------ output

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return "" if x is None else str(x)


def _json_value(x):
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return None if not math.isfinite(x) else x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def render(table: Table, fmt: str, timestamp: str) -> str:
    if fmt == "json":
        meta = dict(table.meta, generated=timestamp)
        rows = [[_json_value(x) for x in row] for row in table.rows]
        return json.dumps({"meta": meta, "columns": table.columns, "rows": rows}, indent=1, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# generated: {timestamp}\n")
    for key, val in table.meta.items():
        buf.write(f"# {key}: {json.dumps(val, allow_nan=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _emit(table: Table, args) -> None:
    text = render(table, args.format, datetime.now(timezone.utc).isoformat(timespec="seconds"))
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------- commands

def _config(args) -> sc.TruncationConfig:
    k = args.kmax_radial
    classes = tuple((2 * j + 1, j) for j in range(1, k + 1))
    return sc.TruncationConfig(
        k_max_radial=k,
        k_max_diameter=args.kmax_diameter,
        include_tangent_pairs=args.tangent_pairs,
        pitchfork_classes=classes,
        overlap_threshold=args.overlap_threshold,
    )


def cmd_density(args) -> Table:
    if args.grid < 2:
        raise ValueError("--grid must be >= 2")
    channels = [c.strip() for c in args.channels.split(",") if c.strip()]
    for c in channels:
        if c not in sc.CHANNELS:
            raise ValueError(f"unknown channel {c!r}; choose from {', '.join(sc.CHANNELS)}")
    N = args.N
    lam, _ = qm.fermi_energy(N)
    lam_s = qm.smooth_fermi_energy(N)
    grid = np.linspace(0.0, R, args.grid)
    columns = ["r"]
    data = [grid]
    meta = {
        "command": "density",
        "version": __version__,
        "N": N,
        "lambda": lam,
        "lambda_smooth": lam_s,
        "p_lambda": math.sqrt(lam_s),
        "method": args.method,
        "channels": channels,
    }
    if args.method in ("quantum", "both"):
        full = qm.densities(grid, N)
        osc = qm.oscillating_densities(grid, N)
        rho_tf, tau_tf = qm.tf_densities(N)
        meta["rho_tf"], meta["tau_tf"] = rho_tf, tau_tf
        for c in channels:
            columns += [f"{c}_quantum", f"delta_{c}_quantum"]
            data += [full[c], osc[f"delta_{c}"]]
    if args.method in ("semiclassical", "both"):
        cfg = _config(args)
        plan = sc.build_plan(N, cfg)
        meta["truncation"] = cfg.as_dict()
        meta["critical_radii"] = [[c.radius, c.type, c.family] for c in plan.critical_radii]
        for c in channels:
            columns.append(f"delta_{c}_semiclassical")
            data.append(sc.delta_profile(grid, N, c, plan=plan))
        kinetic = [c for c in channels if c in sc.KINETIC]
        if kinetic:
            r_cut = sc.boundary_truncation(N)
            meta["kinetic_truncated_above"] = r_cut
            meta["kinetic_truncated_rows"] = int(np.sum(grid > r_cut))
    rows = [list(vals) for vals in zip(*data)]
    return Table(columns, rows, meta)


ORBIT_COLUMNS = ["r", "v", "w", "orbit", "branch", "alpha", "beta", "length", "jacobian", "q", "morse", "ghost"]


def _orbit_row(inst: orb.OrbitInstance) -> list:
    # ghosts have complex (or undefined) angles
    a = float("nan") if inst.ghost else float(inst.alpha)
    b = float("nan") if inst.ghost else float(inst.beta)
    return [inst.r, inst.cls.v, inst.cls.w, inst.cls.label, inst.cls.branch, a, b,
            inst.length, inst.jacobian, inst.q_mismatch, inst.morse, inst.ghost]


def _sweep_class(v: int, w: int, radii, p: float) -> list[list]:
    rows = []
    for r in radii:
        if r <= 0 or r > R:
            continue
        if orb.is_radial_pitchfork_class(v, w) and r < R / v:
            rows.append(_orbit_row(orb.npo_ghost(v, w, r, p)))
        else:
            for inst in orb.solve_npo(v, w, r, p):
                rows.append(_orbit_row(inst))
        rows.append(_orbit_row(orb.po_properties(v, w, r, p)))
    return rows


def _check_class(v: int, w: int) -> None:
    if not (v >= 2 and 1 <= w <= v // 2):
        raise ValueError(f"invalid orbit class ({v},{w}): need v >= 2 and 1 <= w <= v/2")


def cmd_orbits(args) -> Table:
    p = math.sqrt(qm.smooth_fermi_energy(args.N))
    meta = {"command": "orbits", "version": __version__, "N": args.N, "p_lambda": p}
    if args.v is None and args.w is None:
        if args.r is None:
            raise ValueError("give --v and --w for a sweep, or --r (with --lmax) for a catalogue")
        if not 0 < args.r < R:
            raise ValueError("--r must lie in (0, R)")
        meta.update(r=args.r, lmax=args.lmax)
        rows = [_orbit_row(i) for i in orb.enumerate_orbits(args.r, args.lmax, p, v_max=args.vmax)]
        return Table(ORBIT_COLUMNS, rows, meta)
    if args.v is None or args.w is None:
        raise ValueError("--v and --w must be given together")
    _check_class(args.v, args.w)
    radii = np.linspace(args.rmin, args.rmax, args.steps)
    meta.update(v=args.v, w=args.w, events=_events(args.v, args.w))
    return Table(ORBIT_COLUMNS, _sweep_class(args.v, args.w, radii, p), meta)


def _events(v: int, w: int) -> list:
    return [[e.radius, e.type.value, e.parent.label if e.parent else None, [c.label for c in e.children]] for e in orb.bifurcation_events(v, w)]


def cmd_bifurcations(args) -> Table:
    p = math.sqrt(qm.smooth_fermi_energy(args.N))
    radii = np.linspace(args.rmin, args.rmax, args.steps)
    rows, events = [], {}
    for v in range(2, args.vmax + 1):
        for w in range(1, min(args.wmax, v // 2) + 1):
            rows += _sweep_class(v, w, radii, p)
            events[f"{v},{w}"] = _events(v, w)
    meta = {"command": "bifurcations", "version": __version__, "N": args.N, "p_lambda": p, "vmax": args.vmax, "wmax": args.wmax, "events": events}
    return Table(ORBIT_COLUMNS, rows, meta)


def cmd_shells(args) -> Table:
    if args.nmin < 2:
        raise ValueError("--nmin must be >= 2")
    valid = [n for n in qm.valid_particle_numbers(args.nmax) if n >= args.nmin]
    rows = []
    for n in valid:
        lam, _ = qm.fermi_energy(n)
        lam_s = qm.smooth_fermi_energy(n)
        dn = qm.counting_exact(lam_s) - qm.counting_weyl(lam_s)
        rows.append([n, qm.shell_correction_exact(n), sc.shell_correction_semiclassical(n, args.vmax, args.wmax), lam, lam_s, dn])
    n_even = len(range(args.nmin + args.nmin % 2, args.nmax + 1, 2))
    meta = {
        "command": "shells",
        "version": __version__,
        "vmax": args.vmax,
        "wmax": args.wmax,
        "skipped_open_shell": n_even - len(valid),
        "note": "open-shell particle numbers are skipped",
    }
    return Table(["N", "dE_exact", "dE_semiclassical", "lambda", "lambda_smooth", "dN_smooth"], rows, meta)


# -------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="circdens", description="Spatial densities of fermions in a disk billiard.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    d = sub.add_parser("density", help="density profiles on a radial grid")
    d.add_argument("--N", type=int, required=True)
    d.add_argument("--grid", type=int, default=800)
    d.add_argument("--channels", default="rho")
    d.add_argument("--method", choices=("quantum", "semiclassical", "both"), default="quantum")
    d.add_argument("--kmax-radial", type=int, default=2)
    d.add_argument("--kmax-diameter", type=int, default=10)
    d.add_argument("--tangent-pairs", action="store_true", help="add isolated tangent-pair orbits")
    d.add_argument("--overlap-threshold", type=float, default=1.0, help="minimum action gap between bifurcations, in hbar")
    common(d)
    d.set_defaults(func=cmd_density)

    o = sub.add_parser("orbits", help="orbit properties along a radius sweep or at one radius")
    o.add_argument("--v", type=int)
    o.add_argument("--w", type=int)
    o.add_argument("--rmin", type=float, default=0.01)
    o.add_argument("--rmax", type=float, default=0.99)
    o.add_argument("--steps", type=int, default=99)
    o.add_argument("--r", type=float, help="catalogue all orbits through this radius")
    o.add_argument("--lmax", type=float, default=8.0)
    o.add_argument("--vmax", type=int, default=12)
    o.add_argument("--N", type=int, default=606, help="sets the Fermi momentum for Jacobians")
    common(o)
    o.set_defaults(func=cmd_orbits)

    b = sub.add_parser("bifurcations", help="orbit sweep over all classes up to --vmax, --wmax")
    b.add_argument("--vmax", type=int, default=5)
    b.add_argument("--wmax", type=int, default=2)
    b.add_argument("--rmin", type=float, default=0.01)
    b.add_argument("--rmax", type=float, default=0.99)
    b.add_argument("--steps", type=int, default=99)
    b.add_argument("--N", type=int, default=606)
    common(b)
    b.set_defaults(func=cmd_bifurcations)

    s = sub.add_parser("shells", help="shell-correction energies")
    s.add_argument("--nmin", type=int, default=2)
    s.add_argument("--nmax", type=int, default=650)
    s.add_argument("--vmax", type=int, default=10)
    s.add_argument("--wmax", type=int, default=3)
    common(s)
    s.set_defaults(func=cmd_shells)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        table = args.func(args)
    except qm.OpenShellError as exc:
        print(f"error: N={exc.N} is not a closed subshell; nearest valid N: {exc.lower}, {exc.upper}", file=sys.stderr)
        return EXIT_INPUT
    except sc.OverlapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDITY
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(table, args)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
