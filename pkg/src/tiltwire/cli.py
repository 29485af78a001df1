"""Batch front-end: ``tiltwire {eigen,perturb,pole,sweep,oracle}``.

Every command writes one file (CSV or JSON) whose header lists the solver
defaults and the settings of the run.  Without ``--out`` the file goes to
``$TILTWIRE_OUTPUT_DIR`` (or the current directory).

Exit codes: 0 success, 2 invalid coupling or input, 3 inadmissible level,
4 pole search failed, 5 quadrature failed.
"""

import argparse
from dataclasses import asdict, dataclass
import json
import os
from pathlib import Path
import sys

import numpy as np

from . import __version__
from .elements import element_table
from .exceptions import AdmissibilityError, ConvergenceError, NearSingularError, RegionError
from .perturbation import coefficients
from .quadrature import DEFAULT_ORDER
from .reports import csv_text, header_lines, json_text
from .solver import DEFAULT_J, DEFAULT_K, TOL_ROOT, find_pole, sweep_and_fit
from .spectral import ESS_THRESHOLD, classify_modes, embedded_eigenvalue

EXIT_OK = 0
EXIT_ALPHA = 2
EXIT_INADMISSIBLE = 3
EXIT_NO_ROOT = 4
EXIT_QUADRATURE = 5

OUTPUT_ENV = "TILTWIRE_OUTPUT_DIR"
COMMANDS = ("eigen", "perturb", "pole", "sweep", "oracle")


@dataclass
class RunConfig:
    command: str
    alpha: float = 1.0
    n: int = 2
    eps: float = 0.0
    eps_grid: tuple = ()
    kmax: int = 6
    kind: str = "N"
    J: int = DEFAULT_J
    K: int = DEFAULT_K
    tol_root: float = TOL_ROOT
    quad_order: int = DEFAULT_ORDER
    out: str = None
    fmt: str = "csv"
    seed_from_expansion: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.fmt not in ("csv", "json"):
            raise ValueError("fmt must be 'csv' or 'json'")
        self.eps_grid = tuple(float(e) for e in self.eps_grid)

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))

    def settings(self):
        """Fields relevant to ``command``, in a fixed order, for file headers."""
        keep = {
            "eigen": ("alpha", "kmax"),
            "perturb": ("alpha", "n", "kmax"),
            "pole": ("alpha", "n", "eps", "J", "K", "tol_root", "seed_from_expansion"),
            "sweep": ("alpha", "n", "eps_grid", "J", "K", "tol_root", "seed_from_expansion"),
            "oracle": ("kind", "kmax", "quad_order"),
        }[self.command]
        out = {"command": self.command, "version": __version__}
        for name in keep:
            value = getattr(self, name)
            out[name] = ":".join(repr(v) for v in value) if name == "eps_grid" else value
        return out

    def output_path(self):
        if self.out:
            return Path(self.out)
        base = Path(os.environ.get(OUTPUT_ENV, "."))
        return base / f"{self.command}.{self.fmt}"


def parse_grid(text):
    """``start:stop:count`` to a linearly spaced tuple of floats."""
    try:
        start, stop, count = text.split(":")
        grid = np.linspace(float(start), float(stop), int(count))
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}, want start:stop:count") from err
    return tuple(float(e) for e in grid)


def _on_off(text):
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--J", type=int, default=DEFAULT_J, help="Galerkin modes")
    common.add_argument("--K", type=int, default=DEFAULT_K, help="exact channels before the tail")
    common.add_argument("--tol", type=float, default=TOL_ROOT, help="root tolerance on |eta|")
    common.add_argument("--out", default=None, help="output file")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--json", dest="fmt", action="store_const", const="json",
                        help="same as --format json")
    common.add_argument("--seed-from-expansion", "--seed-from-paper", dest="seed_from_expansion",
                        type=_on_off, default=True, metavar="{on,off}",
                        help="seed the pole search from the expansion (on) or from E_n (off)")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    parser = argparse.ArgumentParser(prog="tiltwire", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigen", parents=[common], help="zero-tilt spectrum")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--kmax", type=int, default=6)

    p = sub.add_parser("perturb", parents=[common], help="V_n, W_n and the width rate")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kmax", type=int, default=6, help="range of the element report")

    p = sub.add_parser("pole", parents=[common], help="one pole at fixed tilt")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)

    p = sub.add_parser("sweep", parents=[common], help="poles over a tilt grid and the fit")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", dest="eps_grid", type=parse_grid, required=True,
                   help="start:stop:count")

    p = sub.add_parser("oracle", parents=[common], help="printed vs quadrature M/N elements")
    p.add_argument("--kind", choices=("M", "N"), required=True)
    p.add_argument("--kmax", type=int, default=6)
    return parser


def config_from_args(args):
    ns = vars(args)
    known = {k: ns[k] for k in ("alpha", "n", "eps", "eps_grid", "kmax", "kind") if k in ns}
    return RunConfig(command=args.command, J=args.J, K=args.K, tol_root=args.tol, out=args.out,
                     fmt=args.fmt, seed_from_expansion=args.seed_from_expansion,
                     workers=max(1, args.workers), **known)


def _write(cfg, text):
    path = cfg.output_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def _sheet_note(alpha):
    if alpha < 0:
        return "sheet: channel n continued through its cut (repulsive), open channels second sheet"
    return "sheet: open channels second sheet, closed channels physical"


def cmd_eigen(cfg):
    if cfg.alpha <= 0:
        print(f"error: eigen needs alpha > 0, got {cfg.alpha}", file=sys.stderr)
        return EXIT_ALPHA
    if cfg.kmax < 1:
        print("error: kmax must be >= 1", file=sys.stderr)
        return EXIT_ALPHA
    rows = []
    for k in range(1, cfg.kmax + 1):
        e = embedded_eigenvalue(cfg.alpha, k)
        rows.append({"k": k, "E_k": e, "class": "discrete" if e < ESS_THRESHOLD else "embedded"})
    if cfg.fmt == "json":
        text = json_text({"levels": rows}, cfg.settings())
    else:
        text = csv_text(["k", "E_k", "class"], rows, cfg.settings())
    print(_write(cfg, text))
    return EXIT_OK


def cmd_perturb(cfg):
    classify_modes(cfg.alpha, cfg.n)
    c = coefficients(cfg.alpha, cfg.n)
    record = c.as_record()
    record["width_candidates"] = c.width_candidates()
    report = {}
    for kind in ("M", "N"):
        table = element_table(kind, cfg.kmax)
        report[kind] = [
            {"k": r.k, "n": r.n, "closed": r.closed, "oracle": r.oracle,
             "abs_diff": r.abs_diff, "note": r.note(1e-6)}
            for r in table.discrepancies()
        ]
    if cfg.fmt == "json":
        text = json_text({"coefficients": record, "discrepancies": report}, cfg.settings())
    else:
        cols = list(c.as_record())
        notes = [f"{kind} discrepancies (k,n): "
                 + " ".join(f"({d['k']},{d['n']})" for d in rows) for kind, rows in report.items()]
        text = csv_text(cols, [c.as_record()], cfg.settings(), notes)
    print(_write(cfg, text))
    return EXIT_OK


def cmd_pole(cfg):
    modes = classify_modes(cfg.alpha, cfg.n)
    seed = None if cfg.seed_from_expansion else complex(modes.energy)
    res = find_pole(cfg.alpha, cfg.eps, cfg.n, cfg.J, cfg.K, seed=seed, tol_root=cfg.tol_root)
    row = res.as_row()
    row["sheet"] = "repulsive" if modes.repulsive else "attractive"
    cols = ["eps", "Re_z", "Im_z", "residual", "iters", "J", "K", "sheet"]
    if cfg.fmt == "json":
        text = json_text({"pole": row, "sheet_note": _sheet_note(cfg.alpha)}, cfg.settings())
    else:
        text = csv_text(cols, [row], cfg.settings(), [_sheet_note(cfg.alpha)])
    print(_write(cfg, text))
    return EXIT_OK


def cmd_sweep(cfg):
    classify_modes(cfg.alpha, cfg.n)
    fit = sweep_and_fit(cfg.alpha, cfg.n, cfg.eps_grid, cfg.J, cfg.K, cfg.tol_root,
                        workers=min(cfg.workers, len(cfg.eps_grid)),
                        seed_from_expansion=cfg.seed_from_expansion)
    rows = [r.as_row() for r in fit.table]
    cols = ["eps", "Re_z", "Im_z", "residual", "iters", "J", "K"]
    summary = fit.summary()
    if cfg.fmt == "json":
        text = json_text({"table": rows, "fit": summary}, cfg.settings())
    else:
        text = csv_text(cols, rows, cfg.settings(), [_sheet_note(cfg.alpha)])
        fit_path = cfg.output_path().with_suffix(".fit.json")
        fit_path.parent.mkdir(parents=True, exist_ok=True)
        fit_path.write_text(json_text({"fit": summary}, cfg.settings()))
    print(_write(cfg, text))
    if not fit.complete:
        for r in fit.table:
            if not r.converged:
                print(f"eps={r.eps!r}: not converged, |eta|={r.residual!r}, "
                      f"last z={r.z_root!r}", file=sys.stderr)
        return EXIT_NO_ROOT
    return EXIT_OK


def cmd_oracle(cfg):
    if cfg.kmax < 1:
        print("error: kmax must be >= 1", file=sys.stderr)
        return EXIT_ALPHA
    try:
        table = element_table(cfg.kind, cfg.kmax)
    except ConvergenceError as err:
        print(f"error: quadrature failed: {err}", file=sys.stderr)
        return EXIT_QUADRATURE
    if cfg.fmt == "json":
        rows = [{"k": r.k, "n": r.n, "closed": r.closed, "oracle": r.oracle,
                 "abs_diff": r.abs_diff, "note": r.note(1e-6)} for r in table.rows]
        text = json_text({"kind": cfg.kind, "rows": rows}, cfg.settings())
    else:
        text = "".join(line + "\n" for line in header_lines(cfg.settings())) + table.to_csv()
    print(_write(cfg, text))
    return EXIT_OK


HANDLERS = {"eigen": cmd_eigen, "perturb": cmd_perturb, "pole": cmd_pole,
            "sweep": cmd_sweep, "oracle": cmd_oracle}


def run(cfg):
    """Dispatch ``cfg`` and map failures to exit codes."""
    if cfg.alpha == 0:
        print("error: alpha must be nonzero", file=sys.stderr)
        return EXIT_ALPHA
    try:
        return HANDLERS[cfg.command](cfg)
    except AdmissibilityError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except (ConvergenceError, RegionError, NearSingularError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NO_ROOT
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ALPHA


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ALPHA
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
