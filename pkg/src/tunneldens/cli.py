"""Command line driver: configuration, orchestration, artifact output.

Every subcommand resolves one RunConfig (preset or JSON file, then
`--set` overrides), validates it against the module preconditions, and
writes CSV artifacts that embed the full resolved config on their first
line.  The compare path additionally renders figures and a JSON report.

Exit codes: 0 success, 2 config error, 3 numerical failure,
4 threshold failure in `compare --check`.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys

import numpy as np

from . import csm, density, figures, model, oracle, semiclassics
from .model import Classicality, PotentialSpec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_THRESHOLD = 4

OUTDIR_ENV = "TUNNELDENS_OUTDIR"
DEFAULT_OUTDIR = "tunneldens-out"


class ConfigError(Exception):
    """Carries every violated precondition, not just the first."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclasses.dataclass(frozen=True)
class RunConfig:
    potential: PotentialSpec
    classicality: Classicality
    theta: float
    L: float
    N: int
    epsilon: float
    grid_min: float
    grid_max: float
    grid_count: int
    oracle_enabled: bool = False
    oracle_resolution: int = 40
    oracle_slices: int | None = None
    oracle_delta: float | None = None
    outdir: str | None = None
    classify_margin: float | None = None
    stabilization_tolerance: float = 1e-3
    min_energy: float = 0.1
    compare_threshold: float = 0.15
    compare_fraction: float = 0.90
    exclude: tuple = ()
    rects: tuple | None = None

    def grid(self) -> np.ndarray:
        return np.linspace(self.grid_min, self.grid_max, self.grid_count)

    def to_dict(self) -> dict:
        p, c = self.potential, self.classicality
        return {
            "potential": {"a": p.a, "b": p.b, "c": p.c, "eta": p.eta},
            "classicality": {"hbar": c.hbar, "mass": c.mass},
            "theta": self.theta,
            "box": {"L": self.L, "N": self.N},
            "epsilon": self.epsilon,
            "grid": {"min": self.grid_min, "max": self.grid_max, "count": self.grid_count},
            "oracle": {
                "enabled": self.oracle_enabled,
                "resolution": self.oracle_resolution,
                "n_slices": self.oracle_slices,
                "derivative_delta": self.oracle_delta,
            },
            "outdir": self.outdir,
            "margins": {
                "classify": self.classify_margin,
                "stabilization_tolerance": self.stabilization_tolerance,
                "min_energy": self.min_energy,
            },
            "compare": {
                "threshold": self.compare_threshold,
                "fraction": self.compare_fraction,
                "exclude": [list(w) for w in self.exclude],
            },
            "contour": {"rects": None if self.rects is None else [list(r) for r in self.rects]},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        problems = _validate_dict(d)
        if problems:
            raise ConfigError(problems)
        pot = d["potential"]
        cl = d.get("classicality", {})
        box = d["box"]
        grid = d["grid"]
        orc = d.get("oracle", {})
        margins = d.get("margins", {})
        comp = d.get("compare", {})
        cont = d.get("contour", {})
        rects = cont.get("rects")
        return cls(
            potential=PotentialSpec(
                float(pot["a"]), float(pot["b"]), float(pot["c"]), float(pot["eta"])
            ),
            classicality=Classicality(
                hbar=float(cl.get("hbar", 1.0)), mass=float(cl.get("mass", 1.0))
            ),
            theta=float(d["theta"]),
            L=float(box["L"]),
            N=int(box["N"]),
            epsilon=float(d["epsilon"]),
            grid_min=float(grid["min"]),
            grid_max=float(grid["max"]),
            grid_count=int(grid["count"]),
            oracle_enabled=bool(orc.get("enabled", False)),
            oracle_resolution=int(orc.get("resolution", 40)),
            oracle_slices=None if orc.get("n_slices") is None else int(orc["n_slices"]),
            oracle_delta=(
                None if orc.get("derivative_delta") is None
                else float(orc["derivative_delta"])
            ),
            outdir=d.get("outdir"),
            classify_margin=(
                None if margins.get("classify") is None else float(margins["classify"])
            ),
            stabilization_tolerance=float(margins.get("stabilization_tolerance", 1e-3)),
            min_energy=float(margins.get("min_energy", 0.1)),
            compare_threshold=float(comp.get("threshold", 0.15)),
            compare_fraction=float(comp.get("fraction", 0.90)),
            exclude=tuple(
                (float(w[0]), float(w[1])) for w in comp.get("exclude", [])
            ),
            rects=None if rects is None else tuple(tuple(map(float, r)) for r in rects),
        )


def _get(d, *path):
    for key in path:
        if not isinstance(d, dict) or key not in d:
            return None
        d = d[key]
    return d


def _validate_dict(d: dict) -> list:
    problems = []
    for group in ("potential", "box", "grid"):
        if not isinstance(d.get(group), dict):
            problems.append(f"missing section '{group}'")
    if "theta" not in d:
        problems.append("missing field 'theta'")
    if "epsilon" not in d:
        problems.append("missing field 'epsilon'")
    if problems:
        return problems

    eta = _get(d, "potential", "eta")
    if eta is None or not eta > 0:
        problems.append("potential.eta must be > 0")
    hbar = _get(d, "classicality", "hbar")
    if hbar is not None and not hbar > 0:
        problems.append("classicality.hbar must be > 0")
    mass = _get(d, "classicality", "mass")
    if mass is not None and not mass > 0:
        problems.append("classicality.mass must be > 0")
    if not np.cos(2 * d["theta"]) > 0:
        problems.append("theta must satisfy cos(2*theta) > 0")
    L, N = _get(d, "box", "L"), _get(d, "box", "N")
    if L is None or not L > 0:
        problems.append("box.L must be > 0")
    if N is None or not float(N).is_integer() or not N >= 1:
        problems.append("box.N must be an integer >= 1")
    if not d["epsilon"] >= 0:
        problems.append("epsilon must be >= 0")
    gmin, gmax, gcount = (_get(d, "grid", k) for k in ("min", "max", "count"))
    if gmin is None or not gmin > 0:
        problems.append("grid.min must be > 0")
    if gmax is None or gmin is None or not gmax > gmin:
        problems.append("grid.max must be > grid.min")
    if gcount is None or not float(gcount).is_integer() or not gcount >= 2:
        problems.append("grid.count must be an integer >= 2")
    res = _get(d, "oracle", "resolution")
    if res is not None and res < oracle.PER_WAVELENGTH:
        problems.append(f"oracle.resolution must be >= {oracle.PER_WAVELENGTH}")
    delta = _get(d, "oracle", "derivative_delta")
    if delta is not None and not delta > 0:
        problems.append("oracle.derivative_delta must be > 0 when set")
    frac = _get(d, "compare", "fraction")
    if frac is not None and not 0 < frac <= 1:
        problems.append("compare.fraction must be in (0, 1]")
    thr = _get(d, "compare", "threshold")
    if thr is not None and not thr > 0:
        problems.append("compare.threshold must be > 0")
    for w in _get(d, "compare", "exclude") or []:
        if len(w) != 2 or not w[1] >= 0:
            problems.append("compare.exclude entries must be [center, halfwidth >= 0]")
    return problems


_POTENTIALS = {
    "a": {"a": 1.0, "b": 0.0, "c": 0.0, "eta": 0.1},
    "b": {"a": 1.0, "b": 0.0, "c": 0.1, "eta": 0.1},
    "c": {"a": 0.346, "b": -0.173, "c": 0.173, "eta": 0.1},
}


def _preset_dict(name: str) -> dict:
    scale, _, shape = name.partition("-")
    if scale not in ("paper", "desk") or shape not in _POTENTIALS:
        raise ConfigError([f"unknown preset '{name}'"])
    L, N = (500.0, 15000) if scale == "paper" else (100.0, 1500)
    if shape == "c":
        cl = {"hbar": 0.058, "mass": 1.0}
        theta, epsilon = 0.25, 0.050
        grid = {"min": 0.55, "max": 1.15, "count": 601}
    else:
        cl = {"hbar": 0.1, "mass": 1.0}
        theta, epsilon = 0.5, 0.001
        grid = {"min": 0.2, "max": 2.0, "count": 1801}
    return {
        "potential": dict(_POTENTIALS[shape]),
        "classicality": cl,
        "theta": theta,
        "box": {"L": L, "N": N},
        "epsilon": epsilon,
        "grid": grid,
        "compare": {"exclude": [[1.0, 0.08]]},
    }


def paper_presets() -> dict:
    names = [f"{scale}-{shape}" for scale in ("paper", "desk") for shape in "abc"]
    return {name: RunConfig.from_dict(_preset_dict(name)) for name in names}


def _deep_update(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_update(out[key], val)
        else:
            out[key] = val
    return out


def _apply_set(d: dict, item: str):
    path, sep, raw = item.partition("=")
    if not sep:
        raise ConfigError([f"--set needs path=value, got '{item}'"])
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    keys = path.split(".")
    node = d
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError([f"--set path '{path}' crosses a non-section field"])
    node[keys[-1]] = value


def resolve_config(args) -> RunConfig:
    if bool(args.preset) == bool(args.config):
        raise ConfigError(["exactly one of --preset or --config is required"])
    if args.preset:
        d = _preset_dict(args.preset)
    else:
        with open(args.config) as fh:
            d = json.load(fh)
    for item in args.set or []:
        _apply_set(d, item)
    cfg = RunConfig.from_dict(d)
    outdir = args.outdir or cfg.outdir or os.environ.get(OUTDIR_ENV) or DEFAULT_OUTDIR
    return dataclasses.replace(cfg, outdir=outdir)


def _provenance(config: RunConfig) -> dict:
    # where the files land is not part of the computation's identity
    d = config.to_dict()
    d["outdir"] = None
    return d


def _write_csv(path, config: RunConfig, columns, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# config: {json.dumps(_provenance(config), sort_keys=True)}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)
    print(f"wrote {path}")


def _fmt(x) -> str:
    return repr(float(x))


def _spectra(cfg: RunConfig):
    basis = csm.BoxBasis(cfg.L, cfg.N)
    interacting = csm.classify(
        csm.eigensolve(csm.assemble(cfg.potential, basis, cfg.classicality, cfg.theta)),
        cfg.classify_margin,
    )
    free = csm.classify(
        csm.eigensolve(csm.assemble(None, basis, cfg.classicality, cfg.theta)),
        cfg.classify_margin,
    )
    return interacting, free


# ---------------------------------------------------------------- subcommands


def cmd_potential(cfg: RunConfig) -> int:
    xs = max(model.envelope_support(cfg.potential), 5.0)
    x = np.linspace(-xs, xs, 2001)
    v = model.eval_potential(cfg.potential, x).real
    _write_csv(
        os.path.join(cfg.outdir, "potential.csv"), cfg,
        ["x", "V"],
        [[_fmt(a), _fmt(b)] for a, b in zip(x, v)],
    )
    points = model.stationary_points(cfg.potential)
    _write_csv(
        os.path.join(cfg.outdir, "stationary.csv"), cfg,
        ["x0", "E0", "order", "kind"],
        [[_fmt(p.x0), _fmt(p.E0), p.order, p.kind] for p in points],
    )
    print(f"potential has {len(points)} stationary points")
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    interacting, free = _spectra(cfg)
    for name, sset in (("spectrum.csv", interacting), ("spectrum_free.csv", free)):
        _write_csv(
            os.path.join(cfg.outdir, name), cfg,
            ["re_E", "im_E", "label"],
            [
                [_fmt(z.real), _fmt(z.imag), lab]
                for z, lab in zip(sset.eigenvalues, sset.labels)
            ],
        )
    print(
        f"{len(interacting.resonances)} resonance candidates, "
        f"{len(interacting.background)} background states"
    )
    return EXIT_OK


def cmd_density(cfg: RunConfig) -> int:
    interacting, free = _spectra(cfg)
    curve = density.density_curve(interacting, free, cfg.grid(), cfg.epsilon)
    _write_csv(
        os.path.join(cfg.outdir, "density.csv"), cfg,
        ["E", "re_drho", "im_drho", "epsilon"],
        [
            [_fmt(e), _fmt(z.real), _fmt(z.imag), _fmt(cfg.epsilon)]
            for e, z in zip(curve.grid, curve.values)
        ],
    )
    return EXIT_OK


def cmd_timeshift(cfg: RunConfig) -> int:
    curve = semiclassics.time_shift_curve(
        cfg.potential, cfg.classicality, cfg.grid(), -cfg.L / 2, cfg.L / 2
    )
    _write_csv(
        os.path.join(cfg.outdir, "timeshift.csv"), cfg,
        ["E", "re_dT", "im_dT", "singular_flag"],
        [
            [_fmt(e), _fmt(r), _fmt(i), int(f)]
            for e, r, i, f in zip(
                curve.grid, curve.re_values, curve.im_values, curve.singular_flags
            )
        ],
    )
    return EXIT_OK


def cmd_scatter(cfg: RunConfig) -> int:
    curve = oracle.oracle_density(
        cfg.potential, cfg.classicality, cfg.grid(), -cfg.L / 2, cfg.L / 2,
        resolution=cfg.oracle_resolution, n_slices=cfg.oracle_slices,
        derivative_delta=cfg.oracle_delta,
    )
    _write_csv(
        os.path.join(cfg.outdir, "oracle.csv"), cfg,
        ["E", "re_T", "im_T", "re_R", "im_R",
         "re_phi_total", "im_phi_total", "re_drho", "im_drho"],
        [
            [_fmt(curve.energies[i]),
             _fmt(curve.transmissions[i].real), _fmt(curve.transmissions[i].imag),
             _fmt(curve.reflections[i].real), _fmt(curve.reflections[i].imag),
             _fmt(curve.phases[i].real), _fmt(curve.phases[i].imag),
             _fmt(curve.density[i].real), _fmt(curve.density[i].imag)]
            for i in range(len(curve.energies))
        ],
    )
    return EXIT_OK


def cmd_stability(cfg: RunConfig) -> int:
    report = csm.stabilization_scan(
        cfg.potential, cfg.classicality, csm.BoxBasis(cfg.L, cfg.N), cfg.theta,
        tolerance=cfg.stabilization_tolerance, margin=cfg.classify_margin,
        min_energy=cfg.min_energy,
    )
    _write_csv(
        os.path.join(cfg.outdir, "stability.csv"), cfg,
        ["re_E", "im_E", "drift", "stable"],
        [
            [_fmt(e.value.real), _fmt(e.value.imag), _fmt(e.drift), int(e.stable)]
            for e in report.entries
        ],
    )
    stable = sum(e.stable for e in report.entries)
    print(f"{stable} stable of {len(report.entries)} resonance candidates")
    return EXIT_OK


def _default_rects(interacting):
    res = interacting.resonances
    if len(res) == 0:
        return ((0.5, 1.0, -0.05, -1e-6),)
    lo = float(res.imag.min()) * 2 - 0.05
    return (
        (0.1, float(res.real.max()) + 0.1, lo, -1e-6),
        (float(res.real.max()) + 0.5, float(res.real.max()) + 1.0, -0.02, -1e-6),
    )


def cmd_contour(cfg: RunConfig) -> int:
    interacting, free = _spectra(cfg)
    rects = cfg.rects if cfg.rects is not None else _default_rects(interacting)
    rows = []
    for rect in rects:
        result = density.contour_count(interacting, free, rect)
        rows.append(
            [_fmt(rect[0]), _fmt(rect[1]), _fmt(rect[2]), _fmt(rect[3]),
             result.count, _fmt(result.residual),
             result.interacting_enclosed, result.free_enclosed]
        )
        print(
            f"rect re=[{rect[0]:g},{rect[1]:g}] im=[{rect[2]:g},{rect[3]:g}]: "
            f"count {result.count} (residual {result.residual:.2e})"
        )
    _write_csv(
        os.path.join(cfg.outdir, "contour.csv"), cfg,
        ["re_lo", "re_hi", "im_lo", "im_hi", "count", "residual",
         "n_interacting", "n_free"],
        rows,
    )
    return EXIT_OK


# ------------------------------------------------------------------- compare


@dataclasses.dataclass(frozen=True, eq=False)
class ComparisonReport:
    """Aligned spectral, semiclassical, and scattering densities.

    All three value arrays share one sign convention: complex time
    shift units, imaginary part negative below the barrier.  ``valid``
    masks the points entering the statistics (above the low-energy
    floor, outside flagged singular windows and explicit exclusions).
    """

    energies: np.ndarray
    csm: np.ndarray
    semi: np.ndarray
    oracle: np.ndarray | None
    valid: np.ndarray
    dev_re: np.ndarray
    dev_im: np.ndarray
    threshold: float
    fraction: float
    stats: dict
    resonances: tuple
    config: RunConfig

    @property
    def passed(self) -> bool:
        s = self.stats["csm_vs_semi"]
        return (
            s["real"]["fraction_within"] >= self.fraction
            and s["imag"]["fraction_within"] >= self.fraction
        )


def _part_stats(a, b, valid, threshold):
    scale = max(np.abs(a[valid]).max(), np.abs(b[valid]).max())
    if scale == 0:
        scale = 1.0
    dev = np.abs(a - b) / scale
    dv = dev[valid]
    return dev, {
        "scale": float(scale),
        "max": float(dv.max()),
        "median": float(np.median(dv)),
        "fraction_within": float(np.mean(dv < threshold)),
    }


def build_comparison(cfg: RunConfig, spectra=None) -> ComparisonReport:
    """Run all routes of the density identity on one grid."""
    grid = cfg.grid()
    hbar = cfg.classicality.hbar
    interacting, free = spectra if spectra is not None else _spectra(cfg)
    dcurve = density.density_curve(interacting, free, grid, cfg.epsilon)
    csm_vals = np.pi * hbar * dcurve.values

    tcurve = semiclassics.time_shift_curve(
        cfg.potential, cfg.classicality, grid, -cfg.L / 2, cfg.L / 2
    )
    semi_vals = tcurve.re_values - 1j * tcurve.im_values

    valid = ~tcurve.singular_flags & (grid >= cfg.min_energy)
    for center, half in cfg.exclude:
        valid &= np.abs(grid - center) > half

    dev_re, stat_re = _part_stats(csm_vals.real, semi_vals.real, valid, cfg.compare_threshold)
    dev_im, stat_im = _part_stats(csm_vals.imag, semi_vals.imag, valid, cfg.compare_threshold)
    stats = {"csm_vs_semi": {"real": stat_re, "imag": stat_im}}

    oracle_vals = None
    resonances = ()
    if cfg.oracle_enabled:
        ocurve = oracle.oracle_density(
            cfg.potential, cfg.classicality, grid, -cfg.L / 2, cfg.L / 2,
            resolution=cfg.oracle_resolution, n_slices=cfg.oracle_slices,
            derivative_delta=cfg.oracle_delta,
        )
        oracle_vals = np.pi * hbar * ocurve.density
        _, ore = _part_stats(oracle_vals.real, semi_vals.real, valid, cfg.compare_threshold)
        _, oim = _part_stats(oracle_vals.imag, semi_vals.imag, valid, cfg.compare_threshold)
        stats["oracle_vs_semi"] = {"real": ore, "imag": oim}
        rows = []
        found = oracle.resonance_extract(ocurve)
        res = interacting.resonances
        for e_fit, g_fit in found:
            if len(res) == 0:
                break
            k = int(np.argmin(np.abs(res.real - e_fit)))
            rows.append(
                {
                    "oracle_E": e_fit,
                    "oracle_G": g_fit,
                    "csm_E": float(res.real[k]),
                    "csm_G": float(-2 * res.imag[k]),
                    "dE": float(abs(res.real[k] - e_fit)),
                }
            )
        resonances = tuple(rows)

    return ComparisonReport(
        energies=grid,
        csm=csm_vals,
        semi=semi_vals,
        oracle=oracle_vals,
        valid=valid,
        dev_re=dev_re,
        dev_im=dev_im,
        threshold=cfg.compare_threshold,
        fraction=cfg.compare_fraction,
        stats=stats,
        resonances=resonances,
        config=cfg,
    )


def cmd_compare(cfg: RunConfig, check: bool = False) -> int:
    report = build_comparison(cfg)
    orc = report.oracle
    if orc is None:
        orc = np.full(len(report.energies), np.nan + 0j)
    rows = []
    for i, e in enumerate(report.energies):
        rows.append(
            [_fmt(e),
             _fmt(report.csm[i].real), _fmt(report.csm[i].imag),
             _fmt(report.semi[i].real), _fmt(report.semi[i].imag),
             _fmt(orc[i].real), _fmt(orc[i].imag),
             _fmt(report.dev_re[i]), _fmt(report.dev_im[i]),
             int(report.valid[i])]
        )
    _write_csv(
        os.path.join(cfg.outdir, "compare.csv"), cfg,
        ["E", "re_csm", "im_csm", "re_semi", "im_semi",
         "re_oracle", "im_oracle", "dev_re", "dev_im", "valid"],
        rows,
    )
    payload = {
        "config": _provenance(cfg),
        "stats": report.stats,
        "resonances": list(report.resonances),
        "threshold": report.threshold,
        "fraction": report.fraction,
        "passed": report.passed,
    }
    report_path = os.path.join(cfg.outdir, "report.json")
    with open(report_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {report_path}")
    for path in figures.render_comparison(report, cfg.outdir):
        print(f"wrote {path}")
    s = report.stats["csm_vs_semi"]
    print(
        f"within {report.threshold:.0%}: real {s['real']['fraction_within']:.1%}, "
        f"imag {s['imag']['fraction_within']:.1%} "
        f"(required {report.fraction:.0%}) -> {'pass' if report.passed else 'FAIL'}"
    )
    if check and not report.passed:
        return EXIT_THRESHOLD
    return EXIT_OK


# ---------------------------------------------------------------------- main


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tunneldens",
        description="Complex-scaled level density vs semiclassical time shift",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    names = {
        "potential": "sample V(x) and its stationary points",
        "spectrum": "complex-scaled eigenvalues with labels",
        "density": "smoothed spectral density curve",
        "timeshift": "semiclassical complex time shift curve",
        "scatter": "direct scattering transmission and density",
        "compare": "all routes side by side, with report and figures",
        "stability": "resonance stabilization scan",
        "contour": "integer residue counting on rectangles",
    }
    for name, help_text in names.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--preset", help="named parameter set, e.g. desk-a, paper-c")
        p.add_argument("--config", help="JSON config file")
        p.add_argument(
            "--set", action="append", metavar="PATH=VALUE",
            help="override one config field, e.g. box.N=1800",
        )
        p.add_argument("--outdir", help=f"output directory (or ${OUTDIR_ENV})")
        if name == "compare":
            p.add_argument(
                "--check", action="store_true",
                help="exit 4 when deviation thresholds are not met",
            )
            p.add_argument(
                "--with-oracle", action="store_true",
                help="include the direct-scattering route",
            )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if getattr(args, "with_oracle", False):
            cfg = dataclasses.replace(cfg, oracle_enabled=True)
        os.makedirs(cfg.outdir, exist_ok=True)
    except ConfigError as err:
        for problem in err.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    handlers = {
        "potential": cmd_potential,
        "spectrum": cmd_spectrum,
        "density": cmd_density,
        "timeshift": cmd_timeshift,
        "scatter": cmd_scatter,
        "stability": cmd_stability,
        "contour": cmd_contour,
    }
    try:
        if args.subcommand == "compare":
            return cmd_compare(cfg, check=args.check)
        return handlers[args.subcommand](cfg)
    except (ValueError, RuntimeError, np.linalg.LinAlgError) as err:
        print(f"{args.subcommand} failed: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
