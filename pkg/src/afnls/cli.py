"""Command-line runner.

    afnls <command> --config run.ini [--out DIR] [--seed N] [--threads N]
    afnls report RECORD.json [RECORD.json ...] [--out DIR]

Configs are INI files with [model] and [grid] sections plus one section named
after the command for its options.  Every run writes run_record.json next to
its CSV and field files; a failed run writes error.json and exits nonzero.
"""
import argparse
import configparser
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from . import __version__
from . import evolution as EV
from . import functionals as F
from . import ground_state as G
from . import io
from . import kernel as K
from . import traveling_waves as TW
from .spectral import build_grid, random_field

COMMANDS = ("ground-state", "evolve", "kernel", "boosted", "thresholds", "scaling-study")
THREADS_ENV = "AFNLS_THREADS"


class ConfigError(ValueError):
    def __init__(self, msg, section=None, key=None, line=None):
        super().__init__(msg)
        self.section, self.key, self.line = section, key, line


def _floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


class Config:
    """Typed access to one INI file with field-naming errors."""

    def __init__(self, path):
        self.path = str(path)
        self.cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            with open(path) as fh:
                self.cp.read_file(fh)
        except configparser.Error as e:
            raise ConfigError(f"{path}: {e}", line=getattr(e, "lineno", None)) from e
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e

    def get(self, section, key, kind=float, default=...):
        if not self.cp.has_option(section, key):
            if default is ...:
                raise ConfigError(f"missing field [{section}] {key}", section, key)
            return default
        raw = self.cp.get(section, key)
        try:
            if kind is bool:
                return self.cp.getboolean(section, key)
            return kind(raw)
        except ValueError as e:
            raise ConfigError(f"bad value for [{section}] {key}: {raw!r}", section, key) from e

    def section(self, name):
        return dict(self.cp.items(name)) if self.cp.has_section(name) else {}


def model_from(cfg):
    kw = dict(s=cfg.get("model", "s"), p=cfg.get("model", "p"))
    for k in ("alpha", "omega", "c"):
        v = cfg.get("model", k, default=None)
        if v is not None:
            kw[k] = v
    try:
        return F.ModelParams(**kw)
    except ValueError as e:
        raise ConfigError(f"[model] {e}", "model") from e


def grid_from(cfg):
    try:
        return build_grid(cfg.get("grid", "nx", int), cfg.get("grid", "ny", int),
                          cfg.get("grid", "lx"), cfg.get("grid", "ly"))
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"[grid] {e}", "grid") from e


def _positive(cfg, section, key, default):
    v = cfg.get(section, key, default=default)
    if v is not None and not v > 0:
        raise ConfigError(f"[{section}] {key} must be positive", section, key)
    return v


def rng_for(seed, stream):
    """Independent generator number ``stream`` from the run seed."""
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(stream + 1)[stream])


# ---------------------------------------------------------------------------
# commands; each returns (headline scalars, produced files)

def cmd_ground_state(cfg, out, seed):
    pr, g = model_from(cfg), grid_from(cfg)
    sec = "ground-state"
    mode = cfg.get(sec, "mode", str, "normalized")
    tol = _positive(cfg, sec, "tol", 1e-8)
    max_iter = cfg.get(sec, "max_iter", int, 50000)
    seed_field = None
    if mode == "normalized" and cfg.get("grid", "natural", bool, False):
        # [grid] lx, ly then describe the alpha = 1 box; the ground state of
        # mass c lives on a rescaled copy of it
        g, _, seed_field = G.natural_grid(pr, pr.c, g.nx, g.ny, g.lx, g.ly)
    if mode == "fixed_alpha":
        r = G.solve_fixed_alpha(pr, g, tol=tol, max_iter=max_iter)
    elif mode == "normalized":
        c = pr.c
        if pr.regime == "subcritical":
            r = G.solve_subcritical(c, pr, g, seed_field, tol=tol, max_iter=max_iter)
        elif pr.regime == "supercritical":
            r = G.solve_supercritical(c, pr, g, seed_field, tol=tol, max_iter=max_iter)
        else:
            raise ConfigError("normalized ground states need p off the critical value",
                              "model", "p")
    else:
        raise ConfigError(f"unknown mode {mode!r}", sec, "mode")
    io.write_field(out / "ground_state.afld", r.field, g)
    io.write_csv(out / "history.csv", ["iteration", "value"], list(enumerate(r.history)))
    comp = F.components(r.field, g, pr)
    head = dict(energy=r.energy, q_residual=r.q_residual, grad_residual=r.grad_residual,
                multiplier=r.multiplier, mass=comp.mass, hdot=comp.hdot, lp=comp.lp,
                iterations=r.iterations, regime=r.regime, c=pr.c)
    return head, ["ground_state.afld", "history.csv"]


def _initial_data(cfg, pr, g, seed):
    sec = "evolve"
    kind = cfg.get(sec, "data", str, "gaussian")
    amp = cfg.get(sec, "amplitude", default=1.0)
    if kind == "gaussian":
        w = cfg.get(sec, "width", default=1.0)
        X, Y = g.mesh
        return amp * np.exp(-(X**2 + Y**2) / (2 * w * w)) + 0j, None
    if kind == "random":
        return amp * random_field(g, rng_for(seed, 0)), None
    if kind == "ground_state":
        phi = G.solve_fixed_alpha(pr.replace(alpha=1.0, omega=0.0), g).field
        lam = cfg.get(sec, "lambda", default=1.0)
        u0 = EV.instability_data(phi, lam, pr, g) if lam != 1.0 else phi
        return amp * u0, phi
    if kind == "file":
        u, g2 = io.read_field(cfg.get(sec, "path", str))
        if g2 != g:
            raise ConfigError("field file grid differs from [grid]", sec, "path")
        return u, None
    raise ConfigError(f"unknown initial data {kind!r}", sec, "data")


def cmd_evolve(cfg, out, seed):
    pr, g = model_from(cfg), grid_from(cfg)
    sec = "evolve"
    T = _positive(cfg, sec, "T", None)
    dt = _positive(cfg, sec, "dt", None)
    if T is None or dt is None:
        raise ConfigError("missing field [evolve] " + ("T" if T is None else "dt"), sec)
    u0, phi = _initial_data(cfg, pr, g, seed)
    every = cfg.get(sec, "every", int, 10)
    R = cfg.get(sec, "R", default=None)
    cut = EV.build_cutoff(R, g, pr.s) if R else None
    head = {}
    if cfg.get(sec, "classify", bool, False):
        v = EV.classify_blowup(u0, pr, T, g, dt=dt, phi=phi, every=every)
        traj = v.trajectory
        head.update(verdict=v.classification, q_max=v.q_max, hdot_growth=v.hdot_growth,
                    criteria=",".join(v.criteria_used))
    else:
        traj = EV.evolve(u0, T, dt, pr, g, every=every, cutoff=cut)
    io.write_csv(out / "trajectory.csv", io.DIAG_COLUMNS, io.trajectory_rows(traj))
    io.write_field(out / "final.afld", traj.final, g)
    m = traj.series("mass")
    e = traj.series("energy")
    head.update(t_end=traj.times[-1], mass_drift=float(np.max(np.abs(m - m[0])) / m[0]),
                energy_drift=float(np.max(np.abs(e - e[0])) / max(abs(e[0]), 1e-300)),
                aborted_at=traj.aborted_at)
    return head, ["trajectory.csv", "final.afld"]


def cmd_kernel(cfg, out, seed):
    sec = "kernel"
    s = cfg.get("model", "s")
    xs = _floats(cfg.get(sec, "x", str, "0.5 1 2"))
    ys = _floats(cfg.get(sec, "y", str, "0 1 2 5"))
    samples = [K.ks_kernel(x, y, s) for x in xs for y in ys if (x, y) != (0.0, 0.0)]
    K.export_csv(samples, out / "kernel.csv")
    head = dict(n_samples=len(samples), min_value=min(k.value for k in samples),
                max_abs_err=max(k.abs_err_estimate for k in samples))
    files = ["kernel.csv"]
    bounds = cfg.get(sec, "bounds", str, "")
    if bounds:
        rows = []
        for b in bounds.split():
            reg = ((cfg.get(sec, f"{b}.xmin", default=0.0), cfg.get(sec, f"{b}.xmax", default=1.0)),
                   (cfg.get(sec, f"{b}.ymin", default=1.0), cfg.get(sec, f"{b}.ymax", default=20.0)))
            r = K.decay_report(s, b, reg)
            b = r.bound_id
            rows.append([b, reg[0][0], reg[0][1], reg[1][0], reg[1][1], r.ratio_min, r.ratio_max])
            head[f"{b}.ratio_min"], head[f"{b}.ratio_max"] = r.ratio_min, r.ratio_max
        io.write_csv(out / "decay.csv", ["bound", "xmin", "xmax", "ymin", "ymax",
                                         "ratio_min", "ratio_max"], rows)
        files.append("decay.csv")
    if cfg.get(sec, "mass", bool, False):
        head["kernel_mass"] = K.kernel_mass(s)
    return head, files


def cmd_boosted(cfg, out, seed):
    pr, g = model_from(cfg), grid_from(cfg)
    sec = "boosted"
    tol = _positive(cfg, sec, "tol", 1e-10)
    if cfg.get(sec, "normalized", bool, False):
        r = TW.normalized_boosted_min(pr.c, pr, g, tol=tol)
        io.write_field(out / "boosted.afld", r.field, g)
        return dict(energy=r.energy, grad_residual=r.grad_residual, multiplier=r.multiplier), \
            ["boosted.afld"]
    w = TW.solve_boosted(pr, g, tol=tol)
    io.write_field(out / "boosted.afld", w.field, g)
    head = dict(quotient=w.quotient, el_residual=w.el_residual, poho_ratio=w.poho_ratio,
                mass=F.mass(w.field, g), iterations=w.iterations)
    if cfg.get(sec, "decay", bool, False):
        rep = TW.boosted_decay_check(w)
        head.update(decay_sup=rep.ratio_max)
    return head, ["boosted.afld"]


def cmd_thresholds(cfg, out, seed):
    pr, g = model_from(cfg), grid_from(cfg)
    phi = G.solve_fixed_alpha(pr.replace(alpha=1.0, omega=0.0), g).field
    if pr.regime == "critical":
        head = dict(critical_mass=G.critical_mass(phi, g, pr))
    elif pr.regime == "supercritical":
        r = G.blowup_thresholds(phi, g, pr)
        head = dict(c_qs=r.c_qs, c_h=r.c_h, rho=r.rho, x0_sq=r.x0_sq, g_x0=r.g_x0,
                    ratio_bound=r.ratio_bound, omega0=r.omega0)
    else:
        r = G.sharp_constants(phi, g, pr)
        head = dict(c_qs=r.c_qs, c_h=r.c_h)
    io.write_csv(out / "thresholds.csv", ["name", "value"], sorted(head.items()))
    return head, ["thresholds.csv"]


def cmd_scaling_study(cfg, out, seed):
    pr, g = model_from(cfg), grid_from(cfg)
    sec = "scaling-study"
    omegas = _floats(cfg.get(sec, "omegas", str, "0.5 0.7 0.9"))
    st = TW.mass_scaling_study(omegas, pr, g, tol=_positive(cfg, sec, "tol", 1e-9))
    st.to_csv(out / "scaling.csv")
    return dict(slope=st.fitted_slope, hdot_slope=st.hdot_slope), ["scaling.csv"]


DISPATCH = {
    "ground-state": cmd_ground_state,
    "evolve": cmd_evolve,
    "kernel": cmd_kernel,
    "boosted": cmd_boosted,
    "thresholds": cmd_thresholds,
    "scaling-study": cmd_scaling_study,
}


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def run(command, config_path, out, seed=0, threads=None):
    """Execute one command; returns (record dict, exit status)."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    threads = threads or int(os.environ.get(THREADS_ENV, "1"))
    t0 = time.perf_counter()
    record = dict(command=command, config=str(config_path), seed=seed, threads=threads,
                  version=__version__)
    try:
        if command not in DISPATCH:
            raise ConfigError(f"unknown command {command!r}")
        cfg = Config(config_path)
        record["config_echo"] = {s: cfg.section(s) for s in cfg.cp.sections()}
        with sfft.set_workers(threads):
            head, files = DISPATCH[command](cfg, out, seed)
        for f in files:
            p = out / f
            if not (p.exists() and p.stat().st_size > 0):
                raise RuntimeError(f"run produced an empty file {f}")
    except Exception as e:     # every failure becomes a machine-readable record
        err = dict(record, error=str(e), error_type=type(e).__name__)
        if isinstance(e, ConfigError):
            err.update(section=e.section, field=e.key, line=e.line)
        with open(out / "error.json", "w") as fh:
            json.dump(err, fh, indent=2, sort_keys=True)
        return err, 2 if isinstance(e, ConfigError) else 1
    record.update(headline={k: _jsonable(v) for k, v in head.items()},
                  files=files, wall_time=time.perf_counter() - t0)
    with open(out / "run_record.json", "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
    return record, 0


def report(records, out=None):
    """Table of headline scalars across run records; also a CSV when ``out``."""
    if not records:
        raise ValueError("no run records to report")
    recs = []
    for r in records:
        if isinstance(r, (str, Path)):
            with open(r) as fh:
                r = json.load(fh)
        recs.append(r)
    keys = sorted({k for r in recs for k in r.get("headline", {})})
    rows = [[r["command"]] + [r.get("headline", {}).get(k) for k in keys] for r in recs]
    lines = []
    # one table per command, with only that command's columns
    for cmd in sorted({r["command"] for r in recs}):
        group = [r for r in recs if r["command"] == cmd]
        ks = sorted({k for r in group for k in r.get("headline", {})})
        lines += [f"## {cmd}", "", "| run | " + " | ".join(ks) + " |", "|" + "---|" * (len(ks) + 1)]
        for r in group:
            h = r.get("headline", {})
            cells = ["" if h.get(k) is None else (f"{h[k]:.6g}" if isinstance(h[k], float) else str(h[k]))
                     for k in ks]
            lines.append(f"| {Path(r.get('config', '')).stem} | " + " | ".join(cells) + " |")
        lines.append("")
    # m(c) from normalized ground-state runs, with the strict subadditivity check
    gs = sorted((r["headline"]["c"], r["headline"]["energy"]) for r in recs
                if r["command"] == "ground-state" and "c" in r.get("headline", {}))
    mc = dict(gs)
    if gs:
        lines += ["## m(c)", "", "| c | m(c) | m(2c) < 2 m(c) |", "|---|---|---|"]
        for c, m in gs:
            twice = [v for k, v in mc.items() if math.isclose(k, 2 * c, rel_tol=1e-6)]
            flag = "" if not twice else str(twice[0] < 2 * m)
            lines.append(f"| {c:.6g} | {m:.9g} | {flag} |")
    text = "\n".join(lines) + "\n"
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        io.write_csv(out / "summary.csv", ["command"] + keys, rows)
        if gs:
            io.write_csv(out / "m_of_c.csv", ["c", "m"], gs)
        (out / "summary.md").write_text(text)
    return text


def main(argv=None):
    ap = argparse.ArgumentParser(prog="afnls", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=f"runs/{name}")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=None)
    rp = sub.add_parser("report")
    rp.add_argument("records", nargs="*")
    rp.add_argument("--out", default=None)
    a = ap.parse_args(argv)
    if a.command == "report":
        try:
            print(report(a.records, a.out), end="")
        except (ValueError, OSError) as e:
            print(json.dumps({"error": str(e)}), file=sys.stderr)
            return 2
        return 0
    rec, status = run(a.command, a.config, a.out, a.seed, a.threads)
    if status:
        print(json.dumps({k: rec.get(k) for k in ("error", "error_type", "section", "field")}),
              file=sys.stderr)
    else:
        print(json.dumps(rec["headline"], sort_keys=True))
    return status


if __name__ == "__main__":
    sys.exit(main())
