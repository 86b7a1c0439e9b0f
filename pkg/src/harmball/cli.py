"""Command-line driver: ``harmball {geom,glue,solve,check,ks-energy} --config FILE``.

Configs are INI files. Every output file starts with a header line holding
the library version and a sha256 of the parsed config plus seed. Exit codes:
0 success, 1 certified failure (refusal, failed certificate, failed solve
checks), 2 usage or config error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chart import EuclideanChart, WarpedChart, to_normal_chart
from .classify import classify_ball
from .energy import FieldError, fuchs_check
from .gluing import GluingError, build_euclidean_end, glued_to_text, seam_report
from .io import config_digest, field_rows, format_value, record_to_text, write_csv, write_text
from .ks import hs_density, ks_energy, region_quadrature
from .mesh import (
    BoundaryTrace,
    MeshError,
    load_mesh,
    make_disk_mesh,
    make_interval_mesh,
    make_square_mesh,
)
from .solver import SolverConfig, minimize
from .warping import GeometryError, from_preset, hessian_r_squared, sectional_curvatures

log = logging.getLogger("harmball")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


class Config:
    """Typed access to an INI config; unknown keys are tolerated, bad values are not."""

    def __init__(self, path, seed=None):
        self.path = Path(path)
        if not self.path.is_file():
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            parser.read_string(self.path.read_text(), source=str(self.path))
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}") from None
        self.sections = {s: dict(parser[s]) for s in parser.sections()}
        self.seed = int(seed) if seed is not None else self.int("run", "seed", 0)
        self.digest = config_digest(self.sections, self.seed)

    def has(self, section, key):
        return key in self.sections.get(section, {})

    def str(self, section, key, default=None):
        val = self.sections.get(section, {}).get(key)
        if val is None:
            if default is None:
                raise ConfigError(f"missing [{section}] {key}")
            return default
        return val.strip()

    def _num(self, conv, section, key, default, lo=None, positive=False):
        raw = self.sections.get(section, {}).get(key)
        if raw is None:
            if default is None:
                raise ConfigError(f"missing [{section}] {key}")
            return default
        try:
            val = conv(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid number") from None
        if not np.isfinite(val):
            raise ConfigError(f"[{section}] {key} must be finite")
        if positive and val <= 0:
            raise ConfigError(f"[{section}] {key} must be positive")
        if lo is not None and val < lo:
            raise ConfigError(f"[{section}] {key} must be >= {lo}")
        return val

    def float(self, section, key, default=None, **kw):
        return self._num(float, section, key, default, **kw)

    def int(self, section, key, default=None, **kw):
        return self._num(int, section, key, default, **kw)

    def bool(self, section, key, default):
        raw = self.sections.get(section, {}).get(key)
        if raw is None:
            return default
        val = raw.strip().lower()
        if val in ("1", "yes", "true", "on"):
            return True
        if val in ("0", "no", "false", "off"):
            return False
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a boolean")

    def floats(self, section, key, default=None):
        raw = self.sections.get(section, {}).get(key)
        if raw is None:
            if default is None:
                raise ConfigError(f"missing [{section}] {key}")
            return list(default)
        try:
            return [float(v) for v in raw.replace(",", " ").split()]
        except ValueError:
            raise ConfigError(f"[{section}] {key} must be a list of numbers") from None

    def file(self, section, key):
        p = Path(self.str(section, key))
        if not p.is_absolute():
            p = self.path.parent / p
        if not p.is_file():
            raise ConfigError(f"[{section}] {key}: file not found: {p}")
        return p


# ---------------------------------------------------------------- config pieces


def _target(cfg):
    spec = cfg.str("target", "preset")
    try:
        sigma = from_preset(spec)
    except GeometryError as exc:
        raise ConfigError(str(exc)) from None
    n = cfg.int("target", "dimension", 2, lo=2)
    return sigma, n


def _domain(cfg):
    kind = cfg.str("domain", "generator", "disk").lower()
    if kind == "disk":
        return make_disk_mesh(cfg.float("domain", "radius", 1.0, positive=True), cfg.int("domain", "level", 3, lo=0))
    if kind == "square":
        return make_square_mesh(cfg.float("domain", "size", 2.0, positive=True), cfg.int("domain", "cells", 8, lo=1))
    if kind == "interval":
        return make_interval_mesh(cfg.int("domain", "k", 32, lo=1))
    if kind == "mesh":
        path = cfg.file("domain", "mesh")
        try:
            return load_mesh(path.read_text())
        except MeshError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    raise ConfigError(f"unknown [domain] generator {kind!r}")


def _pad(v, n):
    out = np.zeros(n)
    out[: min(n, v.size)] = v[:n]
    return out


def _trace(cfg, domain, n):
    if cfg.has("boundary", "file"):
        path = cfg.file("boundary", "file")
        try:
            return BoundaryTrace.from_csv(path.read_text()).validate(domain)
        except MeshError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    name = cfg.str("boundary", "trace", "identity").lower()
    scale = cfg.float("boundary", "scale", 0.8, positive=True)
    if name == "ray":
        ta, tb = cfg.float("boundary", "t_a", 0.2, lo=0.0), cfg.float("boundary", "t_b", 1.0, lo=0.0)
        ang = cfg.float("boundary", "angle", 0.0)
        direc = _pad(np.array([np.cos(ang), np.sin(ang)]), n)
        idx = domain.boundary_indices
        vals = [ta * direc if domain.vertices[i, 0] == domain.vertices[:, 0].min() else tb * direc for i in idx]
        return BoundaryTrace(idx, np.array(vals))
    if domain.dim != 2:
        raise ConfigError("named traces other than 'ray' need a 2-D domain")
    if name == "identity":
        f = lambda x: _pad(scale * np.asarray(x), n)  # noqa: E731
    elif name == "flower":
        def f(x):
            th = np.arctan2(x[1], x[0])
            return _pad(scale * np.array([0.75 * np.cos(th) + 0.25 * np.cos(2 * th),
                                          0.75 * np.sin(th) - 0.25 * np.sin(2 * th)]), n)
    else:
        raise ConfigError(f"unknown [boundary] trace {name!r}")
    return BoundaryTrace.from_function(domain, f)


def _solver_config(cfg, r1):
    try:
        return SolverConfig(
            p=cfg.float("solver", "p", 2.0),
            max_iter=cfg.int("solver", "max_iter", 100_000, lo=0),
            gtol=cfg.float("solver", "gtol", 1e-8, positive=True),
            armijo=cfg.float("solver", "armijo", 1e-4),
            backtrack=cfg.float("solver", "backtrack", 0.5),
            r5=cfg.float("solver", "r5", None) if cfg.has("solver", "r5") else None,
            seed=cfg.seed,
            r1=r1,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _glue(cfg, sigma, n):
    r1 = cfg.float("target", "r1", positive=True)
    kw = {k: cfg.float("gluing", k, positive=True) for k in ("r2", "r3", "r4") if cfg.has("gluing", k)}
    return build_euclidean_end(
        sigma, r1, safety=cfg.float("gluing", "safety", 1.1, lo=1.0),
        grid=cfg.int("gluing", "grid", 64, lo=2), seed=cfg.seed, n=n, **kw,
    )


# ---------------------------------------------------------------- commands


def cmd_geom(cfg, out):
    sigma, _ = _target(cfg)
    t0 = cfg.float("geom", "t_min", 0.1, positive=True)
    t1 = cfg.float("geom", "t_max", min(1.5, 0.99 * sigma.domain_radius), positive=True)
    count = cfg.int("geom", "count", 15, lo=2)
    if not t0 < t1 < sigma.domain_radius:
        raise ConfigError(f"[geom] needs t_min < t_max < {sigma.domain_radius}")
    t = np.linspace(t0, t1, count)
    rad, tg = sectional_curvatures(sigma, t)
    hrr, htg = hessian_r_squared(sigma, t)
    rows = [(a, b, c, d, e) for a, b, c, d, e in zip(t, rad, tg, np.broadcast_to(hrr, t.shape), htg)]
    write_csv(out / "geom.csv", cfg.digest, ["t", "sect_rad", "sect_tg", "hess_rr", "hess_tg_coeff"], rows)
    return EXIT_OK


def cmd_glue(cfg, out):
    sigma, n = _target(cfg)
    glued = _glue(cfg, sigma, n)
    write_text(out / "glued.params", cfg.digest, glued_to_text(glued))
    cert = glued.certificate
    lines = [
        f"passed = {format_value(cert.passed)}",
        f"t_range = {format_value(cert.t_range)}",
        f"min_eigenvalue = {format_value(cert.min_eigenvalue)}",
        f"samples = {cert.samples}",
        f"witness_t = {format_value(cert.witness['t'])}",
    ]
    for name, (jv, jd) in seam_report(glued, seed=cfg.seed).items():
        lines.append(f"seam_{name} = {format_value(jv)} {format_value(jd)}")
    write_text(out / "certificate.txt", cfg.digest, "\n".join(lines) + "\n")
    if not cert.passed:
        log.error("convexity certificate failed: min eigenvalue %.3g", cert.min_eigenvalue)
        return EXIT_FAIL
    return EXIT_OK


def cmd_solve(cfg, out):
    sigma, n = _target(cfg)
    domain = _domain(cfg)
    trace = _trace(cfg, domain, n)
    glue = cfg.bool("gluing", "enabled", cfg.has("target", "r1"))
    r1 = cfg.float("target", "r1", positive=True) if cfg.has("target", "r1") else None
    scfg = _solver_config(cfg, r1)
    if glue:
        glued = _glue(cfg, sigma, n)
        if not glued.certificate.passed:
            log.error("convexity certificate failed; refusing to solve")
            return EXIT_FAIL
        write_text(out / "glued.params", cfg.digest, glued_to_text(glued))
        chart = WarpedChart(glued.warping(), n)
    else:
        chart = to_normal_chart(sigma, n)
    u, rep = minimize(domain, chart, trace, scfg)
    fuchs = fuchs_check(domain, chart, u, r1) if r1 is not None else 0.0
    cols = ["vertex"] + [f"u{i}" for i in range(n)]
    write_csv(out / "solution.csv", cfg.digest, cols, field_rows(u))
    write_csv(out / "history.csv", cfg.digest, list(rep.HISTORY_COLUMNS),
              [(int(r[0]), r[1], r[2], r[3], int(r[4])) for r in rep.history])
    body = record_to_text(rep, skip=("history",)) + f"fuchs = {format_value(fuchs)}\n"
    write_text(out / "report.txt", cfg.digest, body)
    ok = rep.converged and (r1 is None or (rep.max_principle and fuchs <= 1e-10))
    if not ok:
        log.error("solve checks failed: %s, max principle %s", rep.message, rep.max_principle)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_check(cfg, out):
    sigma, n = _target(cfg)
    radius = cfg.float("target", "radius", positive=True)
    rep = classify_ball(sigma, radius, n=n, seed=cfg.seed)
    write_text(out / "ball_report.txt", cfg.digest, rep.to_text())
    return EXIT_OK


def _ks_map(cfg):
    kind = cfg.str("ks", "map", "linear").lower()
    if kind == "linear":
        a = np.array(cfg.floats("ks", "matrix", [1.0, 0.0, 0.0, 1.0]))
        if a.size != 4:
            raise ConfigError("[ks] matrix needs 4 entries (row major)")
        a = a.reshape(2, 2)
        return lambda x: np.asarray(x) @ a.T
    if kind == "smooth":
        s = cfg.float("ks", "scale", 1.0, positive=True)
        return lambda x: s * np.stack([np.sin(x[..., 0]) + x[..., 1] ** 2, np.exp(x[..., 0] * x[..., 1]) - 1], -1)
    raise ConfigError(f"unknown [ks] map {kind!r}")


def cmd_ks(cfg, out):
    sigma, n = _target(cfg)
    if n != 2:
        raise ConfigError("ks-energy supports 2-D targets only")
    chart = EuclideanChart(2) if sigma.kind == "linear" else to_normal_chart(sigma, 2)
    u = _ks_map(cfg)
    eps = cfg.floats("ks", "eps", [0.1, 0.05, 0.025])
    margin = cfg.float("ks", "margin", 0.2, positive=True)
    # curved targets need one shooting solve per distance, so their defaults are coarser
    flat = isinstance(chart, EuclideanChart)
    q = cfg.int("ks", "quadrature", 64 if flat else 16, lo=3)
    radial = cfg.int("ks", "radial", 16 if flat else 4, lo=1)
    angular = cfg.int("ks", "angular", 32 if flat else 8, lo=3)
    if any(e <= 0 or e > margin for e in eps):
        raise ConfigError("[ks] every eps must lie in (0, margin]")
    pts, wts = region_quadrature(1.0 - margin, radial, angular)
    ref = float(sum(w * hs_density(u, chart, p) for p, w in zip(pts, wts)))
    rows = []
    for e in eps:
        est = ks_energy(u, chart, e, margin=margin, quadrature=q, radial=radial, angular=angular)
        rows.append((e, est.value, ref))
    write_csv(out / "ks.csv", cfg.digest, ["eps", "estimate", "reference"], rows)
    return EXIT_OK


COMMANDS = {"geom": cmd_geom, "glue": cmd_glue, "solve": cmd_solve, "check": cmd_check, "ks-energy": cmd_ks}


def build_parser():
    ap = argparse.ArgumentParser(prog="harmball", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"harmball {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="INI config file")
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument("--seed", type=int, default=None, help="override [run] seed")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = Config(args.config, args.seed)
        return COMMANDS[args.command](cfg, Path(args.out))
    except (ConfigError, FieldError, MeshError) as exc:
        print(f"harmball: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GluingError, GeometryError) as exc:
        print(f"harmball: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
