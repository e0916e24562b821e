"""Command-line front end.

Subcommands wire the library modules to reproducible artifacts: CSV
(RFC 4180 with header row), binary PPM images, and JSON run reports with
stable key order.  Exit codes: 0 success, 2 check failure, 1 error.
"""

from __future__ import annotations

import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import click

from . import __version__
from .config import JobConfig, load_config, parse_rational
from .errors import HauteurError
from .heights_ff import (
    cleared_section,
    divisor_DEP,
    ff_canonical_height,
    quasi_triviality_check,
)
from .heights_q import bad_primes, canonical_height, local_height
from .kernel import PlaceQ
from .measure import (
    GridSpec,
    density_csv,
    empirical_measure,
    escape_time_image,
    grid_potential,
    laplacian_density,
    discrepancy,
    ppm_bytes_density,
    ppm_bytes_image,
    thread_count,
)
from .torsion import (common_torsion, torsion_csv, torsion_parameters,
                      torsion_parameters_all)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CHECK_FAILED = 2


def _fail(exc):
    code = getattr(exc, "code", "error")
    payload = {"error": {"code": code, "message": str(exc)}}
    click.echo(json.dumps(payload, sort_keys=True), err=True)
    sys.exit(EXIT_ERROR)


def _report(command, configs, outcomes, timings, artifacts=()):
    rep = {
        "command": command,
        "inputs": {c.name or f"config{i}": c.digest for i, c in enumerate(configs)},
        "outcomes": outcomes,
        "timings": {k: round(v, 6) for k, v in timings.items()},
        "artifacts": sorted(str(a) for a in artifacts),
        "version": __version__,
    }
    return json.dumps(rep, sort_keys=True, indent=2) + "\n"


def _frac_str(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


def _region_spec(cfg, region, nx, ny, exclusion=None):
    if region is None:
        block = cfg.option("grid", "region")
        if block is None:
            raise HauteurError("no region given (flag --region or grid.region in config)")
        vals = [float(v) for v in block]
    else:
        parts = region.split(",")
        if len(parts) != 4:
            raise HauteurError("--region must be re_min,re_max,im_min,im_max")
        vals = [float(p) for p in parts]
    nx = nx or cfg.option("grid", "nx", default=512)
    ny = ny or cfg.option("grid", "ny", default=512)
    kwargs = {}
    if exclusion is not None:
        kwargs["exclusion_radius"] = exclusion
    return GridSpec(vals[0], vals[1], vals[2], vals[3], int(nx), int(ny), **kwargs)


def _specialized_point(cfg, t0):
    """(curve over Q, x-coordinate) at parameter t0, pole-safe via clearing."""
    cleared, u = cfg.curve.cleared_model()
    E0 = cleared.specialize(t0)
    uval = u.eval(t0)
    xval = cfg.x_P.eval(t0) * uval * uval
    return E0, xval


@click.group()
@click.version_option(version=__version__)
def main():
    """Heights, torsion parameters, and measures for elliptic surfaces."""


@main.command()
@click.argument("config_path", type=click.Path())
@click.option("--t", "t_text", required=True, help="rational parameter, e.g. 3/2")
@click.option("--depth", type=int, default=None, help="doubling depth for the limit")
def height(config_path, t_text, depth):
    """Canonical and local heights of the specialized point at t."""
    try:
        cfg = load_config(config_path)
        t0 = parse_rational(t_text)
        start = time.perf_counter()
        E0, xval = _specialized_point(cfg, t0)
        if not E0.is_smooth:
            raise HauteurError(f"fiber at t = {t_text} is singular")
        kwargs = {"depth": depth} if depth else {}
        ch = canonical_height(E0, xval, **kwargs)
        locs = []
        places = [PlaceQ.archimedean()] + [PlaceQ.finite(p) for p in bad_primes(E0)]
        if not (ch.exact_zero or xval is None):
            for pl in places:
                lv = local_height(E0, xval, pl)
                locs.append({
                    "place": "inf" if pl.is_archimedean else str(pl.p),
                    "value": float(lv.value),
                    "rational": _frac_str(lv.rational) if lv.rational is not None else None,
                    "snapped": lv.snapped,
                })
        outcomes = {
            "t": t_text,
            "canonical_height": float(ch.value),
            "exact_zero": ch.exact_zero,
            "gap": float(ch.gap),
            "local_heights": locs,
        }
        out = _report("height", [cfg], outcomes,
                      {"total": time.perf_counter() - start})
        click.echo(out, nl=False)
    except HauteurError as exc:
        _fail(exc)
    sys.exit(EXIT_OK)


@main.command()
@click.argument("config_path", type=click.Path())
@click.option("-o", "--output", type=click.Path(), default=None, help="CSV path")
def divisor(config_path, output):
    """The height divisor: local heights at every base point, with degree."""
    try:
        cfg = load_config(config_path)
        start = time.perf_counter()
        D = divisor_DEP(cfg.curve, cfg.x_P)
        h = ff_canonical_height(cfg.curve, cfg.x_P)
        lines = ["gamma_kind,gamma_value_or_minpoly,coefficient_num,coefficient_den,snapped_flag"]
        for e in D.entries:
            bp = e.point
            if bp.kind == "infinity":
                val = "inf"
            elif bp.kind == "rational":
                val = _frac_str(bp.gamma)
            else:
                val = "\"" + ",".join(_frac_str(c) for c in bp.minpoly.coeffs) + "\""
            q = Fraction(e.coefficient)
            lines.append(f"{bp.kind},{val},{q.numerator},{q.denominator},{int(e.snapped)}")
        csv_text = "\n".join(lines) + "\n"
        arts = []
        if output:
            Path(output).write_text(csv_text)
            arts.append(output)
        else:
            click.echo(csv_text, nl=False)
        outcomes = {
            "degree": _frac_str(D.degree),
            "canonical_height": _frac_str(h),
            "degree_equals_height": D.degree == h,
            "entries": len(D.entries),
        }
        click.echo(_report("divisor", [cfg], outcomes,
                           {"total": time.perf_counter() - start}, arts), nl=False)
        if D.degree != h:
            sys.exit(EXIT_CHECK_FAILED)
    except HauteurError as exc:
        _fail(exc)
    sys.exit(EXIT_OK)


@main.command("reference-check")
@click.argument("config_path", type=click.Path())
@click.option("--t", "t_list", default="1,2,3,5,7", help="comma-separated rational t values")
@click.option("--primes", "n_primes", type=int, default=20, help="number of good primes")
def reference_check(config_path, t_list, n_primes):
    """Quasi-triviality: fiber local heights vs the reference height of D."""
    try:
        cfg = load_config(config_path)
        start = time.perf_counter()
        ts = [parse_rational(s) for s in t_list.split(",")]
        primes = []
        p = 2
        import sympy

        while len(primes) < n_primes:
            primes.append(p)
            p = int(sympy.nextprime(p))
        ok = True
        per_t = []
        for t0 in ts:
            rep = quasi_triviality_check(cfg.curve, cfg.x_P, t0, primes=primes)
            bad = rep["candidate_bad_primes"]
            failures = [p for p, r in rep["per_prime"].items()
                        if not r["equal"] and p not in bad]
            ok = ok and not failures
            per_t.append({
                "t": _frac_str(t0),
                "tested_primes": len(rep["per_prime"]),
                "unexplained_failures": failures,
                "candidate_bad_primes": bad,
            })
        outcomes = {"checks": per_t, "all_explained": ok}
        click.echo(_report("reference-check", [cfg], outcomes,
                           {"total": time.perf_counter() - start}), nl=False)
        sys.exit(EXIT_OK if ok else EXIT_CHECK_FAILED)
    except HauteurError as exc:
        _fail(exc)


@main.command()
@click.argument("config_path", type=click.Path())
@click.option("--n", "level", type=int, default=4, help="torsion level (order divides 2^n)")
@click.option("--tol", type=float, default=1e-10)
@click.option("-o", "--output", type=click.Path(), default=None, help="CSV path")
def torsion(config_path, level, tol, output):
    """Torsion parameters up to order 2^n, CSV export."""
    try:
        cfg = load_config(config_path)
        start = time.perf_counter()
        ts = torsion_parameters(cfg.curve, cfg.x_P, level, tol=tol)
        csv_text = torsion_csv(ts)
        arts = []
        if output:
            Path(output).write_text(csv_text)
            arts.append(output)
        else:
            click.echo(csv_text, nl=False)
        outcomes = {
            "n": ts.n,
            "mode": ts.mode,
            "exact_order_degree": ts.degree,
            "distinct_exact_order": ts.count_distinct,
            "complete": ts.complete,
            "rational_parameters": [_frac_str(r) for r in ts.rational_roots],
        }
        click.echo(_report("torsion", [cfg], outcomes,
                           {"total": time.perf_counter() - start}, arts), nl=False)
    except HauteurError as exc:
        _fail(exc)
    sys.exit(EXIT_OK)


@main.command()
@click.argument("config_path", type=click.Path())
@click.option("--region", default=None, help="re_min,re_max,im_min,im_max")
@click.option("--nx", type=int, default=None)
@click.option("--ny", type=int, default=None)
@click.option("--threshold", type=float, default=10000.0)
@click.option("--max-iter", type=int, default=8)
@click.option("-o", "--output", type=click.Path(), default="render.ppm")
def render(config_path, region, nx, ny, threshold, max_iter, output):
    """Escape-time image (PPM): marks where the orbit exceeds the threshold."""
    try:
        cfg = load_config(config_path)
        start = time.perf_counter()
        spec = _region_spec(cfg, region, nx, ny)
        img = escape_time_image(cfg.curve, cfg.x_P, spec,
                                threshold=threshold, max_iter=max_iter)
        data = ppm_bytes_image(img)
        Path(output).write_bytes(data)
        import hashlib

        outcomes = {
            "marked_nodes": int(img.marks.sum()),
            "total_nodes": int(img.marks.size),
            "sha256": hashlib.sha256(data).hexdigest(),
        }
        click.echo(_report("render", [cfg], outcomes,
                           {"total": time.perf_counter() - start}, [output]), nl=False)
    except HauteurError as exc:
        _fail(exc)
    sys.exit(EXIT_OK)


@main.command()
@click.argument("config_path", type=click.Path())
@click.option("--region", default=None)
@click.option("--nx", type=int, default=None)
@click.option("--ny", type=int, default=None)
@click.option("--depth", type=int, default=None, help="escape-rate iteration depth")
@click.option("--threads", type=int, default=None)
@click.option("-o", "--output", type=click.Path(), default="density",
              help="output prefix (.csv and .ppm)")
def density(config_path, region, nx, ny, depth, threads, output):
    """Laplacian density of the potential grid: CSV values + PPM heatmap."""
    try:
        cfg = load_config(config_path)
        start = time.perf_counter()
        spec = _region_spec(cfg, region, nx, ny)
        kwargs = {"depth": depth} if depth else {}
        G = grid_potential(cfg.curve, cfg.x_P, spec,
                           threads=threads or thread_count(), **kwargs)
        D = divisor_DEP(cfg.curve, cfg.x_P)
        dg = laplacian_density(G, spec, D.degree)
        csv_path = output + ".csv"
        ppm_path = output + ".ppm"
        Path(csv_path).write_text(density_csv(dg))
        Path(ppm_path).write_bytes(ppm_bytes_density(dg))
        outcomes = {
            "mass": dg.mass,
            "normalization": _frac_str(dg.normalization),
        }
        click.echo(_report("density", [cfg], outcomes,
                           {"total": time.perf_counter() - start},
                           [csv_path, ppm_path]), nl=False)
    except HauteurError as exc:
        _fail(exc)
    sys.exit(EXIT_OK)


@main.command()
@click.argument("config_path", type=click.Path())
@click.option("--levels", default="4,5,6", help="comma-separated torsion levels")
@click.option("--region", default=None)
@click.option("--nx", type=int, default=None)
@click.option("--ny", type=int, default=None)
@click.option("--tol", type=float, default=1e-10)
def equidist(config_path, levels, region, nx, ny, tol):
    """Discrepancy between empirical torsion measures and the density."""
    try:
        cfg = load_config(config_path)
        start = time.perf_counter()
        spec = _region_spec(cfg, region, nx, ny)
        lv = sorted({int(s) for s in levels.split(",")})
        G = grid_potential(cfg.curve, cfg.x_P, spec)
        D = divisor_DEP(cfg.curve, cfg.x_P)
        dg = laplacian_density(G, spec, D.degree)
        all_sets = torsion_parameters_all(cfg.curve, cfg.x_P, lv[-1], tol=tol)
        table = []
        prev = None
        decreasing = True
        for n in lv:
            ts = all_sets[n - 1]
            em = empirical_measure(ts, spec)
            d = discrepancy(em, dg, smoothed=True)
            if prev is not None and d >= prev:
                decreasing = False
            prev = d
            table.append({"level": n, "discrepancy": d,
                          "roots": len(ts.roots), "complete": ts.complete})
        outcomes = {"table": table, "decreasing": decreasing,
                    "final": table[-1]["discrepancy"] if table else None}
        click.echo(_report("equidist", [cfg], outcomes,
                           {"total": time.perf_counter() - start}), nl=False)
    except HauteurError as exc:
        _fail(exc)
    sys.exit(EXIT_OK)


@main.command()
@click.argument("config_path_1", type=click.Path())
@click.argument("config_path_2", type=click.Path())
@click.option("--nmax", type=int, default=4)
@click.option("--tol", type=float, default=1e-10)
def pair(config_path_1, config_path_2, nmax, tol):
    """Common torsion parameters of two sections up to order 2^nmax."""
    try:
        c1 = load_config(config_path_1)
        c2 = load_config(config_path_2)
        start = time.perf_counter()
        res = common_torsion(c1.curve, c1.x_P, c2.curve, c2.x_P, nmax, tol=tol)
        entries = []
        for r in res:
            item = {"level": r["level"], "gcd_degree": r["gcd_degree"],
                    "total": r["total"]}
            if r.get("parameters") is not None:
                item["parameters"] = [
                    {"re": z.real, "im": z.imag, "multiplicity": m}
                    for z, m in r["parameters"]
                ]
            entries.append(item)
        outcomes = {
            "levels_with_common_factor": entries,
            "empty": len(entries) == 0,
        }
        click.echo(_report("pair", [c1, c2], outcomes,
                           {"total": time.perf_counter() - start}), nl=False)
    except HauteurError as exc:
        _fail(exc)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
