"""Command-line front end.

Exit codes: 0 success, 1 bad input, 2 certificate failed or check not
applicable, 3 numerical failure or violated check.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import certificates as certs
from .chart import build_chart, karcher_mean, shared_facet_check
from .energy import CurvatureBounds
from .errors import CertificateFailed, GeometryError, SolverError, VerificationError
from .model_spaces import ModelPoint, ModelSpace
from .signed_measures import SignedDiscreteMeasure, support_radius
from .simplex_geometry import EdgeLengthMatrix, realize_from_edge_lengths
from .verification import empirical_min_curvature, grid_minimize

EXIT_OK, EXIT_INPUT, EXIT_CERT, EXIT_NUMERIC = 0, 1, 2, 3
LOAD_TOL = 1e-6
MAX_CELLS = 10**6


class InputError(Exception):
    pass


# -- input ----------------------------------------------------------------------


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _space(doc) -> ModelSpace:
    try:
        return ModelSpace(float(doc["curvature"]), int(doc["dimension"]))
    except KeyError as exc:
        raise InputError(f"missing field {exc}") from None
    except (TypeError, ValueError, GeometryError) as exc:
        raise InputError(str(exc)) from None


def _coords(space: ModelSpace, rows, what="points") -> np.ndarray:
    try:
        A = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{what} must be numeric arrays") from None
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2 or A.shape[1] != space.ambient_dim:
        raise InputError(f"{what} need {space.ambient_dim} ambient coordinates each")
    if not np.all(np.isfinite(A)):
        raise InputError(f"{what} contain non-finite values")
    if np.any(space.point_residual(A) > LOAD_TOL):
        raise InputError(f"{what} do not lie on the model (tolerance {LOAD_TOL})")
    return space.project(A)


def load_measure(path, weights_required=True):
    """Parse a measure/simplex document into ``(space, coords, weights, doc)``."""
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise InputError("top level must be an object")
    space = _space(doc)
    if "points" not in doc:
        raise InputError("missing field 'points'")
    P = _coords(space, doc["points"])
    w = doc.get("weights")
    if w is None:
        if weights_required:
            raise InputError("missing field 'weights'")
    else:
        try:
            w = np.array(w, dtype=float).reshape(-1)
        except (TypeError, ValueError):
            raise InputError("weights must be numbers") from None
        if len(w) != len(P):
            raise InputError("points and weights differ in length")
    return space, P, w, doc


def _center(space, P, doc):
    if doc.get("center") is not None:
        return ModelPoint(space, _coords(space, doc["center"], "center")[0])
    # support point with the smallest support radius
    D = space.dist(P[:, None, :], P[None, :, :])
    return ModelPoint(space, P[int(np.argmin(D.max(axis=1)))])


def _rho(args, doc):
    rho = args.rho if args.rho is not None else doc.get("rho")
    if rho is None:
        raise InputError("rho must be given in the file or with --rho")
    rho = float(rho)
    if not rho > 0:
        raise InputError("rho must be positive")
    return rho


def _bounds(args, space):
    lo = space.curvature if args.lambda_lo is None else args.lambda_lo
    hi = space.curvature if args.lambda_hi is None else args.lambda_hi
    if lo > hi:
        raise InputError("--lambda-lo exceeds --lambda-hi")
    if not lo <= space.curvature <= hi:
        raise InputError("curvature bounds do not contain the space's curvature")
    return CurvatureBounds(lo, hi)


def _dump(obj):
    print(json.dumps(obj, indent=2))


def _floats(a):
    return [float(x) for x in np.asarray(a).ravel()]


# -- commands ---------------------------------------------------------------------


def cmd_mean(args):
    space, P, w, doc = load_measure(args.input)
    m = SignedDiscreteMeasure(space, P, w)
    c = _center(space, P, doc)
    rho = _rho(args, doc)
    x, info = karcher_mean(m, c, rho, _bounds(args, space), iota=args.iota,
                           force=args.force, return_info=True)
    _dump({
        "minimizer": _floats(x.ambient),
        "gradient_norm": info.grad_norm,
        "iterations": info.iterations,
        "certificate": info.certificate.to_record() if info.certificate else None,
        "forced": bool(args.force),
    })
    return EXIT_OK


def cmd_oracle(args):
    space, P, w, doc = load_measure(args.input)
    m = SignedDiscreteMeasure(space, P, w)
    c = _center(space, P, doc)
    rho = _rho(args, doc)
    res = args.resolution if args.resolution is not None else 1e-3 * rho
    g = grid_minimize(m, c, rho, res)
    _dump({"minimizer": _floats(g.point.ambient), "value": g.value,
           "local_min_count": g.local_min_count, "spacing": g.spacing})
    return EXIT_OK


def _certify_measure(args, space, P, w, doc):
    m = SignedDiscreteMeasure(space, P, w)
    c = _center(space, P, doc)
    rho = _rho(args, doc)
    bounds = _bounds(args, space)
    iota = space.injectivity_radius if args.iota is None else args.iota
    out = [certs.theorem_com_certificate(m, c, rho, bounds, iota).to_record()]
    total = float(w.sum())
    if abs(total - 1.0) <= 1e-12:
        out.append(certs.corollary_certificate(m.mu_minus, support_radius(m, c), rho,
                                               bounds.lambda_abs, iota).to_record())
    return out


def _certify_simplex(args, space, P):
    n = space.dimension
    if len(P) != n + 1:
        raise InputError(f"a simplex needs {n + 1} points")
    ref = realize_from_edge_lengths(EdgeLengthMatrix.from_points(space, P))
    lam = abs(space.curvature)
    if args.lambda_lo is not None or args.lambda_hi is not None:
        lam = _bounds(args, space).lambda_abs
    s = 1.0 if args.scale is None else args.scale
    cert = certs.chart_certificate(ref.L, ref.t, s, lam)
    rec = cert.to_record()
    rec["inputs"]["a"] = ref.a
    extras = {"contained_ball_radius": certs.contained_ball_radius(s, ref.L)}
    if ref.L * math.sqrt(lam) <= math.pi / 16:
        extras["tilde_r_max"] = certs.tilde_r_max(ref.L, ref.t, lam)
    rho = args.rho
    if rho is None and cert.satisfied:
        lo, hi = cert.interval
        rho = min(lo * (1 + 1e-3), 0.5 * (lo + hi))
    if rho is not None:
        extras["rho"] = rho
        if lam == 0 or rho <= ref.t / (6 * math.sqrt(lam)):
            extras["distortion_bound"] = certs.distortion_bound(lam, rho, ref.t)
    rec["derived"] = extras
    return [rec]


_PARAM_CERTS = {
    "convexity": lambda p: certs.convexity_certificate(
        p["mu_plus"], p["mu_minus"], p["rho"], CurvatureBounds(p["lambda_lo"], p["lambda_hi"])),
    "gradient_outward": lambda p: certs.gradient_outward_certificate(
        p["mu_plus"], p["mu_minus"], p["rho"], p["r"]),
    "corollary": lambda p: certs.corollary_certificate(
        p["mu_minus"], p["r"], p["rho"], p["lambda_abs"], p.get("iota", math.inf)),
    "chart": lambda p: certs.chart_certificate(p["L"], p["t"], p["s"], p["lambda_abs"]),
}


def _certify_params(doc):
    kind = doc["certificate"]
    if kind not in _PARAM_CERTS:
        raise InputError(f"unknown certificate {kind!r}; choose from {sorted(_PARAM_CERTS)}")
    try:
        return [_PARAM_CERTS[kind](doc).to_record()]
    except KeyError as exc:
        raise InputError(f"missing parameter {exc}") from None


def cmd_certify(args):
    if args.scale is not None and args.scale < 1:
        raise InputError("--scale must be >= 1")
    doc = _read_json(args.input)
    if isinstance(doc, dict) and "certificate" in doc:
        records = _certify_params(doc)
    else:
        space, P, w, doc = load_measure(args.input, weights_required=False)
        if w is None:
            records = _certify_simplex(args, space, P)
        else:
            records = _certify_measure(args, space, P, w, doc)
    _dump({"certificates": records})
    return EXIT_OK if all(r["satisfied"] for r in records) else EXIT_CERT


# -- sweep -------------------------------------------------------------------------

SWEEP_COLUMNS = ("kappa", "rho", "mu_minus", "t", "s", "cert_existence", "margin_existence",
                 "cert_simplified", "empirical_convex", "empirical_unique")


def parse_range(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:num`` (inclusive, evenly spaced)."""
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            return [float(v) for v in np.linspace(float(start), float(stop), int(num))]
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"bad range {text!r}") from None


def sweep_instance(kappa, rho, mu_minus, t, s):
    """Signed measure on the 2-dimensional model space probing a chart-like
    configuration: support radius ``rho t / (t + 2 s)``, the negative mass at
    angle 0 and the positive mass split over three symmetric directions."""
    space = ModelSpace(kappa, 2)
    r = rho * t / (t + 2 * s)
    ang = np.radians([0.0, 90.0, 210.0, 330.0])
    xi = r * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    c = space.origin()
    P = space.from_normal(c, xi)
    w = np.array([-mu_minus] + [(1 + mu_minus) / 3] * 3)
    return SignedDiscreteMeasure(space, P, w), ModelPoint(space, c), r


def sweep_cell(cell):
    kappa, rho, mu_minus, t, s, samples, seed, resolution = cell
    m, c, r = sweep_instance(kappa, rho, mu_minus, t, s)
    lam = abs(kappa)
    space = m.space
    thm = certs.theorem_com_certificate(m, c, rho, CurvatureBounds.symmetric(lam))
    cor = certs.corollary_certificate(mu_minus, r, rho, lam, space.injectivity_radius)
    try:
        convex = empirical_min_curvature(m, c, rho, samples, seed) > 0
        res = resolution if resolution is not None else 1e-2 * rho
        unique = grid_minimize(m, c, rho, res).local_min_count == 1
    except GeometryError:
        convex = unique = False
    return (kappa, rho, mu_minus, t, s, thm.satisfied, thm.margin, cor.satisfied, convex, unique)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return format(float(v), ".17g")


def cmd_sweep(args):
    axes = [parse_range(a) for a in (args.kappa, args.rho, args.mu_minus, args.t, args.s)]
    size = math.prod(len(a) for a in axes)
    if size > MAX_CELLS:
        raise InputError(f"grid has {size} cells, limit is {MAX_CELLS}")
    for name, vals, ok in (("rho", axes[1], lambda v: v > 0), ("mu-minus", axes[2], lambda v: v >= 0),
                           ("t", axes[3], lambda v: 0 < v <= 1), ("s", axes[4], lambda v: v >= 1)):
        if not all(ok(v) for v in vals):
            raise InputError(f"--{name} values out of range")
    cells = [(*vals, args.samples, args.seed, args.resolution)
             for vals in itertools.product(*axes)]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            rows = list(pool.map(sweep_cell, cells, chunksize=max(1, len(cells) // (4 * args.workers))))
    else:
        rows = [sweep_cell(cell) for cell in cells]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


# -- facet check -----------------------------------------------------------------------


def cmd_facet_check(args):
    sa, Pa, _, _ = load_measure(args.first, weights_required=False)
    sb, Pb, _, _ = load_measure(args.second, weights_required=False)
    if sa != sb:
        raise InputError("the two simplices live in different spaces")
    n = sa.dimension
    if len(Pa) != n + 1 or len(Pb) != n + 1:
        raise InputError(f"each simplex needs {n + 1} points")
    D = np.linalg.norm(Pa[:, None, :] - Pb[None, :, :], axis=-1)
    shared = [(i, int(np.argmin(D[i]))) for i in range(n + 1) if D[i].min() <= 1e-12 * (1 + np.abs(Pa[i]).max())]
    s = 1.5 if args.scale is None else args.scale
    report = {"status": "not_applicable", "worst_violation": None, "reason": ""}
    if not shared:
        report["reason"] = "no shared vertices"
        _dump(report)
        return EXIT_CERT
    ia, ib = shared[0]
    L = max(EdgeLengthMatrix.from_points(sa, P).lengths.max() for P in (Pa, Pb))
    try:
        a = build_chart(sa, Pa, s=s, anchor=ia, L=L)
        b = build_chart(sb, Pb, s=s, anchor=ib, L=L)
    except CertificateFailed as exc:
        report["reason"] = str(exc)
        _dump(report)
        return EXIT_CERT
    res = shared_facet_check(a, b, args.samples, seed=args.seed)
    report = {"status": res.status, "worst_violation": res.worst_violation,
              "reason": res.reason, "samples": res.samples}
    _dump(report)
    return {"pass": EXIT_OK, "fail": EXIT_NUMERIC}.get(res.status, EXIT_CERT)


# -- entry point ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="riemcom", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--rho", type=float)
        sp.add_argument("--iota", type=float)
        sp.add_argument("--lambda-lo", type=float)
        sp.add_argument("--lambda-hi", type=float)

    sp = sub.add_parser("mean", help="centre of mass of a signed measure")
    sp.add_argument("input")
    common(sp)
    sp.add_argument("--force", action="store_true", help="run even if the certificate fails")
    sp.set_defaults(func=cmd_mean)

    sp = sub.add_parser("oracle", help="brute-force grid minimisation")
    sp.add_argument("input")
    common(sp)
    sp.add_argument("--resolution", type=float)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("certify", help="evaluate every applicable certificate")
    sp.add_argument("input")
    common(sp)
    sp.add_argument("--scale", type=float)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("sweep", help="certificate margins over a parameter grid (CSV)")
    sp.add_argument("--kappa", default="1")
    sp.add_argument("--rho", default="0.1")
    sp.add_argument("--mu-minus", default="0.2")
    sp.add_argument("--t", default="0.2222222222222222")
    sp.add_argument("--s", default="1")
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--resolution", type=float)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("facet-check", help="do two simplices meet only in their shared facet")
    sp.add_argument("first")
    sp.add_argument("second")
    sp.add_argument("--scale", type=float)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_facet_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CertificateFailed as exc:
        print(f"certificate failed: {exc}", file=sys.stderr)
        return EXIT_CERT
    except (SolverError, VerificationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except GeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
