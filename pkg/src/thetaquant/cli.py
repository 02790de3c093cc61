"""Command-line front end.

Verbs:

    thetaquant theta eval --n 1 --k 2 --Z i --alpha 1 --z 0.3+0.2i
    thetaquant gram --n 1 --k 4 --Z i
    thetaquant toeplitz compare --k 2 --Z i --mode 1,0
    thetaquant experiment run config.txt [--out report --workers 2 ...]
    thetaquant tqft invariant --g 1 --k 5 [--mode 1,0 --mode2 0,1]

Command-line flags override configuration-file values.  The cache directory
defaults to $THETAQUANT_CACHE_DIR.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import (
    ConfigError,
    parse_complex,
    parse_config_all,
    parse_matrix,
)
from .experiments import emit_outputs, fmt_complex, run_experiment
from .sections import QuadratureGrid, gram_matrix, required_grid_size
from .siegel import InvalidPointError, SiegelPoint
from .theta import Derivative, ThetaLabel, theta_eval
from .toeplitz import toeplitz_mode_closed_form, toeplitz_mode_quadrature
from .tqft import CurveClass, mapping_torus_invariant


def _point_from_arg(text, n):
    mat = parse_matrix(text)
    if mat.shape == (1, 1) and n > 1:
        raise ConfigError(f"--Z is scalar but n={n}")
    return SiegelPoint(mat)


def _parse_mode_arg(text):
    vals = [int(x) for x in text.replace(";", ",").split(",")]
    half = len(vals) // 2
    if len(vals) % 2:
        raise ConfigError(f"--mode needs an even number of integers, got {text!r}")
    return tuple(vals[:half]), tuple(vals[half:])


def _add_common(sp):
    sp.add_argument("--n", type=int, default=1, help="complex dimension")
    sp.add_argument("--k", type=int, default=2, help="quantization level")
    sp.add_argument("--Z", default="i", help="Siegel point, 'a+bi' or [[..],[..]]")
    sp.add_argument("--tol", type=float, default=None, help="pass tolerance")
    sp.add_argument("--grid", type=int, default=None, help="nodes per coordinate")
    sp.add_argument("--out", default=None, help="output path base")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="thetaquant",
        description="Theta-frame quantization toolkit for symplectic tori",
    )
    sub = ap.add_subparsers(dest="verb", required=True)

    theta_p = sub.add_parser("theta", help="theta function evaluation")
    theta_sub = theta_p.add_subparsers(dest="action", required=True)
    ev = theta_sub.add_parser("eval", help="evaluate a theta frame element")
    _add_common(ev)
    ev.add_argument("--alpha", default="0", help="label integers, comma separated")
    ev.add_argument("--z", default="0", help="complex point, ';' separated coords")
    ev.add_argument("--sel", default="value",
                    help="value | dz:i | dz2:i,j | dZ:i,j")

    gram_p = sub.add_parser("gram", help="frame inner-product matrix")
    _add_common(gram_p)

    toep = sub.add_parser("toeplitz", help="mode operators")
    toep_sub = toep.add_subparsers(dest="action", required=True)
    cmp_p = toep_sub.add_parser("compare", help="closed form vs quadrature")
    _add_common(cmp_p)
    cmp_p.add_argument("--mode", default="1,0", help="mode integers r,s")

    exp = sub.add_parser("experiment", help="manifest-driven experiments")
    exp_sub = exp.add_subparsers(dest="action", required=True)
    run_p = exp_sub.add_parser("run", help="run every experiment in a config")
    run_p.add_argument("config", help="configuration file path")
    run_p.add_argument("--out", default=None)
    run_p.add_argument("--workers", type=int, default=None)
    run_p.add_argument("--cache-dir", default=None)
    run_p.add_argument("--tol", type=float, default=None)
    run_p.add_argument("--grid", type=int, default=None)
    run_p.add_argument("--no-cache", action="store_true")

    tq = sub.add_parser("tqft", help="curve operators and invariants")
    tq_sub = tq.add_subparsers(dest="action", required=True)
    inv = tq_sub.add_parser("invariant", help="mapping torus invariant")
    inv.add_argument("--g", type=int, default=1, help="genus")
    inv.add_argument("--k", type=int, default=2)
    inv.add_argument("--Z", default=None, help="optional Siegel point")
    inv.add_argument("--mode", default=None, help="first curve class r,s")
    inv.add_argument("--mode2", default=None, help="second curve class r,s")
    inv.add_argument("--out", default=None)
    return ap


def _cmd_theta_eval(args):
    p = _point_from_arg(args.Z, args.n)
    a = tuple(int(x) for x in args.alpha.split(","))
    label = ThetaLabel(args.k, a)
    z = np.array([parse_complex(c) for c in args.z.split(";")])
    if len(z) != p.n:
        raise ConfigError(f"z has {len(z)} coordinates, point has n={p.n}")
    sel = args.sel
    if sel == "value":
        d = Derivative.value()
    elif sel.startswith("dz2:"):
        i, j = (int(x) for x in sel[4:].split(","))
        d = Derivative.dz2(i, j)
    elif sel.startswith("dz:"):
        d = Derivative.dz(int(sel[3:]))
    elif sel.startswith("dZ:"):
        i, j = (int(x) for x in sel[3:].split(","))
        d = Derivative.dZ(i, j)
    else:
        raise ConfigError(f"unknown selector {sel!r}")
    value = theta_eval(p, label, z, d)
    print(fmt_complex(value))
    return 0


def _cmd_gram(args):
    p = _point_from_arg(args.Z, args.n)
    N = args.grid or required_grid_size(p, args.k)
    G = gram_matrix(p, args.k, QuadratureGrid(N, p.n))
    dev = float(np.max(np.abs(G - np.eye(args.k**p.n))))
    tol = args.tol if args.tol is not None else (1e-8 if p.n == 1 else 1e-7)
    status = "PASS" if dev < tol else "FAIL"
    print(f"max |Gram - Id| = {dev:.3e}  (tolerance {tol:g})  {status}")
    return 0 if dev < tol else 1


def _cmd_toeplitz_compare(args):
    p = _point_from_arg(args.Z, args.n)
    r, s = _parse_mode_arg(args.mode)
    m_max = max(abs(x) for x in r + s) if r + s else 0
    N = args.grid or required_grid_size(p, args.k, m_max)
    closed = toeplitz_mode_closed_form(p, args.k, (r, s))
    quad = toeplitz_mode_quadrature(p, args.k, (r, s), QuadratureGrid(N, p.n))
    diff = float(np.max(np.abs(closed.entries - quad.entries)))
    tol = args.tol if args.tol is not None else 1e-8
    status = "PASS" if diff < tol else "FAIL"
    print(f"max entry difference = {diff:.3e}  (tolerance {tol:g})  {status}")
    return 0 if diff < tol else 1


def _cmd_experiment_run(args):
    with open(args.config, "r", encoding="utf-8") as fh:
        manifests = parse_config_all(fh.read())
    failures = 0
    for idx, m in enumerate(manifests):
        if args.workers is not None:
            m.workers = args.workers
        if args.cache_dir is not None:
            m.cache_dir = args.cache_dir
        if args.tol is not None:
            m.tol = args.tol
        if args.grid is not None:
            m.grid = args.grid
        if args.out is not None:
            m.out = args.out if len(manifests) == 1 else f"{args.out}-{idx}"
        doc = run_experiment(m, use_cache=not args.no_cache)
        sys.stdout.write(doc.summary_text())
        if m.out:
            paths = emit_outputs(doc, m.out)
            print("wrote: " + ", ".join(paths))
        if not doc.passed:
            failures += 1
    return 1 if failures else 0


def _cmd_tqft_invariant(args):
    g = args.g
    if args.Z is not None:
        p = SiegelPoint(parse_matrix(args.Z))
        if p.n != g:
            raise ConfigError(f"point dimension {p.n} != genus {g}")
    else:
        p = SiegelPoint(np.diag([1j * (i + 1) for i in range(g)]))
    c1 = c2 = None
    if args.mode:
        r, s = _parse_mode_arg(args.mode)
        c1 = CurveClass(r, s)
    if args.mode2:
        r, s = _parse_mode_arg(args.mode2)
        c2 = CurveClass(r, s)
    val = mapping_torus_invariant(p, args.k, c1, c2)
    print(fmt_complex(val))
    return 0


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.verb == "theta":
            return _cmd_theta_eval(args)
        if args.verb == "gram":
            return _cmd_gram(args)
        if args.verb == "toeplitz":
            return _cmd_toeplitz_compare(args)
        if args.verb == "experiment":
            return _cmd_experiment_run(args)
        if args.verb == "tqft":
            return _cmd_tqft_invariant(args)
    except (ConfigError, InvalidPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable verb")


if __name__ == "__main__":
    sys.exit(main())
