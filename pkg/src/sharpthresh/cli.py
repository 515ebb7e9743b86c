"""Command-line front end.

Exit codes: 0 ok, 2 an undetermined result (unless ``--allow-undetermined``),
3 an invariant violation, 1 usage or input errors. Every artifact starts
with a header carrying the tool version, the run configuration and seed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__, bounds, constructions, fourier, invariants, planted, properties, thresholds
from .circuit import deserialize, serialize

SEED_ENV = "SHARPTHRESH_SEED"
EXIT_OK, EXIT_ERROR, EXIT_UNDETERMINED, EXIT_VIOLATION = 0, 1, 2, 3


class Undetermined(Exception):
    pass


# -- output helpers --------------------------------------------------------

def _config(args) -> dict:
    skip = {"func", "out", "jobs"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def header_text(args, prefix="# ") -> str:
    cfg = json.dumps(_config(args), sort_keys=True)
    return f"{prefix}sharpthresh {__version__} seed={getattr(args, 'seed', None)} config={cfg}\n"


def write_atomic(path: str | None, data: bytes):
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_text(args, body: str):
    write_atomic(args.out, (header_text(args) + body).encode("utf-8"))


def emit_json(args, payload: dict):
    doc = {"tool": f"sharpthresh {__version__}", "seed": getattr(args, "seed", None),
           "config": _config(args), **payload}
    write_atomic(args.out, (json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n").encode())


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _params(pairs) -> dict:
    out = {}
    for item in pairs or []:
        key, _, value = item.partition("=")
        try:
            out[key] = int(value)
        except ValueError:
            out[key] = float(value)
    return out


def _grid(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:count`` (inclusive linspace)."""
    if ":" in text:
        a, b, n = text.split(":")
        return np.linspace(float(a), float(b), int(n)).tolist()
    return [float(t) for t in text.split(",")]


def _sizes(text: str) -> list[int]:
    return [int(t) for t in text.split(",")]


def _oracle(args):
    return properties.get_oracle(args.oracle, args.size, **_params(args.param))


def _mc_kw(args) -> dict:
    return {"samples": args.samples, "budget": args.budget, "seed": args.seed, "jobs": args.jobs}


# -- commands --------------------------------------------------------------

def cmd_estimate(args):
    f = _oracle(args)
    ps = _grid(args.p)
    rows = [(args.oracle, args.size, e)
            for e in thresholds.sweep(f, ps, args.samples, args.seed, args.jobs, exact=not args.mc)]
    emit_text(args, thresholds.sweep_csv(rows))


def _report_payload(r: thresholds.ThresholdReport) -> dict:
    return {"report": r.to_dict()}


def cmd_window(args):
    f = _oracle(args)
    r = thresholds.window(f, args.xi, symmetrize=args.symmetrize, exact=not args.mc, **_mc_kw(args))
    emit_json(args, _report_payload(r))
    if r.classification == "undetermined":
        raise Undetermined(f"classification undetermined (delta/epsilon = {r.delta / r.epsilon:.3g})")


def cmd_scaling(args):
    params = _params(args.param)

    def family(size):
        return properties.get_oracle(args.family, size, **params)
    fit = thresholds.window_scaling_exponent(family, _sizes(args.sizes), args.xi,
                                             exact=not args.mc, **_mc_kw(args))
    emit_json(args, {
        "slope": fit.slope, "stderr": fit.stderr, "intercept": fit.intercept,
        "sizes": fit.sizes, "epsilons": fit.epsilons,
        "reports": [r.to_dict() for r in fit.reports],
    })


def cmd_spectrum(args):
    f = _oracle(args)
    r = fourier.spectrum(f, args.p)
    emit_text(args, r.to_text())


def _minimal_elements(args):
    if args.elements:
        with open(args.elements) as fh:
            return constructions.parse_minimal_elements(fh.read())
    return constructions.PRESETS[args.preset]


def cmd_construct(args):
    kind = args.kind
    if kind == "debias":
        c = constructions.debias_layer(constructions.DebiasSpec(args.size, args.p0))
    elif kind == "tribes":
        c = constructions.tribes(args.size)
    elif kind == "itribes":
        c = constructions.iterated_tribes(args.size, args.depth)
    elif kind == "property":
        c = constructions.monotone_property_circuit(_minimal_elements(args), args.n)
    elif kind == "equality":
        if not args.circuit:
            raise ValueError("equality needs --circuit (a circuit file with N outputs)")
        with open(args.circuit, "rb") as fh:
            c = constructions.equality_augment(deserialize(fh.read()))
    elif kind == "converse":
        q = _grid(args.q)
        spec = constructions.ConverseSpec(n=args.n, p_c=args.p_c, S_blocks=args.blocks, q_points=q,
                                          minimal_element_lists=[_minimal_elements(args)] * len(q))
        c = constructions.converse_estimator(spec)
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(kind)
    m = c.measure()
    sys.stderr.write(f"{kind}: size={m.size} depth={m.depth} inputs={c.input_width}\n")
    meta = {"tool": f"sharpthresh {__version__}", "seed": args.seed, "config": _config(args)}
    write_atomic(args.out, serialize(c, meta=json.loads(json.dumps(meta, default=_jsonable))))


def cmd_verify(args):
    results = invariants.run(args.suite)
    lines = [f"{'PASS' if ok else 'FAIL'} {name} {detail}".rstrip() for name, ok, detail in results]
    emit_text(args, "\n".join(lines) + "\n")
    if not all(ok for _, ok, _ in results):
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_aon(args):
    grid = planted.auto_grid(args.n, args.k) if args.grid == "auto" else _grid(args.grid)
    curve = planted.aon_curve(args.n, args.k, grid, args.trials, args.seed, args.jobs)
    emit_text(args, curve.to_csv())
    if not curve.crosses():
        raise Undetermined("success curve does not cross from >= 0.9 to <= 0.1")


def cmd_bounds(args):
    if args.report:
        with open(args.report) as fh:
            doc = json.load(fh)["report"]
        eps, delta, p_c = doc["epsilon"], doc["delta"], doc["p_c"]
        N = args.N or doc["width"]
    else:
        eps, delta, p_c, N = args.epsilon, args.delta, args.p_c, args.N
    b = bounds.BoundInput(N=N, epsilon=eps, delta=delta, p_c=p_c, d=args.d, c1=args.c1, c2=args.c2)
    payload = {
        "note": "up to universal constants",
        "key_quantity": bounds.key_quantity(b),
        "depth_bound": bounds.depth_bound(b).value if N >= 16 else None,
        "hypotheses": {"beta_small": b.beta_small, "window_small": b.window_small,
                       "window_ratio": b.window_ratio},
    }
    if args.d is not None:
        payload["size_bound_log2"] = bounds.size_bound(b).log2_value
    if args.p_it is not None:
        a = bounds.aon_bounds(N, eps, args.p_it, args.d or 0.0, args.c1, args.c2)
        payload["aon"] = {"ratio": a.ratio, "depth_rhs": a.depth_rhs,
                          "size_log2_rhs": a.size_log2_rhs, "hypothesis_ok": a.hypothesis_ok}
    emit_json(args, payload)


def cmd_plot(args):
    from . import plotting
    with open(args.input) as fh:
        text = fh.read()
    svg = plotting.plot_file(text, kind=args.kind, header=header_text(args, prefix=""))
    write_atomic(args.out, svg)


# -- parser ----------------------------------------------------------------

def _default_seed() -> int:
    try:
        return int(os.environ.get(SEED_ENV, "0"))
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sharpthresh", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"sharpthresh {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=_default_seed(),
                        help=f"master seed (default ${SEED_ENV} or 0)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads (results do not depend on it)")
    common.add_argument("--out", "-o", default=None, help="output path (default stdout)")
    common.add_argument("--allow-undetermined", action="store_true")
    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--samples", type=int, default=2000)
    mc.add_argument("--budget", type=int, default=64000)
    mc.add_argument("--mc", action="store_true", help="force Monte Carlo even if exact values exist")
    orc = argparse.ArgumentParser(add_help=False)
    orc.add_argument("--oracle", required=True, choices=sorted(properties.oracle_catalog()))
    orc.add_argument("--size", type=int, required=True)
    orc.add_argument("--param", action="append", metavar="KEY=VALUE", help="extra oracle parameter")

    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("estimate", parents=[common, mc, orc], help="E_p f over a grid of p")
    p.add_argument("--p", required=True, help="a,b,c or start:stop:count")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("window", parents=[common, mc, orc], help="threshold location and window")
    p.add_argument("--xi", type=float, default=0.25)
    p.add_argument("--symmetrize", action="store_true")
    p.set_defaults(func=cmd_window)

    p = sub.add_parser("scaling", parents=[common, mc], help="window-scaling exponent of a family")
    p.add_argument("--family", required=True, choices=sorted(properties.oracle_catalog()))
    p.add_argument("--sizes", required=True)
    p.add_argument("--xi", type=float, default=0.25)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("spectrum", parents=[common, orc], help="exact p-biased Fourier coefficients")
    p.add_argument("--p", type=float, default=0.5)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("construct", parents=[common], help="build a circuit and write it out")
    p.add_argument("kind", choices=["debias", "tribes", "itribes", "property", "equality", "converse"])
    p.add_argument("--size", type=int, default=16)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--p0", type=float, default=0.25)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--preset", choices=sorted(constructions.PRESETS), default="triangle")
    p.add_argument("--elements", help="minimal-element list file")
    p.add_argument("--circuit", help="input circuit file (equality)")
    p.add_argument("--p-c", dest="p_c", type=float, default=0.03)
    p.add_argument("--blocks", type=int, default=4)
    p.add_argument("--q", default="0.02,0.03,0.04")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", parents=[common], help="run the built-in invariant suites")
    p.add_argument("suite", nargs="*", default=["all"])
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("aon", parents=[common], help="planted-clique exact-recovery curve")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--grid", default="auto")
    p.add_argument("--trials", type=int, default=300)
    p.set_defaults(func=cmd_aon)

    p = sub.add_parser("bounds", parents=[common], help="evaluate the depth/size lower-bound formulas")
    p.add_argument("--report", help="JSON written by the window command")
    p.add_argument("--N", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--p-c", dest="p_c", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--p-it", dest="p_it", type=float)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=1.0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("plot", parents=[common], help="SVG plot of a sweep or scaling output")
    p.add_argument("input")
    p.add_argument("--kind", choices=["sweep", "scaling"], default="sweep")
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "bounds" and not args.report and None in (args.N, args.epsilon, args.p_c):
        ap.error("bounds needs --report or all of --N, --epsilon, --p-c")
    try:
        code = args.func(args)
    except Undetermined as exc:
        sys.stderr.write(f"undetermined: {exc}\n")
        return EXIT_OK if args.allow_undetermined else EXIT_UNDETERMINED
    except thresholds.ThresholdUndetermined as exc:
        sys.stderr.write(f"undetermined: {exc}\n")
        return EXIT_OK if args.allow_undetermined else EXIT_UNDETERMINED
    except (KeyError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR
    return EXIT_OK if code is None else code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
