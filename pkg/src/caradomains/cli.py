"""Command-line entry point: JSON documents in, JSON reports (and optional SVG) out.

Exit codes: 0 success, 1 error, 2 inconclusive at the requested resolution.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import __version__

OK, ERROR, INCONCLUSIVE = 0, 1, 2


# ------------------------------------------------------------ manifest / output


@dataclass
class RunManifest:
    command: str
    inputs: list = field(default_factory=list)
    knobs: dict = field(default_factory=dict)
    seed: int = 0
    version: str = __version__

    def to_json(self) -> dict:
        return {"tool": "caradomains", "version": self.version, "command": self.command,
                "inputs": self.inputs, "knobs": self.knobs, "seed": self.seed}


def _digest(path: str) -> dict:
    with open(path, "rb") as fh:
        return {"path": path, "sha256": hashlib.sha256(fh.read()).hexdigest()}


def clean(obj):
    """JSON-safe copy: numpy scalars to Python, complex to [x, y], non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (complex, np.complexfloating)):
        return [clean(obj.real), clean(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_json"):
        return clean(obj.to_json())
    return str(obj)


def dumps(report: dict) -> str:
    return json.dumps(clean(report), sort_keys=True, indent=2) + "\n"


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(args, manifest: RunManifest, result: dict, status: str = "ok") -> None:
    text = dumps({"manifest": manifest.to_json(), "status": status, "result": result})
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------ argument helpers


def parse_m(text: str, index_range=(1, None)) -> list:
    """'A:B' -> doubling sample from A to B (inclusive); 'a,b,c' -> list; 'm' -> [m].

    Indices below the family's range are clipped to its first valid index.
    """
    lo, hi = index_range
    if ":" in text:
        parts = text.split(":")
        a, b = int(parts[0]), int(parts[1])
        if b < a:
            raise ValueError(f"--m {text}: empty range")
        a = max(a, lo)
        if len(parts) == 3:
            out = list(range(a, b + 1, int(parts[2])))
        else:
            out, m = [], a
            while m < b:
                out.append(m)
                m *= 2
            out.append(b)
    else:
        out = [int(x) for x in text.split(",")]
        out = [m for m in out if m >= lo]
    if hi is not None:
        out = [m for m in out if m <= hi]
    out = sorted(set(out))
    if not out:
        raise ValueError(f"--m {text}: no index inside the family range {index_range}")
    return out


def _family(args):
    from .domains import builtin_family
    params = {}
    for kv in args.param or []:
        k, _, v = kv.partition("=")
        try:
            params[k] = json.loads(v)
        except json.JSONDecodeError:
            params[k] = v
    return builtin_family(args.family, params)


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _domains(args, count=None):
    from .domains import PointedDomain
    paths = args.domain or []
    if count is not None and len(paths) != count:
        raise ValueError(f"expected {count} --domain argument(s), got {len(paths)}")
    return [PointedDomain.from_json(_load_json(p)) for p in paths], [_digest(p) for p in paths]


def _knobs(args, **extra) -> dict:
    k = {"mesh": args.mesh, "seeds": args.seeds, "vertices": args.vertices}
    k.update(extra)
    return k


# ------------------------------------------------------------ subcommands


def cmd_validate(args) -> int:
    from .domains import is_nondegenerate, validate
    (U,), ins = _domains(args, 1)
    rep = validate(U)
    ok, why = is_nondegenerate(U)
    res = {"validation": rep.to_json(), "nondegenerate": ok, "degeneracy": why, "connectivity": U.n}
    emit(args, RunManifest("validate", ins, {}, args.seed), res, "ok" if rep.ok else "invalid")
    return OK if rep.ok else ERROR


def cmd_bound(args) -> int:
    from .carabounds import cara_bound
    (U,), ins = _domains(args, 1)
    rep = cara_bound(U, args.seeds, args.seed, args.mesh, not args.principal, args.vertices)
    emit(args, RunManifest("bound", ins, _knobs(args, extended=not args.principal), args.seed),
         rep.to_json(curves=args.curves))
    if args.svg:
        from .render import render_domain
        S = rep.extended or rep.principal
        curves = [e.curve for e in S.entries] if S is not None else []
        render_domain(args.svg, U, curves, [e.cls.label() for e in S.entries] if S is not None else None)
    return OK if rep.finite else INCONCLUSIVE


def cmd_meridians(args) -> int:
    from .meridians import extended_system, find_meridian, parse_class
    (U,), ins = _domains(args, 1)
    if args.cls:
        cls = parse_class(args.cls, U.n, U.inf_index())
        m = find_meridian(U, cls, args.seeds, args.seed, args.vertices)
        entries = [{"class": cls.to_json(), "label": cls.label(), "length": m.length.to_json(),
                    "curve_length": m.curve_length.to_json(), "curve": m.curve.to_json(),
                    "diagnostics": {k: v for k, v in m.diagnostics.items() if k != "trail"}}]
        curves, labels = [m.curve], [cls.label()]
    else:
        S = extended_system(U, args.seeds, args.seed, args.mesh, args.vertices)
        entries = [e.to_json() for e in S.entries]
        curves, labels = [e.curve for e in S.entries], [e.cls.label() for e in S.entries]
    emit(args, RunManifest("meridians", ins, _knobs(args, cls=args.cls), args.seed), {"entries": entries})
    if args.svg:
        from .render import render_domain
        render_domain(args.svg, U, curves, labels)
    return OK


def cmd_condition4(args) -> int:
    from .carabounds import condition4_certificate
    (U,), ins = _domains(args, 1)
    if args.delta1 is None or args.delta2 is None:
        raise ValueError("condition4 needs --delta1 and --delta2")
    cert = condition4_certificate(U, args.delta1, args.delta2, args.seeds, args.seed, args.mesh, args.vertices)
    emit(args, RunManifest("condition4", ins, _knobs(args, delta1=args.delta1, delta2=args.delta2), args.seed),
         cert.to_json(curves=args.curves), cert.status)
    if args.svg:
        from .render import render_domain
        render_domain(args.svg, U, cert.curves)
    return INCONCLUSIVE if cert.status == "inconclusive" else OK


def cmd_converge(args) -> int:
    from .convergence import cara_limit
    F = _family(args)
    sample = parse_m(args.m, F.index_range)
    lim = cara_limit(F, sample)
    man = RunManifest("converge", [], _knobs(args, family=F.name, params=F.params, sample=sample), args.seed)
    emit(args, man, lim.to_json(), lim.kind)
    if args.svg:
        from .render import render_domain
        U = lim.limit if lim.limit is not None else F(sample[-1])
        render_domain(args.svg, U, title=f"{F.name}: {lim.descriptor()}")
    return INCONCLUSIVE if lim.kind == "no-limit" else OK


def cmd_classify(args) -> int:
    from .convergence import classify_family
    F = _family(args)
    sample = parse_m(args.m, F.index_range)
    v = classify_family(F, sample, args.seeds, args.seed, args.mesh, args.vertices, not args.principal,
                        args.delta1, args.delta2)
    man = RunManifest("classify", [], _knobs(args, family=F.name, params=F.params, sample=sample,
                                              delta1=args.delta1, delta2=args.delta2), args.seed)
    emit(args, man, v.to_json(), v.verdict)
    if args.csv:
        write_atomic(args.csv, v.csv())
    if args.svg:
        from .render import render_domain
        render_domain(args.svg, F(sample[-1]), title=f"{F.name}[m={sample[-1]}]: {v.verdict}")
    return INCONCLUSIVE if v.verdict == "inconclusive" else OK


def cmd_meshcurve(args) -> int:
    from .meshcurve import SeparationInstance, mesh_curve
    if not args.instance:
        raise ValueError("meshcurve needs --instance")
    d = _load_json(args.instance)
    if args.r is not None:
        d["r"] = args.r
    if args.R is not None:
        d["R"] = args.R
    inst = SeparationInstance.from_json(d)
    res = mesh_curve(inst)
    man = RunManifest("meshcurve", [_digest(args.instance)], {"r": inst.r, "R": inst.R}, args.seed)
    emit(args, man, res.to_json(curve=True))
    if args.svg:
        from .render import render_meshcurve
        render_meshcurve(args.svg, inst, res)
    return OK


def _load_sets(path: str):
    from .domains import SchemaError, component_from_json
    from .meshcurve import set_schema_errors
    d = _load_json(path)
    errs = set_schema_errors(d, ("E", "F"))
    if errs:
        raise SchemaError(errs)
    return [component_from_json(c) for c in d["E"]], [component_from_json(c) for c in d["F"]]


def cmd_extremal(args) -> int:
    from .extremal import separating_annulus_max
    if not args.instance:
        raise ValueError("extremal needs --instance with E and F")
    E, F = _load_sets(args.instance)
    res = separating_annulus_max(E, F, starts=args.starts, seed=args.seed, seeds=args.seeds,
                                 n_vertices=args.vertices)
    man = RunManifest("extremal", [_digest(args.instance)], _knobs(args, starts=args.starts), args.seed)
    out = res.to_json()
    out["modulus"] = res.lo
    emit(args, man, out)
    if args.svg:
        from .render import render_annulus
        render_annulus(args.svg, E, F, res.candidate)
    return OK if res.lo <= res.hi else INCONCLUSIVE


def cmd_between(args) -> int:
    from .extremal import annulus_between, containment_check
    (U, V), ins = _domains(args, 2)
    pa = annulus_between(U, V, engine=args.engine, seeds=args.seeds, seed=args.seed, n_vertices=args.vertices)
    out = {"annulus": pa.to_json()}
    code = OK
    if args.K is not None:
        rep = containment_check(U, V, args.K, args.mesh, args.seeds, args.seed, args.vertices)
        out["containment"] = rep.to_json()
        code = INCONCLUSIVE if rep.status == "inconclusive" else OK
    emit(args, RunManifest("between", ins, _knobs(args, engine=args.engine, K=args.K), args.seed), out)
    if args.svg:
        from .render import render_domain
        render_domain(args.svg, pa.domain, [pa.candidate.equator], ["equator"])
    return code


def cmd_lipschitz(args) -> int:
    from .carabounds import MapSpec, hyperbolic_lipschitz
    (U, V), ins = _domains(args, 2)
    if args.map:
        f = MapSpec.from_json(_load_json(args.map))
        ins.append(_digest(args.map))
    elif args.power:
        f = MapSpec.power(args.power)
    else:
        raise ValueError("lipschitz needs --map PATH or --power d")
    R = args.R if args.R is not None else 1.0
    rep = hyperbolic_lipschitz(f, U, V, R, n=args.samples, seed=args.seed, h=args.mesh)
    out = rep.to_json()
    out["map"] = f.to_json()
    emit(args, RunManifest("lipschitz", ins, _knobs(args, R=R, samples=args.samples), args.seed), out)
    return OK


def cmd_render(args) -> int:
    from .render import render_annulus, render_domain, render_meshcurve
    if not args.svg:
        raise ValueError("render needs --svg")
    if args.domain:
        (U,), ins = _domains(args, 1)
        curves = []
        for p in args.curve or []:
            from .curves import ClosedCurve
            curves.append(ClosedCurve.from_json(_load_json(p)))
            ins.append(_digest(p))
        render_domain(args.svg, U, curves)
    elif args.family:
        F = _family(args)
        m = parse_m(args.m or str(F.index_range[0]), F.index_range)[-1]
        ins = []
        render_domain(args.svg, F(m), title=f"{F.name}[m={m}]")
    elif args.instance:
        d = _load_json(args.instance)
        ins = [_digest(args.instance)]
        if "gamma" in d:
            from .meshcurve import SeparationInstance, mesh_curve
            inst = SeparationInstance.from_json(d)
            render_meshcurve(args.svg, inst, mesh_curve(inst))
        else:
            from .extremal import separating_annulus_max
            E, F = _load_sets(args.instance)
            render_annulus(args.svg, E, F, separating_annulus_max(E, F, args.starts, args.seed, args.seeds).candidate)
    else:
        raise ValueError("render needs --domain, --family or --instance")
    emit(args, RunManifest("render", ins, {}, args.seed), {"svg": args.svg})
    return OK


COMMANDS = {
    "validate": cmd_validate, "bound": cmd_bound, "meridians": cmd_meridians, "condition4": cmd_condition4,
    "converge": cmd_converge, "classify": cmd_classify, "meshcurve": cmd_meshcurve, "extremal": cmd_extremal,
    "between": cmd_between, "lipschitz": cmd_lipschitz, "render": cmd_render,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="caradomains", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"caradomains {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--domain", action="append", help="pointed domain JSON (repeat for two-domain commands)")
        s.add_argument("--family", help="built-in family name")
        s.add_argument("--param", action="append", help="family parameter KEY=VALUE (JSON value)")
        s.add_argument("--m", help="family indices: A:B, A:B:step, or a comma list")
        s.add_argument("--class", dest="cls", help='homology class such as "0|123"')
        s.add_argument("--instance", help="instance JSON (E, F and for meshcurve gamma, r, R)")
        s.add_argument("--curve", action="append", help="closed curve JSON to overlay (render)")
        s.add_argument("--map", help="rational map JSON {num, den}")
        s.add_argument("--power", type=int, help="use z -> z^d as the map")
        s.add_argument("--r", type=float)
        s.add_argument("--R", type=float)
        s.add_argument("--delta1", type=float)
        s.add_argument("--delta2", type=float)
        s.add_argument("--K", type=float, help="containment constant")
        s.add_argument("--seeds", type=int, default=3, help="meridian seeds per class")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--mesh", type=float, default=None, help="distance mesh spacing H")
        s.add_argument("--vertices", type=int, default=128, help="meridian polyline vertices")
        s.add_argument("--starts", type=int, default=16, help="round-annulus optimizer starts")
        s.add_argument("--samples", type=int, default=120)
        s.add_argument("--engine", choices=("exact", "meridian"), default="exact")
        s.add_argument("--principal", action="store_true", help="principal meridians only")
        s.add_argument("--curves", action="store_true", help="include curves in the report")
        s.add_argument("--out", help="report path (default stdout)")
        s.add_argument("--svg", help="figure path")
        s.add_argument("--csv", help="measurement table path (classify)")
    return p


def run(argv=None) -> int:
    from .domains import SchemaError
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except SchemaError as exc:
        for ptr, msg in exc.errors:
            print(f"schema error at {ptr}: {msg}", file=sys.stderr)
        return ERROR
    except (ValueError, RuntimeError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


def main() -> None:
    sys.exit(run())
