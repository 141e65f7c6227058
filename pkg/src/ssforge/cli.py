"""Command-line front end.

Exit codes: 0 success / all checks pass, 1 verification failure, 2 input
error, 3 no regular points in the domain.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import meshio, oracle
from .expr import ParseError
from .presets import PRESETS
from .rotational import RotationalParams
from .sampling import DomainError, HoloTarget, RotationalTarget, evaluate_grid, parse_domain
from .verify import DEFAULT_FD, DEFAULT_TOLERANCES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DEGENERATE = 0, 1, 2, 3

DEFAULTS = {
    "domain": "rect:-1,1,-1,1",
    "nu": 64,
    "mask_gprime": 1e-8,
    "mask_detv": 1e-10,
    "fd_step": DEFAULT_FD.step,
    "richardson": DEFAULT_FD.richardson,
    "format": "obj",
}


class InputError(Exception):
    pass


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; command-line flags take precedence")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--domain", help="rect:u1min,u1max,u2min,u2max or annulus:rmin,rmax[,tmin,tmax]")
    p.add_argument("--nu", type=int, help="grid points per axis")
    p.add_argument("--mask-gprime", type=float)
    p.add_argument("--mask-detv", type=float)
    p.add_argument("--fd-step", type=float)
    p.add_argument("--richardson", dest="richardson", action="store_true", default=None)
    p.add_argument("--no-richardson", dest="richardson", action="store_false")
    p.add_argument("--out", help="output path (default: stdout where meaningful)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssforge", description="SS-surfaces from holomorphic data")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="tessellate the surface of a holomorphic pair (f, g)")
    gen.add_argument("--f")
    gen.add_argument("--g")
    gen.add_argument("--format", choices=("obj", "ply", "csv"))
    _add_common(gen)

    rotp = sub.add_parser("rotational", help="tessellate a rotational surface X_{a,b}")
    rotp.add_argument("--a", type=float)
    rotp.add_argument("--b", type=float)
    rotp.add_argument("--format", choices=("obj", "ply", "csv"))
    _add_common(rotp)

    ver = sub.add_parser("verify", help="run the verification suite and emit a JSON report")
    ver.add_argument("--f")
    ver.add_argument("--g")
    ver.add_argument("--a", type=float)
    ver.add_argument("--b", type=float)
    ver.add_argument("--tol", action="append", default=None, metavar="NAME=VALUE",
                     help="override one check tolerance (repeatable)")
    ver.add_argument("--debug-prefactor", type=int, choices=(1, 2), default=None,
                     help=argparse.SUPPRESS)
    _add_common(ver)

    sub.add_parser("presets", help="list the built-in parameter presets")
    return parser


def read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InputError(f"{path}:{lineno}: expected key=value")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


_CASTS = {"nu": int, "mask_gprime": float, "mask_detv": float, "fd_step": float,
          "a": float, "b": float, "debug_prefactor": int}


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Merge flags over config file over preset over built-in defaults."""
    layers = []
    if getattr(args, "config", None):
        layers.append(read_config(args.config))
    preset = getattr(args, "preset", None) or (layers[0].get("preset") if layers else None)
    if preset:
        if preset not in PRESETS:
            raise InputError(f"unknown preset {preset!r}")
        layers.append(dict(PRESETS[preset]))
    layers.append(DEFAULTS)
    for layer in layers:
        for key, value in layer.items():
            if key in ("preset", "config"):
                continue
            if getattr(args, key, None) is None:
                if key == "richardson" and isinstance(value, str):
                    value = value.lower() in ("1", "true", "yes", "on")
                elif key == "tol" and isinstance(value, str):
                    value = [v for v in value.split(",") if v]
                elif key in _CASTS and isinstance(value, str):
                    value = _CASTS[key](value)
                setattr(args, key, value)
    return args


def _domain(args):
    return parse_domain(args.domain, args.nu, args.mask_gprime, args.mask_detv)


def _fd(args):
    return oracle.FDConfig(args.fd_step, bool(args.richardson))


def _target(args, rotational: bool | None = None):
    has_rot = getattr(args, "a", None) is not None or getattr(args, "b", None) is not None
    if rotational or (rotational is None and has_rot and getattr(args, "f", None) is None):
        return RotationalTarget(RotationalParams(float(args.a or 0.0), float(args.b or 0.0)))
    if getattr(args, "f", None) is None or getattr(args, "g", None) is None:
        raise InputError("both --f and --g are required (or --a/--b, or --preset)")
    return HoloTarget.from_sources(args.f, args.g)


def _tolerances(items) -> dict:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or name not in DEFAULT_TOLERANCES:
            raise InputError(f"bad --tol {item!r}; names: {', '.join(DEFAULT_TOLERANCES)}")
        out[name] = float(value)
    return out


def cmd_generate(args, rotational: bool) -> int:
    target = _target(args, rotational)
    dom = _domain(args)
    sg = evaluate_grid(target, dom, _fd(args))
    if sg.regular.sum() == 0:
        print("error: no regular points in the domain", file=sys.stderr)
        return EXIT_DEGENERATE
    header = {**{k: v for k, v in target.provenance().items()}, "domain": dom.describe(),
              "nu": f"{dom.nu[0]}x{dom.nu[1]}"}
    out = args.out or f"surface.{args.format}"
    if args.format == "csv":
        meshio.write_csv(sg, out)
        vertices = faces = None
    else:
        mesh = meshio.tessellate(sg)
        (meshio.write_obj if args.format == "obj" else meshio.write_ply)(mesh, out, header)
        vertices, faces = len(mesh.vertices), len(mesh.faces)
    reg = sg.regular
    ss_fd = np.nan
    if sg.fd is not None:
        from .core import normalized_ss_residual

        ss_fd = float(np.max(normalized_ss_residual(sg.fd.psi, sg.fd.lam, sg.fd.H, sg.fd.K)[reg]))
    summary = {
        "output": str(out),
        "format": args.format,
        "target": target.provenance(),
        "domain": dom.describe(),
        "points": sg.n_points,
        "points_masked": sg.n_masked,
        "mask_reasons": sg.mask_reasons,
        "vertices": vertices,
        "faces": faces,
        "max_ss_residual": float(np.max(sg.closed.ss_residual[reg])),
        "max_ss_residual_fd": ss_fd,
        "max_midsphere_residual": float(np.max(sg.closed.midsphere_residual[reg])),
    }
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    target = _target(args)
    dom = _domain(args)
    report = run_suite(target, dom, _fd(args), _tolerances(args.tol), args.debug_prefactor or 2)
    if report.checks and report.checks[0].points_tested == 0:
        text = meshio.dumps_report(report.to_dict())
        _emit(text, args.out)
        print("error: no regular points in the domain", file=sys.stderr)
        return EXIT_DEGENERATE
    _emit(meshio.dumps_report(report.to_dict()), args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_presets() -> int:
    sys.stdout.write("name\tf\tg\ta\tb\tdomain\n")
    for name, p in PRESETS.items():
        row = [name, p.get("f", ""), p.get("g", ""), _s(p.get("a")), _s(p.get("b")), p["domain"]]
        sys.stdout.write("\t".join(row) + "\n")
    return EXIT_OK


def _s(x):
    return "" if x is None else format(x, "g")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "presets":
            return cmd_presets()
        args = resolve(args)
        if args.command == "generate":
            return cmd_generate(args, rotational=False)
        if args.command == "rotational":
            return cmd_generate(args, rotational=True)
        return cmd_verify(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.source:
            print(f"  {exc.source}\n  {' ' * exc.position}^", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, DomainError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
