"""``gridsight`` command line: one subcommand per operation, JSON or CSV on stdout or --out."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .construct import build_lower_bound_config, geometric_count, scaling_experiment, svg_loglog
from .cover import InadmissibleError, primitive_chain_cover, toy_chain_cover
from .fourier import fourier_suite
from .geometry import Configuration, visible_2d_exact, visible_sampled
from .lattice import NoInteriorPointError, antichain_from_lattice, covolume, lll_reduce, parallelotope_lattice
from .modular import ResidueVector, check_height_duality, primes_between
from .poset import build_s_poset, width_exact
from .verify import verify_all

DEFAULT_SEED = 0
DEFAULT_PRIMES = (11, 17, 23, 31, 41, 53)
SCHEMA_VERSION = 1
COMMANDS = ("hp", "width", "antichain", "lll", "cover", "fourier-check", "simulate",
            "construct", "scaling", "verify-all")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    p: int | None = None
    d: int = 3
    t: tuple[int, ...] | None = None
    signs: tuple[int, ...] | None = None
    seed: int = DEFAULT_SEED
    out: str | None = None
    format: str = "json"
    theta: float | None = None
    rays: int = 16
    max_p: int = 13
    kind: str = "toy"
    mode: str = "model"
    spacing: int = 6
    primes: tuple[int, ...] = DEFAULT_PRIMES
    scene: str | None = None
    extra: dict = field(default_factory=dict)

    def residue(self) -> ResidueVector:
        if self.p is None or self.t is None:
            raise UsageError("--p and --t are required")
        if len(self.t) != self.d - 1:
            raise UsageError(f"--t needs d-1 = {self.d - 1} entries, got {len(self.t)}")
        try:
            return ResidueVector(self.p, self.d, self.t)
        except ValueError as e:
            raise UsageError(str(e)) from e


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in str(text).split(",") if x.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, help="prime modulus")
    common.add_argument("--d", type=int, help="dimension (default 3)")
    common.add_argument("--t", type=_int_list, help="t_1,...,t_{d-1}")
    common.add_argument("--signs", type=_int_list, help="+1/-1 per coordinate, e.g. 1,-1")
    common.add_argument("--seed", type=int, help=f"run seed (default {DEFAULT_SEED})")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), help="output format")
    common.add_argument("--theta", type=float, help="shallow-blocking angle in degrees")
    common.add_argument("--rays", type=int, help="sampled segments per cube (default 16)")
    common.add_argument("--max-p", type=int, dest="max_p", help="largest prime for suites")
    common.add_argument("--config", help="JSON run configuration; explicit flags win")

    parser = argparse.ArgumentParser(prog="gridsight", description=__doc__)
    parser.add_argument("--version", action="version", version=f"gridsight {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("hp", parents=[common], help="height and dual height of t")
    sub.add_parser("width", parents=[common], help="exact width with certificates")
    sub.add_parser("antichain", parents=[common], help="lattice-slab antichain")
    sub.add_parser("lll", parents=[common], help="LLL-reduce the parallelotope lattice")
    c = sub.add_parser("cover", parents=[common], help="constructive chain cover")
    c.add_argument("--kind", choices=("toy", "primitive"))
    sub.add_parser("fourier-check", parents=[common], help="transform identities and bounds")
    s = sub.add_parser("simulate", parents=[common], help="visibility in a cube configuration")
    s.add_argument("scene", nargs="?", help="configuration JSON {n, d, cubes}")
    k = sub.add_parser("construct", parents=[common], help="lower-bound configuration")
    k.add_argument("--spacing", type=int)
    g = sub.add_parser("scaling", parents=[common], help="log-log exponent experiment")
    g.add_argument("--primes", type=_int_list)
    g.add_argument("--mode", choices=("model", "geometric"))
    g.add_argument("--spacing", type=int)
    sub.add_parser("verify-all", parents=[common], help="desk-scale invariant suite")
    return parser


def resolve(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the --config file, then explicit flags."""
    cfg = RunConfig(command=args.command)
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {args.config}: {e}") from e
        for key, value in data.items():
            key = key.replace("-", "_")
            if not hasattr(cfg, key) or key in ("command", "extra"):
                raise UsageError(f"unknown config key {key!r}")
            if key in ("t", "signs", "primes") and value is not None:
                value = _int_list(value) if isinstance(value, str) else tuple(int(x) for x in value)
            setattr(cfg, key, value)
    for key in ("p", "d", "t", "signs", "seed", "out", "format", "theta", "rays", "max_p",
                "kind", "mode", "spacing", "primes", "scene"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if cfg.rays < 1:
        raise UsageError("--rays must be >= 1")
    return cfg


def thread_cap() -> int:
    """``GRIDSIGHT_THREADS`` caps parallelism; all work here runs on one thread."""
    raw = os.environ.get("GRIDSIGHT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as e:
        raise UsageError(f"GRIDSIGHT_THREADS must be a positive integer, got {raw!r}") from e
    if n < 1:
        raise UsageError(f"GRIDSIGHT_THREADS must be a positive integer, got {raw!r}")
    return n


def _envelope(command: str, payload: dict) -> dict:
    return {"schema": f"gridsight/{command}/v{SCHEMA_VERSION}", **payload}


# -- subcommands -----------------------------------------------------------------

def cmd_hp(cfg: RunConfig):
    return check_height_duality(cfg.residue()).to_dict()


def cmd_width(cfg: RunConfig):
    t = cfg.residue()
    signs = cfg.signs or (1,) * (t.d - 1)
    try:
        P = build_s_poset(t, signs)
    except ValueError as e:
        raise UsageError(str(e)) from e
    w = width_exact(P)
    k_of = [e.k_index for e in P.elements]
    return {**t.to_dict(), "signs": list(signs), "width": w.width,
            "antichain": sorted(k_of[i] for i in w.antichain.indices),
            "cover": [[k_of[i] for i in ch] for ch in w.cover.chains]}


def cmd_antichain(cfg: RunConfig):
    t = cfg.residue()
    la = antichain_from_lattice(t)
    return {**t.to_dict(), "signs": list(la.signs), "size": len(la), "heights": list(la.indices),
            "points": [list(x) for x in la.points], "vectors": [list(v) for v in la.vectors],
            "normal": list(la.normal)}


def cmd_lll(cfg: RunConfig):
    t = cfg.residue()
    L = parallelotope_lattice(t)
    red = lll_reduce(L)
    return {**t.to_dict(), "basis": [list(v) for v in L.basis], "reduced": [list(v) for v in red.vectors],
            "covolume": covolume(L), "size_reduced": red.size_reduced(), "lovasz": red.lovasz(),
            "norm_product_squared": red.norm_product_squared()}


def cmd_cover(cfg: RunConfig):
    t = cfg.residue()
    try:
        r = toy_chain_cover(t) if cfg.kind == "toy" else primitive_chain_cover(t)
    except InadmissibleError as e:
        raise UsageError(str(e)) from e
    k_of = [e.k_index for e in r.poset.elements]
    return {**r.to_dict(t), "chains": [[k_of[i] for i in ch] for ch in r.cover.chains]}


def cmd_fourier(cfg: RunConfig):
    r = fourier_suite(max_p=cfg.max_p, seed=cfg.seed)
    return {k: (float(v) if not isinstance(v, bool) else v) for k, v in r.items()}


def cmd_simulate(cfg: RunConfig):
    if cfg.scene:
        try:
            scene = Configuration.load(cfg.scene)
        except (OSError, ValueError, KeyError) as e:
            raise UsageError(f"bad scene file: {e}") from e
        hints = None
    else:
        if cfg.p is None:
            raise UsageError("simulate needs a scene file or --p")
        res = build_lower_bound_config(cfg.p, cfg.d)
        scene, hints = res.config, res.hints()
    if scene.d not in (2, 3):
        raise UsageError("simulate supports d in {2, 3}")
    vis = visible_sampled(scene, cfg.rays, cfg.seed, hints=hints, theta_deg=cfg.theta)
    out = {"n": scene.n, "d": scene.d, "cubes": len(scene.cubes), "visible_count": len(vis),
           "visible": [list(c) for c in sorted(vis)], "rays": cfg.rays, "seed": cfg.seed,
           "theta": cfg.theta}
    if scene.d == 2:
        out["exact_visible_count"] = len(visible_2d_exact(scene))
    return out


def cmd_construct(cfg: RunConfig):
    if cfg.p is None:
        raise UsageError("--p is required")
    try:
        res = build_lower_bound_config(cfg.p, cfg.d, cfg.spacing)
    except ValueError as e:
        raise UsageError(str(e)) from e
    return res.to_dict()


def cmd_scaling(cfg: RunConfig):
    try:
        r = scaling_experiment(list(cfg.primes), cfg.d, cfg.mode, cfg.spacing, cfg.rays, cfg.seed)
    except ValueError as e:
        raise UsageError(str(e)) from e
    if cfg.out:
        svg = Path(cfg.out).with_suffix(".svg")
        svg.write_text(svg_loglog(r))
    return r


def cmd_verify(cfg: RunConfig):
    rows = verify_all(cfg.max_p, cfg.seed)
    return rows


HANDLERS = {"hp": cmd_hp, "width": cmd_width, "antichain": cmd_antichain, "lll": cmd_lll,
            "cover": cmd_cover, "fourier-check": cmd_fourier, "simulate": cmd_simulate,
            "construct": cmd_construct, "scaling": cmd_scaling, "verify-all": cmd_verify}


def render(cfg: RunConfig, result) -> tuple[str, int]:
    """Serialise a handler result; returns (text, exit code)."""
    if cfg.command == "scaling":
        if cfg.format == "csv":
            return result.to_csv(), 0
        return json.dumps(_envelope("scaling", result.to_dict()), sort_keys=True, indent=2) + "\n", 0
    if cfg.command == "verify-all":
        code = 0 if all(r.passed for r in result) else 1
        if cfg.format == "csv":
            lines = ["name,passed"] + [f"{r.name},{'PASS' if r.passed else 'FAIL'}" for r in result]
            return "\n".join(lines) + "\n", code
        payload = {"max_p": cfg.max_p, "seed": cfg.seed, "passed": code == 0,
                   "rows": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in result]}
        return json.dumps(_envelope("verify-all", payload), sort_keys=True, indent=2) + "\n", code
    if cfg.format == "csv":
        raise UsageError(f"--format csv is only available for scaling and verify-all")
    return json.dumps(_envelope(cfg.command, result), sort_keys=True, indent=2) + "\n", 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        thread_cap()
        cfg = resolve(args)
        result = HANDLERS[cfg.command](cfg)
        text, code = render(cfg, result)
    except UsageError as e:
        print(f"gridsight {args.command}: error: {e}", file=sys.stderr)
        return 2
    except NoInteriorPointError as e:
        print(f"gridsight {args.command}: no interior point: {e}", file=sys.stderr)
        return 1
    except AssertionError as e:
        print(f"gridsight {args.command}: assertion failed [{type(e).__name__}]: {e}", file=sys.stderr)
        return 1
    if cfg.command == "verify-all":
        for r in result:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}", file=sys.stderr)
    if cfg.out:
        target = Path(cfg.out)
        if cfg.command == "scaling" and cfg.format == "csv":
            target = target.with_suffix(".csv")
        target.write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
