"""Command-line front end.

Subcommands mirror the library modules one to one:

- ``validate``: parse a channel file, report every invariant violation.
- ``region``: constraint sets, corners, mixtures and prior sweeps as CSV/JSON.
- ``simulate``: random-codebook sequential decoding with exact error accounting.
- ``check``: the randomized verification suites.

Exit codes: 0 success, 1 domain failure (validation error, violated
inequality, exceeded cap), 2 usage or I/O error.  All output is
deterministic given the inputs and seeds; JSON reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys

import numpy as np

from . import __version__
from .catalog import BUILTIN_CHANNELS, builtin_channel_text
from .channel import ChannelFormatError, CqMacChannel, Prior, channel_from_dict, load_channel
from .coding import run_simulation, sizes_from_rates
from .config import CapExceeded
from .checks import run_suites
from .operators import ValidationError
from .region import (MixtureSpec, RatePoint, boundary_sweep, constraint_set,
                     corners_with_perms, corner_from_bounds, is_member,
                     mixture_constraints, upper_boundary_2d)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


class UsageError(ValueError):
    """Bad command-line values (exit code 2)."""


# ---------------------------------------------------------------------------
# argument parsing helpers
# ---------------------------------------------------------------------------

def _load_channel_arg(spec: str) -> CqMacChannel:
    """Load a channel from a path, or from the bundled catalog by name."""
    if os.path.exists(spec):
        return load_channel(spec)
    stem = os.path.basename(spec)
    stem = stem[:-5] if stem.endswith(".json") else stem
    if stem in BUILTIN_CHANNELS and os.sep not in spec:
        return channel_from_dict(json.loads(builtin_channel_text(stem)))
    raise FileNotFoundError(
        f"no channel file {spec!r} (bundled names: {', '.join(BUILTIN_CHANNELS)})"
    )


def _parse_prior(spec: str | None, alphabets: tuple[int, ...]) -> Prior:
    if spec is None or spec == "uniform":
        return Prior.uniform(alphabets)
    parts = spec.split(";")
    if len(parts) != len(alphabets):
        raise UsageError(
            f"prior spec has {len(parts)} sender blocks, channel has {len(alphabets)}"
        )
    vecs = []
    for i, part in enumerate(parts):
        try:
            vec = np.array([float(x) for x in part.split(",")])
        except ValueError:
            raise UsageError(f"prior block {i + 1} is not a comma-joined float list: {part!r}")
        if vec.size != alphabets[i]:
            raise UsageError(
                f"prior block {i + 1} has {vec.size} entries, alphabet size is {alphabets[i]}"
            )
        vecs.append(vec)
    return Prior(tuple(vecs))


def _parse_mixture(spec: str, alphabets: tuple[int, ...]) -> MixtureSpec:
    """Mixture syntax: 'w*PRIOR+w*PRIOR', e.g. '0.5*uniform+0.5*1,0;0,1'."""
    components = []
    for chunk in spec.split("+"):
        if "*" not in chunk:
            raise UsageError(f"mixture component {chunk!r} must look like WEIGHT*PRIOR")
        w_str, prior_str = chunk.split("*", 1)
        try:
            w = float(w_str)
        except ValueError:
            raise UsageError(f"mixture weight {w_str!r} is not a number")
        components.append((w, _parse_prior(prior_str, alphabets)))
    return MixtureSpec(tuple(components))


def _parse_int_list(spec: str, what: str) -> list[int]:
    try:
        return [int(x) for x in spec.split(",")]
    except ValueError:
        raise UsageError(f"{what} must be a comma-joined integer list, got {spec!r}")


def _parse_float_list(spec: str, what: str) -> list[float]:
    try:
        return [float(x) for x in spec.split(",")]
    except ValueError:
        raise UsageError(f"{what} must be a comma-joined float list, got {spec!r}")


def _parse_grid_spec(spec: str) -> int:
    """Grid resolution: a plain integer or '{"resolution": k}'."""
    try:
        return int(spec)
    except ValueError:
        pass
    try:
        doc = json.loads(spec)
    except json.JSONDecodeError:
        raise UsageError(f"grid spec must be an integer or JSON object, got {spec!r}")
    if not isinstance(doc, dict) or set(doc) != {"resolution"}:
        raise UsageError("grid spec object must have exactly the key 'resolution'")
    return int(doc["resolution"])


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    """CSV float format: '.' decimal, 12 significant digits."""
    return f"{x:.12g}"


def _perm_label(perm: tuple[int, ...]) -> str:
    return "-".join(str(i + 1) for i in perm)


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _json_doc(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _region_csv(bound_rows: list[tuple]) -> str:
    lines = ["prior_id,subset_mask,bound_bits"]
    lines += [f"{pid},{mask},{_fmt(b)}" for pid, mask, b in bound_rows]
    return "\n".join(lines) + "\n"


def _corners_csv(corner_rows: list[tuple], s: int) -> str:
    head = ",".join([f"R_{i + 1}" for i in range(s)])
    lines = [f"prior_id,perm,{head}"]
    for pid, perm, point in corner_rows:
        rates = ",".join(_fmt(r) for r in point.rates)
        lines.append(f"{pid},{_perm_label(perm)},{rates}")
    return "\n".join(lines) + "\n"


def _corners_sidecar(path: str) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}.corners{ext or '.csv'}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        ch = _load_channel_arg(args.channel)
    except ValidationError as exc:
        for line in str(exc).splitlines():
            print(line)
        return EXIT_DOMAIN
    print(f"ok: {ch.s} sender(s), alphabets {list(ch.sender_alphabets)}, "
          f"output dimension {ch.output_dim}")
    return EXIT_OK


def cmd_region(args) -> int:
    if args.tol <= 0:
        raise UsageError(f"tolerance must be positive, got {args.tol}")
    ch = _load_channel_arg(args.channel)
    s = ch.s
    bound_rows: list[tuple] = []
    corner_rows: list[tuple] = []
    priors_doc: list[dict] = []
    hull_doc = None
    emit_corners = args.corners

    if args.sweep is not None:
        sweep = boundary_sweep(ch, _parse_grid_spec(args.sweep))
        emit_corners = True
        all_points: list[RatePoint] = []
        for sp in sweep:
            priors_doc.append({
                "id": sp.prior_id,
                "per_sender": [[float(x) for x in v] for v in sp.prior.per_sender],
            })
            for mask in sorted(sp.constraints.bounds):
                bound_rows.append((sp.prior_id, mask, sp.constraints.bounds[mask]))
            for perm, point in sp.corners:
                corner_rows.append((sp.prior_id, perm, point))
                all_points.append(point)
        if s == 2 and all_points:
            hull_doc = [[r for r in p.rates] for p in upper_boundary_2d(all_points)]
    elif args.mixture is not None:
        mix = _parse_mixture(args.mixture, ch.sender_alphabets)
        cs = mixture_constraints(ch, mix, max_components=args.max_mixture_components)
        for u, (w, prior) in enumerate(mix.components):
            priors_doc.append({
                "id": u, "weight": w,
                "per_sender": [[float(x) for x in v] for v in prior.per_sender],
            })
        for mask in sorted(cs.bounds):
            bound_rows.append(("mix", mask, cs.bounds[mask]))
        if emit_corners:
            seen: list[RatePoint] = []
            for perm in sorted(itertools.permutations(range(s))):
                point = corner_from_bounds(cs, perm)
                if is_member(point, cs, args.tol) and not any(
                    max(abs(a - b) for a, b in zip(point.rates, q.rates)) <= args.tol
                    for q in seen
                ):
                    seen.append(point)
                    corner_rows.append(("mix", perm, point))
    else:
        prior = _parse_prior(args.prior, ch.sender_alphabets)
        priors_doc.append({
            "id": 0, "per_sender": [[float(x) for x in v] for v in prior.per_sender],
        })
        cs = constraint_set(ch, prior)
        for mask in sorted(cs.bounds):
            bound_rows.append((0, mask, cs.bounds[mask]))
        if emit_corners:
            for perm, point in corners_with_perms(ch, prior):
                corner_rows.append((0, perm, point))

    if args.format == "json":
        doc = {
            "priors": priors_doc,
            "region": [
                {"prior_id": pid, "subset_mask": mask, "bound_bits": b}
                for pid, mask, b in bound_rows
            ],
        }
        if emit_corners:
            doc["corners"] = [
                {"prior_id": pid, "perm": [i + 1 for i in perm],
                 "rates": [r for r in point.rates]}
                for pid, perm, point in corner_rows
            ]
        if hull_doc is not None:
            doc["hull"] = hull_doc
        _write_text(args.out, _json_doc(doc))
    else:
        region_csv = _region_csv(bound_rows)
        if emit_corners:
            corners_csv = _corners_csv(corner_rows, s)
            if args.out is None:
                _write_text(None, region_csv + "\n" + corners_csv)
            else:
                _write_text(args.out, region_csv)
                _write_text(_corners_sidecar(args.out), corners_csv)
        else:
            _write_text(args.out, region_csv)
    return EXIT_OK


def cmd_simulate(args) -> int:
    ch = _load_channel_arg(args.channel)
    prior = _parse_prior(args.prior, ch.sender_alphabets)
    if args.n < 1:
        raise UsageError(f"block length must be >= 1, got {args.n}")
    if (args.sizes is None) == (args.rates is None):
        raise UsageError("provide exactly one of --sizes or --rates")
    if args.sizes is not None:
        sizes = _parse_int_list(args.sizes, "--sizes")
        if any(L < 1 for L in sizes):
            raise UsageError(f"codebook sizes must be >= 1, got {sizes}")
    else:
        rates = _parse_float_list(args.rates, "--rates")
        sizes = sizes_from_rates(rates, args.n, args.delta)
    if len(sizes) != ch.s:
        raise UsageError(f"channel has {ch.s} senders but {len(sizes)} sizes were given")
    mode = "monte_carlo" if args.mode == "mc" else "exhaustive"
    if mode == "monte_carlo" and args.trials is None:
        raise UsageError("--mode mc needs --trials")

    report = run_simulation(
        ch, prior, args.n, sizes, args.seed, mode=mode, trials=args.trials,
        max_block_dim=args.max_block_dim,
    )
    if args.format == "csv":
        header, row = report.csv_rows()
        text = ",".join(header) + "\n" + ",".join(
            _fmt(x) if isinstance(x, float) else str(x) for x in row
        ) + "\n"
    else:
        text = _json_doc(report.to_json_dict())
    _write_text(args.out, text)
    if report.wall_clock_s is not None:
        print(f"simulated {report.messages_evaluated} message tuple(s) "
              f"in {report.wall_clock_s:.3f}s", file=sys.stderr)
    return EXIT_OK


def cmd_check(args) -> int:
    if args.tol <= 0:
        raise UsageError(f"tolerance must be positive, got {args.tol}")
    if args.trials < 0:
        raise UsageError(f"trials must be >= 0, got {args.trials}")
    results = run_suites(args.suite, args.trials, args.seed, args.tol)
    failed = False
    for res in results:
        for line in res.summary_lines():
            print(line)
        if not res.passed:
            failed = True
            for failure in res.failures[: args.max_reported]:
                print(json.dumps(failure, sort_keys=True))
    return EXIT_DOMAIN if failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmac",
        description="Capacity regions and decoding simulation for "
                    "classical-quantum multiple-access channels.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a channel file")
    p.add_argument("--channel", required=True, help="channel JSON path or bundled name")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("region", help="constraint sets, corners, mixtures, sweeps")
    p.add_argument("--channel", required=True)
    p.add_argument("--prior", default=None,
                   help="'uniform' (default) or per-sender vectors '0.3,0.7;0.5,0.5'")
    p.add_argument("--corners", action="store_true", help="also emit corner points")
    p.add_argument("--mixture", default=None,
                   help="mixture spec 'w*PRIOR+w*PRIOR', e.g. '0.5*uniform+0.5*1,0;0,1'")
    p.add_argument("--sweep", default=None, metavar="RES",
                   help="sweep all product priors with numerators summing to RES "
                        "(an integer or '{\"resolution\": RES}')")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-mixture-components", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("simulate", help="random-codebook sequential decoding")
    p.add_argument("--channel", required=True)
    p.add_argument("--prior", default=None)
    p.add_argument("--n", type=int, required=True, help="block length")
    p.add_argument("--sizes", default=None, help="codebook sizes 'L1,L2,...'")
    p.add_argument("--rates", default=None, help="target rates 'R1,R2,...' in bits/use")
    p.add_argument("--delta", type=float, default=0.0,
                   help="rate back-off: sizes are ceil(2^(n (R - delta)))")
    p.add_argument("--seed", type=int, required=True, help="64-bit master seed")
    p.add_argument("--mode", choices=("exhaustive", "mc"), default="exhaustive")
    p.add_argument("--trials", type=int, default=None, help="Monte Carlo message tuples")
    p.add_argument("--max-block-dim", type=int, default=None,
                   help="cap on the materialized d^n block dimension")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="randomized verification suites")
    p.add_argument("--suite", choices=("entropy", "lemmas", "region", "all"), default="all")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-reported", type=int, default=5,
                   help="violating instances printed per suite")
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ChannelFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, CapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
