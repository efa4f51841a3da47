"""Command-line scenario runner.

    irqft list
    irqft run <scenario> [--config PATH] [--out DIR] [--seed N] [--threads N] [--<key> VALUE ...]
    irqft parse '<literal>'

Scenario parameters come from an INI file with a ``[params]`` section (the
packaged defaults live in ``irqft/configs``); values are Python literals.
``irqft parse`` reads cone, test-function and functional literals such as
``cone{dim=2, gens=[[1,1],[1,-1]]} x cone{box=[1]}``; the grammar is given
in :mod:`irqft.literals`.

Exit status: 0 when every assertion passes, 1 when one fails, 2 on usage
errors (unknown scenario, unknown option, unreadable config).
"""

import argparse
import ast
import configparser
import csv
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from . import literals, scenarios
from .errors import IrqftError

log = logging.getLogger("irqft")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_value(text):
    """Python literal when the text is one, otherwise the stripped string."""
    text = text.strip()
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def list_scenarios():
    return sorted(scenarios.REGISTRY)


def load_config(name, path=None):
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case sensitive (A, B, N, ...)
    if path is None:
        text = resources.files("irqft.configs").joinpath(f"{name}.ini").read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise UsageError(f"malformed config: {exc}") from exc
    if not parser.has_section("params"):
        raise UsageError("config needs a [params] section")
    return {k: parse_value(v) for k, v in parser.items("params")}


def apply_overrides(params, extra):
    """Apply ``--key value`` pairs; keys must already exist in the config."""
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise UsageError(f"unexpected argument {tok!r}")
        key, eq, val = tok[2:].partition("=")
        if not eq:
            if i + 1 >= len(extra):
                raise UsageError(f"option {tok} needs a value")
            val = extra[i + 1]
            i += 1
        if key not in params:
            raise UsageError(f"unknown option --{key} for this scenario")
        params[key] = parse_value(val)
        i += 1
    return params


def write_artifacts(name, seed, params, result, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{name}.csv"
    keys = ["seed"]
    for row in result.rows:
        keys += [k for k in row if k not in keys]
    with csv_path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for row in result.rows:
            w.writerow({"seed": seed, **{k: _cell(v) for k, v in row.items()}})
    summary = {
        "scenario": name,
        "seed": seed,
        "params": {k: scenarios._plain(v) for k, v in params.items()},
        "assertions": [a.to_json() for a in result.assertions],
        "info": _jsonable(result.info),
    }
    json_path = out / f"{name}.json"
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return [str(csv_path), str(json_path)]


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(str(_cell(x)) for x in v)
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return scenarios._plain(obj)


def _set_threads(n):
    if n is None:
        return
    try:
        import numba

        numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))
    except ImportError:  # pragma: no cover
        pass


def run(name, config_path=None, out_dir="irqft-out", seed=0, threads=None, overrides=()):
    """Run one scenario; returns (exit status, artifact paths)."""
    if name not in scenarios.REGISTRY:
        raise UsageError(f"unknown scenario {name!r}; try 'irqft list'")
    params = apply_overrides(load_config(name, config_path), list(overrides))
    _set_threads(threads)
    result = scenarios.REGISTRY[name](params, seed)
    paths = write_artifacts(name, seed, params, result, out_dir)
    for a in result.assertions:
        print(f"{'PASS' if a.passed else 'FAIL'}  {name}: {a.name}  value={a.value!r}  bound={a.bound!r}")
    failed = [a.name for a in result.assertions if not a.passed]
    if failed:
        print(f"{name}: failing assertion(s): {', '.join(failed)}")
        return EXIT_FAIL, paths
    return EXIT_OK, paths


def describe(obj):
    from .cone_geometry import Cone
    from .gs_spaces import TestFunction
    from .laplace import Functional

    if isinstance(obj, Cone):
        return f"cone dim={obj.dim} generators={obj.generators.tolist()}"
    if isinstance(obj, TestFunction):
        return f"test function dim={obj.dim} P={obj.source[0]} Q={obj.source[1]}"
    if isinstance(obj, Functional):
        kinds = [type(a).__name__ for a in obj.atoms]
        return f"functional dim={obj.dim} atoms={kinds}"
    return repr(obj)


def build_parser():
    p = argparse.ArgumentParser(prog="irqft", description="Run numerical scenarios.")
    sub = p.add_subparsers(dest="command")
    sub.add_parser("list", help="list registered scenarios")
    r = sub.add_parser("run", help="run a scenario")
    r.add_argument("scenario", nargs="?")
    r.add_argument("--list", action="store_true", help="list scenarios and exit")
    r.add_argument("--config")
    r.add_argument("--out", default="irqft-out")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--threads", type=int)
    q = sub.add_parser("parse", help="parse a cone/tf/fn literal and describe it")
    q.add_argument("literal")
    return p


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "list" or (args.command == "run" and args.list):
            if extra:
                raise UsageError(f"unexpected arguments {extra}")
            print("\n".join(list_scenarios()))
            return EXIT_OK
        if args.command == "parse":
            if extra:
                raise UsageError(f"unexpected arguments {extra}")
            try:
                obj = literals.parse(args.literal)
            except IrqftError as exc:
                raise UsageError(f"bad literal: {exc}") from exc
            print(describe(obj))
            return EXIT_OK
        if args.command != "run" or not args.scenario:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        status, _ = run(args.scenario, args.config, args.out, args.seed, args.threads, extra)
        return status
    except UsageError as exc:
        print(f"irqft: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IrqftError as exc:
        print(f"irqft: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
