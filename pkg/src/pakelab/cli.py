"""Command-line entry point: ``pakelab {run-protocol,attack,experiment,verify-transcript}``.

Exit codes: 0 success, 1 transcript mismatch, 2 configuration error,
3 calibration failure under ``experiment --strict``.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
from pathlib import Path
from typing import Dict, List, Optional

from .ciphers import InstantiationSpec
from .groups import GroupError
from .harness import ConfigError, DictionaryError, ExperimentConfig, run_experiment, summarize
from .oracles import OracleSuite
from .protocols import (
    PROTOCOLS, AuthMode, check_wire_format, compare_transcripts, parse_transcript, run_protocol,
)

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_CALIBRATION = 0, 1, 2, 3

# CLI flag dest -> ExperimentConfig field
_FLAG_FIELDS = {
    "protocol": "protocol",
    "instantiation": "instantiation",
    "group_preset": "group",
    "dict_size": "dict_size",
    "dict_file": "dict_file",
    "sessions": "sessions",
    "trials": "trials",
    "seed": "seed",
    "attack": "attack",
    "rotate_params": "rotate_params",
    "oracle": "oracle",
    "tolerance": "tolerance",
    "jobs": "jobs",
}


def read_config_file(path) -> Dict[str, str]:
    """``key = value`` lines; blank lines and ``#`` comments are ignored."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    values: Dict[str, object] = {}
    if args.config:
        values.update(read_config_file(args.config))
    for dest, name in _FLAG_FIELDS.items():
        v = getattr(args, dest, None)
        if v is not None:
            values[name] = v
    return ExperimentConfig.from_mapping(values)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; flags given on the command line win")
    p.add_argument("--protocol", choices=PROTOCOLS)
    p.add_argument("--instantiation")
    p.add_argument("--group-preset", help="preset name or a key=value group file")
    p.add_argument("--seed", type=lambda s: int(s, 0))
    p.add_argument("--out", help="write output here instead of standard output")
    p.add_argument("--format", choices=("csv", "json", "table"), default="table")


def _add_attack_flags(p: argparse.ArgumentParser) -> None:
    d = p.add_mutually_exclusive_group()
    d.add_argument("--dict-size", type=int)
    d.add_argument("--dict-file")
    p.add_argument("--sessions", type=int)
    p.add_argument("--attack")
    p.add_argument("--rotate-params", action="store_const", const=True, default=None)
    p.add_argument("--oracle", help="confirmation oracle for impersonation: authhash, redundant, credential")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--jobs", type=int)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pakelab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-protocol", help="one honest session; prints its transcript")
    _add_common(p)
    p.add_argument("--password", default="hunter2")
    p.add_argument("--mode", choices=[m.value for m in AuthMode], default=AuthMode.MUTUAL.value)

    p = sub.add_parser("attack", help="one attack instance; prints its report")
    _add_common(p)
    _add_attack_flags(p)

    p = sub.add_parser("experiment", help="multi-trial survivor statistics")
    _add_common(p)
    _add_attack_flags(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--strict", action="store_true", help="exit 3 when the calibration verdict is fail")

    p = sub.add_parser("verify-transcript", help="replay a recorded session and compare byte for byte")
    p.add_argument("transcript")
    _add_common(p)
    p.add_argument("--password")
    p.add_argument("--mode", choices=[m.value for m in AuthMode])
    return parser


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- run-protocol / verify-transcript -------------------------------------


def _session(protocol, instantiation, group, seed, password, mode):
    cfg = ExperimentConfig(protocol=protocol, instantiation=instantiation, group=group)
    try:
        params = cfg.group_params()
    except (GroupError, OSError) as exc:
        raise ConfigError(str(exc)) from None
    spec = None
    if protocol in ("autha", "oeke"):
        if not instantiation:
            raise ConfigError(f"{protocol} needs --instantiation")
        try:
            spec = InstantiationSpec.parse(instantiation)
            spec.check(params)
        except (GroupError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
    try:
        return run_protocol(protocol, params, OracleSuite(seed), password.encode(),
                            random.Random(seed), spec, AuthMode(mode))
    except GroupError as exc:
        raise ConfigError(str(exc)) from None


def _header(protocol, instantiation, group, seed, password, mode) -> str:
    fields = [f"protocol={protocol}", f"instantiation={instantiation or 'none'}", f"group={group}",
              f"seed={seed}", f"password={password}", f"mode={mode}"]
    return "# " + " ".join(fields) + "\n"


def cmd_run_protocol(args) -> int:
    protocol = args.protocol or "autha"
    inst = args.instantiation if args.instantiation is not None else (
        "muliota" if protocol in ("autha", "oeke") else None)
    group = args.group_preset or "modp23"
    seed = args.seed if args.seed is not None else 7
    tr = _session(protocol, inst, group, seed, args.password, args.mode)
    if args.format == "json":
        text = tr.summary_json() + "\n"
    elif args.format == "csv":
        text = "index,sender,tag,payload\n" + "".join(
            f"{i},{m.sender.value},{m.tag},{m.payload.hex()}\n" for i, m in enumerate(tr.messages, 1))
    else:
        text = _header(protocol, inst, group, seed, args.password, args.mode) + tr.to_text()
    _emit(text, args.out)
    return EXIT_OK if tr.agreed else EXIT_MISMATCH


def _split_header(text: str):
    header, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            for item in line[1:].split():
                if "=" in item:
                    k, v = item.split("=", 1)
                    header[k] = v
        else:
            body.append(line)
    return header, "\n".join(body)


def cmd_verify_transcript(args) -> int:
    header, body = _split_header(Path(args.transcript).read_text())

    def pick(flag, key, default=None):
        return flag if flag is not None else header.get(key, default)

    protocol = pick(args.protocol, "protocol")
    if protocol is None:
        raise ConfigError("transcript has no protocol header; pass --protocol")
    inst = pick(args.instantiation, "instantiation")
    inst = None if inst == "none" else inst
    group = pick(args.group_preset, "group", "modp23")
    seed = int(pick(args.seed, "seed", 7))
    password = pick(args.password, "password", "hunter2")
    mode = pick(args.mode, "mode", AuthMode.MUTUAL.value)
    try:
        recorded = parse_transcript(body)
    except ValueError as exc:
        raise ConfigError(f"{args.transcript}: {exc}") from None

    replayed = _session(protocol, inst, group, seed, password, mode)
    problems = check_wire_format(protocol, replayed.params, recorded)
    problems += compare_transcripts(recorded, replayed)
    if not replayed.agreed:
        problems.append("replayed session did not reach agreement")
    text = "".join(f"{p}\n" for p in problems) or f"ok: {len(recorded)} flows match\n"
    _emit(text, args.out)
    return EXIT_MISMATCH if problems else EXIT_OK


# -- attack / experiment ----------------------------------------------------


def _render(result, fmt: str) -> str:
    if fmt == "json":
        return result.to_json()
    if fmt == "csv":
        return result.to_csv()
    return summarize(result)[0]


def cmd_attack(args) -> int:
    cfg = build_config(args)
    cfg.trials = 1
    if args.sessions is None and cfg.attack_name in ("impersonate", "ecsrp1-dictionary"):
        cfg.sessions = 1
    result = run_experiment(cfg)
    _emit(_render(result, args.format), args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = build_config(args)
    result = run_experiment(cfg)
    _emit(_render(result, args.format), args.out)
    if args.strict and result.verdict == "fail":
        return EXIT_CALIBRATION
    return EXIT_OK


COMMANDS = {
    "run-protocol": cmd_run_protocol,
    "attack": cmd_attack,
    "experiment": cmd_experiment,
    "verify-transcript": cmd_verify_transcript,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 1), format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DictionaryError) as exc:
        print(f"pakelab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
