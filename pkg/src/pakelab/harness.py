"""Seeded multi-trial experiments and their survivor-curve statistics.

A trial owns a fresh :class:`OracleSuite` and ``random.Random``, both seeded
with ``seed ^ trial``, so every output byte is a function of the config.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import random
import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import attacks as atk
from .attacks import AttackReport, ConfirmationOracle, Dictionary
from .ciphers import Instantiation, InstantiationSpec, block_width
from .groups import GroupError, GroupParams, Kind, load_params, preset, rotation_groups
from .oracles import OracleSuite
from .protocols import (
    CLIENT_ID, PROTOCOLS, AuthAServer, AuthMode, DHParty, SRPClient, SRPServer,
    autha_session, make_credential, make_password_file, make_srp_password_file, oeke_session,
)

MASK64 = (1 << 64) - 1
ROTATION_BITS = 64


class ConfigError(ValueError):
    """The experiment configuration names an incompatible combination."""


class DictionaryError(ValueError):
    pass


# -- dictionaries -----------------------------------------------------------


def generate_dictionary(size: int, seed: int, length: int = 8) -> Dictionary:
    """``size`` distinct random lowercase/digit words; the true password is drawn uniformly."""
    if size < 2:
        raise DictionaryError("dictionary size must be at least 2")
    rng = random.Random(f"dictionary:{seed}")
    alphabet = string.ascii_lowercase + string.digits
    seen, words = set(), []
    while len(words) < size:
        w = "".join(rng.choice(alphabet) for _ in range(length)).encode()
        if w not in seen:
            seen.add(w)
            words.append(w)
    return Dictionary(words, rng.randrange(size))


def load_dictionary(path) -> Dictionary:
    """Newline-separated candidates.  Duplicates are rejected with their line numbers."""
    first_seen: Dict[bytes, int] = {}
    dupes = []
    words = []
    for lineno, line in enumerate(Path(path).read_bytes().splitlines(), 1):
        if not line.strip():
            continue
        if line in first_seen:
            dupes.append(f"line {lineno} repeats line {first_seen[line]} ({line.decode(errors='replace')!r})")
            continue
        first_seen[line] = lineno
        words.append(line)
    if dupes:
        raise DictionaryError("duplicate dictionary entries: " + "; ".join(dupes))
    if len(words) < 2:
        raise DictionaryError("dictionary needs at least two entries")
    return Dictionary(words)


# -- configuration --------------------------------------------------------

# attack -> (protocols, instantiations or None, group kinds)
ATTACKS = {
    "partition-mulhash": (("autha", "oeke"), ("mulhash", "muliota"), (Kind.MODP,)),
    "partition-randmulhash": (("autha", "oeke"), ("randmulhash", "muliota"), (Kind.MODP,)),
    "partition-blockcipher": (("autha", "oeke"), ("blockcipher", "muliota"), (Kind.MODP, Kind.EC)),
    "impersonate": (("autha",), ("mulexphash",), (Kind.MODP, Kind.EC)),
    "small-subgroup": (("dh",), None, (Kind.MODP, Kind.EC)),
    "srp6-fixed-u": (("srp6",), None, (Kind.MODP,)),
    "ecsrp1-dictionary": (("ecsrp1", "srp5"), None, (Kind.MODP, Kind.EC)),
}

_DEFAULT_FILTER = {
    "mulhash": "partition-mulhash",
    "randmulhash": "partition-randmulhash",
    "blockcipher": "partition-blockcipher",
    "muliota": "partition-mulhash",
}


@dataclass
class ExperimentConfig:
    protocol: str = "autha"
    instantiation: Optional[str] = "mulhash"
    group: str = "modp23"
    dict_size: int = 1024
    dict_file: Optional[str] = None
    sessions: int = 10
    trials: int = 100
    seed: int = 7
    attack: str = "partition"
    rotate_params: bool = False
    oracle: str = "authhash"
    tolerance: float = 0.25
    jobs: int = 1

    @classmethod
    def from_mapping(cls, values: Dict[str, object]) -> "ExperimentConfig":
        """Build from string-valued ``key=value`` pairs (dashes allowed in keys)."""
        kwargs = {}
        fields = {f.name: f for f in dataclasses.fields(cls)}
        for raw_key, value in values.items():
            key = raw_key.replace("-", "_")
            if key not in fields:
                raise ConfigError(f"unknown config key {raw_key!r}")
            default = fields[key].default
            if value is None or isinstance(value, (bool, int, float)) and not isinstance(default, str):
                kwargs[key] = value
            elif isinstance(default, bool):
                kwargs[key] = str(value).lower() in ("1", "true", "yes", "on")
            elif isinstance(default, int):
                kwargs[key] = int(str(value), 0)
            elif isinstance(default, float):
                kwargs[key] = float(value)
            else:
                kwargs[key] = None if str(value).lower() in ("", "none") else str(value)
        return cls(**kwargs)

    @property
    def attack_name(self) -> str:
        if self.attack == "partition":
            try:
                return _DEFAULT_FILTER[self.instantiation]
            except KeyError:
                raise ConfigError(f"no partition filter for instantiation {self.instantiation!r}") from None
        return self.attack

    def group_params(self) -> GroupParams:
        if Path(self.group).is_file():
            return load_params(self.group)
        return preset(self.group)

    def validate(self) -> None:
        """Raise ConfigError naming the first violated precondition."""
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.sessions < 1:
            raise ConfigError("sessions must be >= 1")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        name = self.attack_name
        if name not in ATTACKS:
            raise ConfigError(f"unknown attack {self.attack!r}; choose from partition, {', '.join(ATTACKS)}")
        protocols, specs, kinds = ATTACKS[name]
        if self.protocol not in protocols:
            raise ConfigError(f"{name} needs protocol in {protocols}, got {self.protocol!r}")
        if specs is not None and self.instantiation not in specs:
            raise ConfigError(f"{name} needs instantiation in {specs}, got {self.instantiation!r}")
        try:
            params = self.group_params()
        except (GroupError, OSError) as exc:
            raise ConfigError(str(exc)) from None
        groups = rotation_groups(1, ROTATION_BITS, self.seed) if self.rotate_params else [params]
        if self.rotate_params and name not in atk.PARTITION_FILTERS:
            raise ConfigError("parameter rotation only applies to partition attacks")
        for g in groups:
            if g.kind not in kinds:
                raise ConfigError(f"{name} does not apply to {g.kind.value} groups")
            if specs is not None:
                try:
                    InstantiationSpec.parse(self.instantiation).check(g)
                except (GroupError, ValueError) as exc:
                    raise ConfigError(str(exc)) from None
        if name == "small-subgroup" and params.t <= 1:
            raise ConfigError("small-subgroup attack needs a cofactor t > 1")
        if name == "impersonate":
            try:
                ConfirmationOracle(self.oracle)
            except ValueError:
                raise ConfigError(f"unknown confirmation oracle {self.oracle!r}") from None
        if self.dict_file is None and self.dict_size < 2:
            raise ConfigError("dict_size must be >= 2")
        if self.dict_file is not None:
            try:
                load_dictionary(self.dict_file)
            except (DictionaryError, OSError) as exc:
                raise ConfigError(str(exc)) from None

    def echo(self) -> dict:
        # The worker count changes scheduling only, never the output bytes.
        d = dataclasses.asdict(self)
        del d["jobs"]
        return d


# -- trials ---------------------------------------------------------------


@dataclass
class TrialResult:
    trial: int
    report: Optional[AttackReport] = None
    true_index: Optional[int] = None
    success: bool = False
    sound: bool = True
    detail: Dict[str, object] = field(default_factory=dict)

    @property
    def wrong_counts(self) -> List[int]:
        """Survivors other than the true password, per round."""
        return [len(s) - (self.true_index in s) for s in self.report.round_sets]

    def to_dict(self) -> dict:
        d = {"trial": self.trial, "success": self.success, "sound": self.sound}
        if self.report is not None:
            d["report"] = self.report.to_dict()
        if self.detail:
            d["detail"] = self.detail
        return d


def _trial_dictionary(cfg: ExperimentConfig, tseed: int, rng: random.Random) -> Dictionary:
    if cfg.dict_file is None:
        return generate_dictionary(cfg.dict_size, tseed)
    loaded = load_dictionary(cfg.dict_file)
    return Dictionary(loaded.words, rng.randrange(len(loaded)))


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialResult:
    tseed = (cfg.seed ^ trial) & MASK64
    rng = random.Random(tseed)
    suite = OracleSuite(tseed)
    name = cfg.attack_name
    params = cfg.group_params()
    out = TrialResult(trial)

    if name in ("small-subgroup", "srp6-fixed-u"):
        return _run_keyless_trial(cfg, name, params, suite, rng, out)

    dictionary = _trial_dictionary(cfg, tseed, rng)
    password = dictionary.true_password
    out.true_index = dictionary.true_index

    if name in atk.PARTITION_FILTERS:
        spec = InstantiationSpec.parse(cfg.instantiation)
        groups = (rotation_groups(cfg.sessions, ROTATION_BITS, cfg.seed) if cfg.rotate_params
                  else [params] * cfg.sessions)
        transcripts = []
        for g in groups:
            pw = make_password_file(g, suite, password)
            if cfg.protocol == "autha":
                tr = autha_session(g, suite, spec, pw, AuthMode.MUTUAL, rng)
            else:
                tr = oeke_session(g, suite, spec, pw, rng)
            if not tr.agreed:
                raise AssertionError("honest session failed")
            transcripts.append(tr)
        report = atk.PARTITION_FILTERS[name](dictionary, transcripts, suite)
    elif name == "impersonate":
        oracle = ConfirmationOracle(cfg.oracle)
        spec = InstantiationSpec.parse(cfg.instantiation)
        mode = AuthMode.MUTUAL if oracle is ConfirmationOracle.AUTH_HASH else AuthMode.CLIENT
        server = AuthAServer(params, suite, spec, make_password_file(params, suite, password), mode, rng,
                             credential=make_credential(params, suite, password, rng))
        report = atk.attack_impersonate_mulexphash(params, suite, dictionary, oracle, server, rng)
    else:  # ecsrp1-dictionary
        client = SRPClient(cfg.protocol, params, suite, CLIENT_ID, password, rng)
        report = atk.attack_ecsrp1_dictionary(params, suite, dictionary, client, rng)
        out.detail["client_accepted"] = bool(client.accepted)

    out.report = report
    out.sound = all(out.true_index in s for s in report.round_sets)
    out.success = report.recovered is not None and report.recovered == password
    return out


def _run_keyless_trial(cfg, name, params, suite, rng, out: TrialResult) -> TrialResult:
    if name == "small-subgroup":
        gen = params.ambient_generator()
        client, server = DHParty(params, suite, rng, gen), DHParty(params, suite, rng, gen)
        key, space = atk.attack_small_subgroup_mitm(params, suite, client, server)
        out.success = key is not None and key == client.key == server.key and space == params.t
        out.detail = {"search_space": space, "key": key.hex() if key else None}
        return out
    # srp6-fixed-u: the same adversary against a fixed-u server and a live-u server.
    password = b"correct horse"
    pw = make_srp_password_file(params, suite, password, rng.randbytes(8))
    u_fixed = params.random_scalar(rng)
    fixed = SRPServer("srp6", params, suite, pw, rng, u_override=u_fixed)
    acc_fixed, key = atk.attack_srp6_fixed_u(params, suite, pw.client, pw.verifier, u_fixed, fixed, rng)
    live = SRPServer("srp6", params, suite, pw, rng)
    acc_live, _ = atk.attack_srp6_fixed_u(params, suite, pw.client, pw.verifier, u_fixed, live, rng)
    out.success = acc_fixed and key == fixed.key and not acc_live
    out.detail = {"accepted_fixed_u": acc_fixed, "accepted_live_u": acc_live,
                  "key_matches": key == fixed.key}
    return out


# -- aggregation ----------------------------------------------------------


def ciphertexts_per_session(protocol: str) -> int:
    return 2 if protocol == "autha" else 1


def theoretical_bits(cfg: ExperimentConfig) -> Optional[float]:
    """Predicted leakage per observed session for a partition attack."""
    name = cfg.attack_name
    if name not in atk.PARTITION_FILTERS:
        return None
    if cfg.instantiation == "muliota":
        return 0.0
    n_ct = ciphertexts_per_session(cfg.protocol)
    groups = rotation_groups(cfg.sessions, ROTATION_BITS, cfg.seed) if cfg.rotate_params else [cfg.group_params()]
    g = groups[0]
    if cfg.instantiation == "mulhash":
        # One residue class per distinct group: fresh information only when the group changes.
        distinct = len(set(groups)) if cfg.rotate_params else 1
        return math.log2(g.t) * distinct / cfg.sessions
    if cfg.instantiation == "randmulhash":
        return n_ct * math.log2(g.t)
    # blockcipher: fraction of the 2^w domain that decodes to a subgroup member.
    members = g.q if g.kind is Kind.MODP else g.q - 1
    return n_ct * (block_width(g) - math.log2(members))


def pooled_bits(trials: Sequence[TrialResult]) -> Optional[float]:
    """-log2 of the pooled per-round survival rate of wrong candidates.

    Rounds that start with no wrong candidates carry no information and are
    skipped, so the estimate does not saturate once a trial has isolated the
    true password.
    """
    before = after = 0
    for t in trials:
        w = t.wrong_counts
        for a, b in zip(w, w[1:]):
            if a:
                before += a
                after += b
    if before == 0:
        return None
    if after == 0:
        return math.inf
    return math.log2(before / after)


def pooled_total_bits(trials: Sequence[TrialResult]) -> Optional[float]:
    """-log2 of the pooled fraction of wrong candidates left after the last round."""
    first = sum(t.wrong_counts[0] for t in trials)
    last = sum(t.wrong_counts[-1] for t in trials)
    if first == 0:
        return None
    return math.inf if last == 0 else math.log2(first / last)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trials: List[TrialResult]
    aggregate: Dict[str, object]

    @property
    def verdict(self) -> str:
        return self.aggregate["verdict"]

    def to_json(self) -> str:
        doc = {
            "config": self.config.echo(),
            "aggregate": self.aggregate,
            "trials": [t.to_dict() for t in self.trials],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "session", "survivors"])
        for t in self.trials:
            if t.report is not None:
                for session, n in t.report.rounds:
                    w.writerow([t.trial, session, n])
        return buf.getvalue()


def _r(x):
    if x is None or isinstance(x, str):
        return x
    if math.isinf(x):
        return "inf"
    return round(float(x), 6)


def aggregate(cfg: ExperimentConfig, trials: Sequence[TrialResult]) -> Dict[str, object]:
    name = cfg.attack_name
    agg: Dict[str, object] = {"attack": name, "trials": len(trials)}
    agg["soundness_violations"] = sum(not t.sound for t in trials)
    agg["success_rate"] = _r(sum(t.success for t in trials) / len(trials))

    with_reports = [t for t in trials if t.report is not None]
    if with_reports:
        curves = np.array([[n for _, n in t.report.rounds] for t in with_reports])
        agg["median_survivors"] = [_r(v) for v in np.median(curves, axis=0)]
        agg["mean_survivors"] = [_r(v) for v in curves.mean(axis=0)]
        sessions = len(curves[0]) - 1
        agg["naive_bits_per_session"] = _r(np.mean([t.report.bits_leaked_estimate for t in with_reports])
                                           / max(sessions, 1))

    if name in atk.PARTITION_FILTERS:
        theory = theoretical_bits(cfg)
        independence = ("parameter-rotation" if cfg.rotate_params
                        else "fresh-nonce" if cfg.instantiation == "randmulhash" else "single-group")
        if independence == "single-group" and cfg.instantiation == "mulhash":
            # One reading, all in the first session: per-round rates would mis-weight it.
            total = pooled_total_bits(with_reports)
            emp = None if total is None else total / cfg.sessions
        else:
            emp = pooled_bits(with_reports)
        agg["empirical_bits_per_session"] = _r(emp)
        agg["theoretical_bits_per_session"] = _r(theory)
        agg["independence"] = independence
        if theory == 0:
            flat = all(t.report.survivors == t.report.dictionary_size for t in with_reports)
            verdict = "resists" if flat else "fail"
        else:
            ok = emp is not None and not math.isinf(emp) and abs(emp - theory) <= cfg.tolerance * theory
            verdict = "pass" if ok else "fail"
    elif name == "ecsrp1-dictionary" and cfg.protocol == "srp5":
        flat = all(t.report.survivors == t.report.dictionary_size and t.report.recovered is None
                   for t in with_reports)
        verdict = "resists" if flat else "fail"
    else:
        if with_reports:
            agg["sessions_to_unique"] = sorted({t.report.sessions_to_unique for t in with_reports},
                                               key=lambda v: (v is None, v))
        verdict = "pass" if all(t.success for t in trials) else "fail"
    if agg["soundness_violations"]:
        verdict = "fail"
    agg["verdict"] = verdict
    return agg


def run_experiment(cfg: ExperimentConfig, out: Optional[str] = None) -> ExperimentResult:
    """Validate ``cfg``, run every trial, aggregate.  Writes ``out``.csv/.json if given."""
    cfg.validate()
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            trials = list(pool.map(run_trial, [cfg] * cfg.trials, range(cfg.trials)))
    else:
        trials = [run_trial(cfg, i) for i in range(cfg.trials)]
    result = ExperimentResult(cfg, trials, aggregate(cfg, trials))
    if out:
        Path(f"{out}.csv").write_text(result.to_csv())
        Path(f"{out}.json").write_text(result.to_json())
    return result


def summarize(result: ExperimentResult):
    """Human-readable table plus the survivor-curve CSV."""
    cfg, agg = result.config, result.aggregate
    lines = [
        f"attack       {agg['attack']}",
        f"protocol     {cfg.protocol}   instantiation {cfg.instantiation}   group "
        f"{'rotating safe primes' if cfg.rotate_params else cfg.group}",
        f"trials       {agg['trials']}   seed {cfg.seed}",
    ]
    if "median_survivors" in agg:
        lines.append("session  median  mean")
        for i, (med, mean) in enumerate(zip(agg["median_survivors"], agg["mean_survivors"])):
            lines.append(f"{i:>7}  {med:>6}  {mean:>8.2f}")
    for key in ("empirical_bits_per_session", "theoretical_bits_per_session", "naive_bits_per_session",
                "independence", "sessions_to_unique", "success_rate", "soundness_violations"):
        if key in agg:
            lines.append(f"{key:<30} {agg[key]}")
    lines.append(f"verdict                        {agg['verdict']}")
    return "\n".join(lines) + "\n", result.to_csv()
