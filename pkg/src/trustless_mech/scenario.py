"""Scenario files: one JSON document describing a full mechanism run.

A scenario fixes the mechanism, the phase schedule, every agent's truthful
input, an optional manipulation strategy, the miner policy, and a 64-bit
seed. Honest agents' commitment salts (and beacon contributions, when the
file leaves them out) derive from the seed through the same hash stream
the beacon uses, so a scenario replays byte-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from importlib import resources

from .adversaries import LeakStrategy, LeakStrategyKind, check_compatible, exact_str
from .auctions import SlotCTRs
from .beacon import DOMAIN_CONTRIBUTIONS, DOMAIN_SALTS, HashStream
from .chain import MinerMode, MinerPolicy
from .contract import MechanismKind, MechanismTag, PhaseSchedule
from .errors import ValidationError
from .school_choice import LotteryMode, SchoolSpec
from .settlement import AgentInput

U64_MAX = 2**64 - 1


class ScenarioError(ValidationError):
    """Scenario parse or validation failure; the message names the field."""


@dataclass(frozen=True)
class AgentSpec:
    """One agent's truthful input. Unused fields stay None."""

    agent: str
    bid: int | None = None
    valuation: int | None = None
    ranking: tuple[str, ...] | None = None
    contribution: int | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    mechanism: MechanismKind
    schedule: PhaseSchedule
    agents: tuple[AgentSpec, ...]
    adversary: LeakStrategy | None = None
    miner: MinerPolicy = MinerPolicy.honest()

    def __post_init__(self) -> None:
        _validate(self)

    def resolved_inputs(self) -> dict[str, tuple[bytes, AgentInput]]:
        """agent -> (salt, input), with seed-derived salts and contributions.

        Salts come from one hash stream, missing beacon contributions from a
        second, both drawn in agent list order; every agent consumes a salt
        whether or not the mechanism needs anything else, which keeps each
        agent's draw independent of the others' fields.
        """
        salts = HashStream(self.seed, DOMAIN_SALTS)
        contributions = HashStream(self.seed, DOMAIN_CONTRIBUTIONS)
        out: dict[str, tuple[bytes, AgentInput]] = {}
        for spec in self.agents:
            salt = salts.salt()
            contribution = spec.contribution
            if self.mechanism.uses_beacon and contribution is None:
                contribution = contributions.u64()
            out[spec.agent] = (
                salt,
                AgentInput(bid=spec.bid, ranking=spec.ranking, contribution=contribution),
            )
        return out


def _fail(path: str, problem: str) -> ScenarioError:
    return ScenarioError(f"field '{path}': {problem}")


def _validate(s: Scenario) -> None:
    if not s.name or len(s.name.encode()) > 255:
        raise _fail("name", "must be 1..255 encoded bytes")
    if not 0 <= s.seed <= U64_MAX:
        raise _fail("seed", "must be an unsigned 64-bit integer")
    if not s.agents:
        raise _fail("agents", "at least one agent is required")

    seen: set[str] = set()
    for i, spec in enumerate(s.agents):
        path = f"agents[{i}]"
        if not spec.agent or len(spec.agent.encode()) > 255:
            raise _fail(f"{path}.agent", "must be 1..255 encoded bytes")
        if spec.agent in seen:
            raise _fail(f"{path}.agent", f"duplicate agent {spec.agent!r}")
        seen.add(spec.agent)
        if spec.bid is not None and not 0 <= spec.bid <= U64_MAX:
            raise _fail(f"{path}.bid", "must be an unsigned 64-bit integer")
        if spec.valuation is not None and spec.valuation < 0:
            raise _fail(f"{path}.valuation", "must be nonnegative")
        if spec.contribution is not None and not 0 <= spec.contribution <= U64_MAX:
            raise _fail(f"{path}.contribution", "must be an unsigned 64-bit integer")
        if spec.ranking is not None and len(set(spec.ranking)) != len(spec.ranking):
            raise _fail(f"{path}.ranking", "lists a school twice")

    tag = s.mechanism.tag
    if tag in (MechanismTag.FIRST_PRICE, MechanismTag.SECOND_PRICE, MechanismTag.GSP):
        for i, spec in enumerate(s.agents):
            if spec.bid is None:
                raise _fail(f"agents[{i}].bid", f"required for a {tag.value} auction")
    if tag is MechanismTag.BOSTON:
        known = set(s.mechanism.school_ids())
        for i, spec in enumerate(s.agents):
            if spec.ranking is None:
                raise _fail(f"agents[{i}].ranking", "required for school choice")
            for school in spec.ranking:
                if school not in known:
                    raise _fail(f"agents[{i}].ranking", f"unknown school {school!r}")
        if s.mechanism.priority_mode is None:
            for school_spec in s.mechanism.schools:
                missing = seen - set(school_spec.priority)
                if missing:
                    raise _fail(
                        "mechanism.schools",
                        f"school {school_spec.school!r} priority omits "
                        f"{sorted(missing)}",
                    )

    if s.adversary is not None:
        try:
            check_compatible(s.adversary, s.mechanism)
        except ValidationError as exc:
            raise _fail("adversary.kind", str(exc)) from exc
        if s.adversary.target is not None and s.adversary.target not in seen:
            raise _fail("adversary.target", f"unknown agent {s.adversary.target!r}")


def _get(doc: dict, key: str, kind: type, path: str, *, required: bool = True, default=None):
    if key not in doc or doc[key] is None:
        if required:
            raise _fail(f"{path}{key}", "missing")
        return default
    value = doc[key]
    if kind is int and isinstance(value, bool):
        raise _fail(f"{path}{key}", "expected an integer, got a boolean")
    if not isinstance(value, kind):
        raise _fail(f"{path}{key}", f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _parse_mechanism(doc: dict, path: str = "mechanism.") -> MechanismKind:
    kind_name = _get(doc, "kind", str, path)
    try:
        tag = MechanismTag(kind_name)
    except ValueError:
        raise _fail(f"{path}kind", f"unknown mechanism {kind_name!r}") from None

    ctrs = None
    if "ctrs" in doc and doc["ctrs"] is not None:
        raw = _get(doc, "ctrs", list, path)
        try:
            ctrs = SlotCTRs(rates=tuple(Fraction(str(x)) for x in raw))
        except (ValueError, ZeroDivisionError, ValidationError) as exc:
            raise _fail(f"{path}ctrs", str(exc)) from None

    schools: tuple[SchoolSpec, ...] = ()
    if "schools" in doc and doc["schools"] is not None:
        out = []
        for i, entry in enumerate(_get(doc, "schools", list, path)):
            spath = f"{path}schools[{i}]."
            if not isinstance(entry, dict):
                raise _fail(spath[:-1], "expected an object")
            out.append(
                SchoolSpec(
                    school=_get(entry, "school", str, spath),
                    capacity=_get(entry, "capacity", int, spath),
                    priority=tuple(_get(entry, "priority", list, spath, required=False, default=[])),
                )
            )
        schools = tuple(out)

    priority_mode = None
    raw_mode = _get(doc, "priority_mode", str, path, required=False)
    if raw_mode is not None:
        try:
            priority_mode = LotteryMode(raw_mode)
        except ValueError:
            raise _fail(f"{path}priority_mode", f"unknown mode {raw_mode!r}") from None

    with_beacon = _get(doc, "with_beacon", bool, path, required=False, default=False)
    try:
        return MechanismKind(
            tag=tag,
            ctrs=ctrs,
            schools=schools,
            priority_mode=priority_mode,
            with_beacon=with_beacon,
        )
    except ValidationError as exc:
        raise _fail(path[:-1], str(exc)) from exc


def _parse_agents(raw: list, path: str = "agents") -> tuple[AgentSpec, ...]:
    out = []
    for i, entry in enumerate(raw):
        apath = f"{path}[{i}]."
        if not isinstance(entry, dict):
            raise _fail(apath[:-1], "expected an object")
        ranking = _get(entry, "ranking", list, apath, required=False)
        out.append(
            AgentSpec(
                agent=_get(entry, "agent", str, apath),
                bid=_get(entry, "bid", int, apath, required=False),
                valuation=_get(entry, "valuation", int, apath, required=False),
                ranking=None if ranking is None else tuple(ranking),
                contribution=_get(entry, "contribution", int, apath, required=False),
            )
        )
    return tuple(out)


def _parse_adversary(doc: dict | None) -> LeakStrategy | None:
    if doc is None:
        return None
    path = "adversary."
    kind_name = _get(doc, "kind", str, path)
    try:
        kind = LeakStrategyKind(kind_name)
    except ValueError:
        raise _fail(f"{path}kind", f"unknown strategy {kind_name!r}") from None
    try:
        return LeakStrategy(
            kind=kind,
            target=_get(doc, "target", str, path, required=False),
            censor_until=_get(doc, "censor_until", int, path, required=False),
        )
    except ValidationError as exc:
        raise _fail(path[:-1], str(exc)) from exc


def _parse_miner(doc: dict | None) -> MinerPolicy:
    if doc is None:
        return MinerPolicy.honest()
    path = "miner."
    mode_name = _get(doc, "mode", str, path)
    try:
        mode = MinerMode(mode_name)
    except ValueError:
        raise _fail(f"{path}mode", f"unknown miner mode {mode_name!r}") from None
    if mode is MinerMode.HONEST:
        return MinerPolicy.honest()
    targets = _get(doc, "targets", list, path)
    until = _get(doc, "until", int, path)
    return MinerPolicy.censor(set(targets), until)


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    schedule_doc = _get(doc, "schedule", dict, "")
    try:
        schedule = PhaseSchedule(
            commit_deadline=_get(schedule_doc, "commit_deadline", int, "schedule."),
            reveal_deadline=_get(schedule_doc, "reveal_deadline", int, "schedule."),
        )
    except ValidationError as exc:
        raise _fail("schedule", str(exc)) from exc
    return Scenario(
        name=_get(doc, "name", str, ""),
        seed=_get(doc, "seed", int, ""),
        mechanism=_parse_mechanism(_get(doc, "mechanism", dict, "")),
        schedule=schedule,
        agents=_parse_agents(_get(doc, "agents", list, "")),
        adversary=_parse_adversary(_get(doc, "adversary", dict, "", required=False)),
        miner=_parse_miner(_get(doc, "miner", dict, "", required=False)),
    )


def scenario_to_dict(s: Scenario) -> dict:
    mech: dict = {"kind": s.mechanism.tag.value}
    if s.mechanism.ctrs is not None:
        mech["ctrs"] = [exact_str(r) for r in s.mechanism.ctrs.rates]
    if s.mechanism.schools:
        mech["schools"] = [
            {"school": sc.school, "capacity": sc.capacity, "priority": list(sc.priority)}
            for sc in s.mechanism.schools
        ]
    if s.mechanism.priority_mode is not None:
        mech["priority_mode"] = s.mechanism.priority_mode.value
    if s.mechanism.with_beacon:
        mech["with_beacon"] = True

    agents = []
    for spec in s.agents:
        entry: dict = {"agent": spec.agent}
        if spec.bid is not None:
            entry["bid"] = spec.bid
        if spec.valuation is not None:
            entry["valuation"] = spec.valuation
        if spec.ranking is not None:
            entry["ranking"] = list(spec.ranking)
        if spec.contribution is not None:
            entry["contribution"] = spec.contribution
        agents.append(entry)

    doc: dict = {
        "name": s.name,
        "seed": s.seed,
        "mechanism": mech,
        "schedule": {
            "commit_deadline": s.schedule.commit_deadline,
            "reveal_deadline": s.schedule.reveal_deadline,
        },
        "agents": agents,
    }
    if s.adversary is not None:
        adv: dict = {"kind": s.adversary.kind.value}
        if s.adversary.target is not None:
            adv["target"] = s.adversary.target
        if s.adversary.censor_until is not None:
            adv["censor_until"] = s.adversary.censor_until
        doc["adversary"] = adv
    if s.miner.mode is not MinerMode.HONEST:
        doc["miner"] = {
            "mode": s.miner.mode.value,
            "targets": sorted(s.miner.censor_targets),
            "until": s.miner.censor_until,
        }
    return doc


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return scenario_from_dict(doc)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def dump_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2, sort_keys=True) + "\n")


def bundled_scenario_names() -> list[str]:
    root = resources.files("trustless_mech") / "scenarios"
    return sorted(p.name.removesuffix(".json") for p in root.iterdir() if p.name.endswith(".json"))


def load_bundled(name: str) -> Scenario:
    ref = resources.files("trustless_mech") / "scenarios" / f"{name}.json"
    try:
        text = ref.read_text()
    except FileNotFoundError:
        raise ScenarioError(
            f"no bundled scenario {name!r}; available: {bundled_scenario_names()}"
        ) from None
    try:
        return scenario_from_dict(json.loads(text))
    except ScenarioError as exc:
        raise ScenarioError(f"bundled scenario {name!r}: {exc}") from exc
