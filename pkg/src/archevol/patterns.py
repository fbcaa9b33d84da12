"""Evolution patterns: workflows mixing automated restructuring steps with
architect decision points, ending in a style conformance check.

A pattern is a list of steps.  Decision steps suspend the run until an answer
arrives (interactively, over HTTP, or from a recorded decision script);
Automated steps transform the architecture; a Check step attaches a
conformance report.  Runs fail atomically: the snapshot taken before the
failing step is what the run retains.

Ships the Client-Server introduction pattern: name the tiers, create them,
assign existing components, move and delegate them, optionally restructure
further, then check the client-server style.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .evolution import EvolutionError, OperationDescriptor, apply_descriptor, \
    create_component, move_in
from .graphs import ConformanceReport
from .model import Architecture, ModelError, canonical_json
from .styles import Style, check_style

FORMAT_DECISIONS = "archevol/decisions@1"

STATES = ("running", "awaiting-decision", "finished", "failed")


class PatternError(ModelError):
    """Invalid pattern definition or run interaction."""


class DecisionError(PatternError):
    """An architect answer failed validation."""


class DuplicateDecisionError(PatternError):
    """An answer arrived for a step that is not awaiting one."""


# ---------------------------------------------------------------------------
# Steps

Decisions = dict[str, object]


@dataclass(frozen=True)
class Decision:
    id: str
    kind: str
    prompt: str
    validate: Callable[[object, Architecture, Decisions], None]


@dataclass(frozen=True)
class Automated:
    id: str
    description: str
    run: Callable[[Architecture, Decisions], tuple[Architecture, list[str]]]


@dataclass(frozen=True)
class Check:
    id: str
    style: Callable[[], Style]


Step = Decision | Automated | Check


@dataclass(frozen=True)
class EvolutionPattern:
    name: str
    steps: tuple[Step, ...]

    def __post_init__(self):
        ids = [s.id for s in self.steps]
        if len(ids) != len(set(ids)):
            raise PatternError(f"pattern {self.name} has duplicate step ids")

    def step(self, step_id: str) -> Step:
        for s in self.steps:
            if s.id == step_id:
                return s
        raise PatternError(f"pattern {self.name} has no step {step_id}")


# ---------------------------------------------------------------------------
# Decision scripts


@dataclass(frozen=True)
class DecisionScript:
    pattern_name: str
    decisions: tuple[tuple[str, object], ...]  # (step id, answer)

    def answer_for(self, step_id: str):
        for sid, ans in self.decisions:
            if sid == step_id:
                return ans
        raise DecisionError(f"decision script has no answer for step {step_id}")

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_DECISIONS,
            "pattern": self.pattern_name,
            "decisions": [{"step": sid, "answer": ans} for sid, ans in self.decisions],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionScript":
        if d.get("format") != FORMAT_DECISIONS:
            raise ModelError(f"unsupported decision script format {d.get('format')!r}")
        return cls(d["pattern"],
                   tuple((x["step"], x["answer"]) for x in d.get("decisions", [])))

    def dumps(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def load(cls, path: str | Path) -> "DecisionScript":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())


# ---------------------------------------------------------------------------
# Executor


@dataclass
class PatternRun:
    state: str
    current_step: Optional[str]
    architecture: Architecture
    trace: list[str] = field(default_factory=list)
    final_report: Optional[ConformanceReport] = None
    diagnostic: Optional[str] = None


class PatternExecutor:
    """Single-run state machine; `advance` runs until the next decision or
    the end, `provide` answers the pending decision and resumes."""

    def __init__(self, pattern: EvolutionPattern, architecture: Architecture):
        probs = architecture.problems()
        if probs:
            raise PatternError("invalid starting architecture: " + "; ".join(probs))
        self.pattern = pattern
        self.architecture = architecture.copy()
        self.decisions: Decisions = {}
        self.trace: list[str] = []
        self.final_report: Optional[ConformanceReport] = None
        self.diagnostic: Optional[str] = None
        self.state = "running"
        self._index = 0
        self._advance()

    # -- public surface ------------------------------------------------------

    @property
    def current_step(self) -> Optional[Step]:
        if self.state in ("finished", "failed") or self._index >= len(self.pattern.steps):
            return None
        return self.pattern.steps[self._index]

    def run(self) -> PatternRun:
        step = self.current_step
        return PatternRun(self.state, step.id if step else None,
                          self.architecture.copy(), list(self.trace),
                          self.final_report, self.diagnostic)

    def provide(self, step_id: str, answer) -> None:
        step = self.current_step
        if self.state != "awaiting-decision" or not isinstance(step, Decision) \
                or step.id != step_id:
            raise DuplicateDecisionError(
                f"no decision pending for step {step_id}"
                + (f" (answered already or current step is {step.id})" if step else ""))
        try:
            step.validate(answer, self.architecture, self.decisions)
        except DecisionError as exc:
            self.state = "failed"
            self.diagnostic = f"step {step.id}: {exc}"
            return
        self.decisions[step.id] = answer
        self.trace.append(f"decision {step.id}: answered")
        self._index += 1
        self.state = "running"
        self._advance()

    # -- machinery -----------------------------------------------------------

    def _advance(self) -> None:
        while self._index < len(self.pattern.steps):
            step = self.pattern.steps[self._index]
            if isinstance(step, Decision):
                self.state = "awaiting-decision"
                return
            snapshot = self.architecture.copy()
            try:
                if isinstance(step, Automated):
                    self.architecture, notes = step.run(self.architecture, self.decisions)
                    self.trace.extend(f"{step.id}: {n}" for n in notes)
                else:
                    style = step.style()
                    self.final_report = check_style(self.architecture, style)
                    self.trace.append(
                        f"{step.id}: style {style.name} "
                        + ("ok" if self.final_report.ok
                           else f"{len(self.final_report.violations)} violations"))
            except (ModelError, EvolutionError) as exc:
                self.architecture = snapshot
                self.state = "failed"
                self.diagnostic = f"step {step.id}: {exc}"
                return
            self._index += 1
        self.state = "finished"


Provider = Callable[[Decision], object]


def script_provider(script: DecisionScript) -> Provider:
    return lambda step: script.answer_for(step.id)


def run_pattern(pattern: EvolutionPattern, architecture: Architecture,
                provider: Provider | DecisionScript) -> PatternRun:
    """Drive a pattern to completion, pulling decision answers from a callback
    or a recorded script."""
    if isinstance(provider, DecisionScript):
        provider = script_provider(provider)
    ex = PatternExecutor(pattern, architecture)
    while ex.state == "awaiting-decision":
        step = ex.current_step
        assert isinstance(step, Decision)
        try:
            answer = provider(step)
        except DecisionError as exc:
            ex.state = "failed"
            ex.diagnostic = f"step {step.id}: {exc}"
            break
        ex.provide(step.id, answer)
    return ex.run()


# ---------------------------------------------------------------------------
# The Client-Server introduction pattern


def _validate_names(answer, a: Architecture, _: Decisions) -> None:
    if not isinstance(answer, dict):
        raise DecisionError("answer must be an object {server, clients}")
    server = answer.get("server")
    clients = answer.get("clients")
    if not isinstance(server, str) or not server:
        raise DecisionError("server name must be a nonempty string")
    if not isinstance(clients, list) or len(clients) < 1 \
            or not all(isinstance(c, str) and c for c in clients):
        raise DecisionError("at least one client name is required")
    names = [server] + clients
    if len(set(names)) != len(names):
        raise DecisionError("tier names must be distinct")
    existing = {c.name for c in a.components}
    clash = sorted(set(names) & existing)
    if clash:
        raise DecisionError("names already taken: " + ", ".join(clash))


def _create_tiers(a: Architecture, decisions: Decisions):
    ans = decisions["names"]
    notes = []
    a = create_component(a, ans["server"], "server")
    notes.append(f"created server {ans['server']}")
    for c in ans["clients"]:
        a = create_component(a, c, "client")
        notes.append(f"created client {c}")
    return a, notes


def _validate_assignment(answer, a: Architecture, decisions: Decisions) -> None:
    if not isinstance(answer, dict):
        raise DecisionError("answer must map component names to tier names")
    names = decisions["names"]
    tiers = {names["server"], *names["clients"]}
    top_plain = {c.name for c in a.components if c.kind == "plain"}
    for comp, tier in answer.items():
        if comp not in top_plain:
            raise DecisionError(f"{comp} is not an assignable top-level component")
        if tier not in tiers:
            raise DecisionError(f"{tier} is not a tier of this run")


def _move_assigned(a: Architecture, decisions: Decisions):
    names = decisions["names"]
    assignment: dict = decisions.get("assign", {})
    notes = []
    # server thread first, then each client; order within a thread is by name
    threads = [names["server"]] + list(names["clients"])
    for tier in threads:
        for comp in sorted(c for c, t in assignment.items() if t == tier):
            a = move_in(a, comp, tier)
            notes.append(f"moved {comp} into {tier} and delegated its connected ports")
    return a, notes


def _validate_extras(answer, a: Architecture, _: Decisions) -> None:
    if not isinstance(answer, list):
        raise DecisionError("answer must be a list of operation descriptors")
    for item in answer:
        try:
            OperationDescriptor.from_dict(item)
        except (KeyError, TypeError, EvolutionError) as exc:
            raise DecisionError(f"bad operation descriptor {item!r}: {exc}")


def _apply_extras(a: Architecture, decisions: Decisions):
    notes = []
    for item in decisions.get("extras", []):
        d = OperationDescriptor.from_dict(item)
        a = apply_descriptor(a, d)
        notes.append(f"applied {d.name} on {d.context or '(new)'}")
    return a, notes


def client_server_pattern() -> EvolutionPattern:
    from .styles import client_server_style

    return EvolutionPattern("client-server", (
        Decision("names", "tier-names",
                 "Name the server and the clients (at least one client).",
                 _validate_names),
        Automated("create", "Create the server and client tiers.", _create_tiers),
        Decision("assign", "component-assignment",
                 "Assign each existing top-level component to a tier.",
                 _validate_assignment),
        Automated("moves", "Move assigned components into their tiers, "
                  "delegating connected ports.", _move_assigned),
        Decision("extras", "extra-operations",
                 "Optional additional restructuring operations.",
                 _validate_extras),
        Automated("apply-extras", "Apply the requested extra operations.",
                  _apply_extras),
        Check("check", client_server_style),
    ))


BUILTIN_PATTERNS = {"client-server": client_server_pattern}
