"""Python bindings for the citysim core.

The extension passes structured values as JSON text; this layer decodes them.
"""

import json

from . import _core
from ._core import METRICS_HEADER, Error

__all__ = [
    "METRICS_HEADER",
    "Error",
    "Simulation",
    "World",
    "default_net",
    "replay",
    "sample_population",
    "scenarios",
]


def scenarios():
    """The 27 scenario documents, food-major, as dicts."""
    return [json.loads(doc) for doc in _core.scenarios()]


def default_net():
    return json.loads(_core.default_net())


def sample_population(n, seed, net=None):
    """Prior samples of a Bayesian net as a list of {node id: value} rows."""
    text = _core.sample_csv(json.dumps(net) if net is not None else "", n, seed)
    lines = text.splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def _scenario_text(scenario):
    if scenario is None:
        return ""
    return scenario if isinstance(scenario, str) else json.dumps(scenario)


class World:
    """A synthesized city stepped in-process or over local workers."""

    def __init__(self, scenario=None, population=1000, seed=0, _native=None):
        self._w = _native if _native is not None else _core.World(_scenario_text(scenario), population, seed)

    def step(self):
        return json.loads(self._w.step())

    def run(self, steps):
        return json.loads(self._w.run(steps))

    def run_distributed(self, steps, workers):
        return json.loads(self._w.run_distributed(steps, workers))

    def metrics_csv(self):
        return self._w.metrics_csv()

    def digest(self):
        return self._w.digest()

    def total_cash_cents(self):
        return self._w.total_cash_cents()

    def check_invariants(self):
        self._w.check_invariants()

    def to_json(self):
        return json.loads(self._w.to_json())

    @classmethod
    def from_json(cls, doc):
        return cls(_native=_core.World.from_json(json.dumps(doc)))

    @property
    def step_index(self):
        return self._w.step_index

    @property
    def population(self):
        return self._w.population


class Simulation:
    """A world with player sessions: join, propose, vote, leave."""

    def __init__(self, scenario=None, population=1000, seed=0):
        self._s = _core.Simulation(_scenario_text(scenario), population, seed)

    def handle(self, command):
        return json.loads(self._s.handle(json.dumps(command)))

    def join(self):
        return self.handle({"type": "join"})

    def propose(self, session, legislation):
        return self.handle({"type": "propose", "session": session, "legislation": legislation})

    def vote(self, session, ballot, choice):
        return self.handle({"type": "vote", "session": session, "ballot": ballot, "choice": choice})

    def leave(self, session):
        return self.handle({"type": "leave", "session": session})

    def advance(self):
        return json.loads(self._s.advance())

    def state(self):
        return json.loads(self._s.state())

    def command_log(self):
        """The log as NDJSON text."""
        return self._s.command_log()

    def metrics(self):
        return json.loads(self._s.metrics())

    def metrics_csv(self):
        return self._s.metrics_csv()

    @property
    def step_index(self):
        return self._s.step_index


def replay(log, steps, scenario=None, population=1000, seed=0):
    """Metrics of a fresh world driven by an NDJSON command log."""
    return json.loads(_core.replay(_scenario_text(scenario), population, seed, log, steps))
