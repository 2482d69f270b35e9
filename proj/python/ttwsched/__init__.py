"""Schedule synthesis, validation and simulation for multi-mode time-triggered wireless systems."""

import json

from . import _core
from ._core import BudgetExhaustedError, InfeasibleError, TtwError

__all__ = [
    "BudgetExhaustedError",
    "InfeasibleError",
    "TtwError",
    "export_lp",
    "hyperperiod",
    "normalize",
    "round_timing",
    "simulate",
    "synthesize",
    "validate",
]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def round_timing(payload, slots, hops=4, ntx=2):
    return _core.round_timing(payload, slots, hops, ntx)


def normalize(spec):
    return json.loads(_core.normalize(_text(spec)))


def hyperperiod(spec, mode):
    return _core.hyperperiod(_text(spec), mode)


def synthesize(spec, policy="minimal", objective=True):
    """Returns (schedule document, {mode: round count})."""
    out = _core.synthesize(_text(spec), policy, objective)
    return json.loads(out["schedule"]), dict(out["rounds"])


def validate(spec, schedule):
    return json.loads(_core.validate(_text(spec), _text(schedule)))


def simulate(spec, schedule, duration, loss=0.0, seed=0, script=()):
    """Duration and script times in ticks. Returns (report, trace CSV)."""
    out = _core.simulate(_text(spec), _text(schedule), duration, loss, seed, list(script))
    return json.loads(out["report"]), out["trace"]


def export_lp(spec, mode, rounds):
    return _core.export_lp(_text(spec), mode, rounds)
