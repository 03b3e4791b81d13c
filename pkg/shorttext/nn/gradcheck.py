"""
Finite-difference verification of analytic gradients
"""
from dataclasses import dataclass, field

import numpy as np

from shorttext.errors import ContractError, EvaluationError
from shorttext.nn.tensor import Tape, backward


@dataclass
class GradCheckReport:
    """Maximum relative error per checked parameter"""
    errors: dict = field(default_factory=dict)
    tol: float = 1e-4

    @property
    def max_error(self):
        return max(self.errors.values(), default=0.0)

    @property
    def passed(self):
        return self.max_error < self.tol

    def worst(self):
        if not self.errors:
            return None
        return max(self.errors.items(), key=lambda item: item[1])


def relative_error(analytic, numeric):
    return np.abs(analytic - numeric) / np.maximum(1e-8, np.abs(analytic) + np.abs(numeric))


def _evaluate(f):
    value = f().item()
    if not np.isfinite(value):
        raise EvaluationError(f"function returned non-finite value {value!r}")
    return value


def grad_check(f, params, eps=1e-5, tol=1e-4, rng=None, max_checks=None):
    """Compare analytic gradients of scalar ``f()`` with central differences

    ``f`` takes no arguments and closes over ``params``. Frozen parameters
    are skipped. With ``max_checks`` and an ``rng``, at most that many
    coordinates per parameter are sampled.
    """
    if eps <= 0:
        raise ContractError(f"eps must be positive, got {eps}")
    params = [p for p in params if p.requires_grad]

    for p in params:
        p.grad = None
    with Tape() as tape:
        tape.watch(params)
        loss = f()
    if not np.isfinite(loss.values).all():
        raise EvaluationError("function returned a non-finite value")
    backward(loss, tape)
    analytic = {id(p): p.grad.copy() for p in params}

    report = GradCheckReport(tol=tol)
    for index, p in enumerate(params):
        coords = np.arange(p.size)
        if max_checks is not None and rng is not None and p.size > max_checks:
            coords = np.sort(rng.choice(p.size, max_checks))
        original = p.values
        worst = 0.0
        for flat in coords:
            shifted = original.copy()
            shifted.flat[flat] += eps
            p.values = shifted
            f_plus = _evaluate(f)
            shifted = original.copy()
            shifted.flat[flat] -= eps
            p.values = shifted
            f_minus = _evaluate(f)
            p.values = original
            numeric = (f_plus - f_minus) / (2 * eps)
            worst = max(worst, float(relative_error(analytic[id(p)].flat[flat], numeric)))
        report.errors[getattr(p, "name", "") or f"param{index}"] = worst
    return report
