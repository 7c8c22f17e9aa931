"""
Exception types shared across LimitLab modules.

Every error raised on purpose by the library derives from LimitLabError,
which is a ValueError so callers that only catch ValueError keep working.
Negative answers (a singular element, an uncertified symbol) are returned
in reports and never raised.
"""

from dataclasses import dataclass, field
from typing import Any, List, Sequence, Tuple


class LimitLabError(ValueError):
    """Base class for all LimitLab errors"""


@dataclass(frozen=True)
class AxiomViolation:
    """One failed groupoid law, with the arrows that witness it"""
    kind: str
    arrows: Tuple[Any, ...] = ()
    detail: str = ""

    def __str__(self) -> str:
        witness = ", ".join(str(a) for a in self.arrows)
        text = f"{self.kind}: [{witness}]"
        if self.detail:
            text += f" {self.detail}"
        return text

    def to_dict(self) -> dict:
        return {"kind": self.kind, "arrows": list(self.arrows), "detail": self.detail}


class GroupoidAxiomError(LimitLabError):
    def __init__(self, violations: Sequence[AxiomViolation]):
        self.violations: List[AxiomViolation] = list(violations)
        head = "; ".join(str(v) for v in self.violations[:3])
        more = f" (+{len(self.violations) - 3} more)" if len(self.violations) > 3 else ""
        super().__init__(f"{len(self.violations)} groupoid axiom violation(s): {head}{more}")


class GroupAxiomError(LimitLabError):
    pass


class ActionError(LimitLabError):
    pass


class NotInvariant(LimitLabError):
    def __init__(self, witness: Any, message: str = ""):
        self.witness = witness
        super().__init__(message or f"unit subset is not invariant: arrow {witness} has exactly one endpoint inside")


class SupportViolation(LimitLabError):
    def __init__(self, unit: Any, arrows: Sequence[Any]):
        self.unit = unit
        self.arrows = list(arrows)
        super().__init__(f"mean at unit {unit} charges arrows outside its source fibre: {self.arrows}")


class InvalidMeanFamily(LimitLabError):
    pass


class GroupoidMismatch(LimitLabError):
    pass


class UnknownUnit(LimitLabError):
    def __init__(self, unit: Any):
        self.unit = unit
        super().__init__(f"unknown unit: {unit!r}")


class UnknownArrow(LimitLabError):
    def __init__(self, arrow: Any):
        self.arrow = arrow
        super().__init__(f"unknown arrow: {arrow!r}")


class UnknownPoint(LimitLabError):
    def __init__(self, point: Any):
        self.point = point
        super().__init__(f"unknown point: {point!r}")


class NonSquare(LimitLabError):
    pass


class NoConvergence(LimitLabError):
    def __init__(self, iterations: int):
        self.iterations = iterations
        super().__init__(f"power iteration did not converge within {iterations} iterations")


class SingularFibre(LimitLabError):
    def __init__(self, units: Sequence[Any]):
        self.units = list(units)
        super().__init__(f"singular fibre(s) at unit(s): {self.units}")


@dataclass
class _ProbeTrace:
    depths: List[int] = field(default_factory=list)
    values: List[complex] = field(default_factory=list)


class NotConvergent(LimitLabError):
    def __init__(self, diagonal: int, depths: Sequence[int], values: Sequence[complex], direction: str = ""):
        self.diagonal = diagonal
        self.probes = _ProbeTrace(list(depths), [complex(v) for v in values])
        where = f" along {direction}" if direction else ""
        shown = ", ".join(f"{v:.6g}" for v in self.probes.values[-4:])
        super().__init__(f"diagonal {diagonal} has no limit{where} (last probes: {shown})")

    def to_dict(self) -> dict:
        return {
            "diagonal": self.diagonal,
            "depths": self.probes.depths,
            "values": [[v.real, v.imag] for v in self.probes.values],
        }


class NearZeroSymbol(LimitLabError):
    def __init__(self, min_modulus: float, threshold: float):
        self.min_modulus = min_modulus
        self.threshold = threshold
        super().__init__(f"symbol modulus {min_modulus:.3e} is not above threshold {threshold:.1e}")


class StepTooCoarse(LimitLabError):
    def __init__(self, max_jump: float, samples: int):
        self.max_jump = max_jump
        self.samples = samples
        super().__init__(f"argument jump {max_jump:.3f} rad with N={samples}; raise the sample count")


class FormatError(LimitLabError):
    pass
