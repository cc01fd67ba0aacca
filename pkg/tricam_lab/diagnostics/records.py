"""
One row of run diagnostics.

The CSV column order is part of the output contract and is fixed by
CSV_COLUMNS. Values that only feed later analysis (the full norm map,
the coupling term used for the growth constant) ride along on the
record but are not written.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

CSV_COLUMNS = (
    't', 'H1', 'H2_form1', 'H2_form2',
    'min_u', 'min_w', 'slope_excess_a', 'slope_excess_c',
    'l1_u', 'l1_w', 'lp_u', 'lp_w',
    'l2_a', 'l2_c', 'sup_a', 'sup_c',
    'b_h1', 'b_sup', 'bx_sup', 'elliptic_residual',
    'tv_ax', 'tv_bx',
)

NORM_FIELDS = ('a', 'c', 'b', 'u', 'w')

NormKey = Tuple[str, float]


def norm_exponents(epsilon: float) -> Tuple[float, ...]:
    """The exponents every record carries: 1, 1+ε, 2 and ∞."""
    return tuple(sorted({1.0, 1.0 + float(epsilon), 2.0})) + (math.inf,)


def format_value(value: float) -> str:
    # 17 significant digits round-trip a float64 exactly
    return f'{value:.17g}'


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    H1: float
    H2_form1: float
    H2_form2: float
    min_u: float
    min_w: float
    slope_excess_a: float
    slope_excess_c: float
    l1_u: float
    l1_w: float
    lp_u: float
    lp_w: float
    l2_a: float
    l2_c: float
    sup_a: float
    sup_c: float
    b_h1: float
    b_sup: float
    bx_sup: float
    elliptic_residual: float
    tv_ax: float
    tv_bx: float
    epsilon: float = 1.0
    norms: Dict[NormKey, float] = field(default_factory=dict, compare=False)
    # signed integrals; the L¹ norms whenever a, c >= 0
    l1_a: float = 0.0
    l1_c: float = 0.0
    coupling_sup: float = 0.0
    b_rate_sup: float = 0.0
    source_sup: float = 0.0

    def norm(self, name: str, p: float) -> float:
        """Stored ‖name‖_p; KeyError when the exponent was not sampled."""
        return self.norms[(name, float(p))]

    @property
    def h2_gap(self) -> float:
        return abs(self.H2_form1 - self.H2_form2)

    @property
    def elliptic_relative(self) -> float:
        return self.elliptic_residual / (1.0 + self.source_sup)

    def to_row(self) -> List[str]:
        return [format_value(getattr(self, name)) for name in CSV_COLUMNS]

    def is_finite(self) -> bool:
        return all(math.isfinite(getattr(self, name)) for name in CSV_COLUMNS)
