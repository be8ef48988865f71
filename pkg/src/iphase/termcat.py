"""Catalog of published analytic phase-shift terms.

Each row is one monomial from the published expansion tables for the four
interferometer configurations, plus the alternate gravimeter table whose
trajectories treat rotations and gradients as perturbations. Rows carry
exact rational coefficients, the published evaluated value in radians and
the published relative magnitude, so reproduction reports can compare the
engine against them row by row.

The catalog is data, not derivation: the point is to pin the reference
values, not to re-derive them symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .geomodel import HBAR, DynamicsMode
from .numerics import NeumaierSum
from .sequences import ConfigurationPreset, effective_wavevector, make_preset

__all__ = [
    "CATALOG",
    "PRESET_FOR_TABLE",
    "SYMBOL_DIMENSIONS",
    "TABLE_MODES",
    "TABLE_TAGS",
    "UnboundSymbolError",
    "PhaseTerm",
    "ReconcileResult",
    "bindings_for_preset",
    "catalog_csv",
    "catalog_export_rows",
    "reconcile",
    "reference_bindings",
    "table_sum",
    "tables_for_preset",
    "term_dimension",
]


class UnboundSymbolError(KeyError):
    """A term references a symbol missing from the bindings map."""

    def __init__(self, symbol: str, term_id: str):
        super().__init__(symbol)
        self.symbol = symbol
        self.term_id = term_id

    def __str__(self):
        return f"term {self.term_id}: symbol {self.symbol!r} is not bound"


# (length power, time power); every catalog row must sum to (0, 0).
SYMBOL_DIMENSIONS: dict[str, tuple[int, int]] = {
    "k_x": (-1, 0),
    "k_z": (-1, 0),
    "T": (0, 1),
    "T_rec": (0, 1),
    "N": (0, 0),
    "g_z": (1, -2),
    "v_z": (1, -1),
    "v_y": (1, -1),
    "Omega_y": (0, -1),
    "Omega_z": (0, -1),
    "R": (1, 0),
    "T_xx": (0, -2),
    "T_zz": (0, -2),
    "hbar/m": (2, -1),
}


@dataclass(frozen=True)
class PhaseTerm:
    """One published table row: coefficient x product of symbol powers.

    n_poly holds the one non-monomial coefficient shape that occurs, a
    polynomial in the pulse count N as ((coeff, power), ...); the stored
    rational coefficient multiplies the whole polynomial.
    magnitude_only marks the single row whose printed sign disagrees with
    its own formula; comparisons for it use absolute values.
    """

    id: str
    table: str
    coefficient: Fraction
    factors: tuple[tuple[str, int], ...]
    paper_value_rad: float
    paper_relative: float
    n_poly: tuple[tuple[int, int], ...] | None = None
    magnitude_only: bool = False

    def evaluate(self, bindings: dict[str, float]) -> float:
        value = float(self.coefficient)
        if self.n_poly is not None:
            if "N" not in bindings:
                raise UnboundSymbolError("N", self.id)
            n = bindings["N"]
            value *= sum(c * n**p for c, p in self.n_poly)
        for symbol, exponent in self.factors:
            if symbol not in bindings:
                raise UnboundSymbolError(symbol, self.id)
            value *= bindings[symbol] ** exponent
        return value

    def exponent_of(self, symbol: str) -> int:
        return sum(e for s, e in self.factors if s == symbol)

    def formula(self) -> str:
        parts = []
        if self.coefficient == -1:
            lead = "-"
        elif self.coefficient != 1:
            lead = f"{self.coefficient} "
        else:
            lead = ""
        if self.n_poly is not None:
            poly = "+".join(
                f"{'' if c == 1 else c}N{'' if p == 1 else f'^{p}'}"
                for c, p in self.n_poly
            )
            parts.append(f"({poly})")
        for symbol, exponent in self.factors:
            parts.append(symbol if exponent == 1 else f"{symbol}^{exponent}")
        return lead + " ".join(parts)


def term_dimension(term: PhaseTerm) -> tuple[int, int]:
    """Summed (length, time) powers; radians require (0, 0)."""
    length = sum(SYMBOL_DIMENSIONS[s][0] * e for s, e in term.factors)
    time = sum(SYMBOL_DIMENSIONS[s][1] * e for s, e in term.factors)
    return (length, time)


def _parse_factors(text: str) -> tuple[tuple[str, int], ...]:
    out = []
    for token in text.split():
        symbol, _, power = token.partition("^")
        if symbol not in SYMBOL_DIMENSIONS:
            raise ValueError(f"unknown symbol {symbol!r} in factor spec {text!r}")
        out.append((symbol, int(power) if power else 1))
    return tuple(out)


def _t(
    term_id: str,
    table: str,
    coefficient: Fraction,
    factors: str,
    paper_value_rad: float,
    paper_relative: float,
    n_poly: tuple[tuple[int, int], ...] | None = None,
    magnitude_only: bool = False,
) -> PhaseTerm:
    return PhaseTerm(
        id=term_id,
        table=table,
        coefficient=coefficient,
        factors=_parse_factors(factors),
        paper_value_rad=paper_value_rad,
        paper_relative=paper_relative,
        n_poly=n_poly,
        magnitude_only=magnitude_only,
    )


_F = Fraction

CATALOG: tuple[PhaseTerm, ...] = (
    # gravimeter, full dynamics
    _t("grav.1", "gravimeter", _F(1), "k_z T^2 g_z", -2.32e7, 1.0),
    _t("grav.2", "gravimeter", _F(1), "k_z T^2 Omega_y^2 R", 4.44e4, 1.9e-3),
    _t("grav.3", "gravimeter", _F(1), "k_z T^3 v_z T_zz", 1.08e1, 4.7e-7),
    _t("grav.4", "gravimeter", _F(7, 12), "k_z T^4 g_z T_zz", -6.32, 2.7e-7),
    _t("grav.5", "gravimeter", _F(-3), "k_z T^3 v_z Omega_y^2", -3.11e-2, 1.3e-9),
    _t("grav.6", "gravimeter", _F(-7, 4), "k_z T^4 g_z Omega_y^2", 1.81e-2, 7.8e-10),
    _t("grav.7", "gravimeter", _F(7, 12), "k_z T^4 T_zz Omega_y^2 R", 1.21e-2, 5.2e-10),
    _t("grav.8", "gravimeter", _F(1, 2), "hbar/m k_z^2 T^3 T_zz", 9.71e-3, 4.2e-10),
    _t("grav.9", "gravimeter", _F(-7, 4), "k_z T^4 Omega_y^4 R", -3.47e-5, 1.5e-12),
    _t("grav.10", "gravimeter", _F(-3, 2), "hbar/m k_z^2 T^3 Omega_y^2", -2.79e-5, 1.2e-12),
    _t("grav.11", "gravimeter", _F(-7, 4), "k_z T^4 Omega_y^2 Omega_z^2 R", -2.62e-5, 1.1e-12),
    # optical clock, vertical interrogation
    _t("clock.1", "clock", _F(1), "k_z T^2 g_z", -2.32e7, 1.0),
    _t("clock.2", "clock", _F(1), "k_z T^2 Omega_y^2 R", 4.44e4, 1.9e-3),
    _t("clock.3", "clock", _F(-1), "k_z^2 T hbar/m", -4.16e4, 1.8e-3),
    _t("clock.4", "clock", _F(1), "k_z T^3 v_z T_zz", 1.08e1, 4.7e-7),
    _t("clock.5", "clock", _F(7, 12), "k_z T^4 g_z T_zz", -6.32, 2.7e-7),
    _t("clock.6", "clock", _F(-3), "k_z T^3 v_z Omega_y^2", -3.11e-2, 1.3e-9),
    _t("clock.7", "clock", _F(-7, 4), "g_z k_z T^4 Omega_y^2", 1.81e-2, 7.8e-10),
    _t("clock.8", "clock", _F(7, 12), "k_z T^4 R T_zz Omega_y^2", 1.21e-2, 5.2e-10),
    _t("clock.9", "clock", _F(1, 3), "hbar/m k_z^2 T^3 T_zz", 6.48e-3, 2.7e-10),
    # photon recoil, conjugate pair difference
    _t("recoil.1", "recoil", _F(2), "N hbar/m k_z^2 T", 8.39e5, 1.0),
    _t("recoil.2", "recoil", _F(1, 3), "N hbar/m k_z^2 T^3 T_zz", 6.89e-3, 8.2e-9),
    _t("recoil.3", "recoil", _F(1, 2), "N^2 hbar/m k_z^2 T^2 T_rec T_zz", 8.22e-4, 9.8e-10),
    _t(
        "recoil.4",
        "recoil",
        _F(1, 6),
        "hbar/m k_z^2 T T_rec^2 T_zz",
        4.36e-5,
        5.2e-11,
        n_poly=((2, 3), (1, 1)),
    ),
    # Sagnac rotation sensor, horizontal pulses
    _t("gyro.1", "gyroscope", _F(2), "k_x T^2 Omega_z v_y", 4.69, 1.0),
    _t("gyro.2", "gyroscope", _F(-2), "k_x T^3 Omega_y g_z", 6.28e-4, 1.3e-4),
    _t("gyro.3", "gyroscope", _F(-2), "k_x T^3 Omega_y^3 R", -1.20e-6, 2.6e-7),
    _t("gyro.4", "gyroscope", _F(-2), "k_x T^3 Omega_y Omega_z^2 R", -9.09e-7, 1.9e-7),
    # printed as +3.11e-9; the formula with T_xx = g_z/R < 0 is negative
    _t(
        "gyro.5",
        "gyroscope",
        _F(1, 2),
        "hbar/m k_x^2 T^3 T_xx",
        3.11e-9,
        6.6e-10,
        magnitude_only=True,
    ),
    # gravimeter, trajectories without rotation or gradient
    _t("grav_ff.1", "gravimeter_freefall", _F(1), "k_z T^2 g_z", -2.32e7, 1.0),
    _t("grav_ff.2", "gravimeter_freefall", _F(1), "k_z T^2 Omega_y^2 R", 4.44e4, 1.9e-3),
    _t("grav_ff.3", "gravimeter_freefall", _F(1), "k_z T^3 v_z T_zz", 1.08e1, 4.7e-7),
    _t("grav_ff.4", "gravimeter_freefall", _F(7, 12), "k_z T^4 g_z T_zz", -6.32, 2.7e-7),
    _t("grav_ff.5", "gravimeter_freefall", _F(1), "k_z T^3 v_z Omega_y^2", 1.04e-2, 4.5e-10),
    _t("grav_ff.6", "gravimeter_freefall", _F(1, 2), "hbar/m k_z^2 T^3 T_zz", 9.71e-3, 4.2e-10),
    _t("grav_ff.7", "gravimeter_freefall", _F(7, 12), "k_z T^4 g_z Omega_y^2", -6.05e-3, 2.6e-10),
)

TABLE_TAGS: tuple[str, ...] = (
    "gravimeter",
    "clock",
    "recoil",
    "gyroscope",
    "gravimeter_freefall",
)

PRESET_FOR_TABLE: dict[str, str] = {
    "gravimeter": "gravimeter",
    "clock": "clock",
    "recoil": "recoil",
    "gyroscope": "gyroscope",
    "gravimeter_freefall": "gravimeter",
}

# (trajectory mode, action mode) whose engine total each table approximates
TABLE_MODES: dict[str, tuple[DynamicsMode, DynamicsMode]] = {
    "gravimeter": (DynamicsMode.FULL, DynamicsMode.FULL),
    "clock": (DynamicsMode.FULL, DynamicsMode.FULL),
    "recoil": (DynamicsMode.FULL, DynamicsMode.FULL),
    "gyroscope": (DynamicsMode.FULL, DynamicsMode.FULL),
    "gravimeter_freefall": (DynamicsMode.FREE_FALL, DynamicsMode.FULL),
}


def tables_for_preset(name: str) -> tuple[str, ...]:
    return tuple(tag for tag in TABLE_TAGS if PRESET_FOR_TABLE[tag] == name)


def bindings_for_preset(preset: ConfigurationPreset) -> dict[str, float]:
    """Symbol values matching a resolved preset's environment and timing.

    The wavevector binds to k_x for the gyroscope (horizontal pulses) and
    to k_z otherwise; unused symbols are simply absent, so evaluating a
    foreign table's term against these bindings raises.
    """
    env = preset.environment
    k = effective_wavevector(preset.parameters["lambda_eff"])
    bindings = {
        "T": preset.parameters["T"],
        "g_z": float(env.gravity[2]),
        "Omega_y": float(env.omega[1]),
        "Omega_z": float(env.omega[2]),
        "R": float(env.earth_offset[2]),
        "T_xx": float(env.gradient[0, 0]),
        "T_zz": float(env.gradient[2, 2]),
        "hbar/m": HBAR / preset.species.mass,
    }
    if preset.name == "gyroscope":
        bindings["k_x"] = k
        bindings["v_y"] = preset.parameters["v_y"]
    else:
        bindings["k_z"] = k
    if "v_launch" in preset.parameters:
        bindings["v_z"] = preset.parameters["v_launch"]
    if preset.name == "recoil":
        bindings["T_rec"] = preset.parameters["T_rec"]
        bindings["N"] = float(preset.parameters["N"])
    return bindings


def reference_bindings(table_tag: str) -> dict[str, float]:
    if table_tag not in PRESET_FOR_TABLE:
        raise KeyError(f"unknown table tag {table_tag!r}")
    return bindings_for_preset(make_preset(PRESET_FOR_TABLE[table_tag]))


def table_terms(table_tag: str) -> tuple[PhaseTerm, ...]:
    return tuple(term for term in CATALOG if term.table == table_tag)


def table_sum(table_tag: str, bindings: dict[str, float]) -> float:
    """Compensated sum of every catalog term under the tag; empty tag -> 0."""
    total = NeumaierSum()
    for term in table_terms(table_tag):
        total.add(term.evaluate(bindings))
    return total.value


@dataclass(frozen=True)
class ReconcileResult:
    table: str
    rows: tuple[tuple[PhaseTerm, float], ...]
    table_total: float
    engine_total: float
    residual: float
    smallest_row: float
    flagged: bool


def reconcile(table_tag: str, bindings: dict[str, float], engine_total: float) -> ReconcileResult:
    """Engine total minus the truncated analytic sum, row values attached.

    flagged means the residual exceeds the smallest tabulated row, i.e.
    the engine disagrees beyond what truncation alone explains.
    """
    rows = tuple((term, term.evaluate(bindings)) for term in table_terms(table_tag))
    total = NeumaierSum()
    for _, value in rows:
        total.add(value)
    table_total = total.value
    residual = engine_total - table_total
    if rows:
        smallest = min(abs(value) for _, value in rows)
        flagged = abs(residual) > smallest
    else:
        smallest = 0.0
        flagged = residual != 0.0
    return ReconcileResult(
        table=table_tag,
        rows=rows,
        table_total=table_total,
        engine_total=engine_total,
        residual=residual,
        smallest_row=smallest,
        flagged=flagged,
    )


def catalog_export_rows() -> list[dict[str, object]]:
    """Catalog flattened for CSV/JSON export, one dict per row."""
    out = []
    for term in CATALOG:
        factors = term.formula()
        # strip the leading rational so the factors column is symbols only
        lead = str(term.coefficient) + " "
        if factors.startswith(lead):
            factors = factors[len(lead):]
        elif term.coefficient == -1 and factors.startswith("-"):
            factors = factors[1:]
        out.append(
            {
                "id": term.id,
                "table": term.table,
                "coefficient_num": term.coefficient.numerator,
                "coefficient_den": term.coefficient.denominator,
                "factors": factors,
                "paper_value_rad": term.paper_value_rad,
                "paper_relative": term.paper_relative,
            }
        )
    return out


def catalog_csv() -> str:
    """The export rows as deterministic CSV, floats at 17 significant digits."""
    import csv
    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    columns = (
        "id",
        "table",
        "coefficient_num",
        "coefficient_den",
        "factors",
        "paper_value_rad",
        "paper_relative",
    )
    writer.writerow(columns)
    for row in catalog_export_rows():
        writer.writerow(
            [
                f"{row[name]:.17g}" if isinstance(row[name], float) else row[name]
                for name in columns
            ]
        )
    return buffer.getvalue()
