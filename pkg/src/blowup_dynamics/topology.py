"""Global topology of blowing up a point.

Blowing up a point of M^n is a connected sum: M # RP^n over R and
M # conj(CP^n) over C. A neighborhood of Sigma in X is the tautological
line bundle over P(F^n).
"""

from dataclasses import dataclass, field
from typing import Any

from .errors import DimensionError
from .linalg import FieldTag

MIN_BLOWUP_DIM = 2


def _check_n(n: int) -> None:
    if n < MIN_BLOWUP_DIM:
        raise DimensionError(  # noqa: TRY003
            f"blowups need n >= {MIN_BLOWUP_DIM}, got {n}",
        )


def euler_projective(n: int, field_tag: FieldTag) -> int:
    """chi(RP^n) or chi(CP^n)."""
    if field_tag is FieldTag.COMPLEX:
        return n + 1
    return 1 if n % 2 == 0 else 0


def euler_sphere(d: int) -> int:
    return 1 + (-1) ** d


def real_dimension(n: int, field_tag: FieldTag) -> int:
    return 2 * n if field_tag is FieldTag.COMPLEX else n


def euler_blowup(chi_M: int, n: int, field_tag: FieldTag) -> int:  # noqa: N803
    """Euler characteristic of M blown up at a point.

    chi(M # P) = chi(M) + chi(P) - chi(S^d), d the real dimension of M.
    For complex blowups n is the complex dimension.
    """
    _check_n(n)
    d = real_dimension(n, field_tag)
    return chi_M + euler_projective(n, field_tag) - euler_sphere(d)


def summand_label(n: int, field_tag: FieldTag) -> str:
    return f"conj(CP^{n})" if field_tag is FieldTag.COMPLEX else f"RP^{n}"


def model_orientable(n: int, field_tag: FieldTag) -> bool:
    """Whether the total space of the tautological bundle over P(F^n) is orientable.

    Over R the total space of L -> RP^{n-1} has w1 = (n + 1) a, so it is
    orientable iff n is odd; n = 2 gives the Moebius band.
    """
    _check_n(n)
    if field_tag is FieldTag.COMPLEX:
        return True
    return n % 2 == 1


@dataclass(frozen=True)
class ChernEntry:
    key: str
    bundle: str
    c1: str

    def to_dict(self) -> dict[str, str]:
        return {"key": self.key, "bundle": self.bundle, "c1": self.c1}


def chern_constants(n: int) -> list[ChernEntry]:
    """First Chern classes near Sigma = P(C^n), in terms of the canonical
    generator c of H^2(Sigma; Z)."""
    if n < 1:
        raise DimensionError(f"chern_constants needs n >= 1, got {n}")  # noqa: TRY003
    return [
        ChernEntry(
            "a",
            f"nu_X(Sigma) = universal line bundle L over CP^{n - 1}",
            "-c",
        ),
        ChernEntry("b", "nu_X(Sigma)", "-c"),
        ChernEntry("c", f"normal bundle of CP^{n} in CP^{n + 1}", "+c"),
        ChernEntry("d", f"normal bundle of conj(CP^{n}) in conj(CP^{n + 1})", "-c"),
    ]


@dataclass
class BlowupTopologyReport:
    field: FieldTag
    n: int
    summand: str
    euler_before: int
    euler_after: int
    sigma_dim: int
    model_orientable: bool
    chern_table: list[ChernEntry] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "field": self.field.value,
            "n": self.n,
            "summand": self.summand,
            "euler_before": self.euler_before,
            "euler_after": self.euler_after,
            "sigma_dim": self.sigma_dim,
            "model_orientable": self.model_orientable,
            "chern_table": [entry.to_dict() for entry in self.chern_table],
        }


def blowup_topology_report(
    chi_M: int,  # noqa: N803
    n: int,
    field_tag: FieldTag,
) -> BlowupTopologyReport:
    """Bookkeeping for one point blowup; `sigma_dim` is the real dimension of Sigma."""
    chern = chern_constants(n) if field_tag is FieldTag.COMPLEX else []
    return BlowupTopologyReport(
        field_tag,
        n,
        summand_label(n, field_tag),
        chi_M,
        euler_blowup(chi_M, n, field_tag),
        real_dimension(n - 1, field_tag),
        model_orientable(n, field_tag),
        chern,
    )


def surface_blowup_summary() -> dict[str, Any]:
    """The real blowup of a point on a surface: sewing in a crosscap."""
    report = blowup_topology_report(2, 2, FieldTag.REAL)
    return {
        "sigma": "RP^1 = S^1",
        "sigma_dim": report.sigma_dim,
        "model": "nonorientable line bundle over S^1 (Moebius band)",
        "model_orientable": report.model_orientable,
        "summand": "RP^2",
        "global_effect": "crosscap",
    }
