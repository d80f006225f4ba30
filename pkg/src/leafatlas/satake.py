"""Satake diagrams, the induced root-space involution, restricted roots and
dimension bookkeeping for the real forms they encode.

The involution is never stored in a catalog: it is always reconstructed as
w_b composed with the node permutation sigma (arrows on white nodes, the
opposition involution of the black subdiagram on black nodes), and the
admissibility conditions are checked as postconditions of the construction.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .rootsys import (
    IntMatrix,
    RootSystem,
    WeylElement,
    build_root_system,
    eigenspace_dim,
    identity_matrix,
    length,
    longest_element,
    mat_mul,
    mat_vec,
)

FracVector = tuple[Fraction, ...]


class SatakeError(ValueError):
    """Base class for malformed or inadmissible diagram data."""


class InconsistentSatakeError(SatakeError):
    """The decorated diagram does not define a valid involution."""


class CompactFormError(SatakeError):
    """All-black diagrams encode compact forms, which have no leaf geometry here."""


class CatalogParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class SatakeDiagram:
    """A Dynkin diagram decorated with black nodes and an arrow involution."""

    label: str
    family: str
    rank: int
    black: frozenset[int]
    arrows: frozenset[tuple[int, int]]  # sorted pairs of white nodes

    def root_system(self) -> RootSystem:
        return _root_system(self.family, self.rank)

    def describe(self) -> str:
        black = "{" + ",".join(str(i) for i in sorted(self.black)) + "}"
        arrows = "{" + ",".join(f"({a},{b})" for a, b in sorted(self.arrows)) + "}"
        return f"type={self.family}{self.rank}; black={black}; arrows={arrows}"


@lru_cache(maxsize=None)
def _root_system(family: str, rank: int) -> RootSystem:
    return build_root_system(family, rank)


@dataclass(frozen=True)
class RealFormData:
    """Derived data of a real form: involution, restricted roots, dimensions."""

    diagram: SatakeDiagram
    tau_star: IntMatrix
    sigma: tuple[int, ...]  # node permutation, 0-based images
    w_b: WeylElement
    restricted: dict[FracVector, int]  # both signs, multiplicities
    real_rank: int
    dim_g: int
    dim_k0: int
    dim_p0: int

    @property
    def dim_x(self) -> int:
        return self.dim_p0

    def positive_restricted(self) -> dict[FracVector, int]:
        rs = self.diagram.root_system()
        out: dict[FracVector, int] = {}
        for alpha in rs.positive_roots:
            lam = project_restricted(self.tau_star, alpha)
            if any(x != 0 for x in lam):
                out[lam] = out.get(lam, 0) + 1
        return out


def _structural_check(sd: SatakeDiagram) -> None:
    nodes = set(range(1, sd.rank + 1))
    if not sd.black <= nodes:
        raise SatakeError(f"{sd.label}: black nodes {sorted(sd.black)} outside diagram")
    touched: set[int] = set()
    for a, b in sd.arrows:
        if a == b or not {a, b} <= nodes:
            raise SatakeError(f"{sd.label}: invalid arrow ({a},{b})")
        if {a, b} & sd.black:
            raise SatakeError(f"{sd.label}: arrow ({a},{b}) touches a black node")
        if {a, b} & touched:
            raise SatakeError(f"{sd.label}: node paired by more than one arrow")
        touched |= {a, b}
    if sd.black == nodes and not sd.arrows:
        raise CompactFormError(
            f"{sd.label}: all-black diagram encodes a compact real form"
        )


def node_permutation(sd: SatakeDiagram) -> tuple[int, ...]:
    """The permutation sigma: arrows on white nodes, the opposition involution
    of the black subdiagram (read off from w_b) on black nodes."""
    rs = sd.root_system()
    perm = list(range(sd.rank))
    for a, b in sd.arrows:
        perm[a - 1] = b - 1
        perm[b - 1] = a - 1
    if sd.black:
        wb = longest_element(rs, sd.black)
        for j in sorted(sd.black):
            image = wb.apply(rs.simple_roots[j - 1])
            neg = tuple(-x for x in image)
            target = next(
                (k for k in sd.black if rs.simple_roots[k - 1] == neg), None
            )
            if target is None:
                raise InconsistentSatakeError(
                    f"{sd.label}: black subsystem does not permute its simple roots"
                )
            perm[j - 1] = target - 1
    return tuple(perm)


def _sigma_matrix(perm: Sequence[int]) -> IntMatrix:
    n = len(perm)
    return tuple(
        tuple(1 if r == perm[c] else 0 for c in range(n)) for r in range(n)
    )


def w_b_element(sd: SatakeDiagram) -> WeylElement:
    return longest_element(sd.root_system(), sd.black)


def tau_star_matrix(sd: SatakeDiagram) -> IntMatrix:
    """The induced involution on the root space, tau* = w_b . sigma.

    Postconditions: tau*^2 = 1; tau* negates exactly the black simple roots;
    every positive root is sent to a positive root or to its own negative.
    """
    _structural_check(sd)
    rs = sd.root_system()
    perm = node_permutation(sd)
    wb = w_b_element(sd)
    tau = mat_mul(wb.matrix, _sigma_matrix(perm))

    if mat_mul(tau, tau) != identity_matrix(rs.rank):
        raise InconsistentSatakeError(f"{sd.label}: tau* is not an involution")
    for i in range(1, rs.rank + 1):
        img = mat_vec(tau, rs.simple_roots[i - 1])
        negated = img == tuple(-x for x in rs.simple_roots[i - 1])
        if negated != (i in sd.black):
            raise InconsistentSatakeError(
                f"{sd.label}: tau* negates simple root {i} iff black fails"
            )
    for alpha in rs.positive_roots:
        img = mat_vec(tau, alpha)
        if img == tuple(-x for x in alpha):
            continue
        if not rs.is_positive(img):
            raise InconsistentSatakeError(
                f"{sd.label}: tau* sends positive root {alpha} to {img}"
            )
    return tau


def project_restricted(tau_star: IntMatrix, alpha: Sequence[int]) -> FracVector:
    """Projection (1 + tau*)/2 of a root onto the +1 eigenspace, exact."""
    img = mat_vec(tau_star, alpha)
    return tuple(Fraction(a + b, 2) for a, b in zip(alpha, img))


def restricted_roots(sd: SatakeDiagram, tau: IntMatrix | None = None) -> tuple[dict[FracVector, int], int]:
    """Restricted roots with multiplicities (both signs) and the real rank."""
    rs = sd.root_system()
    if tau is None:
        tau = tau_star_matrix(sd)
    mult: dict[FracVector, int] = {}
    for alpha in rs.positive_roots:
        for root in (alpha, tuple(-x for x in alpha)):
            lam = project_restricted(tau, root)
            if any(x != 0 for x in lam):
                mult[lam] = mult.get(lam, 0) + 1
    real_rank = eigenspace_dim(tau, 1)
    return mult, real_rank


def real_form_data(sd: SatakeDiagram) -> RealFormData:
    """Full derived data: involution, w_b, restricted roots, dimensions."""
    rs = sd.root_system()
    tau = tau_star_matrix(sd)
    perm = node_permutation(sd)
    wb = w_b_element(sd)
    mult, real_rank = restricted_roots(sd, tau)

    dim_g = rs.rank + 2 * len(rs.positive_roots)
    positive_mult = sum(
        m
        for lam, m in mult.items()
        if _is_positive_combination(lam)
    )
    dim_p0 = real_rank + positive_mult
    dim_k0 = dim_g - dim_p0

    return RealFormData(
        diagram=sd,
        tau_star=tau,
        sigma=perm,
        w_b=wb,
        restricted=mult,
        real_rank=real_rank,
        dim_g=dim_g,
        dim_k0=dim_k0,
        dim_p0=dim_p0,
    )


def _is_positive_combination(lam: FracVector) -> bool:
    return any(x != 0 for x in lam) and all(x >= 0 for x in lam)


# ---------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    label: str
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]


def validate(sd: SatakeDiagram) -> ValidationReport:
    """Run every structural and matrix-identity check on a diagram.

    Failures are reported as data, not exceptions: a catalog entry that is
    not admissible gets a report with failed checks.
    """
    checks: list[CheckResult] = []

    def record(name: str, passed: bool, detail: str = "") -> None:
        checks.append(CheckResult(name, passed, detail))

    try:
        _structural_check(sd)
        record("structure", True)
    except SatakeError as exc:
        record("structure", False, str(exc))
        return ValidationReport(sd.label, tuple(checks))

    rs = sd.root_system()
    try:
        tau = tau_star_matrix(sd)
        record("involution", True)
    except SatakeError as exc:
        record("involution", False, str(exc))
        return ValidationReport(sd.label, tuple(checks))

    wb = w_b_element(sd)
    w0 = longest_element(rs)
    record(
        "tau_w0_commute",
        mat_mul(tau, w0.matrix) == mat_mul(w0.matrix, tau),
    )
    record(
        "tau_wb_commute",
        mat_mul(tau, wb.matrix) == mat_mul(wb.matrix, tau),
    )
    record(
        "w0_wb_commute",
        mat_mul(w0.matrix, wb.matrix) == mat_mul(wb.matrix, w0.matrix),
    )
    from .rootsys import multiply

    record(
        "length_identity",
        length(rs, multiply(rs, wb, w0)) == length(rs, w0) - length(rs, wb),
        "l(w_b w_0) vs l(w_0)-l(w_b)",
    )

    rf = real_form_data(sd)
    record("dims_additive", rf.dim_k0 + rf.dim_p0 == rf.dim_g)
    record("dim_g_root_count", rf.dim_g == rs.rank + 2 * len(rs.positive_roots))
    record("dim_k0_lower_bound", rf.dim_k0 >= len(sd.black))
    record("dim_p0_lower_bound", rf.dim_p0 >= rf.real_rank)
    record("dims_positive", rf.dim_k0 > 0 and rf.dim_p0 > 0)
    if not sd.black and not sd.arrows:
        split_ok = rf.real_rank == rs.rank and all(
            m == 1 for m in rf.restricted.values()
        )
        record("split_form_restricted", split_ok)
    return ValidationReport(sd.label, tuple(checks))


# ---------------------------------------------------------------------------
# built-in catalog of classical real forms, instantiated up to rank 4

CATALOG_MAX_RANK = 4


def _diagram(label: str, family: str, rank: int,
             black: Iterable[int] = (), arrows: Iterable[tuple[int, int]] = ()) -> SatakeDiagram:
    pairs = frozenset(tuple(sorted(p)) for p in arrows)
    return SatakeDiagram(
        label=label, family=family, rank=rank,
        black=frozenset(black), arrows=pairs,
    )


def builtin_catalog(max_rank: int = CATALOG_MAX_RANK) -> tuple[SatakeDiagram, ...]:
    """Classical families generated parametrically.

    sl(n,R): type A(n-1), plain.
    su*(2n): type A(2n-1), odd nodes black.
    su(p,q): type A(p+q-1), arrows (i, n-i) for i <= q, middle nodes black.
    so(p,q), p+q odd: type B, nodes beyond q black.
    so(p,q), p+q even: type D; split, fork arrow, or black tail.
    sp(n,R): type C, plain.
    sp(p,q): type C(p+q), alternating black from node 1, black tail if p > q.
    so*(2n): type D(n), odd chain nodes black (n even).
    """
    out: list[SatakeDiagram] = []

    # sl(n,R), rank n-1
    for n in range(2, max_rank + 2):
        out.append(_diagram(f"sl({n},R)", "A", n - 1))

    # su*(2n), rank 2n-1
    for n in range(2, max_rank // 2 + 2):
        r = 2 * n - 1
        if r <= max_rank:
            out.append(_diagram(f"su*({2 * n})", "A", r, black=range(1, r + 1, 2)))

    # su(p,q), rank p+q-1
    for total in range(2, max_rank + 2):
        for q in range(1, total // 2 + 1):
            p = total - q
            r = total - 1
            arrows = [(i, total - i) for i in range(1, q + 1) if i != total - i]
            black = range(q + 1, total - q)
            out.append(_diagram(f"su({p},{q})", "A", r, black=black, arrows=arrows))

    # so(p,q) with p+q = 2n+1, rank n
    for n in range(2, max_rank + 1):
        for q in range(1, n + 1):
            p = 2 * n + 1 - q
            out.append(_diagram(f"so({p},{q})", "B", n, black=range(q + 1, n + 1)))

    # sp(n,R), rank n
    for n in range(2, max_rank + 1):
        out.append(_diagram(f"sp({n},R)", "C", n))

    # sp(p,q), rank p+q
    for total in range(2, max_rank + 1):
        for q in range(1, total // 2 + 1):
            p = total - q
            black = set(range(1, 2 * q, 2)) | set(range(2 * q + 1, total + 1))
            out.append(_diagram(f"sp({p},{q})", "C", total, black=black))

    # so(p,q) with p+q = 2n, rank n
    for n in range(4, max_rank + 1):
        for q in range(1, n + 1):
            p = 2 * n - q
            if q == n:
                out.append(_diagram(f"so({p},{q})", "D", n))
            elif q == n - 1:
                out.append(_diagram(f"so({p},{q})", "D", n, arrows=[(n - 1, n)]))
            else:
                out.append(_diagram(f"so({p},{q})", "D", n, black=range(q + 1, n + 1)))

    # so*(2n), rank n, n even here
    for n in range(4, max_rank + 1, 2):
        out.append(_diagram(f"so*({2 * n})", "D", n, black=range(1, n, 2)))

    labels = [sd.label for sd in out]
    assert len(labels) == len(set(labels))
    return tuple(out)


def catalog_by_label(
    catalog: Sequence[SatakeDiagram] | None = None,
) -> dict[str, SatakeDiagram]:
    entries = builtin_catalog() if catalog is None else catalog
    return {sd.label: sd for sd in entries}


# ---------------------------------------------------------------------------
# catalog text format: stanzas of `key=value;` entries separated by blank lines

_KNOWN_KEYS = {"name", "type", "rank", "black", "arrows"}
_TYPE_RE = re.compile(r"^([A-Ga-g])\s*(\d*)$")
_SET_RE = re.compile(r"^\{(.*)\}$")
_PAIR_RE = re.compile(r"^\(\s*(\d+)\s*,\s*(\d+)\s*\)$")


def _parse_node_set(text: str, line: int) -> frozenset[int]:
    m = _SET_RE.match(text.strip())
    if m is None:
        raise CatalogParseError(f"expected a set literal, got {text!r}", line)
    body = m.group(1).strip()
    if not body:
        return frozenset()
    try:
        return frozenset(int(tok) for tok in body.split(","))
    except ValueError:
        raise CatalogParseError(f"bad node set {text!r}", line) from None


def _parse_arrow_set(text: str, line: int) -> frozenset[tuple[int, int]]:
    m = _SET_RE.match(text.strip())
    if m is None:
        raise CatalogParseError(f"expected a set literal, got {text!r}", line)
    body = m.group(1).strip()
    if not body:
        return frozenset()
    pairs = re.findall(r"\([^()]*\)", body)
    rest = re.sub(r"\([^()]*\)", "", body).replace(",", "").strip()
    if not pairs or rest:
        raise CatalogParseError(f"bad arrow set {text!r}", line)
    out = set()
    for pair in pairs:
        pm = _PAIR_RE.match(pair)
        if pm is None:
            raise CatalogParseError(f"bad arrow pair {pair!r}", line)
        a, b = int(pm.group(1)), int(pm.group(2))
        out.add((min(a, b), max(a, b)))
    return frozenset(out)


def load_catalog(source: str) -> tuple[SatakeDiagram, ...]:
    """Parse catalog text into diagrams; structure is parsed, not validated."""
    stanzas: list[tuple[int, dict[str, str]]] = []
    current: dict[str, str] = {}
    current_line = 0
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            if current:
                stanzas.append((current_line, current))
                current = {}
            continue
        if not current:
            current_line = lineno
        for chunk in line.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            if "=" not in chunk:
                raise CatalogParseError(f"expected key=value, got {chunk!r}", lineno)
            key, _, value = chunk.partition("=")
            key = key.strip().lower()
            if key not in _KNOWN_KEYS:
                raise CatalogParseError(f"unknown key {key!r}", lineno)
            if key in current:
                raise CatalogParseError(f"duplicate key {key!r} in stanza", lineno)
            current[key] = value.strip()
    if current:
        stanzas.append((current_line, current))

    diagrams: list[SatakeDiagram] = []
    seen_labels: set[str] = set()
    for line, fields in stanzas:
        if "name" not in fields or "type" not in fields:
            raise CatalogParseError("stanza needs at least name= and type=", line)
        label = fields["name"]
        if label in seen_labels:
            raise CatalogParseError(f"duplicate label {label!r}", line)
        seen_labels.add(label)
        tm = _TYPE_RE.match(fields["type"])
        if tm is None:
            raise CatalogParseError(f"bad type {fields['type']!r}", line)
        family = tm.group(1).upper()
        if tm.group(2):
            rank = int(tm.group(2))
            if "rank" in fields and int(fields["rank"]) != rank:
                raise CatalogParseError("rank= disagrees with type=", line)
        elif "rank" in fields:
            rank = int(fields["rank"])
        else:
            raise CatalogParseError("missing rank (use type=A2 or rank=2)", line)
        black = _parse_node_set(fields.get("black", "{}"), line)
        arrows = _parse_arrow_set(fields.get("arrows", "{}"), line)
        diagrams.append(
            SatakeDiagram(
                label=label, family=family, rank=rank,
                black=black, arrows=arrows,
            )
        )
    return tuple(diagrams)


def render_catalog(diagrams: Sequence[SatakeDiagram]) -> str:
    """Render diagrams in the stanza format accepted by load_catalog."""
    blocks = []
    for sd in diagrams:
        black = "{" + ",".join(str(i) for i in sorted(sd.black)) + "}"
        arrows = "{" + ",".join(f"({a},{b})" for a, b in sorted(sd.arrows)) + "}"
        blocks.append(
            f"name={sd.label}; type={sd.family}{sd.rank}; black={black}; arrows={arrows}"
        )
    return "\n\n".join(blocks) + "\n"
