"""Per-orbit-class leaf invariants and the full stratification report.

Classes are indexed by twisted involutions of the Weyl group. That indexing
over-approximates the true orbit set: a class may be shared by several real
orbits, and some twisted involutions are not realized by any orbit at all.
Unrealizable classes are kept in the report and flagged, never dropped.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterator

from .rootsys import (
    DEFAULT_WEYL_CAP,
    IntMatrix,
    RootSystem,
    WeylElement,
    enumerate_weyl,
    eigenspace_dim,
    identity_matrix,
    length,
    longest_element,
    mat_mul,
    mat_trace,
    multiply,
)
from .satake import RealFormData, SatakeDiagram, real_form_data


class NotTwistedInvolutionError(ValueError):
    """Raised when a Weyl element w does not satisfy (w tau*)^2 = 1."""


def twisted_matrix(rf: RealFormData, psi: WeylElement) -> IntMatrix:
    return mat_mul(psi.matrix, rf.tau_star)


def is_twisted_involution(rf: RealFormData, psi: WeylElement) -> bool:
    m = twisted_matrix(rf, psi)
    return mat_mul(m, m) == identity_matrix(len(m))


def twisted_involutions(
    rf: RealFormData, rs: RootSystem, cap: int = DEFAULT_WEYL_CAP
) -> Iterator[WeylElement]:
    """All w in W with (w tau*)^2 = 1, in the deterministic enumeration order."""
    for w in enumerate_weyl(rs, cap=cap):
        if is_twisted_involution(rf, w):
            yield w


@dataclass(frozen=True)
class OrbitClass:
    """Leaf invariants attached to one twisted involution psi.

    codim_Y is the codimension of the corresponding orbit class on the flag
    variety; t and a are the toral and vector dimensions of the attached
    Cartan subalgebra; leaf_dim is the dimension of each leaf in the family
    and family_dim the dimension of the torus parameterizing the family.
    """

    psi: WeylElement
    codim_Y: int
    t: int
    a: int
    leaf_dim: int
    leaf_codim: int
    family_dim: int
    is_open: bool
    is_closed_class: bool
    parity_ok: bool
    dims_in_range: bool

    @property
    def psi_word(self) -> tuple[int, ...]:
        return self.psi.word

    @property
    def realizable_candidate(self) -> bool:
        # necessary conditions for a class to carry actual leaves
        return self.parity_ok and self.dims_in_range


def orbit_class(rf: RealFormData, rs: RootSystem, psi: WeylElement) -> OrbitClass:
    """Compute all invariants of the class of a twisted involution."""
    m = twisted_matrix(rf, psi)
    if mat_mul(m, m) != identity_matrix(rs.rank):
        raise NotTwistedInvolutionError(
            f"word {psi.word} is not a twisted involution for {rf.diagram.label}"
        )
    a = eigenspace_dim(m, 1)
    t = eigenspace_dim(m, -1)
    assert t + a == rs.rank  # involutions split the root space exactly
    assert a - t == mat_trace(m)

    w0 = longest_element(rs)
    codim_y = length(rs, multiply(rs, psi, rf.w_b, w0))
    dim_orbit = 2 * len(rs.positive_roots) - codim_y
    leaf_dim = dim_orbit - rf.dim_k0 + t
    leaf_codim = rf.dim_x - leaf_dim
    assert leaf_codim == a + codim_y

    return OrbitClass(
        psi=psi,
        codim_Y=codim_y,
        t=t,
        a=a,
        leaf_dim=leaf_dim,
        leaf_codim=leaf_codim,
        family_dim=a,
        is_open=(codim_y == 0 and a == 0),
        is_closed_class=(len(psi.word) == 0 or psi.matrix == identity_matrix(rs.rank)),
        parity_ok=(leaf_dim % 2 == 0),
        dims_in_range=(0 <= leaf_dim <= rf.dim_x),
    )


def open_class_element(rf: RealFormData, rs: RootSystem) -> WeylElement:
    """The unique psi with codim_Y = 0, namely w_0 w_b."""
    return multiply(rs, longest_element(rs), rf.w_b)


def open_leaf_test(rf: RealFormData, rs: RootSystem) -> bool:
    """True iff open leaves exist: the codimension-zero class has a = 0."""
    cls = orbit_class(rf, rs, open_class_element(rf, rs))
    return cls.is_open


NOTE_CONTRACTIBLE = "every symplectic leaf is contractible"
NOTE_OPEN_LEAVES = (
    "open leaves exist; each open leaf is diffeomorphic to the noncompact dual "
    "symmetric space, and their number equals the number of open real-group "
    "orbits on the flag variety (not computed per class)"
)
NOTE_LARGEST = (
    "largest leaves are diffeomorphic to a solvable factor A'N of an Iwasawa "
    "decomposition"
)
NOTE_CLASS_CAVEAT = (
    "classes are keyed by twisted involutions; a class may correspond to "
    "several orbits, and flagged classes (parity or dimension range) are "
    "retained but cannot be realized by leaves"
)


@dataclass(frozen=True)
class AtlasReport:
    """The complete stratification data for one real form."""

    form: RealFormData
    w0_word: tuple[int, ...]
    wb_word: tuple[int, ...]
    classes: tuple[OrbitClass, ...]
    has_open_leaves: bool
    open_class_count_note: str
    largest_leaf_class: int  # index into classes
    notes: tuple[str, ...]
    catalog_hash: str
    tool_version: str

    @property
    def label(self) -> str:
        return self.form.diagram.label

    def open_classes(self) -> list[OrbitClass]:
        return [c for c in self.classes if c.is_open]

    def closed_class(self) -> OrbitClass:
        (cls,) = [c for c in self.classes if c.is_closed_class]
        return cls

    def min_leaf_codim(self) -> int:
        """Smallest leaf codimension over classes that can carry leaves."""
        candidates = [c for c in self.classes if c.realizable_candidate]
        return min(c.leaf_codim for c in candidates)


def atlas(
    sd: SatakeDiagram,
    weyl_cap: int = DEFAULT_WEYL_CAP,
    catalog_hash: str = "",
) -> AtlasReport:
    """Run the full pipeline for one diagram and assemble the report."""
    from . import __version__

    rs = sd.root_system()
    rf = real_form_data(sd)
    classes = [
        orbit_class(rf, rs, psi) for psi in twisted_involutions(rf, rs, cap=weyl_cap)
    ]
    classes.sort(key=lambda c: (c.codim_Y, c.psi_word))

    closed = [c for c in classes if c.is_closed_class]
    assert len(closed) == 1

    has_open = open_leaf_test(rf, rs)
    if has_open:
        largest = next(i for i, c in enumerate(classes) if c.is_open)
    else:
        candidates = [
            (c.leaf_codim, i) for i, c in enumerate(classes) if c.realizable_candidate
        ]
        largest = min(candidates)[1]

    notes = [NOTE_CONTRACTIBLE, NOTE_CLASS_CAVEAT, NOTE_LARGEST]
    if has_open:
        notes.insert(1, NOTE_OPEN_LEAVES)

    return AtlasReport(
        form=rf,
        w0_word=longest_element(rs).word,
        wb_word=rf.w_b.word,
        classes=tuple(classes),
        has_open_leaves=has_open,
        open_class_count_note=(
            "open-leaf count equals the open-orbit count on the flag variety; "
            "per-class orbit multiplicities are not computed"
        ),
        largest_leaf_class=largest,
        notes=tuple(notes),
        catalog_hash=catalog_hash,
        tool_version=__version__,
    )


def catalog_text_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
