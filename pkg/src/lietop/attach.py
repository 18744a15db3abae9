"""dgl models of cell attachments and the three inertness tests.

The tests are independent:

* inert_homological -- surjectivity of H(base) -> H(attached) on the window,
  with witness cycles for failures;
* quotient_consistency -- dimension comparison of H(attached) against
  H(base)/I, the ideal generated by the targets, computed by breadth-first
  bracket saturation;
* inert_anick -- the combinatorial leading-monomial certificate (no
  submonomial containment, no overlaps); a pass is a sufficient certificate
  of inertness, a fail is not a refutation.

Truncated inertness is only ever reported as "inert-up-to-window"; not-inert
requires a witness in a degree whose homology dimension has stabilized, or a
linear dependency among the target classes (inert maps have independent ones).
"""

from __future__ import annotations

from dataclasses import dataclass

from .dgl import ChainComplex, DglPresentation, HomologyTable, homology
from .freelie import (
    Generator,
    LieElement,
    TensorElement,
    Window,
    Word,
    bracket,
    generator_element,
)
from .qlinalg import Echelon, Vector

INERT_UP_TO_WINDOW = "inert-up-to-window"
NOT_INERT = "not-inert"
INCONCLUSIVE = "inconclusive"


@dataclass
class AttachingMap:
    """Cells to attach: fresh names with homogeneous cycle targets."""

    cells: list[tuple[str, LieElement]]

    def __post_init__(self):
        names = [name for name, _ in self.cells]
        if len(set(names)) != len(names):
            raise ValueError("duplicate cell names in attaching map")


@dataclass
class InertnessVerdict:
    window: Window
    status: str
    failing: list[tuple[int, LieElement]]
    injective: bool

    @property
    def inert_up_to_window(self) -> bool:
        return self.status == INERT_UP_TO_WINDOW


def attach_cells(base: DglPresentation, amap: AttachingMap) -> DglPresentation:
    """free_product(base, free on cells) with diff extended by cell -> target.

    Cell generators inherit the minimum weight of their target (computed
    before any re-truncation), so the attached differential never lowers
    weight and the window stages stay complete.
    """
    window = base.window
    taken = {g.name for g in base.generators}
    gens = list(base.generators)
    diff: dict[Generator, TensorElement] = {g: img.value for g, img in base.diff.items()}
    for name, target in amap.cells:
        if name in taken:
            raise ValueError(f"cell name {name} collides with an existing generator")
        taken.add(name)
        t = target.value
        if not t.is_zero() and not t.is_homogeneous():
            raise ValueError(f"target of cell {name} is not degree-homogeneous")
        weight = t.min_weight() or 1
        t = t.rewindow(window)
        residual = base.derive(t)
        if not residual.is_zero():
            raise ValueError(f"target of cell {name} is not a cycle")
        degree = (t.degree() if not t.is_zero() else target.value.degree()) or 0
        cell = Generator(name, degree + 1, weight=weight)
        gens.append(cell)
        diff[cell] = t
    return DglPresentation(gens, diff, window, validate_d_squared=False)


def _image_echelons(table: HomologyTable) -> dict[int, Echelon]:
    """Per-degree echelons of the boundary space, ready to grow."""
    out: dict[int, Echelon] = {}
    cx = table.complex
    for d in table.degrees:
        ech = Echelon(cx.dim(d))
        bnd = cx.boundary(d + 1)
        cols: dict[int, Vector] = {}
        for (i, j), c in bnd.entries.items():
            cols.setdefault(j, {})[i] = c
        for j in range(bnd.cols):
            v = cols.get(j)
            if v:
                ech.insert(v)
        out[d] = ech
    return out


def targets_injective(base_table: HomologyTable, amap: AttachingMap) -> bool:
    """Whether the cell-target classes are linearly independent in H(base).

    Targets that are invisible at this window (nonzero, but of weight or
    degree beyond it) are skipped: their classes cannot be assessed here.
    A genuinely zero target always fails.
    """
    echelons = _image_echelons(base_table)
    cx = base_table.complex
    for name, target in amap.cells:
        if target.value.is_zero():
            return False
        t = target.value.rewindow(base_table.window)
        if t.is_zero():
            continue
        d = t.degree()
        if d not in echelons:
            continue
        vec = cx.coordinates(t, d)
        if not echelons[d].insert(vec):
            return False
    return True


def surjectivity_verdict(
    base_table: HomologyTable,
    att_table: HomologyTable,
    injective: bool,
) -> InertnessVerdict:
    """Is H(base) -> H(attached) surjective in every reportable degree?

    Failing degrees come with a witness: a cycle of the attached model,
    reduced against the boundary space (canonical under the monomial order),
    that is not hit by H(base).
    """
    window = att_table.window
    cx_att = att_table.complex
    hit = _image_echelons(att_table)
    boundary_only = _image_echelons(att_table)
    for d, reps in base_table.representatives.items():
        if d not in hit:
            continue
        for rep in reps:
            t = rep.value.rewindow(window)
            hit[d].insert(cx_att.coordinates(t, d))
    failing: list[tuple[int, LieElement]] = []
    for d in att_table.degrees:
        if att_table.dims[d] == 0:
            continue
        for rep in att_table.representatives[d]:
            vec = cx_att.coordinates(rep.value, d)
            residual, _ = hit[d].reduce(vec)
            if not residual:
                continue
            canon, _ = boundary_only[d].reduce(residual)
            pivot = min(canon)
            canon = {c: val / canon[pivot] for c, val in canon.items()}
            failing.append((d, cx_att.element(canon, d)))
            hit[d].insert(residual)
    if not injective:
        # inert maps have injective H(gamma) on the cells; failure is exact
        status = NOT_INERT
    elif not failing:
        status = INERT_UP_TO_WINDOW
    elif any(att_table.stabilized[d] for d, _ in failing):
        status = NOT_INERT
    else:
        status = INCONCLUSIVE
    return InertnessVerdict(window, status, failing, injective)


def inert_homological(
    base: DglPresentation,
    amap: AttachingMap,
    window: Window | None = None,
) -> InertnessVerdict:
    """Homological inertness test on the window (surjectivity of H(j))."""
    if window is None:
        window = base.window
    base_w = base.rewindow(window)
    att = attach_cells(base_w, amap)
    base_table = homology(base_w)
    att_table = homology(att)
    injective = targets_injective(base_table, amap)
    return surjectivity_verdict(base_table, att_table, injective)


def saturate_ideal(
    base: DglPresentation,
    elements: list[LieElement],
    cx: ChainComplex | None = None,
) -> dict[int, Echelon]:
    """Per-degree echelons of the closed ideal generated by the elements.

    Breadth-first: bracket every accepted spanning vector with each
    generator; every round raises weight, so the window bound terminates
    the saturation.  Jacobi makes generator brackets sufficient.
    """
    window = base.window
    if cx is None:
        cx = ChainComplex(base)
    echelons: dict[int, Echelon] = {}
    frontier: list[LieElement] = []
    for element in elements:
        t = element.value.rewindow(window)
        if t.is_zero():
            continue
        d = t.degree()
        if d is None:
            raise ValueError("ideal generators must be degree-homogeneous")
        ech = echelons.setdefault(d, Echelon(cx.dim(d)))
        if ech.insert(cx.coordinates(t, d)):
            frontier.append(LieElement(t))
    while frontier:
        new_frontier: list[LieElement] = []
        for element in frontier:
            for g in base.generators:
                br = bracket(generator_element(g, window), element)
                if br.is_zero():
                    continue
                d = br.value.degree()
                if d > window.max_degree:
                    continue
                ech = echelons.setdefault(d, Echelon(cx.dim(d)))
                if ech.insert(cx.coordinates(br.value, d)):
                    new_frontier.append(br)
        frontier = new_frontier
    return echelons


@dataclass
class QuotientReport:
    """Per-degree comparison of dim H(attached) with dim H(base)/I."""

    window: Window
    attached_dims: dict[int, int]
    quotient_dims: dict[int, int]

    @property
    def degrees(self) -> list[int]:
        return sorted(self.attached_dims)

    def agree(self, degree: int) -> bool:
        return self.attached_dims[degree] == self.quotient_dims[degree]

    @property
    def consistent(self) -> bool:
        return all(self.agree(d) for d in self.degrees)

    def mismatches(self) -> list[int]:
        return [d for d in self.degrees if not self.agree(d)]


def quotient_consistency(
    base: DglPresentation,
    amap: AttachingMap,
    window: Window | None = None,
) -> QuotientReport:
    """Compare dim H(attached) against dim(H(base)/I) per degree.

    Requires a zero differential on the base, so H(base) is the truncated
    algebra itself.  I is the closed ideal generated by the targets,
    saturated breadth-first by bracketing with the generators; termination
    is forced by the window's weight bound.
    """
    if window is None:
        window = base.window
    base_w = base.rewindow(window)
    if base_w.diff:
        raise ValueError("quotient_consistency requires a zero differential on the base")
    att = attach_cells(base_w, amap)
    att_table = homology(att)

    cx = ChainComplex(base_w)
    echelons = saturate_ideal(base_w, [t for _, t in amap.cells], cx)

    attached_dims: dict[int, int] = {}
    quotient: dict[int, int] = {}
    for d in att_table.degrees:
        attached_dims[d] = att_table.dims[d]
        ideal_dim = echelons[d].rank if d in echelons else 0
        quotient[d] = cx.dim(d) - ideal_dim
    return QuotientReport(window, attached_dims, quotient)


@dataclass
class AnickCertificate:
    passed: bool
    leading: list[Word]
    violation: str | None = None


def leading_word(t: TensorElement, order: list[Generator]) -> Word:
    """The relator's leading word: highest in deg-lex for the given order.

    Words compare by length first, then letter by letter with earlier
    generators in `order` counting as larger.
    """
    if t.is_zero():
        raise ValueError("zero relator has no leading word")
    rank = {g: i for i, g in enumerate(order)}
    missing = t.letters() - set(order)
    if missing:
        names = ", ".join(sorted(g.name for g in missing))
        raise ValueError(f"relator mentions generators outside the order: {names}")
    return max(t.terms, key=lambda w: (len(w), tuple(-rank[g] for g in w)))


def inert_anick(
    relators: list[TensorElement],
    order: list[Generator],
    include_self_overlap: bool = True,
) -> AnickCertificate:
    """Leading-monomial certificate: pass iff no leading word is a contiguous
    subword of another and no nonempty proper suffix of any w_i equals a
    proper prefix of any w_j.

    Self-overlap (i = j) is included by default; the cited source requires
    it even though "any other" could be read as excluding it.
    """
    leading = [leading_word(t, order) for t in relators]

    def fmt(w: Word) -> str:
        return ".".join(g.name for g in w)

    for i, wi in enumerate(leading):
        for j, wj in enumerate(leading):
            if i == j:
                continue
            n, m = len(wi), len(wj)
            if n <= m and any(wj[k : k + n] == wi for k in range(m - n + 1)):
                return AnickCertificate(
                    False, leading,
                    f"submonomial: leading word {fmt(wi)} of relator {i} occurs in "
                    f"{fmt(wj)} of relator {j}",
                )
    for i, wi in enumerate(leading):
        for j, wj in enumerate(leading):
            if i == j and not include_self_overlap:
                continue
            for k in range(1, len(wi)):
                suffix = wi[k:]
                if len(suffix) < len(wj) and wj[: len(suffix)] == suffix:
                    return AnickCertificate(
                        False, leading,
                        f"overlap: suffix {fmt(suffix)} of {fmt(wi)} (relator {i}) is "
                        f"a prefix of {fmt(wj)} (relator {j})",
                    )
    return AnickCertificate(True, leading)


def sequential_attach(
    base: DglPresentation,
    g1: AttachingMap,
    g2: AttachingMap,
    window: Window | None = None,
) -> tuple[DglPresentation, InertnessVerdict, InertnessVerdict, InertnessVerdict]:
    """Attach g1 then g2; returns the doubly-attached presentation plus the
    two partial verdicts and the combined one, so the sequential-splitting
    equivalence (combined inert iff both partial) can be asserted."""
    if window is None:
        window = base.window
    base_w = base.rewindow(window)
    p1 = attach_cells(base_w, g1)
    p2 = attach_cells(p1, g2)
    base_table = homology(base_w)
    t1 = homology(p1)
    t2 = homology(p2)
    inj1 = targets_injective(base_table, g1)
    inj2 = targets_injective(t1, g2)
    v1 = surjectivity_verdict(base_table, t1, inj1)
    v2 = surjectivity_verdict(t1, t2, inj2)
    combined = surjectivity_verdict(base_table, t2, inj1 and inj2)
    return p2, v1, v2, combined
