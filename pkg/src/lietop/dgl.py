"""Finite presentations of profree dgl's and their homology on truncation
windows.

A presentation is a generator list with degrees plus differential images;
the differential extends to the whole truncated algebra as the right
derivation  d(ab) = (-1)^{deg b} (da).b + a.(db),  which restricts on
brackets to  d[x,y] = (-1)^{deg y} [dx,y] + [x,dy].

Homology is computed degreewise on the weight-<=N quotient, which is an
honest finite-dimensional nilpotent dgl because differentials never lower
weight.  The top degree of the window is omitted from homology tables: its
incoming boundaries are not fully visible.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .freelie import (
    Generator,
    LieElement,
    LieSlice,
    TensorElement,
    Window,
    Word,
    certify_lie,
    lie_slice,
    merge_windows,
    slice_element,
)
from .qlinalg import Echelon, SparseMatrix, Vector, kernel_basis

ZERO = Fraction(0)
ONE = Fraction(1)


class DglPresentation:
    """A profree dgl given by generators, degrees, and differential images.

    Immutable after construction.  diff maps generators to certified Lie
    elements of degree one less, with all terms of weight >= 1; degree-0
    generators always map to 0.
    """

    def __init__(
        self,
        generators,
        diff: dict[Generator, LieElement | TensorElement] | None = None,
        window: Window | None = None,
        validate_d_squared: bool = True,
    ):
        self.generators: tuple[Generator, ...] = tuple(generators)
        if window is None:
            raise ValueError("a truncation window is required")
        self.window = window
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise ValueError("generator names must be unique")
        gen_set = set(self.generators)

        self.diff: dict[Generator, LieElement] = {}
        diff = diff or {}
        for g, img in diff.items():
            if g not in gen_set:
                raise ValueError(f"diff given for unknown generator {g.name}")
            if isinstance(img, LieElement):
                img = img.value
            img = img.rewindow(window)
            if img.is_zero():
                continue
            if g.degree == 0:
                raise ValueError(f"degree-0 generator {g.name} must have zero diff")
            if img.degree() != g.degree - 1:
                raise ValueError(
                    f"diff of {g.name} must be homogeneous of degree {g.degree - 1}"
                )
            if (img.min_weight() or 1) < 1:
                raise ValueError(f"diff of {g.name} has a weight-0 term")
            lie = certify_lie(img, self.generators)
            if lie is None:
                raise ValueError(f"diff of {g.name} is not in the free Lie subalgebra")
            self.diff[g] = lie
        self._homology_memo: dict[Window, "HomologyTable"] = {}
        if validate_d_squared:
            bad = self.check_d_squared()
            if bad:
                bad_names = ", ".join(g.name for g, _ in bad)
                raise ValueError(f"d^2 != 0 on generators: {bad_names}")

    def generator(self, name: str) -> Generator:
        for g in self.generators:
            if g.name == name:
                return g
        raise KeyError(name)

    def diff_of(self, g: Generator) -> TensorElement:
        img = self.diff.get(g)
        if img is None:
            return TensorElement.zero(self.window)
        return img.value

    def derive(self, x: LieElement | TensorElement):
        """Apply the differential, extended to the tensor algebra as a right
        derivation; restricts to the bracket rule on Lie elements."""
        lie_in = isinstance(x, LieElement)
        t = x.value if lie_in else x
        unknown = t.letters() - set(self.generators)
        if unknown:
            names = ", ".join(sorted(g.name for g in unknown))
            raise ValueError(f"element mentions unknown generators: {names}")
        window = self.window
        out: dict[Word, Fraction] = {}
        for word, coeff in t.terms.items():
            suffix_degree = 0
            # differentiate letters right to left so the suffix degree accumulates
            for i in range(len(word) - 1, -1, -1):
                g = word[i]
                img = self.diff.get(g)
                if img is not None:
                    sign = -ONE if suffix_degree % 2 else ONE
                    c = coeff * sign
                    head, tail = word[:i], word[i + 1 :]
                    for v, cv in img.value.terms.items():
                        new_word = head + v + tail
                        if not window.admits(new_word):
                            continue
                        s = out.get(new_word, ZERO) + c * cv
                        if s:
                            out[new_word] = s
                        else:
                            out.pop(new_word, None)
                suffix_degree += g.degree
        result = TensorElement(window, out)
        return LieElement(result) if lie_in else result

    def check_d_squared(self) -> list[tuple[Generator, TensorElement]]:
        """d(d(g)) for every generator; violations are data, not exceptions."""
        bad = []
        for g in self.generators:
            img = self.diff.get(g)
            if img is None:
                continue
            residual = self.derive(img.value)
            if not residual.is_zero():
                bad.append((g, residual))
        return bad

    def is_minimal(self) -> bool:
        """True iff every diff image is decomposable (all word lengths >= 2)."""
        return all((img.value.min_length() or 2) >= 2 for img in self.diff.values())

    def rewindow(self, window: Window) -> "DglPresentation":
        """The same presentation truncated/extended to another window."""
        if window == self.window:
            return self
        return DglPresentation(
            self.generators,
            {g: img.value.rewindow(window) for g, img in self.diff.items()},
            window,
            validate_d_squared=False,
        )

    def homology(self, slice_filter=None) -> "HomologyTable":
        return homology(self, slice_filter=slice_filter)

    def __repr__(self):
        gens = ", ".join(f"{g.name}:{g.degree}" for g in self.generators)
        return f"DglPresentation({gens}; window={self.window})"


def free_presentation(generators, window: Window) -> DglPresentation:
    return DglPresentation(generators, {}, window)


@dataclass
class HomologyTable:
    """Per-degree homology of the weight-truncated quotient.

    Degrees run from 0 to max_degree - 1; the top window degree is omitted.
    stabilized[d] records whether the dimension is unchanged between the
    (N-1) and N weight stages; it is a report, never a convergence claim.
    """

    window: Window
    dims: dict[int, int]
    representatives: dict[int, list[LieElement]]
    stabilized: dict[int, bool]
    complex: "ChainComplex | None" = field(default=None, repr=False, compare=False)

    @property
    def degrees(self) -> list[int]:
        return sorted(self.dims)


class ChainComplex:
    """Chain data of a presentation on its window, assembled degree by degree.

    Degree-d chains are the direct sum of the (w, d) Lie slices, w <= N,
    optionally restricted by slice_filter(w, d).  Columns are indexed by
    bracket-basis elements; each column remembers its weight so ranks of the
    (N-1)-stage come from the same matrices.
    """

    def __init__(self, p: DglPresentation, slice_filter=None):
        self.p = p
        self.window = p.window
        self.filter = slice_filter
        self._slices: dict[int, list[LieSlice]] = {}
        self._offsets: dict[int, list[int]] = {}
        self._col_weights: dict[int, list[int]] = {}
        self._boundaries: dict[int, SparseMatrix] = {}

    def slices(self, degree: int) -> list[LieSlice]:
        cached = self._slices.get(degree)
        if cached is not None:
            return cached
        out = []
        for w in range(1, self.window.max_weight + 1):
            if self.filter is not None and not self.filter(w, degree):
                continue
            slc = lie_slice(self.p.generators, w, degree)
            if slc.dim:
                out.append(slc)
        self._slices[degree] = out
        offsets = []
        total = 0
        weights = []
        for slc in out:
            offsets.append(total)
            total += slc.dim
            weights.extend([slc.weight] * slc.dim)
        self._offsets[degree] = offsets
        self._col_weights[degree] = weights
        return out

    def dim(self, degree: int, max_weight: int | None = None) -> int:
        self.slices(degree)
        if max_weight is None:
            return len(self._col_weights[degree])
        return sum(1 for w in self._col_weights[degree] if w <= max_weight)

    def coordinates(self, t: TensorElement, degree: int) -> Vector:
        """Coordinates of a degree-d Lie tensor element over the chain basis.

        Components in filtered-out slices are dropped (quotient complex).
        """
        slices = self.slices(degree)
        out: Vector = {}
        by_weight = {slc.weight: k for k, slc in enumerate(slices)}
        for (w, d), terms in t.bislices().items():
            if d != degree:
                raise ValueError(f"component of degree {d} in degree-{degree} chains")
            k = by_weight.get(w)
            if k is None:
                continue
            slc = slices[k]
            coords = slc.coordinates(terms)
            if coords is None:
                raise ValueError("component is not in the Lie subspace")
            off = self._offsets[degree][k]
            for i, c in coords.items():
                out[off + i] = c
        return out

    def element(self, coords: Vector, degree: int) -> LieElement:
        slices = self.slices(degree)
        offsets = self._offsets[degree]
        out = TensorElement.zero(self.window)
        for j in sorted(coords):
            c = coords[j]
            k = 0
            while k + 1 < len(offsets) and offsets[k + 1] <= j:
                k += 1
            el = slice_element(slices[k], j - offsets[k], self.window)
            out = out + c * el.value
        return LieElement(out)

    def boundary(self, degree: int) -> SparseMatrix:
        """The matrix of d: C_degree -> C_{degree-1}."""
        cached = self._boundaries.get(degree)
        if cached is not None:
            return cached
        slices = self.slices(degree)
        rows = self.dim(degree - 1) if degree >= 1 else 0
        entries: dict[tuple[int, int], Fraction] = {}
        col = 0
        for slc in slices:
            for k in range(slc.dim):
                if degree >= 1:
                    img = self.p.derive(slice_element(slc, k, self.window))
                    if not img.is_zero():
                        for i, c in self.coordinates(img.value, degree - 1).items():
                            entries[(i, col)] = c
                col += 1
        m = SparseMatrix(rows, self.dim(degree), entries)
        self._boundaries[degree] = m
        return m

    def boundary_restricted(self, degree: int, max_weight: int) -> SparseMatrix:
        """Boundary of the weight-<=max_weight sub-stage (columns and rows cut)."""
        full = self.boundary(degree)
        col_ok = [w <= max_weight for w in self._col_weights[degree]]
        row_ok = [w <= max_weight for w in self._col_weights.get(degree - 1, [])]
        col_map: dict[int, int] = {}
        for j, ok in enumerate(col_ok):
            if ok:
                col_map[j] = len(col_map)
        row_map: dict[int, int] = {}
        for i, ok in enumerate(row_ok):
            if ok:
                row_map[i] = len(row_map)
        entries = {}
        for (i, j), c in full.entries.items():
            if j in col_map and i in row_map:
                entries[(row_map[i], col_map[j])] = c
        return SparseMatrix(len(row_map), len(col_map), entries)


def _rank(m: SparseMatrix) -> int:
    ech = Echelon(m.cols)
    rank = 0
    for row in m.row_vectors():
        if ech.insert(row):
            rank += 1
    return rank


def _columns(m: SparseMatrix) -> list[Vector]:
    out: list[Vector] = [dict() for _ in range(m.cols)]
    for (i, j), c in m.entries.items():
        out[j][i] = c
    return out


def homology(p: DglPresentation, slice_filter=None) -> HomologyTable:
    """Homology table of the weight-truncated quotient dgl.

    Reports degrees 0 .. max_degree-1 with dims, canonical representatives
    (cycles reduced against the boundary space), and stabilization flags
    comparing the (N-1) and N weight stages.
    """
    if slice_filter is None and p.window in p._homology_memo:
        return p._homology_memo[p.window]
    for g in p.generators:
        img = p.diff.get(g)
        if img is not None and (img.value.min_weight() or g.weight) < g.weight:
            raise ValueError(f"weight-decreasing differential on {g.name}")
    cx = ChainComplex(p, slice_filter)
    N, D = p.window.max_weight, p.window.max_degree
    dims: dict[int, int] = {}
    reps: dict[int, list[LieElement]] = {}
    stab: dict[int, bool] = {}
    rank_full: dict[int, int] = {}
    rank_prev: dict[int, int] = {}
    for d in range(0, D + 1):
        m = cx.boundary(d)
        rank_full[d] = _rank(m)
        rank_prev[d] = _rank(cx.boundary_restricted(d, N - 1)) if N > 1 else 0
    for d in range(0, D):
        dim_full = cx.dim(d) - rank_full[d] - rank_full[d + 1]
        dim_prev = cx.dim(d, N - 1) - rank_prev[d] - rank_prev[d + 1]
        dims[d] = dim_full
        stab[d] = dim_full == dim_prev
        # canonical representatives: kernel vectors reduced mod boundaries
        ker = kernel_basis(cx.boundary(d))
        image = Echelon(cx.dim(d))
        for col_vec in _columns(cx.boundary(d + 1)):
            image.insert(col_vec)
        chosen: list[LieElement] = []
        for v in ker.rows:
            residual, _ = image.reduce(v)
            if residual:
                pivot = min(residual)
                lead = residual[pivot]
                residual = {c: val / lead for c, val in residual.items()}
                image.insert(residual)
                chosen.append(cx.element(residual, d))
        reps[d] = chosen
    table = HomologyTable(p.window, dims, reps, stab, cx)
    if slice_filter is None:
        p._homology_memo[p.window] = table
    return table


def indecomposable_dims(p: DglPresentation, table: HomologyTable | None = None) -> dict[int, int]:
    """Per-degree dims of H/[H,H].

    [H,H]_d is spanned by classes of brackets of representatives; each
    bracket is reduced against the boundary space before counting.
    """
    from .freelie import bracket  # local import avoids a cycle at module load

    if table is None:
        table = homology(p)
    cx = table.complex
    out: dict[int, int] = {}
    for d in table.degrees:
        ech = Echelon(cx.dim(d))
        for col in _columns(cx.boundary(d + 1)):
            if col:
                ech.insert(col)
        base_rank = ech.rank
        for p_deg in range(0, d + 1):
            q_deg = d - p_deg
            if p_deg not in table.representatives or q_deg not in table.representatives:
                continue
            for r1 in table.representatives[p_deg]:
                for r2 in table.representatives[q_deg]:
                    br = bracket(r1, r2)
                    if br.is_zero():
                        continue
                    ech.insert(cx.coordinates(br.value, d))
        out[d] = table.dims[d] - (ech.rank - base_rank)
    return out


def lcs_dims(p: DglPresentation, k_max: int) -> dict[int, dict[int, int]]:
    """Lower-central-series slice dimensions of a differential-zero
    presentation: k -> degree -> dim of the weight-k slice."""
    if p.diff:
        raise ValueError("lcs_dims requires a presentation with zero differential")
    if k_max > p.window.max_weight:
        raise ValueError(f"k_max={k_max} exceeds window weight {p.window.max_weight}")
    out: dict[int, dict[int, int]] = {}
    for k in range(1, k_max + 1):
        per_degree: dict[int, int] = {}
        for d in range(0, p.window.max_degree + 1):
            dim = lie_slice(p.generators, k, d).dim
            if dim:
                per_degree[d] = dim
        out[k] = per_degree
    return out


def minimality_check(p: DglPresentation) -> bool:
    return p.is_minimal()


def free_product(p1: DglPresentation, p2: DglPresentation) -> DglPresentation:
    """Presentation on the disjoint union of generators; windows merged by max.

    Name collisions on the right are renamed (primes appended) and reported
    with a warning.
    """
    window = merge_windows(p1.window, p2.window)
    taken = {g.name for g in p1.generators}
    rename: dict[Generator, Generator] = {}
    new_right = []
    for g in p2.generators:
        name = g.name
        while name in taken:
            name += "'"
        taken.add(name)
        ng = Generator(name, g.degree, g.weight) if name != g.name else g
        if ng is not g:
            rename[g] = ng
        new_right.append(ng)
    if rename:
        renamed = ", ".join(f"{old.name}->{new.name}" for old, new in rename.items())
        warnings.warn(f"free_product renamed colliding generators: {renamed}")

    def rewrite(t: TensorElement) -> TensorElement:
        if not rename:
            return t.rewindow(window)
        terms = {}
        for word, c in t.terms.items():
            terms[tuple(rename.get(g, g) for g in word)] = c
        return TensorElement(window, terms)

    gens = tuple(p1.generators) + tuple(new_right)
    diff: dict[Generator, TensorElement] = {}
    for g, img in p1.diff.items():
        diff[g] = img.value.rewindow(window)
    for g, img in p2.diff.items():
        diff[rename.get(g, g)] = rewrite(img.value)
    return DglPresentation(gens, diff, window, validate_d_squared=False)


def regrade(p: DglPresentation, new_degrees: dict[Generator, int]) -> DglPresentation:
    """Re-declare generator degrees, keeping brackets and diffs as tensor data.

    Requires every diff image to stay homogeneous of the correct new degree
    and to remain in the free Lie subalgebra under the new Koszul signs
    (re-certification is the authoritative check).  A generator whose parity
    changes while it is repeated inside some diff-image word is rejected
    outright: the self-bracket sign semantics would change.
    """
    mapping: dict[Generator, Generator] = {}
    for g in p.generators:
        nd = new_degrees.get(g, g.degree)
        if nd < 0:
            raise ValueError(f"new degree of {g.name} must be >= 0")
        mapping[g] = Generator(g.name, nd, g.weight) if nd != g.degree else g

    for g, img in p.diff.items():
        for word in img.value.terms:
            seen: dict[Generator, int] = {}
            for letter in word:
                seen[letter] = seen.get(letter, 0) + 1
            for letter, count in seen.items():
                if count >= 2 and (mapping[letter].degree - letter.degree) % 2 != 0:
                    raise ValueError(
                        f"parity change of {letter.name} in self-bracket pair "
                        f"({letter.name},{letter.name}) within diff of {g.name}"
                    )

    max_deg = max((mapping[g].degree for g in p.generators), default=0)
    window = Window(
        p.window.max_weight,
        max(p.window.max_degree, p.window.max_weight * max_deg),
    )
    gens = tuple(mapping[g] for g in p.generators)
    diff: dict[Generator, TensorElement] = {}
    for g, img in p.diff.items():
        terms = {
            tuple(mapping[letter] for letter in word): c
            for word, c in img.value.terms.items()
        }
        t = TensorElement(window, terms)
        ng = mapping[g]
        if not t.is_zero() and t.degree() != ng.degree - 1:
            raise ValueError(
                f"diff of {g.name} is not homogeneous of degree {ng.degree - 1} "
                "under the new degrees"
            )
        if certify_lie(t, gens) is None:
            raise ValueError(
                f"diff of {g.name} leaves the free Lie subalgebra under the new degrees"
            )
        diff[ng] = t
    return DglPresentation(gens, diff, window, validate_d_squared=False)
