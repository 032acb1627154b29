"""Exact rational linear-inequality systems and the set algebra built on them.

Everything downstream (latent-variable elimination, set unions, containment
tests) reduces to four operations on conjunctions of linear relations over
named coordinates: projection by Fourier-Motzkin elimination, emptiness,
containment of a system in a finite union of systems, and canonical text
serialization.  All arithmetic is ``fractions.Fraction``; floats never enter
the set algebra.

Coordinates are identified by name, so symbolic parameters (a lag coefficient
``g``, a covariate index ``dzb21``) are ordinary coordinates and every
operation works unchanged in "symbolic" mode.  Sign-regime assumptions are
passed as an extra system intersected into every feasibility query.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Rational = Union[int, Fraction]

LE = "<="
LT = "<"
EQ = "="

_RELS = (LE, LT, EQ)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)  # exact binary expansion, deterministic
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not a rational scalar: {x!r}")


class LinExpr:
    """Linear expression ``sum coeff*coord + const`` used to build rows.

    Immutable.  Supports +, -, unary -, and multiplication by rationals,
    which is all the model code needs to assemble structural indices.
    """

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: Mapping[str, Rational] | None = None, const: Rational = 0):
        items = {}
        if coeffs:
            for name, c in coeffs.items():
                c = _frac(c)
                if c != 0:
                    items[name] = c
        object.__setattr__(self, "coeffs", dict(items))
        object.__setattr__(self, "const", _frac(const))

    def __setattr__(self, *a):
        raise AttributeError("LinExpr is immutable")

    @staticmethod
    def coord(name: str) -> "LinExpr":
        return LinExpr({name: 1})

    @staticmethod
    def const_(value: Rational) -> "LinExpr":
        return LinExpr({}, value)

    @staticmethod
    def wrap(value) -> "LinExpr":
        if isinstance(value, LinExpr):
            return value
        return LinExpr({}, _frac(value))

    def __add__(self, other) -> "LinExpr":
        other = LinExpr.wrap(other)
        coeffs = dict(self.coeffs)
        for k, v in other.coeffs.items():
            coeffs[k] = coeffs.get(k, Fraction(0)) + v
        return LinExpr(coeffs, self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> "LinExpr":
        return LinExpr({k: -v for k, v in self.coeffs.items()}, -self.const)

    def __sub__(self, other) -> "LinExpr":
        return self + (-LinExpr.wrap(other))

    def __rsub__(self, other) -> "LinExpr":
        return LinExpr.wrap(other) + (-self)

    def __mul__(self, scalar) -> "LinExpr":
        s = _frac(scalar)
        return LinExpr({k: v * s for k, v in self.coeffs.items()}, self.const * s)

    __rmul__ = __mul__

    def is_constant(self) -> bool:
        return not self.coeffs

    def __repr__(self):
        return f"LinExpr({self.coeffs}, {self.const})"


@dataclass(frozen=True)
class LinIneq:
    """One normalized linear relation ``sum coeff*coord REL rhs``.

    ``terms`` is sorted by coordinate name and scaled so the first nonzero
    coefficient has absolute value one; for equalities its sign is +1.  Rows
    with no terms are constant relations (``0 REL rhs``) and only appear to
    witness infeasibility.
    """

    terms: tuple[tuple[str, Fraction], ...]
    rel: str
    rhs: Fraction

    def __post_init__(self):
        if self.rel not in _RELS:
            raise ValueError(f"bad relation {self.rel!r}")

    @property
    def strict(self) -> bool:
        return self.rel == LT

    def coeff(self, name: str) -> Fraction:
        for k, v in self.terms:
            if k == name:
                return v
        return Fraction(0)

    def coords(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.terms)

    def is_constant(self) -> bool:
        return not self.terms

    def constant_holds(self) -> bool:
        """Truth value of a constant row ``0 REL rhs``."""
        if self.rel == LE:
            return 0 <= self.rhs
        if self.rel == LT:
            return 0 < self.rhs
        return self.rhs == 0

    def negations(self) -> tuple["LinIneq", ...]:
        """Rows whose union is the complement of this row."""
        neg_terms = tuple((k, -v) for k, v in self.terms)
        if self.rel == LE:  # not(e <= c)  <=>  -e < -c
            return (make_row(neg_terms, LT, -self.rhs),)
        if self.rel == LT:  # not(e < c)   <=>  -e <= -c
            return (make_row(neg_terms, LE, -self.rhs),)
        return (  # not(e = c)  <=>  e < c  or  e > c
            make_row(self.terms, LT, self.rhs),
            make_row(neg_terms, LT, -self.rhs),
        )

    def strictified(self) -> tuple["LinIneq", ...]:
        """Rows cutting this one to its interior side (equalities become void)."""
        if self.rel == LE:
            return (make_row(self.terms, LT, self.rhs),)
        if self.rel == LT:
            return (self,)
        # an equality pins a hyperplane: interior side is empty
        return (make_row((), LT, Fraction(0)),)

    def text(self) -> str:
        if not self.terms:
            lhs = "0"
        else:
            lhs = " + ".join(f"{c}*{k}" for k, c in self.terms)
        return f"{lhs} {self.rel} {self.rhs}"

    def __repr__(self):
        return f"<{self.text()}>"


def make_row(terms: Iterable[tuple[str, Rational]], rel: str, rhs: Rational) -> LinIneq:
    """Normalize and build a row: collect terms, sort, scale leading coeff to |1|."""
    acc: dict[str, Fraction] = {}
    for k, v in terms:
        v = _frac(v)
        if v != 0:
            acc[k] = acc.get(k, Fraction(0)) + v
    items = sorted((k, v) for k, v in acc.items() if v != 0)
    rhs = _frac(rhs)
    if items:
        lead = items[0][1]
        scale = Fraction(1) / abs(lead)
        if rel == EQ and lead < 0:
            scale = -scale
        items = [(k, v * scale) for k, v in items]
        rhs = rhs * scale
    return LinIneq(tuple(items), rel, rhs)


def row_from_exprs(lhs: LinExpr, rel: str, rhs) -> LinIneq:
    """Row ``lhs REL rhs`` for LinExpr operands (constants moved to the rhs)."""
    diff = LinExpr.wrap(lhs) - LinExpr.wrap(rhs)
    return make_row(tuple(diff.coeffs.items()), rel, -diff.const)


def le(lhs, rhs) -> LinIneq:
    return row_from_exprs(LinExpr.wrap(lhs), LE, rhs)


def lt(lhs, rhs) -> LinIneq:
    return row_from_exprs(LinExpr.wrap(lhs), LT, rhs)


def ge(lhs, rhs) -> LinIneq:
    return row_from_exprs(-LinExpr.wrap(lhs), LE, -LinExpr.wrap(rhs))


def gt(lhs, rhs) -> LinIneq:
    return row_from_exprs(-LinExpr.wrap(lhs), LT, -LinExpr.wrap(rhs))


def eq(lhs, rhs) -> LinIneq:
    return row_from_exprs(LinExpr.wrap(lhs), EQ, rhs)


@dataclass(frozen=True)
class LinIneqSystem:
    """Conjunction of rows over an ordered set of declared coordinates.

    An empty row tuple denotes the full space.  Systems are immutable values;
    all operations return new systems.
    """

    coords: tuple[str, ...]
    rows: tuple[LinIneq, ...]

    def __post_init__(self):
        declared = set(self.coords)
        if len(declared) != len(self.coords):
            raise ValueError("duplicate coordinate names")
        for r in self.rows:
            for k, _ in r.terms:
                if k not in declared:
                    raise ValueError(f"row references undeclared coordinate {k!r}")

    @property
    def is_trivially_full(self) -> bool:
        return not self.rows

    def with_rows(self, rows: Iterable[LinIneq]) -> "LinIneqSystem":
        return system(self.coords, rows)

    def intersect(self, other: "LinIneqSystem") -> "LinIneqSystem":
        coords = merge_coords(self.coords, other.coords)
        return system(coords, self.rows + other.rows)

    def satisfies(self, point: Mapping[str, Rational | float]) -> bool:
        """Exact membership of a point (missing coordinates read as 0)."""
        for r in self.rows:
            val = sum(_frac(point.get(k, 0)) * c for k, c in r.terms)
            if r.rel == LE:
                ok = val <= r.rhs
            elif r.rel == LT:
                ok = val < r.rhs
            else:
                ok = val == r.rhs
            if not ok:
                return False
        return True

    def canonical_text(self) -> str:
        """Canonical serialization: sorted normalized rows, one per line."""
        if not self.rows:
            return "FULL"
        return "\n".join(sorted(r.text() for r in self.rows))

    def rename(self, mapping: Mapping[str, str]) -> "LinIneqSystem":
        coords = tuple(mapping.get(c, c) for c in self.coords)
        rows = [
            make_row(tuple((mapping.get(k, k), v) for k, v in r.terms), r.rel, r.rhs)
            for r in self.rows
        ]
        return system(coords, rows)

    def __repr__(self):
        body = "; ".join(r.text() for r in self.rows) or "FULL"
        return f"System[{','.join(self.coords)} | {body}]"


def merge_coords(*coord_lists: Sequence[str]) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for lst in coord_lists:
        for c in lst:
            seen.setdefault(c, None)
    return tuple(seen)


def system(coords: Sequence[str], rows: Iterable[LinIneq]) -> LinIneqSystem:
    """Build a system, dropping trivially true rows and syntactic duplicates.

    Rows sharing a coefficient vector are consolidated to the tightest one;
    a violated constant row collapses the system to a canonical empty form.
    """
    best: dict[tuple, LinIneq] = {}
    for r in rows:
        if r.is_constant():
            if r.constant_holds():
                continue
            return LinIneqSystem(tuple(coords), (make_row((), LT, 0),))
        if r.rel == EQ:
            key = (r.terms, EQ, r.rhs)
            prev = best.get((r.terms, EQ))
            if prev is not None and prev.rhs != r.rhs:
                return LinIneqSystem(tuple(coords), (make_row((), LT, 0),))
            best[(r.terms, EQ)] = r
            continue
        key = (r.terms, "ineq")
        prev = best.get(key)
        if prev is None:
            best[key] = r
        else:
            # smaller rhs is tighter; at equal rhs the strict row wins
            cand = min(
                (prev, r), key=lambda q: (q.rhs, 0 if q.strict else 1)
            )
            best[key] = cand
    ordered = tuple(sorted(best.values(), key=lambda q: (q.terms, q.rel, q.rhs)))
    return LinIneqSystem(tuple(coords), ordered)


def full_space(coords: Sequence[str]) -> LinIneqSystem:
    return LinIneqSystem(tuple(coords), ())


@dataclass(frozen=True)
class RegionUnion:
    """Finite union of systems over a common coordinate tuple."""

    parts: tuple[LinIneqSystem, ...]

    def __post_init__(self):
        if not self.parts:
            raise ValueError("RegionUnion needs at least one part")
        coords = self.parts[0].coords
        for p in self.parts[1:]:
            if p.coords != coords:
                raise ValueError("union parts must share a coordinate set")

    @property
    def coords(self) -> tuple[str, ...]:
        return self.parts[0].coords

    def satisfies(self, point) -> bool:
        return any(p.satisfies(point) for p in self.parts)

    def canonical_text(self) -> str:
        return "\n--\n".join(sorted(p.canonical_text() for p in self.parts))

    def __repr__(self):
        return f"Union[{' | '.join(repr(p) for p in self.parts)}]"


def as_union(region: LinIneqSystem | RegionUnion) -> RegionUnion:
    if isinstance(region, RegionUnion):
        return region
    return RegionUnion((region,))


# ---------------------------------------------------------------------------
# Fourier-Motzkin elimination
# ---------------------------------------------------------------------------


def fourier_motzkin_eliminate(sys_: LinIneqSystem, coord: str) -> LinIneqSystem:
    """Exact projection of the solution set onto the remaining coordinates.

    Equalities involving ``coord`` are used for substitution before any
    pair-combining; a combined row is strict iff either parent is strict.
    """
    if coord not in sys_.coords:
        raise KeyError(f"unknown coordinate {coord!r}")
    out_coords = tuple(c for c in sys_.coords if c != coord)

    rows = list(sys_.rows)
    # substitution via an equality row, if one mentions coord
    for i, r in enumerate(rows):
        if r.rel == EQ and r.coeff(coord) != 0:
            a = r.coeff(coord)
            # coord = (rhs - rest)/a
            rest = [(k, v) for k, v in r.terms if k != coord]
            new_rows = []
            for j, q in enumerate(rows):
                if j == i:
                    continue
                b = q.coeff(coord)
                if b == 0:
                    new_rows.append(q)
                    continue
                scale = b / a
                terms = [(k, v) for k, v in q.terms if k != coord]
                terms.extend((k, -v * scale) for k, v in rest)
                new_rows.append(make_row(terms, q.rel, q.rhs - r.rhs * scale))
            return system(out_coords, new_rows)

    zero, pos, neg = [], [], []
    for r in rows:
        a = r.coeff(coord)
        if a == 0:
            zero.append(r)
        elif a > 0:
            pos.append(r)
        else:
            neg.append(r)
    combined = list(zero)
    for p in pos:
        ap = p.coeff(coord)
        for n in neg:
            an = -n.coeff(coord)
            # p/ap + n/an cancels coord
            terms = [(k, v / ap) for k, v in p.terms if k != coord]
            terms.extend((k, v / an) for k, v in n.terms if k != coord)
            rel = LT if (p.strict or n.strict) else LE
            combined.append(make_row(terms, rel, p.rhs / ap + n.rhs / an))
    return system(out_coords, combined)


_empty_cache: dict[str, bool] = {}
_empty_lock = threading.Lock()


def _elimination_order(sys_: LinIneqSystem) -> list[str]:
    """Greedy order: coordinates with the cheapest pos*neg fan-out first."""
    remaining = [c for c in sys_.coords if any(r.coeff(c) != 0 for r in sys_.rows)]

    def cost(c):
        p = sum(1 for r in sys_.rows if r.coeff(c) > 0)
        n = sum(1 for r in sys_.rows if r.coeff(c) < 0)
        return p * n - p - n

    return sorted(remaining, key=cost)


def is_empty(sys_: LinIneqSystem) -> bool:
    """True iff the solution set is empty; strict relations respected exactly."""
    key = ",".join(sys_.coords) + "|" + sys_.canonical_text()
    hit = _empty_cache.get(key)
    if hit is not None:
        return hit
    result = _is_empty_uncached(sys_)
    with _empty_lock:
        _empty_cache[key] = result
    return result


def _is_empty_uncached(sys_: LinIneqSystem) -> bool:
    cur = sys_
    while True:
        for r in cur.rows:
            if r.is_constant() and not r.constant_holds():
                return True
        todo = _elimination_order(cur)
        if not todo:
            return False
        cur = fourier_motzkin_eliminate(cur, todo[0])


def intersect_all(parts: Iterable[LinIneqSystem]) -> LinIneqSystem:
    parts = list(parts)
    coords = merge_coords(*(p.coords for p in parts))
    rows: list[LinIneq] = []
    for p in parts:
        rows.extend(p.rows)
    return system(coords, rows)


def strictify(sys_: LinIneqSystem) -> LinIneqSystem:
    """Replace every row by its interior side (equalities make it empty)."""
    rows: list[LinIneq] = []
    for r in sys_.rows:
        rows.extend(r.strictified())
    return system(sys_.coords, rows)


def has_no_interior(sys_: LinIneqSystem, assuming: LinIneqSystem | None = None) -> bool:
    """True iff the set is thin (no interior point) at every assumed parameter.

    Rows touching coordinates outside the assumption system are strictified;
    assumption rows are kept as given.  Nonemptiness of the result certifies a
    parameter value at which the set has full-dimensional (positive-measure)
    slice, so ``True`` means the set is Lebesgue-null for all assumed values.
    """
    exempt = set(assuming.coords) if assuming is not None else set()
    rows: list[LinIneq] = []
    for r in sys_.rows:
        if r.terms and all(k in exempt for k, _ in r.terms):
            rows.append(r)
        else:
            rows.extend(r.strictified())
    probe = system(sys_.coords, rows)
    if assuming is not None:
        probe = probe.intersect(assuming)
    return is_empty(probe)


def _subset_rec(
    piece: LinIneqSystem,
    parts: tuple[LinIneqSystem, ...],
    ae: bool,
    assuming: LinIneqSystem | None,
) -> bool:
    if ae:
        if has_no_interior(piece, assuming):
            return True
    elif is_empty(piece):
        return True
    if not parts:
        return False
    head, rest = parts[0], parts[1:]
    if head.is_trivially_full:
        return True
    cur = piece
    for r in head.rows:
        for nr in r.negations():
            branch = cur.with_rows(cur.rows + (nr,))
            if not _subset_rec(branch, rest, ae, assuming):
                return False
        cur = cur.with_rows(cur.rows + (r,))
    return True


def is_subset(
    a: LinIneqSystem,
    b: LinIneqSystem | RegionUnion,
    assuming: LinIneqSystem | None = None,
    ae: bool = False,
) -> bool:
    """Decide ``a`` is contained in the union ``b`` by recursive splitting.

    With ``ae=True`` containment is required only up to Lebesgue-null slack
    (leftover pieces must be thin), which is the right notion for measure
    comparisons of closed regions sharing boundary faces.
    """
    union = as_union(b)
    start = a if assuming is None else a.intersect(assuming)
    # declare every referenced coordinate on the working piece and the parts
    coords = merge_coords(start.coords, *(p.coords for p in union.parts))
    start = system(coords, start.rows)
    parts = tuple(system(coords, p.rows) for p in union.parts)
    return _subset_rec(start, parts, ae, assuming)


def union_is_full(
    b: LinIneqSystem | RegionUnion, assuming: LinIneqSystem | None = None, ae: bool = False
) -> bool:
    union = as_union(b)
    return is_subset(full_space(union.coords), union, assuming=assuming, ae=ae)


def regions_equal(
    a: LinIneqSystem | RegionUnion,
    b: LinIneqSystem | RegionUnion,
    assuming: LinIneqSystem | None = None,
    ae: bool = False,
) -> bool:
    ua, ub = as_union(a), as_union(b)
    return all(
        is_subset(p, ub, assuming=assuming, ae=ae) for p in ua.parts
    ) and all(is_subset(q, ua, assuming=assuming, ae=ae) for q in ub.parts)


def canonical_key(obj: LinIneqSystem | RegionUnion) -> str:
    """Deterministic text key; identical normalized row sets share a key."""
    if isinstance(obj, RegionUnion):
        return obj.canonical_text()
    return obj.canonical_text()


def region_complement(region: RegionUnion) -> list[LinIneqSystem]:
    """The complement of a union as a list of disjoint-by-construction pieces."""
    coords = region.coords
    pieces = [full_space(coords)]
    for part in region.parts:
        new_pieces: list[LinIneqSystem] = []
        for piece in pieces:
            prefix: tuple[LinIneq, ...] = ()
            for r in part.rows:
                for nr in r.negations():
                    cand = system(coords, piece.rows + prefix + (nr,))
                    new_pieces.append(cand)
                prefix = prefix + (r,)
        pieces = new_pieces
        if not pieces:
            break
    return pieces


def try_merge_union(
    region: RegionUnion, assuming: LinIneqSystem | None = None
) -> LinIneqSystem | RegionUnion:
    """Collapse a union to a single system when one describes the same set.

    Keeps every row valid across the whole union; if that conjunction is
    covered by the union the two coincide.  Touching intervals merge this
    way, which is all the readable-output path needs.
    """
    if len(region.parts) == 1:
        return region.parts[0]
    rows = []
    seen = set()
    for part in region.parts:
        for r in part.rows:
            if r in seen:
                continue
            seen.add(r)
            if all(
                is_subset(p, RegionUnion((system(region.coords, [r]),)), assuming=assuming)
                for p in region.parts
            ):
                rows.append(r)
    candidate = system(region.coords, rows)
    if is_subset(candidate, region, assuming=assuming):
        return candidate
    return region


def substitute(sys_: LinIneqSystem, values: Mapping[str, Rational]) -> LinIneqSystem:
    """Pin coordinates to exact values; they leave the coordinate list."""
    vals = {k: _frac(v) for k, v in values.items()}
    rows = []
    for r in sys_.rows:
        terms = [(k, v) for k, v in r.terms if k not in vals]
        shift = sum((v * vals[k] for k, v in r.terms if k in vals), Fraction(0))
        rows.append(make_row(terms, r.rel, r.rhs - shift))
    coords = tuple(c for c in sys_.coords if c not in vals)
    return system(coords, rows)


def semantic_prune_rows(
    sys_: LinIneqSystem, assuming: LinIneqSystem | None = None
) -> LinIneqSystem:
    """Drop rows implied by the remaining rows (and the assumption system).

    Exact but quadratic; used where minimal human-readable output matters,
    never required for correctness.
    """
    rows = list(sys_.rows)
    i = 0
    while i < len(rows):
        r = rows[i]
        others = rows[:i] + rows[i + 1 :]
        base = system(sys_.coords, others)
        if assuming is not None:
            base = base.intersect(assuming)
        implied = all(
            is_empty(base.with_rows(base.rows + (nr,))) for nr in r.negations()
        )
        if implied:
            rows.pop(i)
        else:
            i += 1
    return system(sys_.coords, rows)


def prune_union_parts(
    parts: Sequence[LinIneqSystem],
    assuming: LinIneqSystem | None = None,
    ae: bool = False,
) -> tuple[LinIneqSystem, ...]:
    """Remove empty parts and parts covered by the union of the others."""
    kept = [p for p in parts if not is_empty(p if assuming is None else p.intersect(assuming))]
    if not kept:
        coords = parts[0].coords if parts else ()
        return (system(coords, (make_row((), LT, 0),)),)
    i = 0
    while i < len(kept) and len(kept) > 1:
        rest = kept[:i] + kept[i + 1 :]
        if is_subset(kept[i], RegionUnion(tuple(rest)), assuming=assuming, ae=ae):
            kept.pop(i)
        else:
            i += 1
    return tuple(kept)


def parse_system(text: str, coords: Sequence[str]) -> LinIneqSystem:
    """Inverse of ``canonical_text`` for round-tripping golden files."""
    text = text.strip()
    if text == "FULL":
        return full_space(coords)
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        rows.append(_parse_row(line))
    return system(coords, rows)


def _parse_row(line: str) -> LinIneq:
    for rel in (LE, EQ, LT):  # test '<=' before '<'
        tok = f" {rel} "
        if tok in line:
            lhs, rhs = line.split(tok)
            terms = []
            if lhs.strip() != "0":
                for piece in lhs.split(" + "):
                    coef, name = piece.split("*")
                    terms.append((name.strip(), Fraction(coef)))
            return make_row(terms, rel, Fraction(rhs.strip()))
    raise ValueError(f"cannot parse row: {line!r}")
