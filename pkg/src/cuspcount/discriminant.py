"""Discriminant groups, finite quadratic forms and their automorphisms.

The discriminant group of an even lattice L is carried on the invariant
factors of its Gram matrix: generators g_i of order d_i (d_1 | d_2 | ...),
q(g_i) in Q/2Z and b(g_i, g_j) in Q/Z, all exact Fractions in canonical
residues (q in [0,2), b in [0,1)).
"""

from __future__ import annotations

import functools
import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm, prod
from typing import Iterable, Optional

from . import intmat
from .errors import (
    BudgetExceeded,
    LatticeError,
    NotIsometry,
    NotIsotropic,
    SubgroupNotContained,
)
from .intmat import Matrix
from .lattices import EvenLattice, LatticeIsometry, signature

DEFAULT_BUDGET = 10_000
BUDGET_ENV_VAR = "CUSPCOUNT_BUDGET"


def resolve_budget(budget: Optional[int] = None) -> int:
    if budget is not None:
        return int(budget)
    env = os.environ.get(BUDGET_ENV_VAR)
    if env:
        return int(env)
    return DEFAULT_BUDGET


def _prime_factors(n: int) -> tuple:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return tuple(out)


def _p_valuation(n: int, p: int) -> int:
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


@dataclass(frozen=True)
class FiniteQuadraticForm:
    """Finite abelian group with q: A -> Q/2Z and b: A x A -> Q/Z."""

    orders: tuple  # invariant factors > 1, ascending divisibility chain
    q_diag: tuple  # Fraction in [0, 2) per generator
    b_mat: tuple  # Fraction in [0, 1) per generator pair; b_ii == q_i mod 1

    def __post_init__(self):
        k = len(self.orders)
        for i in range(k - 1):
            if self.orders[i + 1] % self.orders[i] != 0:
                raise LatticeError("invariant factors must form a divisibility chain")
        if any(d < 2 for d in self.orders):
            raise LatticeError("invariant factors must be > 1")
        if len(self.q_diag) != k or len(self.b_mat) != k:
            raise LatticeError("q/b tables do not match the generator count")
        for i in range(k):
            qi = self.q_diag[i]
            if not (0 <= qi < 2):
                raise LatticeError("q values must be canonical residues in [0, 2)")
            if (qi * self.orders[i] ** 2) % 2 != 0:
                raise LatticeError("q value incompatible with the generator order")
            if len(self.b_mat[i]) != k:
                raise LatticeError("b matrix is not square")
            if self.b_mat[i][i] != qi % 1:
                raise LatticeError("b(g,g) must reduce q(g) mod 1")
            for j in range(k):
                bij = self.b_mat[i][j]
                if not (0 <= bij < 1) or bij != self.b_mat[j][i]:
                    raise LatticeError("b must be symmetric with residues in [0, 1)")
                if (bij * self.orders[i]) % 1 != 0 or (bij * self.orders[j]) % 1 != 0:
                    raise LatticeError("b value incompatible with the generator orders")

    @property
    def ngens(self) -> int:
        return len(self.orders)

    def order(self) -> int:
        return prod(self.orders) if self.orders else 1

    def exponent(self) -> int:
        return self.orders[-1] if self.orders else 1

    def is_trivial(self) -> bool:
        return not self.orders

    def zero(self) -> tuple:
        return (0,) * self.ngens

    def reduce(self, coords) -> tuple:
        return tuple(int(c) % d for c, d in zip(coords, self.orders))

    def elements(self):
        return (tuple(c) for c in itertools.product(*(range(d) for d in self.orders)))

    def add(self, x, y) -> tuple:
        return tuple((a + b) % d for a, b, d in zip(x, y, self.orders))

    def neg(self, x) -> tuple:
        return tuple((-a) % d for a, d in zip(x, self.orders))

    def scale(self, c, x) -> tuple:
        return tuple((c * a) % d for a, d in zip(x, self.orders))

    def element_order(self, x) -> int:
        o = 1
        for a, d in zip(x, self.orders):
            o = lcm(o, d // gcd(d, a))
        return o

    def q(self, x) -> Fraction:
        total = Fraction(0)
        k = self.ngens
        for i in range(k):
            if x[i]:
                total += x[i] * x[i] * self.q_diag[i]
        for i in range(k):
            if x[i]:
                for j in range(i + 1, k):
                    if x[j]:
                        total += 2 * x[i] * x[j] * self.b_mat[i][j]
        return total % 2

    def b(self, x, y) -> Fraction:
        total = Fraction(0)
        k = self.ngens
        for i in range(k):
            if x[i]:
                for j in range(k):
                    if y[j]:
                        total += x[i] * y[j] * self.b_mat[i][j]
        return total % 1

    def negated(self) -> "FiniteQuadraticForm":
        return FiniteQuadraticForm(
            self.orders,
            tuple((-q) % 2 for q in self.q_diag),
            tuple(tuple((-b) % 1 for b in row) for row in self.b_mat),
        )

    @staticmethod
    def trivial() -> "FiniteQuadraticForm":
        return FiniteQuadraticForm((), (), ())


def min_generators(form: FiniteQuadraticForm) -> int:
    """Minimal number of generators of the underlying group."""
    return form.ngens


@dataclass(frozen=True)
class _DiscData:
    lattice: EvenLattice
    form: FiniteQuadraticForm
    dvec: tuple  # all invariant factors of the Gram matrix
    keep: tuple  # indices with d_i > 1
    u: Matrix  # U G V = diag(dvec)
    v: Matrix

    def lift(self, element) -> tuple:
        """Rational L-coordinates of a representative in the dual lattice."""
        n = self.lattice.rank
        out = [Fraction(0)] * n
        for pos, idx in enumerate(self.keep):
            c = element[pos]
            if c:
                d = self.dvec[idx]
                for row in range(n):
                    out[row] += Fraction(c * self.v[row][idx], d)
        return tuple(out)

    def classify(self, x) -> tuple:
        """Class in the discriminant group of a dual vector x (rational coords)."""
        y = intmat.matvec(self.lattice.gram, x)
        ints = []
        for val in y:
            f = Fraction(val)
            if f.denominator != 1:
                raise LatticeError("vector is not in the dual lattice")
            ints.append(int(f))
        c = intmat.matvec(self.u, tuple(ints))
        return tuple(c[idx] % self.dvec[idx] for idx in self.keep)


@functools.lru_cache(maxsize=None)
def _disc_data(lattice: EvenLattice) -> _DiscData:
    n = lattice.rank
    u, _, d, v, _ = intmat.snf_transforms(lattice.gram) if n else ((), (), (), (), ())
    dvec = tuple(d[i][i] for i in range(n))
    keep = tuple(i for i in range(n) if dvec[i] != 1)
    cols = intmat.columns(v) if n else []
    lifts = [cols[i] for i in keep]
    dkeep = [dvec[i] for i in keep]
    q_diag = []
    b_rows = []
    for a, (va, da) in enumerate(zip(lifts, dkeep)):
        qa = Fraction(lattice.pair(va, va), da * da) % 2
        q_diag.append(qa)
        row = []
        for vb, db in zip(lifts, dkeep):
            row.append(Fraction(lattice.pair(va, vb), da * db) % 1)
        b_rows.append(tuple(row))
    form = FiniteQuadraticForm(tuple(dkeep), tuple(q_diag), tuple(b_rows))
    if form.order() != abs(lattice.det()):
        raise AssertionError("discriminant group order must equal |det|")
    return _DiscData(lattice, form, dvec, keep, u, v)


def discriminant_form(lattice: EvenLattice) -> FiniteQuadraticForm:
    """The finite quadratic form on L^dual / L."""
    return _disc_data(lattice).form


@dataclass(frozen=True)
class FqfIsometry:
    """Automorphism of a finite quadratic form, as a matrix on generators.

    Column j holds the image of generator g_j; row i is reduced mod d_i.
    """

    form: FiniteQuadraticForm
    matrix: Matrix

    def __post_init__(self):
        k = self.form.ngens
        if k and intmat.shape(self.matrix) != (k, k):
            raise NotIsometry("automorphism matrix has wrong shape")
        d = self.form.orders
        reduced = tuple(
            tuple(self.matrix[i][j] % d[i] for j in range(k)) for i in range(k)
        )
        object.__setattr__(self, "matrix", reduced)
        for i in range(k):
            for j in range(k):
                need = d[i] // gcd(d[i], d[j])
                if reduced[i][j] % need != 0:
                    raise NotIsometry("matrix is not a well-defined endomorphism")
        for p in _prime_factors(self.form.exponent()):
            idxs = [i for i in range(k) if d[i] % p == 0]
            sub = tuple(tuple(reduced[i][j] for j in idxs) for i in idxs)
            if intmat.det(sub) % p == 0:
                raise NotIsometry("matrix is not invertible on the group")
        cols = intmat.columns(reduced) if k else []
        for j, col in enumerate(cols):
            col = self.form.reduce(col)
            if self.form.q(col) != self.form.q_diag[j]:
                raise NotIsometry("matrix does not preserve q")
            for i in range(j):
                other = self.form.reduce(cols[i])
                if self.form.b(col, other) != self.form.b_mat[j][i]:
                    raise NotIsometry("matrix does not preserve b")

    def apply(self, x) -> tuple:
        d = self.form.orders
        k = self.form.ngens
        return tuple(sum(self.matrix[i][j] * x[j] for j in range(k)) % d[i] for i in range(k))

    def compose(self, other: "FqfIsometry") -> "FqfIsometry":
        # self after other
        if other.form != self.form:
            raise NotIsometry("cannot compose automorphisms of different forms")
        if not self.form.ngens:
            return self
        return FqfIsometry(self.form, intmat.matmul(self.matrix, other.matrix))

    def inverse(self) -> "FqfIsometry":
        if not self.form.ngens:
            return self
        k = self.form.ngens
        preimage = {self.apply(x): x for x in self.form.elements()}
        cols = [
            preimage[tuple(1 if i == j else 0 for i in range(k))] for j in range(k)
        ]
        return FqfIsometry.from_images(self.form, cols)

    def is_identity(self) -> bool:
        return self == FqfIsometry.identity(self.form)

    @staticmethod
    def identity(form: FiniteQuadraticForm) -> "FqfIsometry":
        k = form.ngens
        return FqfIsometry(form, intmat.identity(k))

    @staticmethod
    def minus_identity(form: FiniteQuadraticForm) -> "FqfIsometry":
        k = form.ngens
        return FqfIsometry(
            form, tuple(tuple(-1 if i == j else 0 for j in range(k)) for i in range(k))
        )

    @staticmethod
    def from_images(form: FiniteQuadraticForm, images) -> "FqfIsometry":
        k = form.ngens
        return FqfIsometry(
            form, tuple(tuple(images[j][i] for j in range(k)) for i in range(k))
        )


@dataclass(frozen=True)
class FqfSubgroup:
    """Subgroup of O(A, q): generators plus the cached closure."""

    form: FiniteQuadraticForm
    generators: tuple
    elements: tuple  # closure, canonically sorted by matrix

    def order(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, iso: FqfIsometry) -> bool:
        return iso in set(self.elements)

    def is_subgroup_of(self, other: "FqfSubgroup") -> bool:
        return self.form == other.form and set(self.elements) <= set(other.elements)


def fqf_subgroup(form: FiniteQuadraticForm, generators: Iterable[FqfIsometry], max_order: int = 1_000_000) -> FqfSubgroup:
    """Close a generator list under composition (finite, so inverses come free)."""
    gens = tuple(generators)
    for g in gens:
        if g.form != form:
            raise NotIsometry("generator acts on a different form")
    ident = FqfIsometry.identity(form)
    seen = {ident}
    queue = [ident]
    while queue:
        x = queue.pop()
        for g in gens:
            y = g.compose(x)
            if y not in seen:
                if len(seen) >= max_order:
                    raise BudgetExceeded("subgroup closure exceeded the cap")
                seen.add(y)
                queue.append(y)
    elements = tuple(sorted(seen, key=lambda iso: iso.matrix))
    return FqfSubgroup(form, gens, elements)


def trivial_subgroup(form: FiniteQuadraticForm) -> FqfSubgroup:
    return fqf_subgroup(form, ())


def plus_minus_subgroup(form: FiniteQuadraticForm) -> FqfSubgroup:
    return fqf_subgroup(form, (FqfIsometry.minus_identity(form),))


def _span_elements(form: FiniteQuadraticForm, gens) -> set:
    span = {form.zero()}
    for g in gens:
        o = form.element_order(g)
        span = {form.add(x, form.scale(c, g)) for x in span for c in range(o)}
    return span


def _image_assignments(form, pool, gen_orders, gen_q, gen_b, span_size):
    """DFS over tuples of images matching order, q and pairwise b constraints.

    pool: candidate target elements (of `form`); gen_b[i][j] is the required
    b-value between images i and j.  Yields image tuples whose span has
    span_size elements.
    """
    info = {}
    for x in pool:
        info[x] = (form.element_order(x), form.q(x))
    k = len(gen_orders)
    images = []

    def place(i):
        if i == k:
            if len(_span_elements(form, images)) == span_size:
                yield tuple(images)
            return
        for x in pool:
            o, qx = info[x]
            if o != gen_orders[i] or qx != gen_q[i]:
                continue
            if any(form.b(x, images[j]) != gen_b[i][j] for j in range(i)):
                continue
            images.append(x)
            yield from place(i + 1)
            images.pop()

    yield from place(0)


def _aut_direct(form: FiniteQuadraticForm) -> list:
    if form.is_trivial():
        return [FqfIsometry.identity(form)]
    pool = sorted(form.elements())
    out = []
    for images in _image_assignments(
        form, pool, form.orders, form.q_diag, form.b_mat, form.order()
    ):
        out.append(FqfIsometry.from_images(form, images))
    return out


def _aut_primary(form: FiniteQuadraticForm) -> list:
    if form.is_trivial():
        return [FqfIsometry.identity(form)]
    k = form.ngens
    exponent = form.exponent()
    primes = _prime_factors(exponent)
    blocks = []
    for p in primes:
        idxs = [i for i in range(k) if form.orders[i] % p == 0]
        pe = [p ** _p_valuation(form.orders[i], p) for i in idxs]
        hgens = []
        for i, q in zip(idxs, pe):
            coords = [0] * k
            coords[i] = form.orders[i] // q
            hgens.append(tuple(coords))
        pool = sorted(_span_elements(form, hgens))
        gen_b = [[form.b(hgens[i], hgens[j]) for j in range(len(hgens))] for i in range(len(hgens))]
        gen_q = [form.q(h) for h in hgens]
        sigmas = list(
            _image_assignments(form, pool, pe, gen_q, gen_b, len(pool))
        )
        blocks.append((p, idxs, pe, sigmas))
    # CRT idempotents stitch the per-prime automorphisms back together
    idem = {}
    for p in primes:
        pe_n = p ** _p_valuation(exponent, p)
        m = exponent // pe_n
        idem[p] = m * pow(m, -1, pe_n) if pe_n > 1 else 0
    out = []
    for combo in itertools.product(*(sigmas for (_, _, _, sigmas) in blocks)):
        cols = [form.zero() for _ in range(k)]
        for (p, idxs, pe, _), sigma in zip(blocks, combo):
            for pos, (i, q) in enumerate(zip(idxs, pe)):
                c = (idem[p] % form.orders[i]) // (form.orders[i] // q)
                cols[i] = form.add(cols[i], form.scale(c, sigma[pos]))
        out.append(FqfIsometry.from_images(form, cols))
    return out


def aut_group(form: FiniteQuadraticForm, budget: Optional[int] = None, method: str = "primary") -> FqfSubgroup:
    """Full O(A, q) by exhaustive enumeration.

    method="primary" enumerates each p-primary block and takes the product;
    method="direct" enumerates generator images on the whole group.  Both
    agree; the direct route exists as a cross-check.
    """
    limit = resolve_budget(budget)
    if form.order() > limit:
        raise BudgetExceeded(f"|A| = {form.order()} exceeds the budget {limit}")
    if method == "direct":
        isos = _aut_direct(form)
    elif method == "primary":
        isos = _aut_primary(form)
    else:
        raise ValueError(f"unknown method {method!r}")
    elements = tuple(sorted(set(isos), key=lambda iso: iso.matrix))
    return FqfSubgroup(form, elements, elements)


def natural_map(lattice: EvenLattice, isometry) -> FqfIsometry:
    """Induced action of an isometry of L on the discriminant form."""
    if isinstance(isometry, LatticeIsometry):
        if isometry.lattice != lattice:
            raise NotIsometry("isometry belongs to a different lattice")
        mat = isometry.matrix
    else:
        mat = intmat.freeze(isometry)
        LatticeIsometry(lattice, mat)  # validates
    data = _disc_data(lattice)
    form = data.form
    cols = []
    for idx in data.keep:
        d = data.dvec[idx]
        w = intmat.matvec(mat, tuple(row[idx] for row in data.v))
        y = intmat.matvec(lattice.gram, w)
        if any(val % d != 0 for val in y):
            raise AssertionError("isometry image left the dual lattice")
        c = intmat.matvec(data.u, tuple(val // d for val in y))
        cols.append(tuple(c[i] % data.dvec[i] for i in data.keep))
    return FqfIsometry.from_images(form, cols)


def isotropic_elements(form: FiniteQuadraticForm, d: int, budget: Optional[int] = None) -> list:
    """All x with q(x) = 0 in Q/2Z and exact order d, in canonical order."""
    limit = resolve_budget(budget)
    if form.order() > limit:
        raise BudgetExceeded(f"|A| = {form.order()} exceeds the budget {limit}")
    if form.exponent() % d != 0:
        return []
    return sorted(
        x for x in form.elements() if form.element_order(x) == d and form.q(x) == 0
    )


def isotropic_subgroups(form: FiniteQuadraticForm, order: int, budget: Optional[int] = None) -> list:
    """All subgroups of the given order on which q vanishes identically."""
    limit = resolve_budget(budget)
    if form.order() > limit:
        raise BudgetExceeded(f"|A| = {form.order()} exceeds the budget {limit}")
    zero = form.zero()
    if order == 1:
        return [(zero,)]
    if form.order() % order != 0:
        return []
    candidates = [
        x
        for x in sorted(form.elements())
        if x != zero and form.q(x) == 0 and order % form.element_order(x) == 0
    ]
    seen = {frozenset({zero})}
    frontier = [frozenset({zero})]
    hits = set()
    while frontier:
        grown = []
        for sub in frontier:
            for x in candidates:
                if x in sub:
                    continue
                span = _span_elements(form, set(sub) | {x})
                size = len(span)
                if size > order or order % size != 0:
                    continue
                if any(form.q(y) != 0 for y in span):
                    continue
                fs = frozenset(span)
                if fs in seen:
                    continue
                seen.add(fs)
                if size == order:
                    hits.add(fs)
                else:
                    grown.append(fs)
        frontier = grown
    return sorted(tuple(sorted(h)) for h in hits)


def overlattice(lattice: EvenLattice, subgroup, budget: Optional[int] = None) -> EvenLattice:
    """Even overlattice of L defined by an isotropic subgroup of A_L."""
    data = _disc_data(lattice)
    form = data.form
    elems = _span_elements(form, [form.reduce(x) for x in subgroup])
    for x in elems:
        if form.q(x) != 0:
            raise NotIsotropic(f"q({x}) != 0; the subgroup is not isotropic")
    n = lattice.rank
    rows = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for x in sorted(elems):
        if x != form.zero():
            rows.append(list(data.lift(x)))
    denom = 1
    for row in rows:
        for val in row:
            denom = lcm(denom, Fraction(val).denominator)
    int_rows = [[int(Fraction(val) * denom) for val in row] for row in rows]
    hnf = intmat.hnf_rows(intmat.freeze(int_rows))
    if len(hnf) != n:
        raise AssertionError("overlattice basis lost rank")
    basis_cols = [tuple(Fraction(hnf[i][j], denom) for j in range(n)) for i in range(n)]
    gram = []
    for i in range(n):
        row = []
        for j in range(n):
            val = lattice.pair(basis_cols[i], basis_cols[j])
            if Fraction(val).denominator != 1:
                raise NotIsotropic("overlattice pairing is not integral")
            row.append(int(val))
        gram.append(row)
    result = EvenLattice(intmat.freeze(gram))
    if abs(lattice.det()) != len(elems) ** 2 * abs(result.det()):
        raise AssertionError("overlattice index law violated")
    return result


def fqf_isomorphism(source: FiniteQuadraticForm, target: FiniteQuadraticForm) -> Optional[Matrix]:
    """Matrix of an isomorphism (A_src, q) -> (A_tgt, q), or None.

    Column j holds the target coordinates of the image of source generator j.
    """
    if source.orders != target.orders:
        return None
    if source.is_trivial():
        return ()
    pool = sorted(target.elements())
    for images in _image_assignments(
        target, pool, source.orders, source.q_diag, source.b_mat, target.order()
    ):
        k = len(images)
        return tuple(tuple(images[j][i] for j in range(k)) for i in range(k))
    return None


@dataclass(frozen=True)
class IsogenyResult:
    isogenus: bool
    witness: Optional[Matrix]

    def __bool__(self) -> bool:
        return self.isogenus


def is_isogenus(left: EvenLattice, right: EvenLattice, budget: Optional[int] = None) -> IsogenyResult:
    """Same signature plus an explicit isomorphism of discriminant forms."""
    limit = resolve_budget(budget)
    if signature(left) != signature(right):
        return IsogenyResult(False, None)
    if abs(left.det()) != abs(right.det()):
        return IsogenyResult(False, None)
    if abs(left.det()) > limit:
        raise BudgetExceeded(f"|A| = {abs(left.det())} exceeds the budget {limit}")
    witness = fqf_isomorphism(discriminant_form(left), discriminant_form(right))
    return IsogenyResult(witness is not None, witness)


def double_coset_count(left: FqfSubgroup, ambient: FqfSubgroup, right: FqfSubgroup) -> int:
    """Number of double cosets left \\ ambient / right by orbit sweeping."""
    if not left.is_subgroup_of(ambient):
        raise SubgroupNotContained("left factor is not contained in the ambient group")
    if not right.is_subgroup_of(ambient):
        raise SubgroupNotContained("right factor is not contained in the ambient group")
    visited = set()
    count = 0
    for x in ambient.elements:
        if x in visited:
            continue
        count += 1
        for l in left.elements:
            lx = l.compose(x)
            for r in right.elements:
                visited.add(lx.compose(r))
    return count


def transport_subgroup(sub: FqfSubgroup, iso_matrix: Matrix, target: FiniteQuadraticForm) -> FqfSubgroup:
    """Conjugate a subgroup of O(A_src) into O(A_tgt) along an isomorphism."""
    source = sub.form
    if source.orders != target.orders:
        raise NotIsometry("transport needs identical invariant factors")
    if source.is_trivial():
        return trivial_subgroup(target)
    # invert the isomorphism by mapping every element once
    image_of = {}
    k = source.ngens
    for x in source.elements():
        img = target.reduce(intmat.matvec(iso_matrix, x))
        image_of[x] = img
    preimage = {img: x for x, img in image_of.items()}
    unit_cols = []
    for j in range(k):
        e = tuple(1 if i == j else 0 for i in range(k))
        unit_cols.append(preimage[e])
    moved = []
    for iso in sub.elements:
        cols = []
        for j in range(k):
            # psi(T(psi^{-1}(e_j)))
            x = unit_cols[j]
            cols.append(image_of[iso.apply(x)])
        moved.append(FqfIsometry.from_images(target, cols))
    elements = tuple(sorted(set(moved), key=lambda iso: iso.matrix))
    return FqfSubgroup(target, elements, elements)
