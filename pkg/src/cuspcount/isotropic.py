"""Primitive isotropic vectors: enumeration, hyperbolic splittings,
quotients l^perp/Zl, transvections and the stabilizer structure of O(L)^l.

Isotropic enumeration is height-bounded and every result is labelled with
its window; the sets I^d(L) are infinite, so no output ever claims global
completeness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from . import intmat
from .discriminant import is_isogenus, resolve_budget
from .errors import (
    DivisorNotOne,
    DoesNotFixL,
    FImagesDiffer,
    NoneFoundInWindow,
    NotIsotropic,
    NotIsotropicPlane,
    VectorNotInComplement,
    ZeroVector,
)
from .intmat import Matrix
from .lattices import (
    Embedding,
    EvenLattice,
    LatticeIsometry,
    LatticeMap,
    divisor,
    is_indefinite,
    is_primitive,
    restricted_gram,
)


@dataclass(frozen=True)
class IsotropicVector:
    vector: tuple
    divisor: int


@dataclass(frozen=True)
class IsotropicPlane:
    """Primitive isotropic rank-2 sublattice spanned by two vectors."""

    lattice: EvenLattice
    basis: tuple  # pair of coordinate tuples

    def __post_init__(self):
        v1, v2 = self.basis
        L = self.lattice
        if L.norm(v1) != 0 or L.norm(v2) != 0 or L.pair(v1, v2) != 0:
            raise NotIsotropicPlane("basis vectors do not span an isotropic plane")
        cols = intmat.from_columns([v1, v2])
        diag = intmat.smith_diagonal(cols)
        if len(diag) != 2 or diag != (1, 1):
            raise NotIsotropicPlane("the span is not a primitive rank-2 sublattice")


@dataclass(frozen=True)
class HyperbolicSplit:
    """L = U + complement, with (e, f) = 1 and f isotropic of divisor 1."""

    lattice: EvenLattice
    e_image: tuple
    f_image: tuple
    complement: EvenLattice
    complement_columns: Matrix

    def basis_matrix(self) -> Matrix:
        cols = [self.f_image, self.e_image] + intmat.columns(self.complement_columns)
        return intmat.from_columns(cols)

    def in_complement(self, v) -> Optional[tuple]:
        """Complement coordinates of an ambient vector, or None."""
        if all(x == 0 for x in v):
            return (0,) * self.complement.rank
        if self.complement.rank == 0:
            return None
        return intmat.solve_integer(self.complement_columns, v)

    def to_ambient(self, comp_coords) -> tuple:
        if self.complement.rank == 0:
            return (0,) * self.lattice.rank
        return intmat.matvec(self.complement_columns, comp_coords)


def _normalize_sign(v):
    for x in v:
        if x > 0:
            return v
        if x < 0:
            return tuple(-y for y in v)
    return v


def enumerate_isotropic(lattice: EvenLattice, height_bound: int) -> list:
    """Primitive isotropic vectors with max |coordinate| <= height_bound.

    Deduplicated up to sign (first nonzero coordinate positive), tagged with
    their divisors, in lexicographic order.  Definite lattices have none.
    """
    if height_bound < 1:
        raise ZeroVector("height bound must be positive")
    n = lattice.rank
    if n == 0 or not is_indefinite(lattice):
        return []
    found = set()
    for coords in itertools.product(range(-height_bound, height_bound + 1), repeat=n):
        if all(x == 0 for x in coords):
            continue
        if intmat.vec_gcd(coords) != 1:
            continue
        v = _normalize_sign(coords)
        if v in found:
            continue
        if lattice.norm(v) == 0:
            found.add(v)
    return [IsotropicVector(v, divisor(lattice, v)) for v in sorted(found)]


def _as_vector(lattice, l):
    v = l.vector if isinstance(l, IsotropicVector) else tuple(int(x) for x in l)
    if len(v) != lattice.rank or all(x == 0 for x in v):
        raise ZeroVector("need a nonzero vector of matching length")
    if lattice.norm(v) != 0:
        raise NotIsotropic(f"({list(v)}, same) != 0")
    if not is_primitive(lattice, v):
        raise NotIsotropic("vector is not primitive")
    return v


def _find_dual_partner(lattice: EvenLattice, l, height_cap: int = 3):
    """First m' in expanding lexicographic boxes with (l, m') = 1."""
    w = intmat.matvec(lattice.gram, l)
    n = lattice.rank
    for height in range(1, height_cap + 1):
        for coords in itertools.product(range(-height, height + 1), repeat=n):
            if max(abs(x) for x in coords) != height:
                continue
            if sum(a * b for a, b in zip(w, coords)) == 1:
                return tuple(coords)
    # xgcd fallback: combine coordinates until the pairing ideal reaches 1
    coeffs = [0] * n
    g = 0
    for i, wi in enumerate(w):
        gnew, x, y = intmat.xgcd(g, wi)
        for j in range(i):
            coeffs[j] *= x
        coeffs[i] = y
        g = gnew
    if g != 1:
        raise DivisorNotOne(f"div = {g}, no dual partner exists")
    return tuple(coeffs)


def hyperbolic_completion(lattice: EvenLattice, l) -> HyperbolicSplit:
    """Split off a hyperbolic plane through a divisor-1 isotropic vector l."""
    v = _as_vector(lattice, l)
    if divisor(lattice, v) != 1:
        raise DivisorNotOne(f"div({list(v)}) = {divisor(lattice, v)} != 1")
    m_prime = _find_dual_partner(lattice, v)
    half_norm = lattice.norm(m_prime) // 2
    m = tuple(a - half_norm * b for a, b in zip(m_prime, v))
    if lattice.norm(m) != 0 or lattice.pair(v, m) != 1:
        raise AssertionError("hyperbolic partner correction failed")
    rows = intmat.freeze([intmat.matvec(lattice.gram, v), intmat.matvec(lattice.gram, m)])
    comp_cols = intmat.kernel_basis(rows)
    complement = EvenLattice(restricted_gram(lattice, comp_cols))
    split = HyperbolicSplit(lattice, m, v, complement, comp_cols)
    if abs(intmat.det(split.basis_matrix())) != 1:
        raise AssertionError("hyperbolic plane failed to split off")
    return split


def split_from_pair(lattice: EvenLattice, l, m) -> HyperbolicSplit:
    """Hyperbolic split with a caller-chosen pair (l, m), (l, m) = 1."""
    v = _as_vector(lattice, l)
    m = tuple(int(x) for x in m)
    if lattice.norm(m) != 0 or lattice.pair(v, m) != 1:
        raise NotIsotropic("(l, m) is not a hyperbolic pair")
    rows = intmat.freeze([intmat.matvec(lattice.gram, v), intmat.matvec(lattice.gram, m)])
    comp_cols = intmat.kernel_basis(rows)
    split = HyperbolicSplit(lattice, m, v, EvenLattice(restricted_gram(lattice, comp_cols)), comp_cols)
    if abs(intmat.det(split.basis_matrix())) != 1:
        raise NotIsotropic("the pair does not split off a unimodular plane")
    return split


def quotient_lattice(lattice: EvenLattice, l) -> EvenLattice:
    """The even lattice l^perp / Zl, on a canonical integral basis."""
    v = _as_vector(lattice, l)
    perp = intmat.kernel_basis((intmat.matvec(lattice.gram, v),))
    coords = intmat.solve_integer(perp, v)
    if coords is None:
        raise AssertionError("l must lie in its own orthogonal complement")
    k = intmat.shape(perp)[1]
    if k == 1:
        return EvenLattice(())
    # extend the (primitive) coordinate vector of l to a basis of Z^k
    col = intmat.from_columns([coords])
    _, uinv, d, _, _ = intmat.snf_transforms(col)
    if d[0][0] != 1:
        raise AssertionError("l is not primitive inside its complement")
    rest = intmat.columns(uinv)[1:]
    quotient_cols = [intmat.matvec(perp, c) for c in rest]
    cols = intmat.from_columns(quotient_cols)
    return EvenLattice(restricted_gram(lattice, cols))


def check_div_square(lattice: EvenLattice, l) -> bool:
    """d^2 * |A_{l^perp/Zl}| = |A_L| for primitive isotropic l."""
    v = _as_vector(lattice, l)
    d = divisor(lattice, v)
    quot = quotient_lattice(lattice, v)
    return d * d * abs(quot.det()) == abs(lattice.det())


def transvection(split: HyperbolicSplit, v) -> LatticeIsometry:
    """The isometry fixing f that shears e by a complement vector v."""
    lattice = split.lattice
    v = tuple(int(x) for x in v)
    if split.in_complement(v) is None:
        raise VectorNotInComplement(f"{list(v)} is not in the complement")
    l, m = split.f_image, split.e_image
    half_norm = lattice.norm(v) // 2
    images = [l, tuple(a + b - half_norm * c for a, b, c in zip(m, v, l))]
    for col in intmat.columns(split.complement_columns):
        pairing = lattice.pair(col, v)
        images.append(tuple(a - pairing * b for a, b in zip(col, l)))
    basis = split.basis_matrix()
    mat = intmat.matmul(intmat.from_columns(images), intmat.inv_unimodular(basis))
    return LatticeIsometry(lattice, mat)


def stabilizer_decompose(split: HyperbolicSplit, g: LatticeIsometry):
    """Write g in O(L)^f uniquely as (id + h on the split) after a transvection.

    Returns (h, v): h an isometry of the complement, v an ambient vector in
    the complement, with g = extend(h) . T_v.
    """
    lattice = split.lattice
    if g.lattice != lattice:
        raise DoesNotFixL("isometry acts on a different lattice")
    if g.apply(split.f_image) != split.f_image:
        raise DoesNotFixL("isometry does not fix the distinguished isotropic vector")
    basis = split.basis_matrix()
    conj = intmat.matmul(
        intmat.matmul(intmat.inv_unimodular(basis), g.matrix), basis
    )
    k = split.complement.rank
    if conj[1][1] != 1 or any(conj[1][2 + j] != 0 for j in range(k)):
        raise AssertionError("stabilizer block structure violated")
    w = tuple(conj[2 + i][1] for i in range(k))
    h_mat = tuple(tuple(conj[2 + i][2 + j] for j in range(k)) for i in range(k))
    h = LatticeIsometry(split.complement, h_mat)
    v_comp = intmat.matvec(intmat.inv_unimodular(h_mat), w) if k else ()
    v = split.to_ambient(v_comp)
    return h, v


def stabilizer_compose(split: HyperbolicSplit, h: LatticeIsometry, v) -> LatticeIsometry:
    """Rebuild the stabilizer element (id on U + h) . T_v."""
    lattice = split.lattice
    k = split.complement.rank
    images = [split.f_image, split.e_image]
    for j in range(k):
        col_h = tuple(h.matrix[i][j] for i in range(k))
        images.append(split.to_ambient(col_h))
    basis = split.basis_matrix()
    block = LatticeIsometry(
        lattice,
        intmat.matmul(intmat.from_columns(images), intmat.inv_unimodular(basis)),
    )
    return block.compose(transvection(split, v))


def _hyperbolic_embedding_check(lattice: EvenLattice, emb: Embedding):
    if emb.target != lattice:
        raise FImagesDiffer("embedding targets a different lattice")
    if emb.source_gram() != ((0, 1), (1, 0)):
        raise FImagesDiffer("embedding does not pull back to the hyperbolic plane")


def projection_isometry(lattice: EvenLattice, phi1: Embedding, phi2: Embedding) -> LatticeMap:
    """Projection between the complements of two U-embeddings sharing f.

    Columns of each embedding are the images of (e, f).  The projection of
    phi1's complement onto phi2's complement along phi2(U) is an isometry,
    returned with its exact matrix.
    """
    _hyperbolic_embedding_check(lattice, phi1)
    _hyperbolic_embedding_check(lattice, phi2)
    cols1 = intmat.columns(phi1.matrix)
    cols2 = intmat.columns(phi2.matrix)
    if cols1[1] != cols2[1]:
        raise FImagesDiffer("the two embeddings send f to different vectors")
    comps = []
    for emb in (phi1, phi2):
        rows = intmat.matmul(intmat.transpose(emb.matrix), lattice.gram)
        cols = intmat.kernel_basis(rows)
        comps.append((EvenLattice(restricted_gram(lattice, cols)), cols))
    (k1, cols_k1), (k2, cols_k2) = comps
    e2, f2 = cols2
    out_cols = []
    for x in intmat.columns(cols_k1):
        a = lattice.pair(x, f2)
        b = lattice.pair(x, e2)
        y = tuple(xi - a * ei - b * fi for xi, ei, fi in zip(x, e2, f2))
        coords = intmat.solve_integer(cols_k2, y)
        if coords is None:
            raise AssertionError("projected vector left the second complement")
        out_cols.append(coords)
    return LatticeMap(k1, k2, intmat.from_columns(out_cols))


@dataclass(frozen=True)
class IsotropicOrbitClass:
    """Window classification cell: vectors sharing the genus of l^perp/Zl."""

    representative: IsotropicVector
    vectors: tuple
    quotient: EvenLattice


def classify_i1_orbits(
    lattice: EvenLattice, height_bound: int, budget: Optional[int] = None
) -> list:
    """Group the divisor-1 isotropic vectors in the window by quotient genus.

    Same genus class of l^perp/Zl means same O(L)-orbit, so the cells are
    orbit classes (complete only relative to the window).
    """
    limit = resolve_budget(budget)
    vectors = [iv for iv in enumerate_isotropic(lattice, height_bound) if iv.divisor == 1]
    if not vectors:
        raise NoneFoundInWindow(
            f"no divisor-1 isotropic vector with |coords| <= {height_bound}"
        )
    classes = []
    for iv in vectors:
        quot = quotient_lattice(lattice, iv.vector)
        for idx, (rep, members, rep_quot) in enumerate(classes):
            if is_isogenus(rep_quot, quot, budget=limit):
                classes[idx] = (rep, members + [iv], rep_quot)
                break
        else:
            classes.append((iv, [iv], quot))
    return [
        IsotropicOrbitClass(rep, tuple(members), quot) for rep, members, quot in classes
    ]


def is_standard_plane(lattice: EvenLattice, plane: IsotropicPlane):
    """Decide whether some e in L pairs onto Z with the plane; witness included.

    The witness is adjusted inside e + E to be isotropic, which is always
    possible once the pairing ideal is all of Z.
    """
    if plane.lattice != lattice:
        raise NotIsotropicPlane("plane lives in a different lattice")
    v1, v2 = plane.basis
    rows = intmat.freeze(
        [intmat.matvec(lattice.gram, v1), intmat.matvec(lattice.gram, v2)]
    )
    _, _, d, v, _ = intmat.snf_transforms(rows)
    if d[0][0] != 1:
        return False, None
    e = tuple(row[0] for row in v)
    a = lattice.pair(e, v1)
    b = lattice.pair(e, v2)
    g, x, y = intmat.xgcd(a, b)
    if g != 1:
        raise AssertionError("SNF said the pairing ideal is Z but gcd disagrees")
    # e' = e + alpha v1 + beta v2 with (e', e') = 0
    target = -(lattice.norm(e) // 2)
    alpha, beta = x * target, y * target
    e_iso = tuple(ei + alpha * a1 + beta * a2 for ei, a1, a2 in zip(e, v1, v2))
    if lattice.norm(e_iso) != 0:
        raise AssertionError("isotropic correction of the witness failed")
    if intmat.vec_gcd((lattice.pair(e_iso, v1), lattice.pair(e_iso, v2))) != 1:
        raise AssertionError("witness lost the unit pairing ideal")
    return True, e_iso
