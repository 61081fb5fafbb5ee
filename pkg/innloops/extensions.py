"""
Nuclear extensions of loops by elementary abelian 2-groups.

A nuclear extension K x_{theta,phi} F lives on K x F with product

    (a, x) o (b, y) = (a + phi_x(b) + theta(x, y), xy)

where K = F_2^r is written additively (kernel elements are ints, XOR is the
group operation), phi: F -> Aut K is a homomorphism and theta is a
normalized cocycle. The element (a, x) has index a + |K| * x, so the kernel
varies fastest and (0, 1) is the identity 0.

The module also houses the named cocycles: the order-128 loop C, the D8
family theta_t, the crosshomomorphism group G-bar and the power-associative
loop of order 64.
"""

import re
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import gf2
from .loop_core import (LoopTable, SubloopMask, is_normal, nuclei, quotient_with_labels,
                        validate_table)
from .shared.errors import (ActionsDoNotCommute, BadAction, BadCocycle, BadSection,
                            KernelNotNormal, KernelNotNuclear, LoopTableError)
from .shared.logging_config import get_logger

logger = get_logger(__name__)


# Kernels and factors

@dataclass(frozen=True)
class AbelianKernel:
    """The elementary abelian group F_2^rank; element v is the int with bits v_j."""
    rank: int

    @property
    def order(self) -> int:
        return 1 << self.rank

    def elements(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)

    def vector(self, value: int) -> Tuple[int, ...]:
        return tuple(int(b) for b in gf2.int_to_vec(value, self.rank))

    def element(self, *coords: int) -> int:
        if len(coords) != self.rank:
            raise ValueError(f"expected {self.rank} coordinates, got {len(coords)}")
        return gf2.vec_to_int(coords)


def elementary_abelian(rank: int, name: Optional[str] = None) -> LoopTable:
    x = np.arange(1 << rank)
    return LoopTable(x[:, None] ^ x[None, :], name=name or f"E{1 << rank}")


def direct_product(F1: LoopTable, F2: LoopTable, name: Optional[str] = None) -> LoopTable:
    """F1 x F2 with (x1, x2) at index x1 + |F1| x2."""
    n1 = F1.n
    idx = np.arange(n1 * F2.n)
    a, b = idx % n1, idx // n1
    table = F1.table[a[:, None], a[None, :]] + n1 * F2.table[b[:, None], b[None, :]]
    return LoopTable(table, name=name)


def _d8_permutations() -> Dict[Tuple[int, int, int], Tuple[int, ...]]:
    # D8 acting on the corners of a square; words are read left to right
    rho = (1, 2, 3, 0)
    sigma = (0, 3, 2, 1)
    identity = (0, 1, 2, 3)

    def mul(p, q):
        return tuple(q[i] for i in p)

    def power(p, e):
        return reduce(mul, [p] * e, identity)

    sigma_rho = mul(sigma, rho)
    return {(i, j, k): mul(mul(power(rho, 2 * i), power(sigma, j)), power(sigma_rho, k))
            for i in (0, 1) for j in (0, 1) for k in (0, 1)}


def dihedral8() -> LoopTable:
    """D8 in the normal form rho^{2i} sigma^j (sigma rho)^k at index i + 2j + 4k."""
    perms = _d8_permutations()
    index = {perm: i + 2 * j + 4 * k for (i, j, k), perm in perms.items()}
    if len(index) != 8:
        raise LoopTableError("dihedral normal form is not injective")
    table = np.zeros((8, 8), dtype=np.int64)
    for (i, j, k), p in perms.items():
        for (i2, j2, k2), q in perms.items():
            table[i + 2 * j + 4 * k, i2 + 2 * j2 + 4 * k2] = index[tuple(q[t] for t in p)]
    return validate_table(table, name="D8")


def d8_factor() -> LoopTable:
    """F = F_2 x D8 with (l, rho^{2i} sigma^j (sigma rho)^k) at index l + 2(i + 2j + 4k)."""
    return direct_product(elementary_abelian(1), dihedral8(), name="F2xD8")


def d8_coordinates(x) -> Tuple[Any, Any, Any, Any]:
    """(l, i, j, k) of F_2 x D8 indices; works elementwise on arrays."""
    x = np.asarray(x)
    return x & 1, (x >> 1) & 1, (x >> 2) & 1, (x >> 3) & 1


# Actions and cocycles

class Action:
    """A homomorphism phi: F -> Aut K, stored as an image lookup table.

    ``table[x, a]`` is phi_x(a). Verification checks phi_1 = id, that every
    phi_x is an additive bijection of K and that phi_{xy} = phi_x phi_y.
    """

    def __init__(self, factor: LoopTable, kernel: AbelianKernel, table: np.ndarray,
                 verify: bool = True):
        table = np.array(table, dtype=np.int64)
        if table.shape != (factor.n, kernel.order):
            raise BadAction(f"action table has shape {table.shape}, "
                            f"expected {(factor.n, kernel.order)}")
        table.setflags(write=False)
        self.factor = factor
        self.kernel = kernel
        self.table = table
        if verify:
            self.verify()

    @classmethod
    def from_matrices(cls, factor: LoopTable, kernel: AbelianKernel,
                      matrices: Sequence[np.ndarray], verify: bool = True) -> "Action":
        if len(matrices) != factor.n:
            raise BadAction(f"expected {factor.n} matrices, got {len(matrices)}")
        table = np.stack([gf2.lookup_table(np.asarray(m, dtype=np.uint8)) for m in matrices])
        return cls(factor, kernel, table, verify=verify)

    @classmethod
    def trivial(cls, factor: LoopTable, kernel: AbelianKernel) -> "Action":
        return cls(factor, kernel, np.tile(kernel.elements(), (factor.n, 1)), verify=False)

    def __call__(self, x: int, a: int) -> int:
        return int(self.table[x, a])

    def matrix(self, x: int) -> np.ndarray:
        return gf2.matrix_from_images([int(self.table[x, 1 << j]) for j in range(self.kernel.rank)],
                                      self.kernel.rank)

    def verify(self) -> None:
        table = self.table
        K = self.kernel.elements()
        if not np.array_equal(table[0], K):
            raise BadAction("phi of the identity is not the identity map")
        if not (np.sort(table, axis=1) == K[None, :]).all():
            raise BadAction("some phi_x is not a bijection of the kernel")
        additive = table[:, K[:, None] ^ K[None, :]] == table[:, K][:, :, None] ^ table[:, K][:, None, :]
        if not additive.all():
            raise BadAction("some phi_x is not additive")
        Ft = self.factor.table
        composed = np.take_along_axis(table[:, None, :].repeat(self.factor.n, axis=1),
                                      table[None, :, :].repeat(self.factor.n, axis=0), axis=2)
        if not np.array_equal(table[Ft], composed):
            raise BadAction("phi is not a homomorphism: phi_{xy} != phi_x phi_y")


class Cocycle:
    """A normalized map theta: F x F -> K as an |F| x |F| table of kernel ints."""

    def __init__(self, kernel: AbelianKernel, values: np.ndarray,
                 labels: Optional[Sequence[str]] = None, verify: bool = True):
        values = np.array(values, dtype=np.int64)
        values.setflags(write=False)
        self.kernel = kernel
        self.values = values
        self.labels = list(labels) if labels is not None else None
        if verify:
            self.verify()

    @classmethod
    def trivial(cls, kernel: AbelianKernel, factor_order: int) -> "Cocycle":
        return cls(kernel, np.zeros((factor_order, factor_order), dtype=np.int64))

    @classmethod
    def from_function(cls, kernel: AbelianKernel, factor_order: int,
                      func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "Cocycle":
        """Tabulate ``func(x, y)`` evaluated on broadcast index grids."""
        x = np.arange(factor_order)
        return cls(kernel, np.broadcast_to(func(x[:, None], x[None, :]),
                                           (factor_order, factor_order)))

    @property
    def factor_order(self) -> int:
        return int(self.values.shape[0])

    def __call__(self, x: int, y: int) -> int:
        return int(self.values[x, y])

    def verify(self) -> None:
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise BadCocycle(f"cocycle table must be square, got shape {v.shape}")
        if v.min(initial=0) < 0 or v.max(initial=0) >= self.kernel.order:
            raise BadCocycle("cocycle values must be kernel elements")
        if v[0].any() or v[:, 0].any():
            raise BadCocycle("cocycle is not normalized: theta(x, 1) or theta(1, x) != 1")
        if self.labels is not None and len(self.labels) != v.shape[0]:
            raise BadCocycle("one label per factor element is required")

    def to_document(self) -> Dict[str, Any]:
        labels = self.labels or [str(x) for x in range(self.factor_order)]
        return {
            "kernel_rank": self.kernel.rank,
            "labels": labels,
            "values": {labels[x]: {labels[y]: list(self.kernel.vector(int(self.values[x, y])))
                                   for y in range(self.factor_order)}
                       for x in range(self.factor_order)},
        }

    @classmethod
    def from_document(cls, doc: Dict[str, Any]) -> "Cocycle":
        try:
            kernel = AbelianKernel(int(doc["kernel_rank"]))
            labels = list(doc["labels"])
            rows = doc["values"]
            values = [[gf2.vec_to_int(rows[lx][ly]) for ly in labels] for lx in labels]
        except (KeyError, TypeError, ValueError) as e:
            raise BadCocycle(f"malformed cocycle document: {e}") from e
        return cls(kernel, np.array(values, dtype=np.int64), labels=labels)


@dataclass
class ExtensionData:
    kernel: AbelianKernel
    factor: LoopTable
    action: Action
    cocycle: Cocycle
    name: Optional[str] = None

    def build(self, verify: bool = True) -> LoopTable:
        return nuclear_extension(self.kernel, self.factor, self.action, self.cocycle,
                                 verify=verify, name=self.name)


def nuclear_extension(kernel: AbelianKernel, factor: LoopTable, action: Action,
                      cocycle: Cocycle, verify: bool = True,
                      name: Optional[str] = None) -> LoopTable:
    """The loop K x_{theta,phi} F."""
    if action.factor.n != factor.n or action.kernel != kernel:
        raise BadAction("action does not match the kernel and factor")
    if cocycle.factor_order != factor.n or cocycle.kernel != kernel:
        raise BadCocycle("cocycle does not match the kernel and factor")
    k = kernel.order
    u = np.arange(k * factor.n)
    a, x = u % k, u // k
    kernel_part = (a[:, None] ^ action.table[x[:, None], a[None, :]]
                   ^ cocycle.values[x[:, None], x[None, :]])
    table = kernel_part + k * factor.table[x[:, None], x[None, :]]
    Q = validate_table(table, name=name)
    if verify:
        K = SubloopMask(Q, np.arange(k))
        if not K.issubset(nuclei(Q)[3]):
            raise KernelNotNuclear("kernel block is not contained in the nucleus")
        if not is_normal(Q, K):
            raise KernelNotNormal("kernel block is not normal")
    logger.info("Nuclear extension built", name=name, kernel_order=k, factor_order=factor.n)
    return Q


def is_group_cocycle(factor: LoopTable, action: Action, cocycle: Cocycle) -> bool:
    """theta(x,y) + theta(xy,z) = phi_x theta(y,z) + theta(x,yz) for all x, y, z.

    For a group F this is exactly associativity of the extension.
    """
    Ft = factor.table
    th = cocycle.values
    x = np.arange(factor.n)[:, None, None]
    y = np.arange(factor.n)[None, :, None]
    z = np.arange(factor.n)[None, None, :]
    lhs = th[x, y] ^ th[Ft[x, y], z]
    rhs = action.table[x, th[y, z]] ^ th[x, Ft[y, z]]
    return bool(np.array_equal(lhs, rhs))


# Decomposition

def nucleus_action(Q: LoopTable, K: SubloopMask) -> np.ndarray:
    """T_x restricted to K for every x of Q, as rows of K-elements in Q's labels.

    ``out[x, i]`` is T_x(K[i]). Checks that each restriction is an automorphism
    of K and that x -> T_x|K is a homomorphism.
    """
    if not K.issubset(nuclei(Q)[3]):
        raise KernelNotNuclear("subloop is not contained in the nucleus")
    if not is_normal(Q, K):
        raise KernelNotNormal("subloop is not normal")
    T, rd = Q.table, Q.rdiv
    ks = K.elements
    pos = np.full(Q.n, -1, dtype=np.int64)
    pos[ks] = np.arange(ks.size)
    out = rd[T[:, ks], np.arange(Q.n)[:, None]]
    if not K.members[out].all():
        raise KernelNotNormal("inner mapping T_x leaves the subloop")
    Tk = T[np.ix_(ks, ks)]
    images = pos[out]
    if not np.array_equal(out[:, pos[Tk]], T[out[:, :, None], out[:, None, :]]):
        raise BadAction("T_x restricted to the subloop is not a homomorphism")
    composed = np.take_along_axis(images[:, None, :].repeat(Q.n, axis=1),
                                  images[None, :, :].repeat(Q.n, axis=0), axis=2)
    if not np.array_equal(images[T], composed):
        raise BadAction("x -> T_x restricted to the subloop is not a homomorphism")
    return out


def _kernel_coordinates(Q: LoopTable, K: SubloopMask) -> Tuple[np.ndarray, List[int]]:
    """Identify K with F_2^r: coord[q] for q in K (else -1) and the chosen basis."""
    T = Q.table
    coord = np.full(Q.n, -1, dtype=np.int64)
    coord[0] = 0
    spanned = [0]
    basis: List[int] = []
    for g in K.elements:
        if coord[g] >= 0:
            continue
        bit = 1 << len(basis)
        basis.append(int(g))
        new = T[np.array(spanned), g]
        coord[new] = coord[np.array(spanned)] | bit
        spanned.extend(int(e) for e in new)
    return coord, basis


@dataclass
class NuclearDecomposition:
    """Action, cocycle and the isomorphism psi(u) = (a, x) onto the rebuilt extension."""
    data: ExtensionData
    labels: np.ndarray
    section: np.ndarray
    basis: List[int]
    psi: np.ndarray = field(repr=False)

    @property
    def action(self) -> Action:
        return self.data.action

    @property
    def cocycle(self) -> Cocycle:
        return self.data.cocycle


def decompose_nuclear(Q: LoopTable, K: SubloopMask,
                      section: Optional[Sequence[int]] = None) -> NuclearDecomposition:
    """Recover (phi, theta) with Q isomorphic to K x_{theta,phi} Q/K.

    ``section`` lists one representative per coset in the coset order of
    ``coset_partition``; coset minima are used when omitted.
    """
    nuc = nuclei(Q)[3]
    if not K.issubset(nuc):
        raise KernelNotNuclear("kernel is not contained in the nucleus")
    if not is_normal(Q, K):
        raise KernelNotNormal("kernel is not normal")
    T, rd = Q.table, Q.rdiv
    ks = K.elements
    sub = T[np.ix_(ks, ks)]
    if not np.array_equal(sub, sub.T) or (np.diagonal(sub) != 0).any():
        raise KernelNotNuclear("kernel is not an elementary abelian 2-group")

    F, labels = quotient_with_labels(Q, K)
    if section is None:
        ell = np.array([int(np.flatnonzero(labels == c)[0]) for c in range(F.n)], dtype=np.int64)
    else:
        ell = np.asarray(section, dtype=np.int64)
        if ell.shape != (F.n,) or ell[0] != 0 or not np.array_equal(labels[ell], np.arange(F.n)):
            raise BadSection("section must pick one element per coset with l(1) = 1")

    coord, basis = _kernel_coordinates(Q, K)
    kernel = AbelianKernel(len(basis))
    kernel_elements = np.empty(kernel.order, dtype=np.int64)
    kernel_elements[coord[ks]] = ks

    phi = coord[rd[T[ell[:, None], kernel_elements[None, :]], ell[:, None]]]
    theta = coord[rd[T[ell[:, None], ell[None, :]], ell[F.table]]]
    if (phi < 0).any() or (theta < 0).any():
        raise KernelNotNormal("section products leave the kernel")
    action = Action(F, kernel, phi)
    cocycle = Cocycle(kernel, theta)
    data = ExtensionData(kernel, F, action, cocycle, name=f"{Q.name or 'Q'}-rebuilt")
    rebuilt = data.build(verify=False)

    psi = coord[rd[np.arange(Q.n), ell[labels]]] + kernel.order * labels
    if not np.array_equal(rebuilt.table[psi[:, None], psi[None, :]], psi[T]):
        raise BadSection("psi(u) = (a, x) is not an isomorphism onto the extension")
    logger.info("Loop decomposed as nuclear extension", order=Q.n,
                kernel_order=kernel.order, factor_order=F.n)
    return NuclearDecomposition(data=data, labels=labels, section=ell, basis=basis, psi=psi)


# Crosshomomorphisms

@dataclass(frozen=True)
class Crosshom:
    """gamma: F2 -> K with gamma(1) = 0, and a scalar action psi: F1 -> End K."""
    gamma: Tuple[int, ...]
    psi: Tuple[Tuple[int, ...], ...]

    @classmethod
    def scalar(cls, gamma: Sequence[int], rank: int) -> "Crosshom":
        """psi as multiplication by the field F_2 = {0, 1}."""
        K = AbelianKernel(rank)
        return cls(tuple(int(g) for g in gamma),
                   (tuple([0] * K.order), tuple(int(v) for v in K.elements())))


def is_crosshomomorphism(gamma: Sequence[int], action: Action) -> bool:
    """gamma(xy) = gamma(x) + phi_x gamma(y) for all x, y."""
    g = np.asarray(gamma, dtype=np.int64)
    if g.shape != (action.factor.n,) or g[0] != 0:
        return False
    Ft = action.factor.table
    return bool(np.array_equal(g[Ft], g[:, None] ^ action.table[:, g]))


def cocycle_from_crosshom(cross: Crosshom, action: Action, F1: LoopTable,
                          name: Optional[str] = None) -> ExtensionData:
    """Extension data on F = F1 x F2 with theta((x1,x2),(y1,y2)) = psi_{y1} gamma(x2).

    ``action`` acts through F2 and is extended by phi_{(x1,x2)} = phi_{x2}.
    """
    kernel = action.kernel
    F2 = action.factor
    psi = np.asarray(cross.psi, dtype=np.int64)
    gamma = np.asarray(cross.gamma, dtype=np.int64)
    if psi.shape != (F1.n, kernel.order) or gamma.shape != (F2.n,):
        raise BadCocycle("crosshomomorphism data does not match the factors")
    if gamma[0] != 0:
        raise BadCocycle("gamma(1) must be 0")
    K = kernel.elements()
    if psi[0].any():
        raise BadAction("psi of the identity must be the zero map")
    if not np.array_equal(psi[F1.table], psi[:, None, :] ^ psi[None, :, :]):
        raise BadAction("psi is not additive in its index")
    if not np.array_equal(psi[:, K[:, None] ^ K[None, :]], psi[:, :, None] ^ psi[:, None, :]):
        raise BadAction("psi values are not endomorphisms")
    for x1 in range(F1.n):
        for x2 in range(F2.n):
            if not np.array_equal(psi[x1][action.table[x2]], action.table[x2][psi[x1]]):
                raise ActionsDoNotCommute(f"psi_{x1} and phi_{x2} do not commute")

    F = direct_product(F1, F2, name=f"{F1.name}x{F2.name}")
    idx = np.arange(F.n)
    x1, x2 = idx % F1.n, idx // F1.n
    ext_action = Action(F, kernel, action.table[x2])
    cocycle = Cocycle(kernel, psi[x1[None, :], gamma[x2[:, None]]])
    return ExtensionData(kernel, F, ext_action, cocycle, name=name)


# V4 and D8 data

def v4_action() -> Action:
    """phi_{b1^c1 b2^c2}(a0, a1, a2) = (a0 + c2 a1 + c1 a2, a1, a2); V4 index c1 + 2 c2."""
    kernel = AbelianKernel(3)
    mats = []
    for v in range(4):
        c1, c2 = v & 1, v >> 1
        mats.append(gf2.matrix_from_images([0b001, 0b010 | c2, 0b100 | c1], 3))
    return Action.from_matrices(elementary_abelian(2, name="V4"), kernel, mats)


def v4_crosshom() -> Tuple[int, ...]:
    """gamma(b1^c1 b2^c2) = (c1 + c2 + c1 c2, c1, c2)."""
    return tuple(((c1 ^ c2 ^ (c1 & c2)) | (c1 << 1) | (c2 << 2))
                 for c2 in (0, 1) for c1 in (0, 1))


def _d8_to_v4(d: np.ndarray) -> np.ndarray:
    # pi: rho^{2i} sigma^j (sigma rho)^k -> b1^j b2^k
    return ((d >> 1) & 1) | (((d >> 2) & 1) << 1)


def d8_action() -> Action:
    """The V4 action pulled back to D8 along pi."""
    v4 = v4_action()
    d = np.arange(8)
    return Action(dihedral8(), v4.kernel, v4.table[_d8_to_v4(d)])


def theta_family_action() -> Action:
    """phi_{(l, rho^{2i} sigma^j (sigma rho)^k)}(a, b, c) = (a + kb + jc, b, c) on F_2 x D8."""
    d8 = d8_action()
    x = np.arange(16)
    return Action(d8_factor(), d8.kernel, d8.table[x >> 1])


def theta_t_cocycle(t: int) -> Cocycle:
    """(l'(t0 i + t1 j + t2 ij + t3 k + t4 ik + t5 jk + t6 ijk), l' j, l' k)."""
    if not 0 <= t <= 127:
        raise ValueError(f"t must lie in 0..127, got {t}")
    bits = [(t >> s) & 1 for s in range(7)]

    def theta(x, y):
        _, i, j, k = d8_coordinates(x)
        ell = y & 1
        monomials = [i, j, i & j, k, i & k, j & k, i & j & k]
        first = np.zeros_like(i)
        for bit, mono in zip(bits, monomials):
            if bit:
                first = first ^ mono
        return (ell & first) | ((ell & j) << 1) | ((ell & k) << 2)

    return Cocycle.from_function(AbelianKernel(3), 16, theta)


def theta_doubleprime_cocycle() -> Cocycle:
    """(l'(i + (k + k') j), l' j, l' k); k - k' equals k + k' over F_2."""
    def theta(x, y):
        _, i, j, k = d8_coordinates(x)
        ell, _, _, k2 = d8_coordinates(y)
        return ((ell & (i ^ ((k ^ k2) & j))) | ((ell & j) << 1) | ((ell & k) << 2))

    return Cocycle.from_function(AbelianKernel(3), 16, theta)


def build_theta_t(t: int) -> LoopTable:
    action = theta_family_action()
    return nuclear_extension(action.kernel, action.factor, action, theta_t_cocycle(t),
                             name=f"theta{t}")


def build_Cbar() -> LoopTable:
    Q = build_theta_t(1)
    Q.name = "Cbar"
    return Q


def build_theta_prime() -> LoopTable:
    """theta' = (l'(i + j + k + jk), l' j, l' k), which is theta_43."""
    Q = build_theta_t(43)
    Q.name = "thetaprime"
    return Q


def build_theta_doubleprime() -> LoopTable:
    action = theta_family_action()
    return nuclear_extension(action.kernel, action.factor, action,
                             theta_doubleprime_cocycle(), name="theta2prime")


def gbar_data() -> ExtensionData:
    """G-bar via the V4 crosshomomorphism pulled back to D8, with psi scalar on F_2."""
    d = np.arange(8)
    gamma = np.asarray(v4_crosshom(), dtype=np.int64)[_d8_to_v4(d)]
    cross = Crosshom.scalar(gamma, 3)
    return cocycle_from_crosshom(cross, d8_action(), elementary_abelian(1, name="F2"),
                                 name="Gbar")


def build_Gbar() -> LoopTable:
    return gbar_data().build()


def gbar_block_pattern() -> Tuple[List[Tuple[int, int]], int]:
    """Coset pairs (x, y) of G-bar mod K where xy becomes xyh, and h = (1, 0, 0).

    A block is modified exactly when i(x) = 1 and l(y) = 1.
    """
    x = np.arange(16)
    _, i, _, _ = d8_coordinates(x)
    ell = x & 1
    pairs = [(int(a), int(b)) for a in x[i == 1] for b in x[ell == 1]]
    return pairs, 1


# Order-128 loop C and the power-associative loop

_KERNEL_LETTERS = {"a1": 0b0001, "a2": 0b0010, "a3": 0b0100, "a4": 0b1000,
                   "a": 0b0111, "b": 0b1000}
_WORD = re.compile(r"a[1-4]|a|b")


def kernel_word(word: str) -> int:
    """Parse a product of a1..a4, a = a1a2a3, b = a4 (or '1') into a kernel int."""
    word = word.strip()
    if word == "1":
        return 0
    tokens = _WORD.findall(word)
    if "".join(tokens) != word:
        raise BadCocycle(f"cannot parse kernel word {word!r}")
    value = 0
    for token in tokens:
        value ^= _KERNEL_LETTERS[token]
    return value


_C_THETA = """
1 1 1 1 1 1 1 1
1 1 1 1 a2 a2 aba2 aba2
1 a3 1 a3 a1 aa2 a1 aa2
1 a3 1 a3 aa3 a a3b b
1 1 1 1 1 1 1 1
1 1 1 1 a2 a2 aba2 aba2
1 aba3 1 aba3 a1 a2b a1 a2b
1 aba3 1 aba3 aa3 b a3b a
"""

_PA64_THETA = """
1 1 1 1
1 a1 a2b a3
1 aba2 a2 1
1 aa3 a a3
"""


def _parse_theta(text: str) -> np.ndarray:
    return np.array([[kernel_word(w) for w in line.split()]
                     for line in text.strip().splitlines()], dtype=np.int64)


def _generated_action(factor_rank: int, generator_maps: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Matrices of an elementary abelian factor from the images of its generators."""
    rank = generator_maps[0].shape[0]
    mats = []
    for x in range(1 << factor_rank):
        m = gf2.identity(rank)
        for s in range(factor_rank):
            if (x >> s) & 1:
                m = gf2.matmul(m, generator_maps[s])
        mats.append(m)
    return mats


def c_data() -> ExtensionData:
    """K = <a1..a4>, F = <x1, x2, x3>; x_i swaps a and b and fixes a_{i+1}, a_{i+2}."""
    a, b = _KERNEL_LETTERS["a"], _KERNEL_LETTERS["b"]
    letters = [0b0001, 0b0010, 0b0100]
    gens = []
    for i in range(3):
        keep = [letters[(i + 1) % 3], letters[(i + 2) % 3]]
        gens.append(gf2.solve_automorphism([a, b] + keep, [b, a] + keep, 4))
    kernel = AbelianKernel(4)
    factor = elementary_abelian(3, name="E8")
    labels = ["1", "x1", "x2", "x1x2", "x3", "x1x3", "x2x3", "x1x2x3"]
    action = Action.from_matrices(factor, kernel, _generated_action(3, gens))
    return ExtensionData(kernel, factor, action, Cocycle(kernel, _parse_theta(_C_THETA), labels),
                         name="C")


def build_C() -> LoopTable:
    return c_data().build()


def pa64_data() -> ExtensionData:
    """K = <a1..a4>, F = <x1, x2>; x_i fixes a, b, a_i and sends a3 to a b a3."""
    a, b = _KERNEL_LETTERS["a"], _KERNEL_LETTERS["b"]
    a3 = _KERNEL_LETTERS["a3"]
    gens = []
    for i in range(2):
        ai = [0b0001, 0b0010][i]
        gens.append(gf2.solve_automorphism([a, b, ai, a3], [a, b, ai, a ^ b ^ a3], 4))
    kernel = AbelianKernel(4)
    factor = elementary_abelian(2, name="E4")
    labels = ["1", "x1", "x2", "x1x2"]
    action = Action.from_matrices(factor, kernel, _generated_action(2, gens))
    return ExtensionData(kernel, factor, action,
                         Cocycle(kernel, _parse_theta(_PA64_THETA), labels), name="pa64")


def build_pa64() -> LoopTable:
    return pa64_data().build()
