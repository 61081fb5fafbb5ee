"""
Group modifications x * y = x y mu(x, y).

A modification context is a group G with a chain Z <= K <= N of subgroups and
a map mu: G/K x G/K -> Z. The loop (G, *) has Z in its center and
(G, *)/Z = G/Z. Values of mu and delta are stored as element indices of G,
so "mu(x, y) = 1" reads ``mu[x, y] == 0``.

The second half builds the class-two groups H of order 64 (squaring vector
s = (s1, s2, s3)), the maps delta and mu on H from a symmetric trilinear
alternating form, and the loops C(H, mu) on G = A x H with A = {1, -1}.

Conventions on H: an element (v, m) with v in F_2^3 and m in H' = F_2^3 has
index m + 8 * (4 v1 + 2 v2 + v3). Bit 0, 1, 2 of m are the coordinates at
[e1, e2], [e1, e3], [e2, e3]. The transversal of H' is t_{k+1} = (k, 0), so
t_1 is the identity and t_2 = e3. Sign-valued maps on H are 0/1 arrays where
1 means -1.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from . import __version__
from .extensions import direct_product, elementary_abelian
from .loop_core import (LoopTable, SubloopMask, center, coset_partition, is_associative,
                        is_normal, nilpotency_class, quotient_with_labels, validate_table)
from .perm_group import inner_mapping_group, is_abelian, lr_subgroup
from .shared.errors import (ChainViolation, ClassMismatch, InvalidSpec, LoopTableError,
                            ModificationError, NotCentralInvolution, NotNormal, NotNormalizedMu,
                            NotSubloop, PreconditionFailed)
from .shared.logging_config import LoggerMixin, get_logger, log_table_call
from .shared.models import (DELTA_PARAM_COUNT, MU_PARAM_COUNT, CensusEntry, CensusManifest,
                            ConditionReport, DeltaMuParams, TheoremReport)
from .shared.settings import get_settings
from .shared.store import LoopStore

logger = get_logger(__name__)

GROUP64_COUNT = 512
CENSUS_COLLECTION = "census"
CENSUS_DOCUMENT = "groups64"

# transversal pairs (a, b), 1 <= a < b <= 7, in the order of the delta parameters
_TRANSVERSAL_PAIRS = list(combinations(range(1, 8), 2))
_COMMUTATOR_PAIRS = [(0, 1), (0, 2), (1, 2)]


# Trilinear forms

@dataclass(frozen=True)
class TrilinearForm:
    """Symmetric trilinear alternating form on F_2^d with values in {1, -1}.

    ``bits`` lists f(e_i, e_j, e_k) for i < j < k in lexicographic order, with
    1 meaning -1. The form vanishes on repeated basis vectors.
    """
    dimension: int = 3
    bits: Tuple[int, ...] = (1,)

    def __post_init__(self):
        expected = len(list(combinations(range(self.dimension), 3)))
        if len(self.bits) != expected:
            raise ValueError(f"a form in dimension {self.dimension} has {expected} values, "
                             f"got {len(self.bits)}")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("form values must be given as bits")

    @classmethod
    def determinant(cls) -> "TrilinearForm":
        return cls(3, (1,))

    @classmethod
    def trivial(cls, dimension: int = 3) -> "TrilinearForm":
        return cls(dimension, (0,) * len(list(combinations(range(dimension), 3))))

    @cached_property
    def tensor(self) -> np.ndarray:
        d = self.dimension
        out = np.zeros((d, d, d), dtype=np.int64)
        for bit, triple in zip(self.bits, combinations(range(d), 3)):
            for i, j, k in {(a, b, c) for a in triple for b in triple for c in triple
                            if len({a, b, c}) == 3}:
                out[i, j, k] = bit
        return out

    def basis_value(self, i: int, j: int, k: int) -> int:
        return int(self.tensor[i, j, k])

    def sign(self, i: int, j: int, k: int) -> int:
        return -1 if self.basis_value(i, j, k) else 1

    def __call__(self, u: Sequence[int], v: Sequence[int], w: Sequence[int]) -> int:
        """f(u, v, w) as a bit, for coordinate vectors u, v, w."""
        return int(np.einsum("i,j,k,ijk->", np.asarray(u), np.asarray(v), np.asarray(w),
                             self.tensor) % 2)

    def evaluate(self, coords: np.ndarray) -> np.ndarray:
        """Values on all triples of the rows of ``coords``."""
        return np.einsum("ai,bj,ck,ijk->abc", coords, coords, coords, self.tensor) % 2

    def pairing(self) -> np.ndarray:
        """Row p is f([e_i, e_j], e_k) over k, for the p-th pair i < j."""
        pairs = list(combinations(range(self.dimension), 2))
        return np.array([self.tensor[i, j] for i, j in pairs], dtype=np.int64)

    @property
    def is_trivial(self) -> bool:
        return not any(self.bits)


# Groups of order 64

_INDICES = np.arange(64)
_M_PART = _INDICES & 7
_V_PART = _INDICES >> 3
# coordinates (v1, v2, v3) of the transversal index
_V_COORDS = np.stack([(np.arange(8) >> 2) & 1, (np.arange(8) >> 1) & 1, np.arange(8) & 1], axis=1)
_M_COORDS = np.stack([np.arange(8) & 1, (np.arange(8) >> 1) & 1, (np.arange(8) >> 2) & 1], axis=1)


def squaring_vector(code: int) -> Tuple[int, int, int]:
    if not 0 <= code < GROUP64_COUNT:
        raise ValueError(f"squaring code must lie in 0..{GROUP64_COUNT - 1}")
    return code & 7, (code >> 3) & 7, (code >> 6) & 7


class Group64:
    """The class-two group H of order 64 with e_i^2 = s_i in H'."""

    def __init__(self, squaring: Sequence[int]):
        s = tuple(int(v) for v in squaring)
        if len(s) != 3 or any(not 0 <= v < 8 for v in s):
            raise ValueError(f"squaring vector must be three values in 0..7, got {squaring}")
        self.squaring = s
        self.table = self._build()

    @property
    def code(self) -> int:
        s1, s2, s3 = self.squaring
        return s1 + 8 * s2 + 64 * s3

    def _build(self) -> LoopTable:
        v = _V_COORDS[_V_PART]
        v1, v2, v3 = (v[:, i][:, None] for i in range(3))
        w1, w2, w3 = (v[:, i][None, :] for i in range(3))
        beta = (v2 & w1) | ((v3 & w1) << 1) | ((v3 & w2) << 2)
        square = np.zeros((64, 64), dtype=np.int64)
        for vi, wi, si in zip((v1, v2, v3), (w1, w2, w3), self.squaring):
            square ^= (vi & wi) * si
        m = _M_PART[:, None] ^ _M_PART[None, :] ^ beta ^ square
        vint = _V_PART[:, None] ^ _V_PART[None, :]
        H = validate_table(m + 8 * vint, name=f"H{self.code}")
        if not is_associative(H):
            raise LoopTableError(f"normal form product for s={self.squaring} is not associative")
        return H

    def e(self, i: int) -> int:
        """Index of the generator e_i, i in 1..3."""
        return 8 * (1 << (3 - i))

    def c(self, i: int, j: int) -> int:
        """Index of the commutator [e_i, e_j], i < j."""
        return 1 << _COMMUTATOR_PAIRS.index((i - 1, j - 1))

    @staticmethod
    def split(h: int) -> Tuple[int, int]:
        """(m, t) with h = m t, m in H' and t in the transversal."""
        return h & 7, h & ~7

    @staticmethod
    def transversal() -> List[int]:
        return [8 * k for k in range(8)]

    @staticmethod
    def derived_mask() -> np.ndarray:
        return _INDICES < 8

    def __repr__(self) -> str:
        return f"<Group64 s={self.squaring}>"


@lru_cache(maxsize=None)
def group64(squaring: Tuple[int, int, int]) -> Group64:
    return Group64(squaring)


# delta and mu on H

def _pairing_part(pairing: np.ndarray) -> np.ndarray:
    """D[m, k] = delta(m, t_{k+1}) for m in H', from a (3, 3) pairing."""
    return (_M_COORDS @ np.asarray(pairing, dtype=np.int64) @ _V_COORDS.T) % 2


def _bit(sign: int) -> int:
    return 1 if sign == -1 else 0


def _check_restricted_biadditive(table: np.ndarray, P: np.ndarray, inM: np.ndarray,
                                 name: str) -> None:
    meets = inM[:, None, None] | inM[None, :, None] | inM[None, None, :]
    left = table[P] == (table[:, None, :] ^ table[None, :, :])
    if not (left | ~meets).all():
        raise ModificationError(f"{name} is not additive in its first argument on H'")
    right = table[_INDICES[:, None, None], P[None, :, :]] == (table[:, :, None] ^ table[:, None, :])
    if not (right | ~meets).all():
        raise ModificationError(f"{name} is not additive in its second argument on H'")


def _commutator_table(P: np.ndarray) -> np.ndarray:
    inv = np.argmin(P, axis=1)
    n = P.shape[0]
    ys = np.arange(n)
    conj = P[P[inv[None, :], ys[:, None]], ys[None, :]]
    return P[inv[:, None], conj]


def _delta_from_pairing(H: Group64, pairing: np.ndarray, delta_bits: Sequence[int]) -> np.ndarray:
    if len(delta_bits) != DELTA_PARAM_COUNT:
        raise ValueError(f"expected {DELTA_PARAM_COUNT} delta parameters")
    dT = np.zeros((8, 8), dtype=np.int64)
    for (a, b), sign in zip(_TRANSVERSAL_PAIRS, delta_bits):
        dT[a, b] = dT[b, a] = _bit(sign)
    D = _pairing_part(pairing)
    m, v = _M_PART, _V_PART
    delta = D[m[:, None], v[None, :]] ^ D[m[None, :], v[:, None]] ^ dT[v[:, None], v[None, :]]
    if not np.array_equal(delta, delta.T):
        raise ModificationError("delta is not antisymmetric")
    _check_restricted_biadditive(delta, H.table.table, H.derived_mask(), "delta")
    return delta.astype(np.uint8)


def build_delta(H: Group64, f: TrilinearForm, delta_bits: Sequence[int]) -> np.ndarray:
    """delta on H x H from the form f and the 21 transversal parameters."""
    if f.dimension != 3:
        raise ValueError("groups of order 64 carry forms in dimension 3")
    delta = _delta_from_pairing(H, f.pairing(), delta_bits)
    P = H.table.table
    comm = _commutator_table(P)
    ftab = f.evaluate(_V_COORDS)
    v = _V_PART
    if not np.array_equal(delta[comm], ftab[v[:, None, None], v[None, :, None],
                                                    v[None, None, :]]):
        raise ModificationError("delta([u, v], w) differs from f(u, v, w)")
    return delta


def build_mu(H: Group64, delta: np.ndarray, mu_bits: Sequence[int]) -> np.ndarray:
    """mu on H x H with mu(u, v) mu(v, u)^-1 = delta(u, v), from the 7 diagonal parameters."""
    if len(mu_bits) != MU_PARAM_COUNT:
        raise ValueError(f"expected {MU_PARAM_COUNT} mu parameters")
    delta = np.asarray(delta, dtype=np.int64)
    t = np.asarray(H.transversal())
    D = delta[:8][:, t]
    muT = np.triu(delta[np.ix_(t, t)], k=1)
    muT[np.arange(1, 8), np.arange(1, 8)] = [_bit(s) for s in mu_bits]
    m, v = _M_PART, _V_PART
    mu = D[m[:, None], v[None, :]] ^ muT[v[:, None], v[None, :]]
    if not np.array_equal(mu ^ mu.T, delta):
        raise ModificationError("mu does not recover delta")
    _check_restricted_biadditive(mu, H.table.table, H.derived_mask(), "mu")
    return mu.astype(np.uint8)


def sign_matrix(bits: np.ndarray) -> List[List[int]]:
    """A 0/1 table as a matrix of signs 1 / -1."""
    return (1 - 2 * np.asarray(bits, dtype=np.int64)).tolist()


# Modification contexts

class ModificationContext(LoggerMixin):
    """A group G, subgroups Z <= K <= N and mu on G/K with values in Z.

    ``mu`` is given on all of G x G and must be constant on K-cosets; it is
    stored as a table over coset labels.
    """

    def __init__(self, G: LoopTable, Z: Iterable[int], K: Iterable[int], N: Iterable[int],
                 mu: np.ndarray, form: Optional[TrilinearForm] = None,
                 H: Optional[Group64] = None, params: Optional[DeltaMuParams] = None):
        self.G = G
        self.form = form
        self.H = H
        self.params = params
        try:
            self.Z = SubloopMask(G, Z)
            self.K = SubloopMask(G, K)
            self.N = SubloopMask(G, N)
        except NotSubloop as e:
            raise ChainViolation(f"chain member is not a subgroup: {e}") from e
        self._check_chain()
        self.labels, self.reps = coset_partition(G, self.K)
        self.mu_cosets = self._check_mu(np.asarray(mu, dtype=np.int64))
        self.logger.debug("Modification context created",
                          **log_table_call("ModificationContext", G.n, Z=self.Z.size,
                                           K=self.K.size, N=self.N.size))

    @property
    def n(self) -> int:
        return self.G.n

    @cached_property
    def P(self) -> np.ndarray:
        return self.G.table.astype(np.intp)

    @cached_property
    def inv(self) -> np.ndarray:
        return self.G.ldiv[:, 0].astype(np.intp)

    @cached_property
    def conj(self) -> np.ndarray:
        """conj[z, w] = w^-1 z w."""
        P, inv = self.P, self.inv
        zs = np.arange(self.n)
        return P[P[inv[None, :], zs[:, None]], zs[None, :]]

    @cached_property
    def comm(self) -> np.ndarray:
        """comm[z, y] = z^-1 z^y = [z, y]."""
        return self.P[self.inv[:, None], self.conj]

    @cached_property
    def mu(self) -> np.ndarray:
        return self.mu_cosets[self.labels[:, None], self.labels[None, :]]

    @cached_property
    def delta(self) -> np.ndarray:
        """delta(x, y) = mu(x, y) mu(y, x)^-1."""
        return self.P[self.mu, self.inv[self.mu.T]]

    def _check_chain(self) -> None:
        G, P = self.G, self.P
        if not is_associative(G):
            raise ChainViolation("G is not a group")
        if not (self.Z.issubset(self.K) and self.K.issubset(self.N)):
            raise ChainViolation("subgroups must satisfy Z <= K <= N")
        nidx = self.N.elements
        if not np.array_equal(P[np.ix_(nidx, nidx)], P[np.ix_(nidx, nidx)].T):
            raise ChainViolation("N is not abelian")
        conj = self.conj
        if not self.N.members[conj[nidx]].all():
            raise ChainViolation("N is not normal in G")
        if not self.K.members[conj[self.K.elements]].all():
            raise ChainViolation("K is not normal in G")
        if not self.N.members[self.comm].all():
            raise ChainViolation("G/N is not abelian")
        zidx = self.Z.elements
        if not (P[zidx] == P[:, zidx].T).all():
            raise ChainViolation("Z is not central in G")
        if not self.K.members[self.comm[nidx]].all():
            raise ChainViolation("N/K is not central in G/K")

    def _check_mu(self, mu: np.ndarray) -> np.ndarray:
        if mu.shape != (self.n, self.n):
            raise NotNormalizedMu(f"mu must be a {self.n} x {self.n} table")
        if mu.min() < 0 or mu.max() >= self.n or not self.Z.members[mu].all():
            raise NotNormalizedMu("mu takes values outside Z")
        table = mu[np.ix_(self.reps, self.reps)]
        if not np.array_equal(mu, table[self.labels[:, None], self.labels[None, :]]):
            raise NotNormalizedMu("mu is not constant on K-cosets")
        if table[0].any() or table[:, 0].any():
            raise NotNormalizedMu("mu(x, K) and mu(K, x) must be trivial")
        return table

    @cached_property
    def coset_table(self) -> np.ndarray:
        F, _ = quotient_with_labels(self.G, self.K)
        return F.table.astype(np.intp)

    def __repr__(self) -> str:
        return (f"<ModificationContext |G|={self.n} |Z|={self.Z.size} "
                f"|K|={self.K.size} |N|={self.N.size}>")


def modify(ctx: ModificationContext, name: Optional[str] = None) -> LoopTable:
    """The loop (G, *) with x * y = x y mu(x, y)."""
    P = ctx.P
    star = P[P, ctx.mu]
    Q = validate_table(star, name=name)
    if not ctx.Z.issubset(center(Q)):
        raise ModificationError("Z is not central in the modified loop")
    zlabels, _ = coset_partition(ctx.G, ctx.Z)
    if not np.array_equal(zlabels[star], zlabels[P]):
        raise ModificationError("modified loop does not induce G/Z")
    return Q


def check_conditions(ctx: ModificationContext) -> ConditionReport:
    """Evaluate (C1), (C2) on coset triples meeting N/K and (C3) on all of G."""
    P, mu = ctx.P, ctx.mu_cosets
    F = ctx.coset_table
    in_n = ctx.N.members[ctx.reps]
    meets = in_n[:, None, None] | in_n[None, :, None] | in_n[None, None, :]
    k = np.arange(F.shape[0])
    c1_ok = mu[F] == P[mu[:, None, :], mu[None, :, :]]
    c1 = bool((c1_ok | ~meets).all())
    c2_ok = mu[k[:, None, None], F[None, :, :]] == P[mu[:, :, None], mu[:, None, :]]
    c2 = bool((c2_ok | ~meets).all())
    c3 = True
    conj, comm, delta = ctx.conj, ctx.comm, ctx.delta
    for x in range(ctx.n):
        lhs = P[conj[np.arange(ctx.n)[None, :], P[:, x][:, None]], delta[comm.T, x]]
        rhs = P[conj[np.arange(ctx.n)[None, :], P[x][:, None]],
                delta[comm[:, x][None, :], np.arange(ctx.n)[:, None]]]
        if not np.array_equal(lhs, rhs):
            c3 = False
            break
    report = ConditionReport(c1=c1, c2=c2, c3=c3)
    logger.debug("Conditions checked", order=ctx.n, c1=c1, c2=c2, c3=c3)
    return report


def inn_abelian_equivalence(ctx: ModificationContext, report: Optional[ConditionReport] = None,
                            Q: Optional[LoopTable] = None) -> bool:
    """Whether (C3) agrees with Inn(G, *) being abelian; needs (C1) and (C2)."""
    report = report or check_conditions(ctx)
    if not (report.c1 and report.c2):
        raise PreconditionFailed("conditions C1 and C2 must hold")
    Q = Q if Q is not None else modify(ctx)
    return report.c3 == is_abelian(inner_mapping_group(Q))


# Forms from contexts

@dataclass
class FormTable:
    """f(xN, yN, zN) = delta([x, y], z) on coset labels of N, values in G."""
    values: np.ndarray
    quotient: LoopTable
    labels: np.ndarray
    reps: np.ndarray

    def value(self, x: int, y: int, z: int) -> int:
        lab = self.labels
        return int(self.values[lab[x], lab[y], lab[z]])

    @property
    def is_trivial(self) -> bool:
        return not self.values.any()

    def basis(self) -> List[int]:
        """Coset labels forming a basis of the elementary abelian quotient."""
        F = self.quotient.table
        span = np.zeros(self.quotient.n, dtype=bool)
        span[0] = True
        basis = []
        for x in range(1, self.quotient.n):
            if not span[x]:
                basis.append(x)
                span[F[np.flatnonzero(span), x]] = True
        if 1 << len(basis) != self.quotient.n:
            raise PreconditionFailed("G/N is not an elementary abelian 2-group")
        return basis

    def to_trilinear_form(self) -> TrilinearForm:
        nontrivial = set(np.unique(self.values).tolist()) - {0}
        if len(nontrivial) > 1:
            raise PreconditionFailed("form takes more than one nontrivial value")
        b = self.basis()
        bits = tuple(int(self.values[b[i], b[j], b[k]] != 0)
                     for i, j, k in combinations(range(len(b)), 3))
        return TrilinearForm(len(b), bits)


def _cyclic_shifts(F: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(F[y, z, x], F[z, x, y]) indexed by [x, y, z]."""
    return F.transpose(2, 0, 1), F.transpose(1, 2, 0)


def extract_form(ctx: ModificationContext, report: Optional[ConditionReport] = None,
                 Q: Optional[LoopTable] = None) -> FormTable:
    """The symmetric triadditive form carried by delta on (G/N)^3."""
    report = report or check_conditions(ctx)
    if not report.all_hold():
        raise PreconditionFailed("conditions C1, C2 and C3 must hold")
    Q = Q if Q is not None else modify(ctx)
    g_class, q_class = nilpotency_class(ctx.G), nilpotency_class(Q)
    if g_class != 2 or q_class != 3:
        raise ClassMismatch(f"need a class 2 group and a class 3 loop, got {g_class} and {q_class}")
    P = ctx.P
    full = ctx.delta[ctx.comm]
    quotient, labels = quotient_with_labels(ctx.G, ctx.N)
    _, reps = coset_partition(ctx.G, ctx.N)
    values = full[np.ix_(reps, reps, reps)]
    if not np.array_equal(full, values[labels[:, None, None], labels[None, :, None],
                                       labels[None, None, :]]):
        raise ModificationError("delta([x, y], z) is not constant on N-cosets")
    for axes in ((1, 0, 2), (0, 2, 1), (2, 1, 0)):
        if not np.array_equal(values, values.transpose(axes)):
            raise ModificationError("delta([x, y], z) is not symmetric")
    Fq = quotient.table
    if not np.array_equal(values[Fq], P[values[:, None, :, :], values[None, :, :, :]]):
        raise ModificationError("delta([x, y], z) is not triadditive")
    if P[values, values].any():
        raise ModificationError("form values do not have exponent two")
    logger.info("Form extracted", order=ctx.n, quotient_order=quotient.n,
                trivial=not values.any())
    return FormTable(values=values, quotient=quotient, labels=labels, reps=reps)


def delta_equals_form(ctx: ModificationContext, f: TrilinearForm) -> bool:
    """Whether delta([x, y], z) = f(x, y, z) on every triple of A x H."""
    if ctx.H is None:
        raise PreconditionFailed("context is not built on A x H")
    v = (np.arange(ctx.n) >> 1) >> 3
    ftab = f.evaluate(_V_COORDS)[v[:, None, None], v[None, :, None], v[None, None, :]]
    return bool(np.array_equal(ctx.delta[ctx.comm] != 0, ftab != 0))


# Contexts on A x H

def _product_context(H: Group64, mu: np.ndarray, form: Optional[TrilinearForm] = None,
                     params: Optional[DeltaMuParams] = None) -> ModificationContext:
    G = direct_product(elementary_abelian(1, name="A"), H.table, name=f"AxH{H.code}")
    h = np.arange(G.n) >> 1
    mu_full = np.asarray(mu, dtype=np.int64)[h[:, None], h[None, :]]
    return ModificationContext(G, Z=[0, 1], K=[0, 1], N=range(16), mu=mu_full,
                               form=form, H=H, params=params)


def chmu_context(H: Group64, f: TrilinearForm, params: DeltaMuParams) -> ModificationContext:
    delta = build_delta(H, f, params.delta_bits)
    mu = build_mu(H, delta, params.mu_bits)
    return _product_context(H, mu, form=f, params=params)


def build_CHmu(H: Group64, f: Optional[TrilinearForm] = None,
               params: Optional[DeltaMuParams] = None) -> LoopTable:
    """The loop C(H, mu) of order 128 on A x H."""
    f = f or TrilinearForm.determinant()
    params = params or DeltaMuParams()
    Q = modify(chmu_context(H, f, params),
               name=f"chmu-h{H.code}-d{params.delta_hex}-m{params.mu_hex}")
    logger.info("C(H, mu) built", squaring=H.squaring, delta=params.delta_hex,
                mu=params.mu_hex, form_trivial=f.is_trivial)
    return Q


def random_context(rng: np.random.Generator,
                   symmetric: Optional[bool] = None) -> ModificationContext:
    """A random context on A x H from a random pairing H' x H/H' -> A.

    (C1) and (C2) hold by construction; (C3) holds exactly when the pairing
    comes from a symmetric form. ``symmetric=None`` flips a coin.
    """
    H = group64(tuple(int(v) for v in rng.integers(0, 8, size=3)))
    params = DeltaMuParams.random(rng)
    if symmetric is None:
        symmetric = bool(rng.integers(0, 2))
    if symmetric:
        form = TrilinearForm(3, (int(rng.integers(0, 2)),))
        pairing = form.pairing()
    else:
        form = None
        pairing = rng.integers(0, 2, size=(3, 3))
    delta = _delta_from_pairing(H, pairing, params.delta_bits)
    mu = build_mu(H, delta, params.mu_bits)
    return _product_context(H, mu, form=form, params=params)


# Block modifications

def block_modify(Q: LoopTable, K: SubloopMask, pattern: Iterable[Tuple[int, int]],
                 h: int) -> LoopTable:
    """Replace xy by (xy)h whenever (xK, yK) is in ``pattern`` (coset labels)."""
    if not is_normal(Q, K):
        raise NotNormal("block modification needs a normal subloop")
    T = Q.table
    if not (0 < h < Q.n) or h not in K or T[h, h] != 0 or h not in center(Q):
        raise NotCentralInvolution(f"element {h} is not a central involution in K")
    labels, reps = coset_partition(Q, K)
    selected = np.zeros((reps.size, reps.size), dtype=bool)
    for i, j in pattern:
        selected[i, j] = True
    flip = selected[labels[:, None], labels[None, :]]
    table = np.where(flip, T[T, h], T)
    return validate_table(table, name=Q.name)


# Identity checks

def hall_witt_holds(G: LoopTable) -> bool:
    """[x, [y, z]] [y, [z, x]] [z, [x, y]] = 1 for all x, y, z in the group G."""
    P = G.table.astype(np.intp)
    comm = _commutator_table(P)
    W = comm[np.arange(G.n)[:, None, None], comm[None, :, :]]
    W201, W120 = _cyclic_shifts(W)
    return not P[P[W, W201], W120].any()


def _associators(Q: LoopTable) -> np.ndarray:
    """assoc[x, y, z] = [x, y, z] with (xy)z = (x(yz))[x, y, z]."""
    T, ld = Q.table.astype(np.intp), Q.ldiv.astype(np.intp)
    xs = np.arange(Q.n)
    return ld[T[xs[:, None, None], T[None, :, :]], T[T]]


def theorem_checks(ctx: ModificationContext, Q: Optional[LoopTable] = None) -> TheoremReport:
    """Run every identity that applies to this context; inapplicable checks stay None."""
    report = check_conditions(ctx)
    Q = Q if Q is not None else modify(ctx)
    P, mu, inv, conj, comm, delta = ctx.P, ctx.mu, ctx.inv, ctx.conj, ctx.comm, ctx.delta
    TQ, ldQ, rdQ = Q.table.astype(np.intp), Q.ldiv.astype(np.intp), Q.rdiv.astype(np.intp)
    n = ctx.n
    xs = np.arange(n)
    assoc = _associators(Q)
    out = dict(c1=report.c1, c2=report.c2, c3=report.c3)

    if report.c1 and report.c2:
        formula = P[P[P[mu[:, :, None], mu[P]],
                      inv[mu[xs[:, None, None], P[None, :, :]]]], inv[mu[None, :, :]]]
        out["associator_formula"] = bool(np.array_equal(assoc, formula))

    left = ldQ[xs[None, :, None], ldQ[xs[:, None, None], TQ[TQ]]]
    left_ok = np.array_equal(left, TQ[xs[None, None, :], assoc])
    zx_y = TQ[TQ[xs[None, None, :], xs[:, None, None]], xs[None, :, None]]
    right = rdQ[zx_y, TQ[:, :, None]]
    right_ok = np.array_equal(right, TQ[xs[None, None, :], _cyclic_shifts(assoc)[1]])
    out["lr_identities"] = bool(left_ok and right_ok and is_abelian(lr_subgroup(Q)))

    # indexed [y, x]: T(x)y = y^x mu(y, x) mu(x, y^x)^-1
    expected = P[P[conj, mu], inv[mu[xs[None, :], conj]]]
    actual = ldQ[xs[None, :], TQ]
    out["conjugation_identity"] = bool(np.array_equal(actual, expected))

    g_class = nilpotency_class(ctx.G)
    q_class = nilpotency_class(Q)
    if report.c3:
        out["class_bound"] = (g_class is not None and g_class <= 3
                              and q_class is not None and q_class <= 3)
        D = delta[comm]
        out["group_class2_equivalence"] = ((g_class is not None and g_class <= 2)
                                           == bool(np.array_equal(D, D.transpose(0, 2, 1))))
        if report.all_hold():
            D201, D120 = _cyclic_shifts(D)
            trivial = not P[P[D, D201], D120].any()
            out["loop_class2_equivalence"] = (q_class is not None and q_class <= 2) == trivial

    if ctx.form is not None:
        Tm = ldQ[xs[:, None], TQ.T]
        out["inner_square_identity"] = bool(np.array_equal(np.take_along_axis(Tm, Tm, axis=1),
                                                           np.broadcast_to(xs, (n, n))))
    if g_class is not None and g_class <= 3:
        out["hall_witt"] = hall_witt_holds(ctx.G)
    result = TheoremReport(**out)
    logger.info("Theorem checks finished", order=n, all_hold=result.all_hold(), **out)
    return result


# Census of the groups of order 64

def load_cached_census(store: LoopStore) -> Optional[CensusManifest]:
    """The cached census, or None; a document from another version is deleted."""
    cached = store.read_document(CENSUS_COLLECTION, CENSUS_DOCUMENT)
    if cached is None:
        return None
    try:
        manifest = CensusManifest.model_validate(cached)
    except ValidationError as e:
        logger.warning("Unreadable census cache dropped", error=str(e))
        manifest = None
    if manifest is not None and manifest.tool_version == __version__:
        logger.debug("Census loaded from cache", classes=len(manifest.classes))
        return manifest
    if manifest is not None:
        logger.warning("Stale census cache dropped", cached_version=manifest.tool_version,
                       version=__version__)
    store.delete(CENSUS_COLLECTION, CENSUS_DOCUMENT)
    return None


def suitable_group_census(workers: int = 1, store: Optional[LoopStore] = None,
                          refresh: bool = False) -> CensusManifest:
    """Isomorphism classes of the 512 groups H; class 1 contains s = (0, 0, 0)."""
    from .iso import isomorphism_classes

    store = store if store is not None else LoopStore(get_settings().cache_dir)
    if not refresh:
        cached = load_cached_census(store)
        if cached is not None:
            return cached
    tables = [group64(squaring_vector(code)).table for code in range(GROUP64_COUNT)]
    classes, digests = isomorphism_classes(tables, workers=workers)
    entries = [CensusEntry(class_index=k + 1, representative=members[0],
                           squaring_vector=squaring_vector(members[0]),
                           members=members, digest=digests[members[0]])
               for k, members in enumerate(classes)]
    manifest = CensusManifest(total=GROUP64_COUNT, classes=entries, tool_version=__version__)
    store.write_document(CENSUS_COLLECTION, CENSUS_DOCUMENT, manifest.model_dump(mode="json"))
    logger.info("Census computed", total=GROUP64_COUNT, classes=len(entries))
    return manifest


def group64_class(k: int, manifest: Optional[CensusManifest] = None) -> Group64:
    """Representative of the k-th isomorphism class, k counted from 1."""
    manifest = manifest or suitable_group_census()
    if not 1 <= k <= len(manifest.classes):
        raise InvalidSpec(f"class index must lie in 1..{len(manifest.classes)}")
    return group64(squaring_vector(manifest.classes[k - 1].representative))
