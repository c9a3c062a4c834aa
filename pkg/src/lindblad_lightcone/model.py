"""Lattice geometry, hopping Hamiltonians, Kraus families and their audit.

The lattice is the 1-D chain ``x in {-M, ..., M}`` with hard walls.  Matrix
index ``i`` corresponds to site ``x = i - M``.  The position weight is
``<x> = sqrt(1 + x**2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import RejectedInputError
from .linalg import as_matrix, hermitian_part, operator_norm
from .tolerances import TOL

KRAUS_KINDS = ("dephasing", "directed_jump", "custom")


@dataclass(frozen=True)
class LatticeGeometry:
    half_width: int

    def __post_init__(self):
        if int(self.half_width) != self.half_width or self.half_width < 1:
            raise RejectedInputError(f"half_width must be a positive integer, got {self.half_width!r}")

    @property
    def size(self) -> int:
        return 2 * self.half_width + 1

    @cached_property
    def sites(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    @cached_property
    def position_weight(self) -> np.ndarray:
        return np.sqrt(1.0 + self.sites.astype(float) ** 2)

    def weight_matrix(self) -> np.ndarray:
        return np.diag(self.position_weight).astype(np.complex128)

    def index(self, x: int) -> int:
        if abs(x) > self.half_width:
            raise RejectedInputError(f"site {x} lies outside [-{self.half_width}, {self.half_width}]")
        return int(x) + self.half_width

    def basis_projector(self, x: int, y: int | None = None) -> np.ndarray:
        """``|x><y|`` (``y`` defaults to ``x``)."""
        out = np.zeros((self.size, self.size), dtype=np.complex128)
        out[self.index(x), self.index(x if y is None else y)] = 1.0
        return out


@dataclass(frozen=True, eq=False)
class KrausFamily:
    """Finite list of Lindblad operators ``W_j``.

    Operators are held as ``scipy.sparse`` CSR matrices: the lattice
    families have one nonzero entry each, and a dense ``(count, N, N)``
    stack grows as ``N**3``.
    """

    kind: str
    strength: float
    operators: tuple

    def __post_init__(self):
        if self.kind not in KRAUS_KINDS:
            raise RejectedInputError(f"unknown Kraus kind {self.kind!r}; expected one of {KRAUS_KINDS}")
        if not self.strength >= 0:
            raise RejectedInputError(f"Kraus strength must be >= 0, got {self.strength}")
        ops = tuple(_as_sparse(w) for w in self.operators)
        dims = {w.shape for w in ops}
        if len(dims) > 1:
            raise RejectedInputError(f"Kraus operators have mixed shapes {sorted(dims)}")
        object.__setattr__(self, "operators", ops)

    def __len__(self) -> int:
        return len(self.operators)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0] if self.operators else 0

    @cached_property
    def is_zero(self) -> bool:
        return all(w.nnz == 0 for w in self.operators)

    def dense(self) -> np.ndarray:
        """All operators as a dense ``(count, N, N)`` array (small lattices only)."""
        n = self.dim
        out = np.zeros((len(self), n, n), dtype=np.complex128)
        for j, w in enumerate(self.operators):
            out[j] = w.toarray()
        return out

    @cached_property
    def dissipator_sum(self) -> np.ndarray:
        """``sum_j W_j^H W_j``."""
        n = self.dim
        total = sp.csr_matrix((n, n), dtype=np.complex128)
        for w in self.operators:
            total = total + w.conj().T @ w
        return hermitian_part(total.toarray())

    @cached_property
    def entry_pairs(self):
        """Index/coefficient arrays for ``sum_j W_j rho W_j^H``.

        For every operator ``W`` and every ordered pair of its nonzero entries
        ``W[a, c]`` and ``W[b, d]`` one record ``(a, b, c, d, W[a,c] conj(W[b,d]))``
        is emitted, so that the jump term is
        ``out[a, b] += coef * rho[c, d]`` summed over records.
        """
        return _entry_pairs(self.operators)

    @cached_property
    def adjoint_entry_pairs(self):
        """Same as :attr:`entry_pairs` for the family ``W_j^H`` (dual jump term)."""
        return _entry_pairs([w.conj().T for w in self.operators])

    @cached_property
    def pair_count(self) -> int:
        return int(sum(w.nnz**2 for w in self.operators))


def _as_sparse(w) -> sp.csr_matrix:
    if sp.issparse(w):
        m = sp.csr_matrix(w, dtype=np.complex128)
        if m.shape[0] != m.shape[1]:
            raise RejectedInputError(f"Kraus operator must be square, got {m.shape}")
        if not np.all(np.isfinite(m.data)):
            raise RejectedInputError("Kraus operators must have finite entries")
    else:
        m = sp.csr_matrix(as_matrix(w, "Kraus operator"))
    m.eliminate_zeros()
    return m


def _entry_pairs(ops):
    rows_a, rows_b, cols_c, cols_d, coefs = [], [], [], [], []
    for w in ops:
        coo = sp.coo_matrix(w)
        r, c, vals = coo.row, coo.col, coo.data
        if r.size == 0:
            continue
        ii, jj = np.meshgrid(np.arange(r.size), np.arange(r.size), indexing="ij")
        ii = ii.ravel()
        jj = jj.ravel()
        rows_a.append(r[ii])
        rows_b.append(r[jj])
        cols_c.append(c[ii])
        cols_d.append(c[jj])
        coefs.append(vals[ii] * np.conj(vals[jj]))
    if not coefs:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty, empty, np.zeros(0, dtype=np.complex128)
    return (
        np.concatenate(rows_a).astype(np.int64),
        np.concatenate(rows_b).astype(np.int64),
        np.concatenate(cols_c).astype(np.int64),
        np.concatenate(cols_d).astype(np.int64),
        np.concatenate(coefs).astype(np.complex128),
    )


def build_kraus_family(kind: str, g: float, geometry: LatticeGeometry, operators=None) -> KrausFamily:
    """Build one of the supported Kraus families.

    dephasing
        ``W_x = sqrt(g) |x><x|`` for every site.
    directed_jump
        ``W_x = sqrt(g) |x><x+1|`` for ``x = -M .. M-1``; population hops
        towards ``-M``.
    custom
        ``operators`` supplied by the caller, validated for shape and finiteness.
    """
    if not g >= 0:
        raise RejectedInputError(f"Kraus strength g must be >= 0, got {g}")
    n = geometry.size
    amp = complex(np.sqrt(g))
    if kind == "dephasing":
        ops = [sp.csr_matrix(([amp], ([i], [i])), shape=(n, n)) for i in range(n)]
    elif kind == "directed_jump":
        ops = [sp.csr_matrix(([amp], ([i], [i + 1])), shape=(n, n)) for i in range(n - 1)]
    elif kind == "custom":
        if operators is None:
            raise RejectedInputError("custom Kraus family needs explicit operators")
        ops = [_as_sparse(w) for w in operators]
        for w in ops:
            if w.shape != (n, n):
                raise RejectedInputError(f"custom Kraus operator has shape {w.shape}, lattice has {n} sites")
    else:
        raise RejectedInputError(f"unknown Kraus kind {kind!r}; expected one of {KRAUS_KINDS}")
    return KrausFamily(kind, float(g), ops)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    geometry: LatticeGeometry
    hopping: float
    hopping_range: int
    potential: np.ndarray
    kraus: KrausFamily
    order: int = 3

    def __post_init__(self):
        n = self.geometry.size
        pot = np.array(self.potential, dtype=float)
        if pot.shape != (n,):
            raise RejectedInputError(f"potential must have one entry per site ({n}), got shape {pot.shape}")
        if not np.all(np.isfinite(pot)):
            raise RejectedInputError("potential must be finite")
        pot.setflags(write=False)
        object.__setattr__(self, "potential", pot)
        if int(self.hopping_range) != self.hopping_range or self.hopping_range < 1:
            raise RejectedInputError(f"hopping_range must be a positive integer, got {self.hopping_range}")
        if self.hopping_range >= n:
            raise RejectedInputError(f"hopping_range {self.hopping_range} must be smaller than the site count {n}")
        if not (2 <= self.order <= TOL.max_order):
            raise RejectedInputError(f"order n must lie in [2, {TOL.max_order}], got {self.order}")
        if len(self.kraus) and self.kraus.dim != n:
            raise RejectedInputError(f"Kraus family dim {self.kraus.dim} does not match {n} sites")

    @property
    def dim(self) -> int:
        return self.geometry.size

    @cached_property
    def hamiltonian(self) -> np.ndarray:
        h = build_hamiltonian(self)
        h.setflags(write=False)
        return h

    def with_potential(self, potential) -> "ModelSpec":
        return ModelSpec(self.geometry, self.hopping, self.hopping_range, potential, self.kraus, self.order)

    def with_kraus(self, kraus: KrausFamily) -> "ModelSpec":
        return ModelSpec(self.geometry, self.hopping, self.hopping_range, self.potential, kraus, self.order)


def make_model(
    half_width: int,
    hopping: float = 1.0,
    kraus: str = "dephasing",
    g: float = 1.0,
    *,
    hopping_range: int = 1,
    potential=None,
    order: int = 3,
    operators=None,
) -> ModelSpec:
    """Convenience constructor for the common case."""
    geometry = LatticeGeometry(half_width)
    if potential is None:
        potential = np.zeros(geometry.size)
    family = build_kraus_family(kraus, g, geometry, operators)
    return ModelSpec(geometry, float(hopping), hopping_range, potential, family, order)


def build_hamiltonian(spec: ModelSpec) -> np.ndarray:
    """``H = -J sum_{1<=r<=range} (|x><x+r| + h.c.) + diag(V)``."""
    n = spec.dim
    if spec.hopping_range >= n:
        raise RejectedInputError(f"hopping_range {spec.hopping_range} must be smaller than the site count {n}")
    h = np.diag(np.asarray(spec.potential, dtype=float)).astype(np.complex128)
    for r in range(1, spec.hopping_range + 1):
        off = -spec.hopping * np.ones(n - r)
        h += np.diag(off, r) + np.diag(off, -r)
    return h


def iterated_adjoint(a, geometry: LatticeGeometry, k: int) -> np.ndarray:
    """``ad^k_<x>(A)`` with ``ad^0 = A`` and ``ad^{k+1} = [ad^k(A), <x>]``.

    Uses the entrywise closed form ``A[x, y] * (<y> - <x>)**k``.
    """
    if k < 0:
        raise RejectedInputError(f"k must be >= 0, got {k}")
    a = np.asarray(a, dtype=np.complex128)
    if a.shape != (geometry.size, geometry.size):
        raise RejectedInputError(f"operator shape {a.shape} does not match {geometry.size} sites")
    w = geometry.position_weight
    return a * (w[None, :] - w[:, None]) ** k


def iterated_adjoint_recursive(a, geometry: LatticeGeometry, k: int) -> np.ndarray:
    """Same as :func:`iterated_adjoint`, by literal repeated commutators."""
    if k < 0:
        raise RejectedInputError(f"k must be >= 0, got {k}")
    out = np.array(a, dtype=np.complex128)
    if out.shape != (geometry.size, geometry.size):
        raise RejectedInputError(f"operator shape {out.shape} does not match {geometry.size} sites")
    weight = geometry.weight_matrix()
    for _ in range(k):
        out = out @ weight - weight @ out
    return out


@dataclass(frozen=True)
class AssumptionAudit:
    hamiltonian_norms: list
    kraus_sums: list
    ceiling: float
    passed: bool
    domain_condition: bool = True
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "hamiltonian_norms": list(self.hamiltonian_norms),
            "kraus_sums": list(self.kraus_sums),
            "ceiling": self.ceiling,
            "passed": self.passed,
            "domain_condition": self.domain_condition,
            "notes": list(self.notes),
        }


def default_ceiling(spec: ModelSpec) -> float:
    return 10.0 * max(abs(spec.hopping), spec.kraus.strength, 1.0)


def check_assumptions(spec: ModelSpec, ceiling: float | None = None) -> AssumptionAudit:
    """Norms ``||ad^k(H)||`` and ``sum_j ||ad^k(W_j)||^2`` for ``k = 1..n``."""
    if ceiling is None:
        ceiling = default_ceiling(spec)
    geo = spec.geometry
    h_norms = []
    w_sums = []
    for k in range(1, spec.order + 1):
        h_norms.append(operator_norm(iterated_adjoint(spec.hamiltonian, geo, k)))
        total = 0.0
        for w in spec.kraus.operators:
            total += _sparse_adjoint_norm(w, geo, k) ** 2
        w_sums.append(total)
    values = h_norms + w_sums
    passed = all(np.isfinite(v) and 0.0 <= v <= ceiling for v in values)
    notes = ["domain condition <x>^-1 D(H) in D(H) holds trivially in finite dimension"]
    return AssumptionAudit(h_norms, w_sums, float(ceiling), bool(passed), True, notes)


def _sparse_adjoint_norm(w: sp.csr_matrix, geometry: LatticeGeometry, k: int) -> float:
    # ad^k acts entrywise, and the operator norm only sees rows/columns carrying entries
    coo = sp.coo_matrix(w)
    weight = geometry.position_weight
    vals = coo.data * (weight[coo.col] - weight[coo.row]) ** k
    keep = vals != 0
    if not np.any(keep):
        return 0.0
    rows, cols, vals = coo.row[keep], coo.col[keep], vals[keep]
    support = np.union1d(rows, cols)
    block = np.zeros((support.size, support.size), dtype=np.complex128)
    block[np.searchsorted(support, rows), np.searchsorted(support, cols)] = vals
    return operator_norm(block)


def unitary_mix(family: KrausFamily, unitary: Sequence) -> KrausFamily:
    """Re-mix a family ``W_j -> sum_m u[j, m] W_m``."""
    u = np.asarray(unitary, dtype=np.complex128)
    mixed = np.einsum("jm,mab->jab", u, family.dense())
    return KrausFamily("custom", family.strength, tuple(mixed))
