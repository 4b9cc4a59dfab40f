"""Corner-matrix models on ribbon graphs and their character expansions.

A graph with n edges carries 2n corner matrices C_i, i in {+-1..+-n}.
Monodromies multiply the (optionally dressed) corner matrices along vertex
words; dual monodromies along face words.  The partition functions computed
here are graded series over partitions:

* ``schur_moment``   -- the group average of a product of Schur functions of
  dressed vertex monodromies, one partition per vertex; nonzero only on the
  diagonal (all partitions equal), where it is weight(lam) times the product
  of Schur functions of the *undressed* dual monodromies.
* ``z_series``       -- the same average with each Schur factor replaced by a
  coupling exponential, i.e. the graph's multi-matrix partition function.
* ``hciz_series``    -- the one-matrix conjugation model
  sum_lam s_lam(A) s_lam(B) / (N)_lam, the unitary analogue of the
  Harish-Chandra/Itzykson-Zuber integral.
* ``bgw_series``     -- the Brezin-Gross-Witten model
  int exp(beta Tr(UA + U^dag B)) dU over U(N), and over SU(N) where the
  determinant-delta adds a sum over integer q of shifted-partition terms
  with det A^{-q} / det B^{-|q|} factors.

Weight conventions.  Two bookkeepings of the N-powers circulate for these
expansions; they are not interchangeable, and the Monte Carlo oracle
(mc module) pins the right one through the calibration test in the
acceptance suite.  The shipped default CALIBRATED uses

    U(N)/SU(N):   weight(lam) = s_lam(I_N)^(-n),      couplings as given,
    GL Gaussian:  weight(lam) = N^(-n|lam|) * s_lam(p_inf)^(-n),

with the integrand exp(sum_m p_m Tr(V^m)/m) per vertex.  The N_RESCALED
flag keeps N^(-n|lam|) for every group, scales couplings p -> N p, and
uses the integrand exp(N sum_m p_m Tr(V^m)/m); only one of the two flags
survives the calibration, and the acceptance suite asserts which.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np

from .partitions import Partition, content_product, enumerate_partitions, shift_partition
from .ribbon import MonodromyWord, RibbonGraph, dual
from .symfun import (
    PowerSums,
    SpectralMatrix,
    homogeneous_from_power_sums,
    power_sums_of_matrix,
    scale_power_sums,
    schur_content_value,
    schur_p_infinity,
    _det_pivot,
    _jacobi_trudi_matrix,
)

DET_THRESHOLD = 1e-12  # below this, a matrix counts as singular for q-terms


class Group(Enum):
    U = "u"
    SU = "su"
    GL_GAUSSIAN = "gl"


class WeightConvention(Enum):
    CALIBRATED = "calibrated"
    N_RESCALED = "n-rescaled"


class ScopeError(ValueError):
    """A request outside the validity range of the identity being used."""


class SingularMatrixError(ValueError):
    """q-indexed terms need invertible matrices (they contain det^(-q))."""


class CornerAssignment:
    """N x N corner matrices, one per side label of a graph."""

    __slots__ = ("n_dim", "matrices")

    def __init__(self, n_dim: int, matrices: Mapping[int, np.ndarray]):
        self.n_dim = int(n_dim)
        store = {}
        for label, mat in matrices.items():
            label = int(label)
            mat = np.asarray(mat, dtype=complex)
            if mat.shape != (self.n_dim, self.n_dim):
                raise ValueError(
                    f"corner matrix for label {label} has shape {mat.shape}, "
                    f"expected ({self.n_dim}, {self.n_dim})"
                )
            store[label] = mat
        self.matrices = store

    def matrix(self, label: int) -> np.ndarray:
        try:
            return self.matrices[label]
        except KeyError:
            raise LookupError(f"no corner matrix assigned to label {label}") from None

    def covers(self, graph: RibbonGraph) -> bool:
        return all(l in self.matrices for l in graph.labels())

    def require_cover(self, graph: RibbonGraph) -> None:
        missing = [l for l in graph.labels() if l not in self.matrices]
        if missing:
            raise LookupError(f"corner matrices missing for labels {missing}")

    def to_json_dict(self) -> dict:
        return {
            "N": self.n_dim,
            "corners": {
                str(l): [[[float(z.real), float(z.imag)] for z in row] for row in mat]
                for l, mat in sorted(self.matrices.items())
            },
        }


class Dressing:
    """Group elements X_i for positive labels; X_{-i} is always X_i^dag."""

    __slots__ = ("elements",)

    def __init__(self, elements: Mapping[int, np.ndarray]):
        store = {}
        for label, mat in elements.items():
            label = int(label)
            if label < 1:
                raise ValueError("dressing is keyed by positive labels only")
            store[label] = np.asarray(mat, dtype=complex)
        self.elements = store

    def matrix(self, label: int) -> np.ndarray:
        if label > 0:
            return self.elements[label]
        return self.elements[-label].conj().T


@dataclass(frozen=True)
class TruncationPolicy:
    """Grading bounds for the partition series: |lam| <= max_weight,
    ell(lam) <= max_length (defaults to N at the point of use), and
    |q| <= q_max for the SU determinant sums."""

    max_weight: int
    max_length: Optional[int] = None
    q_max: int = 0

    def __post_init__(self):
        if self.max_weight < 0:
            raise ValueError("max_weight must be >= 0")
        if self.q_max < 0:
            raise ValueError("q_max must be >= 0")

    def length_bound(self, n_dim: int) -> int:
        return n_dim if self.max_length is None else min(self.max_length, n_dim)


class ModelSpec:
    """A graph, its corner matrices, the integration group, and couplings.

    Couplings are one PowerSums per vertex (vertex mode, the default) or per
    face (face mode), aligned with the graph's vertex/face order.  Couplings
    may be omitted for Schur-moment evaluations.  SU requires a single
    vertex in vertex mode (single face in face mode); U and GL are
    unrestricted.
    """

    __slots__ = ("group", "n_dim", "graph", "corners", "couplings", "mode", "convention")

    def __init__(
        self,
        group: Group,
        n_dim: int,
        graph: RibbonGraph,
        corners: CornerAssignment,
        couplings: Optional[Sequence[PowerSums]] = None,
        mode: str = "vertex",
        convention: WeightConvention = WeightConvention.CALIBRATED,
    ):
        if mode not in ("vertex", "face"):
            raise ValueError(f"mode must be 'vertex' or 'face', got {mode!r}")
        if corners.n_dim != n_dim:
            raise ValueError("corner assignment dimension differs from model N")
        corners.require_cover(graph)
        if couplings is not None:
            couplings = tuple(couplings)
            slots = graph.num_vertices if mode == "vertex" else graph.num_faces
            if len(couplings) != slots:
                raise ValueError(
                    f"{mode} mode needs one coupling set per {mode} "
                    f"({slots}), got {len(couplings)}"
                )
        if group is Group.SU:
            if mode == "vertex" and graph.num_vertices != 1:
                raise ScopeError(
                    "SU(N) character expansion only applies to graphs with a single "
                    f"vertex; this graph has V={graph.num_vertices}"
                )
            if mode == "face" and graph.num_faces != 1:
                raise ScopeError(
                    "SU(N) in face mode needs a single face (the dual single-vertex "
                    f"condition); this graph has F={graph.num_faces}"
                )
        self.group = group
        self.n_dim = n_dim
        self.graph = graph
        self.corners = corners
        self.couplings = couplings
        self.mode = mode
        self.convention = convention

    def vertex_form(self) -> "ModelSpec":
        """Face mode delegates to vertex mode on the dual graph (same corners):
        the dual's vertex words are this graph's face words."""
        if self.mode == "vertex":
            return self
        return ModelSpec(
            self.group,
            self.n_dim,
            dual(self.graph),
            self.corners,
            self.couplings,
            mode="vertex",
            convention=self.convention,
        )

    def scaled_couplings(self) -> tuple[PowerSums, ...]:
        """Couplings as they enter the Schur factors: multiplied by N under
        the N_RESCALED convention, untouched under CALIBRATED."""
        if self.couplings is None:
            raise ValueError("model has no couplings")
        if self.convention is WeightConvention.N_RESCALED:
            return tuple(scale_power_sums(p, self.n_dim) for p in self.couplings)
        return self.couplings


def monodromy_matrix(
    word: MonodromyWord,
    corners: CornerAssignment,
    dressing: Optional[Dressing] = None,
) -> np.ndarray:
    """Ordered product of (X_i C_i) -- or plain C_i when undressed -- along
    the word.  Cyclic rotations of the word give similar matrices."""
    out = np.eye(corners.n_dim, dtype=complex)
    for label in word:
        factor = corners.matrix(label)
        if dressing is not None:
            factor = dressing.matrix(label) @ factor
        out = out @ factor
    return out


def weight_fraction(
    lam: Partition,
    group: Group,
    n_dim: int,
    n_edges: int,
    convention: WeightConvention,
) -> Fraction:
    """The exact series weight w(lam) multiplying the Schur factors.

    CALIBRATED: s_lam(I_N)^(-n) for U/SU; N^(-n|lam|) s_lam(p_inf)^(-n) for
    the GL Gaussian (the N-power is the Ginibre variance, not a convention).
    N_RESCALED additionally applies N^(-n|lam|) to U/SU.
    """
    if lam.length > n_dim:
        raise ValueError("weight undefined for ell(lam) > N")
    if group in (Group.U, Group.SU):
        w = Fraction(1) / schur_content_value(lam, n_dim, n_dim) ** n_edges
        if convention is WeightConvention.N_RESCALED:
            w /= Fraction(n_dim) ** (n_edges * lam.weight)
        return w
    w = Fraction(1) / schur_p_infinity(lam) ** n_edges
    return w / Fraction(n_dim) ** (n_edges * lam.weight)


def schur_values(lams: Sequence[Partition], p: PowerSums) -> dict[Partition, complex]:
    """s_lam(p) for many partitions, sharing one h-table."""
    top = max((lam.weight for lam in lams), default=0)
    if p.degree < top:
        p = p.padded(top)
    h = homogeneous_from_power_sums(p, top)
    out = {}
    for lam in lams:
        if lam.weight == 0:
            out[lam] = 1.0 + 0.0j
        else:
            out[lam] = complex(_det_pivot(_jacobi_trudi_matrix(lam, h)))
    return out


def schur_moment(lams: Sequence[Partition], spec: ModelSpec) -> complex:
    """Group average of prod_a s_{lam^(a)}(dressed vertex monodromy a).

    Zero unless all partitions agree on a common lam; then
    weight(lam) * prod_b s_lam(dual monodromy b).  The dual statement (one
    partition per face, vertex monodromies on the right-hand side) is this
    function applied to the dual graph.  Not available over SU(N): the
    proposition's derivation needs the full U(N) orthogonality.
    """
    spec = spec.vertex_form()
    if spec.group is Group.SU:
        raise ScopeError(
            "schur_moment covers U(N) and the GL Gaussian only; SU(N) moments "
            "carry extra determinant terms (see bgw_series / z_series)"
        )
    lams = list(lams)
    if len(lams) != spec.graph.num_vertices:
        raise ValueError(
            f"need one partition per vertex ({spec.graph.num_vertices}), got {len(lams)}"
        )
    lam = lams[0]
    if any(other != lam for other in lams[1:]):
        return 0.0 + 0.0j
    if lam.length > spec.n_dim:
        return 0.0 + 0.0j
    w = weight_fraction(lam, spec.group, spec.n_dim, spec.graph.n, spec.convention)
    value = complex(w)
    for word in spec.graph.faces():
        mono = monodromy_matrix(word, spec.corners)
        if lam.weight:
            sv = schur_values([lam], power_sums_of_matrix(SpectralMatrix(mono), lam.weight))
            value *= sv[lam]
    return value


def z_series_shells(spec: ModelSpec, trunc: TruncationPolicy) -> dict[int, complex]:
    """Partial sums of the graph partition function, keyed by |lam|.

    Vertex mode: sum over lam of weight(lam) * prod_a s_lam(couplings_a)
    * prod_b s_lam(dual monodromy b), with couplings scaled per the
    convention.  Face mode is the mirror statement, evaluated on the dual
    graph.  Terms with ell(lam) > length bound are skipped (Schur
    vanishing).
    """
    spec = spec.vertex_form()
    if spec.couplings is None:
        raise ValueError("z_series needs couplings on the model")
    n_dim, graph = spec.n_dim, spec.graph
    lams = enumerate_partitions(trunc.max_weight, trunc.length_bound(n_dim))
    coup = [p.padded(trunc.max_weight) for p in spec.scaled_couplings()]
    coup_tables = [schur_values(lams, p) for p in coup]
    face_tables = []
    for word in graph.faces():
        mono = monodromy_matrix(word, spec.corners)
        psums = power_sums_of_matrix(SpectralMatrix(mono), max(1, trunc.max_weight))
        face_tables.append(schur_values(lams, psums))
    shells: dict[int, complex] = {k: 0.0 + 0.0j for k in range(trunc.max_weight + 1)}
    for lam in lams:
        term = complex(weight_fraction(lam, spec.group, n_dim, graph.n, spec.convention))
        for table in coup_tables:
            term *= table[lam]
        for table in face_tables:
            term *= table[lam]
        shells[lam.weight] += term
    return shells


def z_series(spec: ModelSpec, trunc: TruncationPolicy) -> complex:
    """The truncated graph partition function (sum of the |lam|-shells).

    For SU(N) with a single vertex the value coincides with the U(N) value
    term by term, so it is computed once through the same expansion.
    """
    return sum(z_series_shells(spec, trunc).values())


def _as_spectral(mat) -> SpectralMatrix:
    return mat if isinstance(mat, SpectralMatrix) else SpectralMatrix(np.asarray(mat, dtype=complex))


def hciz_series_shells(
    a, b, trunc: TruncationPolicy
) -> dict[int, complex]:
    """Shell sums of sum_{lam, ell(lam)<=N} s_lam(A) s_lam(B) / (N)_lam."""
    a, b = _as_spectral(a), _as_spectral(b)
    if a.dimension != b.dimension:
        raise ValueError(f"dimension mismatch: A is {a.dimension}, B is {b.dimension}")
    n_dim = a.dimension
    lams = enumerate_partitions(trunc.max_weight, trunc.length_bound(n_dim))
    top = max(1, trunc.max_weight)
    sa = schur_values(lams, power_sums_of_matrix(a, top))
    sb = schur_values(lams, power_sums_of_matrix(b, top))
    shells: dict[int, complex] = {k: 0.0 + 0.0j for k in range(trunc.max_weight + 1)}
    for lam in lams:
        pochhammer = content_product(lam, lambda m: Fraction(n_dim + m))
        shells[lam.weight] += sa[lam] * sb[lam] / float(pochhammer)
    return shells


def hciz_series(a, b, trunc: TruncationPolicy) -> complex:
    """Truncated one-matrix conjugation series; equals both the U(N) and the
    SU(N) integral of exp(Tr(X A X^dag B))."""
    return sum(hciz_series_shells(a, b, trunc).values())


def _det(mat: SpectralMatrix) -> complex:
    if mat.entries is not None:
        return complex(np.linalg.det(mat.entries))
    return complex(np.prod(np.asarray(mat.eigenvalues, dtype=complex)))


def bgw_q_terms(a, b, beta, q_max: int, trunc: TruncationPolicy) -> list[tuple[int, complex]]:
    """Per-q partial sums of the SU(N) Brezin-Gross-Witten expansion,
    in the canonical order q = 0, +1, -1, +2, -2, ...

    q = 0 is the U(N) series sum_lam beta^(2|lam|) s_lam(p_inf)^2
    s_lam(AB)/s_lam(I_N).  For q > 0 the terms pair lam with lam + q^N:

        beta^(|lam| + |lam + q^N|) s_lam(p_inf) s_{lam+q^N}(p_inf)
        * s_{lam+q^N}(AB) / s_{lam+q^N}(I_N) * det A^(-q),

    and the mirrored q < 0 sum carries det B^q.  Both |lam| and |lam + q^N|
    are kept within max_weight so that the series matches a Monte Carlo
    integrand truncated at the same degree exactly (up to sampling noise).
    """
    a, b = _as_spectral(a), _as_spectral(b)
    if a.dimension != b.dimension:
        raise ValueError(f"dimension mismatch: A is {a.dimension}, B is {b.dimension}")
    n_dim = a.dimension
    det_a = det_b = None
    if q_max > 0:
        det_a, det_b = _det(a), _det(b)
        if abs(det_a) < DET_THRESHOLD or abs(det_b) < DET_THRESHOLD:
            raise SingularMatrixError(
                "q-indexed terms contain det A^(-q) and det B^(-|q|); "
                f"|det A|={abs(det_a):.2e}, |det B|={abs(det_b):.2e} "
                f"(threshold {DET_THRESHOLD})"
            )
    ab = SpectralMatrix(a.dense() @ b.dense())
    length = trunc.length_bound(n_dim)
    lams = enumerate_partitions(trunc.max_weight, length)
    psums_ab = power_sums_of_matrix(ab, max(1, trunc.max_weight))
    shifted: set[Partition] = set()
    for q in range(1, q_max + 1):
        if q * n_dim > trunc.max_weight:
            break
        for lam in lams:
            if lam.weight + q * n_dim <= trunc.max_weight and lam.length <= n_dim:
                shifted.add(shift_partition(lam, q, n_dim))
    all_lams = lams + sorted(shifted - set(lams), key=lambda l: (l.weight, l.parts))
    s_ab = schur_values(all_lams, psums_ab)

    def diag_term(lam: Partition) -> complex:
        s_inf = schur_p_infinity(lam)
        s_id = schur_content_value(lam, n_dim, n_dim)
        return beta ** (2 * lam.weight) * float(s_inf) ** 2 * s_ab[lam] / float(s_id)

    out: list[tuple[int, complex]] = [(0, sum(diag_term(l) for l in lams if l.length <= length))]
    for q in range(1, q_max + 1):
        plus = 0.0 + 0.0j
        minus = 0.0 + 0.0j
        if q * n_dim <= trunc.max_weight:
            for lam in lams:
                if lam.length > n_dim or lam.weight + q * n_dim > trunc.max_weight:
                    continue
                big = shift_partition(lam, q, n_dim)
                common = (
                    beta ** (lam.weight + big.weight)
                    * float(schur_p_infinity(lam))
                    * float(schur_p_infinity(big))
                    * s_ab[big]
                    / float(schur_content_value(big, n_dim, n_dim))
                )
                plus += common * det_a ** (-q)
                minus += common * det_b ** (-q)
        out.append((q, plus))
        out.append((-q, minus))
    return out


def bgw_series(a, b, beta, group: Group, trunc: TruncationPolicy) -> complex:
    """Truncated BGW partition function over U(N) or SU(N).

    The SU value is the sum of the q-indexed blocks of :func:`bgw_q_terms`
    in their canonical order, so decomposition and total agree exactly.
    """
    if group is Group.U:
        return bgw_q_terms(a, b, beta, 0, trunc)[0][1]
    if group is Group.SU:
        return sum(v for _, v in bgw_q_terms(a, b, beta, trunc.q_max, trunc))
    raise ScopeError("bgw_series is defined over U(N) and SU(N)")


def characteristic_polynomial(mat: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial coefficients, highest degree first."""
    return np.poly(np.asarray(mat, dtype=complex))


def gauge_spectrum_check(
    corners1: CornerAssignment,
    corners2: CornerAssignment,
    graph: RibbonGraph,
    tol: float = 1e-9,
) -> bool:
    """True iff every face's dual monodromy has the same characteristic
    polynomial (coefficient-wise within ``tol``) under both assignments.

    Assignments related by such a spectrum-preserving change produce the
    same z_series: the expansion touches the corner matrices only through
    s_lam of the dual monodromies.
    """
    if corners1.n_dim != corners2.n_dim:
        raise ValueError("corner assignments have different dimensions")
    for word in graph.faces():
        p1 = characteristic_polynomial(monodromy_matrix(word, corners1))
        p2 = characteristic_polynomial(monodromy_matrix(word, corners2))
        if np.max(np.abs(p1 - p2)) > tol:
            return False
    return True
