"""Hypergeometric tau functions and their KP check.

A content-weighted double Schur series

    tau = sum_lam s_lam(p) s_lam(spectrum) prod_{(i,j) in lam} r(j - i)

is a KP tau function in the times t_m = p_m / m.  This module evaluates
such series, builds them out of graph models by specializing couplings to
p(u) and dual monodromies to rank-p projectors I[p] (which turns the
model's weight into a pure content product), and verifies the KP property
with a finite-difference residual of the first KP equation.

KP conventions used by :func:`kp_residual` (with x = t_1, y = t_2,
t = t_3 and u = 2 d^2/dx^2 log tau):

    residual = d/dx (4 u_t - 6 u u_x - u_xxx) - 3 u_yy
             = 4 u_xt - 6 u_x^2 - 6 u u_xx - u_xxxx - 3 u_yy.

Note the nonlinear coefficient: with the field normalized as
u = 2 (log tau)_xx, the Hirota bilinear identity
(D1^4 - 4 D1 D3 + 3 D2^2) tau . tau = 0 expands to the residual above; the
variant with -12 u u_x belongs to the normalization u = (log tau)_xx and
does not vanish for u = 2 (log tau)_xx (checked numerically against exact
series; see the corrupted-series sensitivity control in the tests).

The stencil evaluates tau in mpmath extended precision: the fourth
x-derivative divides fourth differences by step^4, which double precision
cannot support at the small field magnitudes these series produce.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import mpmath as mp
import numpy as np

from . import model as model_mod
from .model import Group, ModelSpec, TruncationPolicy, WeightConvention, monodromy_matrix
from .partitions import CellContentWeight, Partition, enumerate_partitions, hooks_and_contents
from .ribbon import euler_characteristic
from .symfun import (
    PowerSums,
    SpectralMatrix,
    homogeneous_from_power_sums,
    power_sums_of_matrix,
    schur_from_power_sums,
    _det_pivot,
    _jacobi_trudi_matrix,
)

STENCIL_PRECISION_DPS = 40
TAU_MAGNITUDE_FLOOR = 1e-300


class SpecializationError(ValueError):
    """A specialization plan does not reduce the model to a content-weighted
    two-Schur series."""


class RationalContentWeight(CellContentWeight):
    """r(m) = scale * prod_k (a_k + m) / prod_k (b_k + m), with optional
    tabulated overrides at individual lattice points.

    This is the serializable content-weight family: ``num_shifts`` holds the
    a_k, ``den_shifts`` the b_k.  Zeros of the numerator simply annihilate
    the terms whose diagrams contain that content (support truncation);
    they are never inverted.
    """

    __slots__ = ("num_shifts", "den_shifts", "scale", "overrides")

    def __init__(
        self,
        num_shifts: Sequence[complex] = (),
        den_shifts: Sequence[complex] = (),
        scale: complex = 1.0,
        overrides: Optional[Mapping[int, complex]] = None,
    ):
        self.num_shifts = tuple(num_shifts)
        self.den_shifts = tuple(den_shifts)
        self.scale = scale
        self.overrides = dict(overrides or {})
        super().__init__(self._eval)

    def _eval(self, m: int):
        if m in self.overrides:
            return self.overrides[m]
        val = self.scale
        for a in self.num_shifts:
            val = val * (a + m)
        for b in self.den_shifts:
            val = val / (b + m)
        return val

    def to_json_dict(self) -> dict:
        out = {
            "num_shifts": [_num_json(a) for a in self.num_shifts],
            "den_shifts": [_num_json(b) for b in self.den_shifts],
        }
        if self.scale != 1.0:
            out["scale"] = _num_json(self.scale)
        if self.overrides:
            out["overrides"] = {str(k): _num_json(v) for k, v in self.overrides.items()}
        return out


def _num_json(v):
    v = complex(v)
    return v.real if v.imag == 0 else [v.real, v.imag]


@dataclass(frozen=True)
class HypTauSpec:
    """Data of one hypergeometric tau function: couplings p, the surviving
    spectral argument, the content weight r, and the truncation."""

    p: PowerSums
    spectrum: tuple[complex, ...]
    weight: Callable[[int], complex]
    trunc: TruncationPolicy

    def __post_init__(self):
        if self.trunc.max_weight < 1:
            raise ValueError("tau truncation needs max_weight >= 1")
        if len(self.spectrum) < 1:
            raise ValueError("spectrum must contain at least one eigenvalue")


def content_factor(lam: Partition, weight: Callable[[int], complex]):
    prod = 1
    for _, c in hooks_and_contents(lam).values():
        prod = prod * weight(c)
    return prod


def hyp_tau(spec: HypTauSpec) -> complex:
    """sum over |lam| <= D, ell(lam) <= N of
    s_lam(p) s_lam(spectrum) prod_cells r(content)."""
    n_dim = len(spec.spectrum)
    degree = spec.trunc.max_weight
    lams = enumerate_partitions(degree, spec.trunc.length_bound(n_dim))
    p = spec.p.padded(degree)
    spec_ps = power_sums_of_matrix(
        SpectralMatrix(eigenvalues=spec.spectrum), degree
    )
    tables = model_mod.schur_values(lams, p)
    tables_v = model_mod.schur_values(lams, spec_ps)
    total = 0.0 + 0.0j
    for lam in lams:
        r = content_factor(lam, spec.weight)
        if r == 0:
            continue
        total += tables[lam] * tables_v[lam] * complex(r)
    return total


# ---------------------------------------------------------------------------
# Specialization of graph models into hypergeometric form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Directive:
    """One restriction: ('coupling', vertex index, u) sets that vertex's
    couplings to p(u); ('face', face index, p_b) declares that face's dual
    monodromy to be the projector I[p_b]."""

    kind: str
    index: int
    value: complex

    def __post_init__(self):
        if self.kind not in ("coupling", "face"):
            raise ValueError(f"directive kind must be 'coupling' or 'face', got {self.kind!r}")


@dataclass(frozen=True)
class SpecializationPlan:
    """n - 1 directives on a graph with V - n + F = 2."""

    directives: tuple[Directive, ...]

    def __init__(self, directives: Sequence[Directive]):
        object.__setattr__(self, "directives", tuple(directives))


def apply_specialization(plan: SpecializationPlan, model: ModelSpec) -> HypTauSpec:
    """Reduce a graph model to a hypergeometric tau function.

    Bookkeeping per cell (i, j) with content m = j - i and hook h:

      * the U(N) weight s_lam(I_N)^(-n) contributes h^n / (N + m)^n,
        the GL weight N^(-n|lam|) s_lam(p_inf)^(-n) contributes h^n / N^n;
      * a coupling left at p_infinity contributes 1/h;
      * a directive (coupling -> p(u) or face -> I[p_b]) contributes
        (value + m)/h.

    The hooks must cancel exactly (n fixings: the p_infinity couplings plus
    the n - 1 directives), and exactly two slots must remain free; those
    become the (p, spectrum) pair.  Graphs with V - n + F = 2 are exactly
    the ones where this count works out.
    """
    spec = model.vertex_form()
    if spec.convention is not WeightConvention.CALIBRATED:
        raise SpecializationError(
            "specialization is defined for the calibrated weight convention"
        )
    graph = spec.graph
    n_edges = graph.n
    if euler_characteristic(graph) != 2:
        raise SpecializationError(
            f"tau reduction needs V - n + F = 2, got {euler_characteristic(graph)}"
        )
    if len(plan.directives) != n_edges - 1:
        raise SpecializationError(
            f"need exactly n - 1 = {n_edges - 1} directives, got {len(plan.directives)}"
        )
    if spec.couplings is None:
        raise SpecializationError("model must carry couplings")

    coupling_dirs = {d.index: d for d in plan.directives if d.kind == "coupling"}
    face_dirs = {d.index: d for d in plan.directives if d.kind == "face"}
    if len(coupling_dirs) + len(face_dirs) != len(plan.directives):
        raise SpecializationError("at most one directive per coupling or face slot")
    faces = graph.faces()
    for idx in coupling_dirs:
        if not 0 <= idx < graph.num_vertices:
            raise SpecializationError(f"coupling directive index {idx} out of range")
    for idx in face_dirs:
        if not 0 <= idx < len(faces):
            raise SpecializationError(f"face directive index {idx} out of range")

    n_dim = spec.n_dim
    hook_exponent = n_edges
    num_shifts: list[complex] = []
    if spec.group in (Group.U, Group.SU):
        den_shifts: list[complex] = [n_dim] * n_edges
        scale = 1.0
    elif spec.group is Group.GL_GAUSSIAN:
        den_shifts = []
        scale = float(n_dim) ** (-n_edges)
    else:
        raise SpecializationError(f"unsupported group {spec.group}")

    free_couplings: list[PowerSums] = []
    for v_idx, p in enumerate(spec.couplings):
        if v_idx in coupling_dirs:
            hook_exponent -= 1
            num_shifts.append(coupling_dirs[v_idx].value)
        elif p.is_p_infinity():
            hook_exponent -= 1
        else:
            free_couplings.append(p)

    free_spectra: list[tuple[complex, ...]] = []
    for f_idx, word in enumerate(faces):
        if f_idx in face_dirs:
            hook_exponent -= 1
            num_shifts.append(face_dirs[f_idx].value)
        else:
            mono = monodromy_matrix(word, spec.corners)
            eig = sorted(np.linalg.eigvals(mono), key=lambda z: (z.real, z.imag))
            free_spectra.append(tuple(eig))

    if hook_exponent != 0:
        raise SpecializationError(
            f"hook factors do not cancel (residual exponent {hook_exponent}); "
            "couplings outside the free pair must be p_infinity or carry a directive"
        )
    free_slots = len(free_couplings) + len(free_spectra)
    if free_slots != 2:
        raise SpecializationError(
            f"exactly two slots must remain free for the (p, spectrum) pair, got {free_slots}"
        )

    weight = RationalContentWeight(num_shifts=num_shifts, den_shifts=den_shifts, scale=scale)
    # the resulting truncation inherits the couplings' degree; rebuild the
    # HypTauSpec with dataclasses.replace to truncate differently
    degree = max(1, max(p.degree for p in spec.couplings))
    if free_couplings and free_spectra:
        p, spectrum = free_couplings[0], free_spectra[0]
    elif len(free_spectra) == 2:
        first = SpectralMatrix(eigenvalues=free_spectra[0])
        p, spectrum = power_sums_of_matrix(first, degree), free_spectra[1]
    else:
        raise SpecializationError(
            "both free slots are couplings; at least one spectral argument is required"
        )
    trunc = TruncationPolicy(max_weight=degree, max_length=min(n_dim, len(spectrum)))
    return HypTauSpec(p=p.padded(degree), spectrum=spectrum, weight=weight, trunc=trunc)


# ---------------------------------------------------------------------------
# KP residual
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KPResidual:
    """Finite-difference KP residual at one base point.  ``relative`` is the
    absolute residual divided by the largest constituent term (zero max term
    means ``relative`` is reported as 0)."""

    absolute: float
    relative: float
    max_term: float


def _tau_evaluator(spec: HypTauSpec, coefficient_scale: Optional[Mapping[Partition, float]]):
    """Precompute per-partition coefficients s_lam(spectrum) * prod r in
    extended precision; return tau(t1, t2, t3, base_p) as an mp function."""
    degree = spec.trunc.max_weight
    n_dim = len(spec.spectrum)
    lams = enumerate_partitions(degree, spec.trunc.length_bound(n_dim))
    spec_ps = power_sums_of_matrix(SpectralMatrix(eigenvalues=spec.spectrum), degree)
    coeffs: list[tuple[Partition, mp.mpc]] = []
    for lam in lams:
        r = content_factor(lam, spec.weight)
        if r == 0:
            continue
        if lam.weight == 0:
            s_v = 1.0 + 0.0j
        else:
            s_v = complex(schur_from_power_sums(lam, spec_ps))
        c = complex(r) * s_v
        if coefficient_scale and lam in coefficient_scale:
            c *= coefficient_scale[lam]
        coeffs.append((lam, mp.mpc(c)))

    def tau_at(p_values: list) -> mp.mpc:
        ps = PowerSums(p_values)
        h = homogeneous_from_power_sums(ps, degree)
        total = mp.mpc(0)
        for lam, c in coeffs:
            if lam.weight == 0:
                total += c
            else:
                total += c * _det_pivot(_jacobi_trudi_matrix(lam, h))
        return total

    return tau_at


def kp_residual(
    spec: HypTauSpec,
    base: PowerSums,
    step: float,
    coefficient_scale: Optional[Mapping[Partition, float]] = None,
) -> KPResidual:
    """Residual of the first KP equation for this tau at a base point.

    The stencil varies the times t_m = p_m / m for m = 1, 2, 3 around the
    base; all derivatives are second-order central differences, with the
    fourth t_1-derivative on the standard five-point stencil.  The optional
    ``coefficient_scale`` multiplies individual lam-coefficients and exists
    for sensitivity controls (a genuinely corrupted series must fail).

    Raises ValueError when the truncation is too short (D >= 8), when the
    last shell contributes more than 1e-10 relatively at the base, or when
    tau collapses below 1e-300 somewhere on the stencil (log undefined).
    """
    if spec.trunc.max_weight < 8:
        raise ValueError("KP check needs truncation max_weight >= 8")
    if step <= 0:
        raise ValueError("step must be positive")

    degree = spec.trunc.max_weight
    base_p = list(base.padded(degree).values)
    tau_at = _tau_evaluator(spec, coefficient_scale)

    lams = enumerate_partitions(degree, spec.trunc.length_bound(len(spec.spectrum)))
    spec_ps = power_sums_of_matrix(SpectralMatrix(eigenvalues=spec.spectrum), degree)
    sv = model_mod.schur_values(lams, PowerSums(base_p))
    sw = model_mod.schur_values(lams, spec_ps)
    shell = {k: 0.0 for k in range(degree + 1)}
    for lam in lams:
        r = content_factor(lam, spec.weight)
        shell[lam.weight] += abs(sv[lam] * sw[lam] * complex(r))
    total_mag = sum(shell.values())
    if total_mag > 0 and shell[degree] > 1e-10 * total_mag:
        raise ValueError(
            f"last shell contributes {shell[degree] / total_mag:.2e} relatively at the base; "
            "move the base point closer to the origin or raise the truncation"
        )

    with mp.workdps(STENCIL_PRECISION_DPS):
        h = mp.mpf(step)
        memo: dict[tuple[int, int, int], mp.mpc] = {}

        def logtau(i: int, j: int, l: int) -> mp.mpc:
            key = (i, j, l)
            if key not in memo:
                p = list(base_p)
                p[0] = p[0] + 1 * (i * h)  # t1 shift: p1 = 1 * t1
                p[1] = p[1] + 2 * (j * h)  # t2 shift: p2 = 2 * t2
                p[2] = p[2] + 3 * (l * h)  # t3 shift: p3 = 3 * t3
                value = tau_at(p)
                if abs(value) < TAU_MAGNITUDE_FLOOR:
                    raise ValueError(f"tau magnitude below {TAU_MAGNITUDE_FLOOR} at stencil node {key}")
                memo[key] = mp.log(value)
            return memo[key]

        def u(i: int, j: int = 0, l: int = 0) -> mp.mpc:
            return 2 * (logtau(i + 1, j, l) - 2 * logtau(i, j, l) + logtau(i - 1, j, l)) / h**2

        u0 = u(0)
        u_x = (u(1) - u(-1)) / (2 * h)
        u_xx = (u(1) - 2 * u0 + u(-1)) / h**2
        u_xxxx = (u(-2) - 4 * u(-1) + 6 * u0 - 4 * u(1) + u(2)) / h**4
        u_xt = (u(1, 0, 1) - u(1, 0, -1) - u(-1, 0, 1) + u(-1, 0, -1)) / (4 * h**2)
        u_yy = (u(0, 1, 0) - 2 * u0 + u(0, -1, 0)) / h**2

        terms = {
            "4u_xt": 4 * u_xt,
            "6u_x^2": 6 * u_x**2,
            "6uu_xx": 6 * u0 * u_xx,
            "u_xxxx": u_xxxx,
            "3u_yy": 3 * u_yy,
        }
        residual = terms["4u_xt"] - terms["6u_x^2"] - terms["6uu_xx"] - terms["u_xxxx"] - terms["3u_yy"]
        max_term = max(abs(v) for v in terms.values())
        absolute = abs(residual)
        relative = float(absolute / max_term) if max_term > 0 else 0.0
    return KPResidual(absolute=float(absolute), relative=relative, max_term=float(max_term))


def bgw_q_decomposition(a, b, beta, q_max: int, trunc: TruncationPolicy) -> list[tuple[int, complex]]:
    """Per-q partial sums of the SU(N) BGW series, in the canonical order
    q = 0, +1, -1, ...; the q = 0 entry is the U(N) value and the sum over
    the list is bit-identical to bgw_series over SU(N) at the same
    truncation (same code path, same order)."""
    return model_mod.bgw_q_terms(a, b, beta, q_max, trunc)
