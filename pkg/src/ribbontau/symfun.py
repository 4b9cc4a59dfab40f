"""Schur-function engine.

Evaluates s_lam from truncated power sums (Newton's identities followed by
the Jacobi-Trudi determinant), from matrix traces, and through the exact
hook-content closed forms for the special points p(u) = (u, u, u, ...),
the identity spectrum I_N, and p_infinity = (1, 0, 0, ...).

Two arithmetic paths coexist deliberately:

* an exact path over ``fractions.Fraction`` (Bareiss fraction-free
  elimination for the determinants), which is the trusted oracle;
* a floating path over complex doubles (partial-pivot elimination),
  used for matrix arguments, plus a vectorized variant that evaluates one
  Schur function on many power-sum vectors at once for the Monte Carlo
  integrands.

Generic scalar types (e.g. mpmath) ride the floating path, which only
needs +, *, / and abs().
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from .partitions import Partition, hooks_and_contents

__all__ = [
    "PowerSums",
    "SpectralMatrix",
    "DegreeError",
    "power_sums_of_matrix",
    "schur_from_power_sums",
    "schur_content_value",
    "schur_p_infinity",
    "scale_power_sums",
    "power_sums_constant",
    "power_sums_infinity",
    "homogeneous_from_power_sums",
    "exp_series_coefficients",
    "schur_batch",
]


class DegreeError(ValueError):
    """A power-sum truncation is too short for the requested partition."""


class PowerSums:
    """A truncated power-sum vector (p_1, ..., p_D), treated as exact data.

    Values may be complex numbers, Fractions (exact path), or any scalar
    type supporting field arithmetic.  No normalization is ever applied.
    """

    __slots__ = ("values",)

    def __init__(self, values: Sequence):
        self.values = tuple(values)
        if not self.values:
            raise ValueError("PowerSums needs at least one value (degree >= 1)")

    @property
    def degree(self) -> int:
        return len(self.values)

    def padded(self, degree: int) -> "PowerSums":
        """Zero-pad to a (weakly) larger truncation degree."""
        if degree <= self.degree:
            return self
        return PowerSums(self.values + (0,) * (degree - self.degree))

    def is_p_infinity(self) -> bool:
        """True when the values are exactly (1, 0, 0, ...)."""
        return self.values[0] == 1 and all(v == 0 for v in self.values[1:])

    def __eq__(self, other) -> bool:
        return isinstance(other, PowerSums) and self.values == other.values

    def __hash__(self):
        return hash(self.values)

    def __repr__(self) -> str:
        return f"PowerSums({list(self.values)!r})"


def power_sums_constant(u, degree: int) -> PowerSums:
    """The special point p(u) = (u, u, u, ...) truncated at ``degree``."""
    return PowerSums((u,) * degree)


def power_sums_infinity(degree: int) -> PowerSums:
    """p_infinity = (1, 0, 0, ...) truncated at ``degree``."""
    return PowerSums((1,) + (0,) * (degree - 1))


class SpectralMatrix:
    """A matrix argument for Schur functions: explicit N x N entries,
    an eigenvalue list, or both.

    Explicit entries are first-class because corner-matrix products are
    generically non-normal; trace powers avoid eigendecomposition entirely.
    When both forms are supplied they are cross-checked on every Tr(Y^m)
    actually used.
    """

    __slots__ = ("dimension", "entries", "eigenvalues")

    def __init__(self, entries=None, eigenvalues=None):
        if entries is None and eigenvalues is None:
            raise ValueError("SpectralMatrix needs entries and/or eigenvalues")
        if entries is not None:
            entries = np.asarray(entries, dtype=complex)
            if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
                raise ValueError(f"matrix entries must be square, got shape {entries.shape}")
        self.entries = entries
        self.eigenvalues = None if eigenvalues is None else tuple(complex(v) for v in eigenvalues)
        if entries is not None and self.eigenvalues is not None:
            if len(self.eigenvalues) != entries.shape[0]:
                raise ValueError("eigenvalue count does not match matrix dimension")
        self.dimension = entries.shape[0] if entries is not None else len(self.eigenvalues)

    @classmethod
    def from_matrix(cls, entries) -> "SpectralMatrix":
        return cls(entries=entries)

    @classmethod
    def from_eigenvalues(cls, eigenvalues) -> "SpectralMatrix":
        return cls(eigenvalues=eigenvalues)

    @classmethod
    def identity(cls, n: int) -> "SpectralMatrix":
        return cls(entries=np.eye(n, dtype=complex), eigenvalues=(1.0,) * n)

    @classmethod
    def projector(cls, p: int, n: int) -> "SpectralMatrix":
        """I[p]: spectrum of p units and N - p zeroes."""
        if not 0 <= p <= n:
            raise ValueError(f"projector rank p={p} out of range for N={n}")
        eig = (1.0,) * p + (0.0,) * (n - p)
        return cls(entries=np.diag(np.array(eig, dtype=complex)), eigenvalues=eig)

    def dense(self) -> np.ndarray:
        """Explicit entries; an eigenvalue-only argument is realized as the
        diagonal matrix whenever an actual matrix is required."""
        if self.entries is not None:
            return self.entries
        return np.diag(np.asarray(self.eigenvalues, dtype=complex))


def power_sums_of_matrix(y: SpectralMatrix, degree: int) -> PowerSums:
    """p_m = Tr(Y^m) for m = 1..degree.

    Uses repeated multiplication on explicit entries and plain power sums on
    eigenvalue lists; when both representations are present they must agree
    to 1e-9 relative on every trace used.
    """
    if degree < 1:
        raise ValueError("truncation degree must be >= 1")
    from_entries = None
    from_eigs = None
    if y.entries is not None:
        vals = []
        power = y.entries
        for _ in range(degree):
            vals.append(complex(np.trace(power)))
            power = power @ y.entries
        from_entries = tuple(vals)
    if y.eigenvalues is not None:
        eig = np.asarray(y.eigenvalues, dtype=complex)
        from_eigs = tuple(complex(np.sum(eig**m)) for m in range(1, degree + 1))
    if from_entries is not None and from_eigs is not None:
        scale = max(1.0, max(abs(v) for v in from_entries))
        for m, (a, b) in enumerate(zip(from_entries, from_eigs), start=1):
            if abs(a - b) > 1e-9 * scale:
                raise ValueError(
                    f"entries and eigenvalues disagree on Tr(Y^{m}): {a} vs {b}"
                )
    return PowerSums(from_entries if from_entries is not None else from_eigs)


def _is_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


def homogeneous_from_power_sums(p: PowerSums, top: int) -> list:
    """Complete homogeneous symmetric functions h_0..h_top via Newton's
    identities: k h_k = sum_{m=1..k} p_m h_{k-m}, with p_m = 0 beyond the
    truncation degree."""
    exact = _is_exact(p.values)
    one = Fraction(1) if exact else 1.0
    h = [one] + [0 * one] * top
    for k in range(1, top + 1):
        acc = 0 * one
        for m in range(1, k + 1):
            pm = p.values[m - 1] if m <= p.degree else 0
            if pm != 0:
                acc = acc + pm * h[k - m]
        h[k] = acc / k if not exact else Fraction(acc, k)
    return h


def _det_bareiss(mat: list[list[Fraction]]) -> Fraction:
    """Fraction-free (Bareiss) determinant; exact for integer/Fraction entries."""
    n = len(mat)
    if n == 0:
        return Fraction(1)
    m = [[Fraction(x) for x in row] for row in mat]
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev
            m[i][k] = Fraction(0)
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _det_pivot(mat: list[list]) -> complex:
    """Partial-pivot Gaussian elimination; works for any scalar with abs()."""
    n = len(mat)
    if n == 0:
        return 1.0
    m = [list(row) for row in mat]
    det = None
    sign = 1
    for c in range(n):
        piv = max(range(c, n), key=lambda r: abs(m[r][c]))
        if abs(m[piv][c]) == 0:
            return 0.0 * m[0][0]
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        pivval = m[c][c]
        det = pivval if det is None else det * pivval
        for r in range(c + 1, n):
            f = m[r][c] / pivval
            for k in range(c, n):
                m[r][k] = m[r][k] - f * m[c][k]
    return sign * det


def _jacobi_trudi_matrix(lam: Partition, h: list) -> list[list]:
    ell = lam.length
    zero = 0 * h[0]
    return [
        [
            h[lam.parts[i] - (i + 1) + (j + 1)]
            if 0 <= lam.parts[i] - (i + 1) + (j + 1) < len(h)
            else zero
            for j in range(ell)
        ]
        for i in range(ell)
    ]


def schur_from_power_sums(lam: Partition, p: PowerSums):
    """s_lam evaluated on a power-sum vector.

    Requires p.degree >= |lam| (the Jacobi-Trudi matrix reads h up to
    lam_1 + ell - 1 <= |lam|, and h_k depends on p_1..p_k).  Fraction-valued
    power sums give an exact Fraction back.
    """
    if lam.weight == 0:
        return Fraction(1) if _is_exact(p.values) else 1.0 + 0.0j
    if p.degree < lam.weight:
        raise DegreeError(
            f"power sums truncated at degree {p.degree}, but s_lam with |lam|="
            f"{lam.weight} requires degree >= {lam.weight}"
        )
    h = homogeneous_from_power_sums(p, lam.weight)
    jt = _jacobi_trudi_matrix(lam, h)
    if _is_exact(p.values):
        return _det_bareiss(jt)
    return _det_pivot(jt)


def schur_of_matrix(lam: Partition, y: SpectralMatrix) -> complex:
    """Convenience: s_lam(Y) via the power sums of Y up to degree |lam|."""
    if lam.weight == 0:
        return 1.0 + 0.0j
    return complex(schur_from_power_sums(lam, power_sums_of_matrix(y, lam.weight)))


def schur_content_value(lam: Partition, u, n: int) -> Fraction:
    """Exact hook-content evaluation of s_lam at the point p(u) = (u, u, ...):

        s_lam(p(u)) = s_lam(I_N) * prod_cells (u + j - i) / (N + j - i),
        s_lam(I_N)  = prod_cells (N + j - i) / h(i, j).

    With integer u = p this is also s_lam(I[p]).  Returns 0 when
    ell(lam) > N; the denominators N + j - i never vanish when ell(lam) <= N.
    """
    if lam.length > n:
        return Fraction(0)
    value = Fraction(1)
    u = Fraction(u)
    for hook, c in hooks_and_contents(lam).values():
        value *= (u + c) / (hook * 1)  # (N+c) cancels between the two factors
    return value


def schur_p_infinity(lam: Partition) -> Fraction:
    """s_lam(p_infinity) = prod_cells 1 / h(i, j), exactly."""
    value = Fraction(1)
    for hook, _ in hooks_and_contents(lam).values():
        value /= hook
    return value


def scale_power_sums(p: PowerSums, c) -> PowerSums:
    """(c p_1, ..., c p_D): every power sum multiplied by the same scalar."""
    return PowerSums(tuple(c * v for v in p.values))


def rational_to_string(x: Fraction) -> str:
    """Exact rationals serialize as "num/den"."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def rational_from_string(text: str) -> Fraction:
    num, _, den = text.partition("/")
    return Fraction(int(num), int(den) if den else 1)


def exp_series_coefficients(a: Sequence) -> list:
    """Coefficients e_0..e_D of exp(sum_m a_m t^m) as a truncated series in t.

    Standard recurrence from E' = A'E:  k e_k = sum_{j=1..k} j a_j e_{k-j}.
    ``a`` is indexed from a_1 (a[0] = a_1); D = len(a).  Values may be
    scalars or numpy arrays (one series per array slot).
    """
    top = len(a)
    first = a[0]
    one = np.ones_like(first) if isinstance(first, np.ndarray) else 1.0
    e = [one]
    for k in range(1, top + 1):
        acc = 0 * one
        for j in range(1, k + 1):
            acc = acc + j * a[j - 1] * e[k - j]
        e.append(acc / k)
    return e


# ---------------------------------------------------------------------------
# Vectorized path: one partition, many power-sum vectors at once.
# ---------------------------------------------------------------------------


def homogeneous_batch(p_columns: Sequence[np.ndarray], top: int) -> list[np.ndarray]:
    """h_0..h_top where p_m is a whole array of sample values (shape (M,))."""
    shape = p_columns[0].shape
    h = [np.ones(shape, dtype=complex)]
    for k in range(1, top + 1):
        acc = np.zeros(shape, dtype=complex)
        for m in range(1, k + 1):
            if m <= len(p_columns):
                acc += p_columns[m - 1] * h[k - m]
        h.append(acc / k)
    return h


def schur_batch(lam: Partition, p_columns: Sequence[np.ndarray]) -> np.ndarray:
    """s_lam evaluated simultaneously on M power-sum vectors.

    ``p_columns[m-1]`` holds the m-th power sum of every sample.  Returns an
    array of shape (M,).  The Jacobi-Trudi determinant is taken with
    numpy's batched det on an (M, ell, ell) stack.
    """
    shape = p_columns[0].shape
    if lam.weight == 0:
        return np.ones(shape, dtype=complex)
    if len(p_columns) < lam.weight:
        raise DegreeError(
            f"need power sums up to degree {lam.weight}, got {len(p_columns)}"
        )
    h = homogeneous_batch(p_columns, lam.weight)
    ell = lam.length
    stack = np.zeros(shape + (ell, ell), dtype=complex)
    for i in range(ell):
        for j in range(ell):
            idx = lam.parts[i] - (i + 1) + (j + 1)
            if 0 <= idx < len(h):
                stack[..., i, j] = h[idx]
    if ell == 1:
        return stack[..., 0, 0]
    return np.linalg.det(stack)
