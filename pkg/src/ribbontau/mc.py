"""Monte Carlo verification oracle.

Samples Haar-distributed U(N) and SU(N) matrices and variance-1/N Ginibre
matrices, estimates the left-hand-side group integrals of every identity
the series modules implement, and reports pass/fail against the closed
forms.  The oracle deliberately shares no code path with the character
expansion it checks: integrands are evaluated exactly as written (Schur
functions of the sampled matrix arguments; coupling exponentials as series
truncated at the same degree as the comparison series, so that the two
sides differ by sampling noise only).

Reproducibility contract: streams are counter-based (Philox) and keyed by
(seed, edge label, chunk index) with a fixed chunk size, and accumulation
runs in chunk order.  Identical (seed, samples) therefore reproduce the
mean bit for bit, independently of how many cases share the sampling pass.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import model as model_mod
from .model import CornerAssignment, Group, ModelSpec, TruncationPolicy
from .partitions import Partition, shift_partition
from .symfun import (
    SpectralMatrix,
    exp_series_coefficients,
    schur_batch,
    schur_content_value,
    schur_of_matrix,
)

#: Fixed chunk size; part of the documented reduction order.
CHUNK = 16384

_SEED_MASK = (1 << 64) - 1
_DOMAIN = 0x52B07A0  # domain separator for this package's streams

Z_THRESHOLD = 4.0
DEGENERATE_SE = 1e-12
DEGENERATE_ABS_TOL = 1e-9


class ConfigurationError(ValueError):
    """An identity case is missing a parameter its integrand needs."""


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _stream(seed: int, label: int, chunk_index: int, attempt: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(
        entropy=(_DOMAIN, int(seed) & _SEED_MASK, int(label), int(chunk_index), int(attempt))
    )
    return np.random.Generator(np.random.Philox(ss))


def _gaussian_block(gen: np.random.Generator, count: int, n: int) -> np.ndarray:
    z = gen.standard_normal((count, n, n)) + 1j * gen.standard_normal((count, n, n))
    return z / np.sqrt(2.0)


def _haar_fix(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """QR-orthonormalize and correct column phases by the sign of the
    triangular diagonal; returns (U, |diag R|) so callers can detect
    degenerate draws."""
    q, r = np.linalg.qr(z)
    d = np.einsum("...ii->...i", r)
    absd = np.abs(d)
    safe = np.where(absd > 0, absd, 1.0)
    ph = d / safe
    return q * ph[..., None, :], absd


def sample_unitary(n: int, stream: np.random.Generator) -> np.ndarray:
    """One Haar-distributed U(N) matrix.

    Built by orthonormalizing a complex Gaussian matrix and fixing each
    column's phase with the sign of the corresponding diagonal entry of R;
    without the phase fix the distribution is not Haar.
    """
    u, absd = _haar_fix(_gaussian_block(stream, 1, n))
    while np.any(absd == 0) or not np.all(np.isfinite(u)):
        u, absd = _haar_fix(_gaussian_block(stream, 1, n))
    return u[0]


def sample_special_unitary(n: int, stream: np.random.Generator) -> np.ndarray:
    """One Haar-distributed SU(N) matrix: a U(N) draw with the determinant
    phase removed, U' = U exp(-i arg(det U) / N) (principal branch)."""
    u = sample_unitary(n, stream)
    return u * np.exp(-1j * np.angle(np.linalg.det(u)) / n)


def sample_ginibre(n: int, stream: np.random.Generator) -> np.ndarray:
    """One complex Ginibre matrix with E X_ij = 0, E |X_ij|^2 = 1/N."""
    return _gaussian_block(stream, 1, n)[0] / np.sqrt(n)


def _unitary_block(seed: int, label: int, chunk_index: int, count: int, n: int) -> np.ndarray:
    attempt = 0
    u, absd = _haar_fix(_gaussian_block(_stream(seed, label, chunk_index, attempt), count, n))
    bad = np.any(absd == 0, axis=-1) | ~np.all(np.isfinite(u.reshape(count, -1)), axis=-1)
    while np.any(bad):
        attempt += 1
        redraw, rd = _haar_fix(
            _gaussian_block(_stream(seed, label, chunk_index, attempt), int(bad.sum()), n)
        )
        u[bad] = redraw
        absd[bad] = rd
        bad = np.any(absd == 0, axis=-1) | ~np.all(np.isfinite(u.reshape(count, -1)), axis=-1)
    return u


def _group_block(
    group: Group, seed: int, label: int, chunk_index: int, count: int, n: int
) -> np.ndarray:
    if group is Group.GL_GAUSSIAN:
        return _gaussian_block(_stream(seed, label, chunk_index), count, n) / np.sqrt(n)
    u = _unitary_block(seed, label, chunk_index, count, n)
    if group is Group.SU:
        det = np.linalg.det(u)
        u = u * np.exp(-1j * np.angle(det) / n)[:, None, None]
    return u


# ---------------------------------------------------------------------------
# Identity cases
# ---------------------------------------------------------------------------

KNOWN_KINDS = (
    "orth-2a",
    "orth-2b",
    "orth-2c",
    "su-3bc",
    "su-4",
    "schur-moment",
    "z-integral",
    "hciz",
    "bgw",
)


def _fingerprint(arr: np.ndarray) -> str:
    return hashlib.blake2b(np.ascontiguousarray(arr).tobytes(), digest_size=8).hexdigest()


def _mat_json(arr: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


@dataclass
class IdentityCase:
    """One verifiable integral identity with its parameters.

    ``kind`` selects the identity; the other fields are interpreted per
    kind (see :func:`build_integrand`).  Matrices may be given as
    SpectralMatrix or anything ``np.asarray`` accepts.
    """

    kind: str
    n_dim: Optional[int] = None
    lam: Optional[Partition] = None
    mu: Optional[Partition] = None
    q: Optional[int] = None
    a: Optional[SpectralMatrix] = None
    b: Optional[SpectralMatrix] = None
    beta: Optional[complex] = None
    group: Optional[Group] = None
    model: Optional[ModelSpec] = None
    lams: Optional[tuple[Partition, ...]] = None
    trunc: Optional[TruncationPolicy] = None

    def __post_init__(self):
        if self.kind not in KNOWN_KINDS:
            raise ConfigurationError(f"unknown identity kind {self.kind!r}; known: {KNOWN_KINDS}")
        for name in ("a", "b"):
            val = getattr(self, name)
            if val is not None and not isinstance(val, SpectralMatrix):
                setattr(self, name, SpectralMatrix(np.asarray(val, dtype=complex)))
        self.validate()

    def validate(self) -> None:
        k = self.kind
        need = {
            "orth-2a": ("n_dim", "lam", "mu", "a", "b"),
            "orth-2b": ("n_dim", "lam", "mu", "q", "a", "b"),
            "orth-2c": ("n_dim", "lam", "mu", "q", "a", "b"),
            "su-3bc": ("n_dim", "lam", "mu", "a", "b"),
            "su-4": ("n_dim", "lam", "a", "b"),
            "schur-moment": ("model", "lams"),
            "z-integral": ("model", "trunc"),
            "hciz": ("n_dim", "a", "b", "group", "trunc"),
            "bgw": ("n_dim", "a", "b", "beta", "group", "trunc"),
        }[k]
        missing = [f for f in need if getattr(self, f) is None]
        if missing:
            raise ConfigurationError(f"case {k!r} is missing parameters {missing}")
        if k == "orth-2b" and self.q <= 0:
            raise ConfigurationError("orth-2b needs q > 0")
        if k == "orth-2c" and self.q >= 0:
            raise ConfigurationError("orth-2c needs q < 0")
        if k in ("hciz", "bgw") and self.group not in (Group.U, Group.SU):
            raise ConfigurationError(f"{k} runs over U or SU, got {self.group}")

    def sampling_group(self) -> Group:
        if self.kind.startswith("orth"):
            return Group.U
        if self.kind.startswith("su"):
            return Group.SU
        if self.kind in ("schur-moment", "z-integral"):
            return self.model.vertex_form().group
        return self.group

    def dimension(self) -> int:
        if self.model is not None:
            return self.model.n_dim
        return self.n_dim

    def labels(self) -> tuple[int, ...]:
        if self.model is not None:
            return tuple(range(1, self.model.vertex_form().graph.n + 1))
        return (1,)

    def params_json(self) -> dict:
        out: dict = {"kind": self.kind, "N": self.dimension()}
        if self.lam is not None:
            out["lam"] = self.lam.to_list()
        if self.mu is not None:
            out["mu"] = self.mu.to_list()
        if self.q is not None:
            out["q"] = self.q
        if self.beta is not None:
            out["beta"] = [float(complex(self.beta).real), float(complex(self.beta).imag)]
        if self.group is not None:
            out["group"] = self.group.value
        if self.a is not None:
            out["A"] = _mat_json(self.a.dense())
        if self.b is not None:
            out["B"] = _mat_json(self.b.dense())
        if self.lams is not None:
            out["lams"] = [l.to_list() for l in self.lams]
        if self.trunc is not None:
            out["max_weight"] = self.trunc.max_weight
            out["q_max"] = self.trunc.q_max
        if self.model is not None:
            out["group"] = self.model.group.value
            out["graph"] = self.model.graph.to_json_dict()
            out["mode"] = self.model.mode
            out["convention"] = self.model.convention.value
        return out


# ---------------------------------------------------------------------------
# Integrands
# ---------------------------------------------------------------------------


class _ChunkContext:
    """Per-chunk sampled group elements plus a memo for derived arrays,
    shared between cases in a battery."""

    __slots__ = ("blocks", "memo")

    def __init__(self, blocks: dict[int, np.ndarray]):
        self.blocks = blocks
        self.memo: dict = {}

    def element(self, label: int) -> np.ndarray:
        if label > 0:
            return self.blocks[label]
        key = ("dag", -label)
        if key not in self.memo:
            self.memo[key] = self.blocks[-label].conj().transpose(0, 2, 1)
        return self.memo[key]

    def get(self, key, compute: Callable[[], np.ndarray]) -> np.ndarray:
        if key not in self.memo:
            self.memo[key] = compute()
        return self.memo[key]


def _trace_powers(ctx: _ChunkContext, key, block_fn, upto: int) -> list[np.ndarray]:
    """Tr(W^m), m = 1..upto, for a per-sample matrix stack W.  Cached per
    (key, degree) so two cases needing different degrees stay independent
    and deterministic."""

    def compute():
        w = block_fn()
        out = []
        power = w
        for _ in range(upto):
            out.append(np.einsum("mii->m", power))
            power = power @ w
        return out

    return ctx.get((key, "traces", upto), compute)


def _schur_on(ctx: _ChunkContext, lam: Partition, key, block_fn) -> np.ndarray:
    if lam.weight == 0:
        any_block = next(iter(ctx.blocks.values()))
        return np.ones(any_block.shape[0], dtype=complex)
    traces = _trace_powers(ctx, key, block_fn, lam.weight)
    return schur_batch(lam, traces)


def _truncated_exp(t: np.ndarray, degree: int) -> np.ndarray:
    """sum_{k<=degree} t^k / k!, the degree-graded truncation of e^t."""
    acc = np.ones_like(t)
    term = np.ones_like(t)
    for k in range(1, degree + 1):
        term = term * t / k
        acc = acc + term
    return acc


def _dressed_word_block(ctx: _ChunkContext, word, corners: CornerAssignment) -> np.ndarray:
    labels = tuple(word)
    key = ("word", labels, corners_fp(corners))

    def compute():
        count = next(iter(ctx.blocks.values())).shape[0]
        out = np.broadcast_to(np.eye(corners.n_dim, dtype=complex), (count, corners.n_dim, corners.n_dim)).copy()
        for label in labels:
            out = out @ (ctx.element(label) @ corners.matrix(label))
        return out

    return ctx.get(key, compute)


def corners_fp(corners: CornerAssignment) -> str:
    """Content fingerprint of an assignment, for memo keys shared between
    battery cases; hashing a handful of small matrices is cheap enough to
    do per call."""
    h = hashlib.blake2b(digest_size=8)
    for label in sorted(corners.matrices):
        h.update(str(label).encode())
        h.update(np.ascontiguousarray(corners.matrices[label]).tobytes())
    return h.hexdigest()


def build_integrand(case: IdentityCase) -> Callable[[_ChunkContext], np.ndarray]:
    """The per-sample integrand of the case's left-hand side."""
    kind = case.kind
    if kind in ("orth-2a", "orth-2b", "orth-2c", "su-3bc", "su-4"):
        a = case.a.dense()
        b = case.b.dense()
        fa, fb = _fingerprint(a), _fingerprint(b)
        lam, mu = case.lam, case.mu if case.mu is not None else case.lam
        q = case.q or 0

        def fn(ctx: _ChunkContext) -> np.ndarray:
            u = ctx.element(1)
            ud = ctx.element(-1)
            s1 = _schur_on(ctx, lam, ("UA", fa), lambda: u @ a)
            s2 = _schur_on(ctx, mu, ("UdB", fb), lambda: ud @ b)
            val = s1 * s2
            if q:
                det = ctx.get(("detU",), lambda: np.linalg.det(u))
                val = val * det**q
            return val

        return fn

    if kind == "hciz":
        a = case.a.dense()
        b = case.b.dense()
        fa, fb = _fingerprint(a), _fingerprint(b)
        degree = case.trunc.max_weight

        def fn(ctx: _ChunkContext) -> np.ndarray:
            u = ctx.element(1)
            ud = ctx.element(-1)
            t = ctx.get(
                ("trW", fa, fb), lambda: np.einsum("mii->m", u @ a @ ud @ b)
            )
            return _truncated_exp(t, degree)

        return fn

    if kind == "bgw":
        a = case.a.dense()
        b = case.b.dense()
        fa, fb = _fingerprint(a), _fingerprint(b)
        degree = case.trunc.max_weight
        beta = complex(case.beta)

        def fn(ctx: _ChunkContext) -> np.ndarray:
            u = ctx.element(1)
            ud = ctx.element(-1)
            t1 = ctx.get(("trUA", fa), lambda: np.einsum("mii->m", u @ a))
            t2 = ctx.get(("trUdB", fb), lambda: np.einsum("mii->m", ud @ b))
            return _truncated_exp(beta * t1, degree) * _truncated_exp(beta * t2, degree)

        return fn

    if kind == "schur-moment":
        spec = case.model.vertex_form()
        words = list(spec.graph.vertex_rotations)
        if len(case.lams) != len(words):
            raise ConfigurationError(
                f"schur-moment needs one partition per vertex ({len(words)})"
            )
        corners = spec.corners

        def fn(ctx: _ChunkContext) -> np.ndarray:
            count = next(iter(ctx.blocks.values())).shape[0]
            val = np.ones(count, dtype=complex)
            for word, lam in zip(words, case.lams):
                labels = tuple(word)
                val = val * _schur_on(
                    ctx,
                    lam,
                    ("word", labels, corners_fp(corners)),
                    lambda w=word: _dressed_word_block(ctx, w, corners),
                )
            return val

        return fn

    if kind == "z-integral":
        spec = case.model.vertex_form()
        if spec.couplings is None:
            raise ConfigurationError("z-integral needs couplings on the model")
        degree = case.trunc.max_weight
        couplings = [p.padded(degree) for p in spec.scaled_couplings()]
        words = list(spec.graph.vertex_rotations)
        corners = spec.corners

        def fn(ctx: _ChunkContext) -> np.ndarray:
            count = next(iter(ctx.blocks.values())).shape[0]
            val = np.ones(count, dtype=complex)
            for word, p in zip(words, couplings):
                labels = tuple(word)
                traces = _trace_powers(
                    ctx,
                    ("word", labels, corners_fp(corners)),
                    lambda w=word: _dressed_word_block(ctx, w, corners),
                    degree,
                )
                coeffs = [
                    (p.values[m - 1] / m) * traces[m - 1] for m in range(1, degree + 1)
                ]
                shells = exp_series_coefficients(coeffs)
                val = val * np.sum(shells, axis=0)
            return val

        return fn

    raise ConfigurationError(f"no integrand for kind {kind!r}")


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def _ratio_to_identity(lam: Partition, ab: np.ndarray, n_dim: int) -> complex:
    """s_lam(AB) / s_lam(I_N), or 0 when ell(lam) > N."""
    if lam.length > n_dim:
        return 0.0 + 0.0j
    s_ab = schur_of_matrix(lam, SpectralMatrix(ab))
    return s_ab / float(schur_content_value(lam, n_dim, n_dim))


def closed_value(case: IdentityCase) -> complex:
    """The right-hand side of the case's identity, from the series modules."""
    kind = case.kind
    if kind in ("orth-2a", "orth-2b", "orth-2c", "su-3bc", "su-4"):
        n = case.n_dim
        a = case.a.dense()
        b = case.b.dense()
        ab = a @ b
        lam, mu = case.lam, case.mu if case.mu is not None else case.lam
        if kind == "orth-2a":
            return _ratio_to_identity(lam, ab, n) if lam == mu else 0.0 + 0.0j
        if kind == "orth-2b":
            if lam.length <= n and mu == shift_partition(lam, case.q, n):
                return _ratio_to_identity(mu, ab, n) * complex(np.linalg.det(a)) ** (-case.q)
            return 0.0 + 0.0j
        if kind == "orth-2c":
            if mu.length <= n and lam == shift_partition(mu, -case.q, n):
                return _ratio_to_identity(lam, ab, n) * complex(np.linalg.det(b)) ** case.q
            return 0.0 + 0.0j
        if kind == "su-4":
            return _ratio_to_identity(lam, ab, n)
        # su-3bc: diagonal plus the two one-sided q-ladders; for a given
        # (lam, mu) at most one branch is nonzero
        total = 0.0 + 0.0j
        if lam == mu:
            total += _ratio_to_identity(lam, ab, n)
        dw = mu.weight - lam.weight
        if dw > 0 and dw % n == 0 and lam.length <= n:
            q = dw // n
            if mu == shift_partition(lam, q, n):
                total += _ratio_to_identity(mu, ab, n) * complex(np.linalg.det(a)) ** (-q)
        if dw < 0 and (-dw) % n == 0 and mu.length <= n:
            q = (-dw) // n
            if lam == shift_partition(mu, q, n):
                total += _ratio_to_identity(lam, ab, n) * complex(np.linalg.det(b)) ** (-q)
        return total
    if kind == "schur-moment":
        return model_mod.schur_moment(case.lams, case.model)
    if kind == "z-integral":
        return model_mod.z_series(case.model, case.trunc)
    if kind == "hciz":
        return model_mod.hciz_series(case.a, case.b, case.trunc)
    if kind == "bgw":
        return model_mod.bgw_series(case.a, case.b, case.beta, case.group, case.trunc)
    raise ConfigurationError(f"no closed form for kind {kind!r}")


# ---------------------------------------------------------------------------
# Estimation and verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with a conservative scalar standard error (max over the
    real and imaginary component standard errors)."""

    mean: complex
    std_error: float
    samples: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "mean": [self.mean.real, self.mean.imag],
            "stderr": self.std_error,
            "samples": self.samples,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class VerificationReport:
    case: IdentityCase
    estimate: MCEstimate
    closed: complex
    z: Optional[float]
    abs_diff: float
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "case": self.case.kind,
            "params": self.case.params_json(),
            "mc": self.estimate.to_json_dict(),
            "closed": [self.closed.real, self.closed.imag],
            "z": self.z,
            "pass": bool(self.passed),
        }


class _Accumulator:
    __slots__ = ("total", "sq_re", "sq_im", "count")

    def __init__(self):
        self.total = 0.0 + 0.0j
        self.sq_re = 0.0
        self.sq_im = 0.0
        self.count = 0

    def add(self, values: np.ndarray) -> None:
        self.total += complex(values.sum())
        self.sq_re += float(np.sum(values.real**2))
        self.sq_im += float(np.sum(values.imag**2))
        self.count += len(values)

    def finish(self, seed: int) -> MCEstimate:
        m = self.count
        mean = self.total / m
        var_re = max(0.0, (self.sq_re - m * mean.real**2) / (m - 1))
        var_im = max(0.0, (self.sq_im - m * mean.imag**2) / (m - 1))
        se = max(np.sqrt(var_re / m), np.sqrt(var_im / m))
        return MCEstimate(mean=mean, std_error=float(se), samples=m, seed=seed)


def _run_battery(
    cases: Sequence[IdentityCase], samples: int, seed: int
) -> list[MCEstimate]:
    """Evaluate several integrands over shared sample streams.

    All cases must agree on (dimension, sampling group, edge labels); the
    matrices inside the integrands are free to differ.
    """
    if samples < 100:
        raise ConfigurationError(f"need at least 100 samples, got {samples}")
    sig = {(c.dimension(), c.sampling_group(), c.labels()) for c in cases}
    if len(sig) != 1:
        raise ConfigurationError(
            f"battery cases must share (N, group, labels); got {sorted(str(s) for s in sig)}"
        )
    (n_dim, group, labels), = sig
    fns = [build_integrand(c) for c in cases]
    accs = [_Accumulator() for _ in cases]
    done = 0
    chunk_index = 0
    while done < samples:
        count = min(CHUNK, samples - done)
        blocks = {
            label: _group_block(group, seed, label, chunk_index, count, n_dim)
            for label in labels
        }
        ctx = _ChunkContext(blocks)
        for fn, acc in zip(fns, accs):
            acc.add(fn(ctx))
        done += count
        chunk_index += 1
    return [acc.finish(seed) for acc in accs]


def estimate(case: IdentityCase, samples: int, seed: int) -> MCEstimate:
    """Monte Carlo estimate of the case's left-hand-side integral.

    Draws one independent group element per positive edge label per sample;
    the reduction order is fixed by (chunk size, sample index), so results
    are bit-reproducible for identical (seed, samples).
    """
    return _run_battery([case], samples, seed)[0]


def _judge(
    case: IdentityCase,
    est: MCEstimate,
    closed: complex,
    z_threshold: float,
    abs_tol: float,
) -> VerificationReport:
    diff = abs(est.mean - closed)
    if est.std_error < DEGENERATE_SE:
        return VerificationReport(
            case=case, estimate=est, closed=closed, z=None, abs_diff=diff,
            passed=diff <= abs_tol,
        )
    z = diff / est.std_error
    return VerificationReport(
        case=case, estimate=est, closed=closed, z=float(z), abs_diff=diff,
        passed=z <= z_threshold,
    )


def verify(
    case: IdentityCase,
    samples: int = 200_000,
    seed: int = 0,
    z_threshold: float = Z_THRESHOLD,
    abs_tol: float = DEGENERATE_ABS_TOL,
) -> VerificationReport:
    """Estimate the integral, compare against the closed form, and judge:
    pass iff z <= z_threshold, or |diff| <= abs_tol when the estimator
    variance is numerically zero."""
    est = estimate(case, samples, seed)
    return _judge(case, est, closed_value(case), z_threshold, abs_tol)


def verify_battery(
    cases: Sequence[IdentityCase],
    samples: int = 200_000,
    seed: int = 0,
    z_threshold: float = Z_THRESHOLD,
    abs_tol: float = DEGENERATE_ABS_TOL,
) -> list[VerificationReport]:
    """verify() for many cases sharing one sampling pass (same N, group and
    edge labels).  Each case's mean is bit-identical to what a standalone
    verify() with the same (seed, samples) would produce."""
    ests = _run_battery(cases, samples, seed)
    return [
        _judge(case, est, closed_value(case), z_threshold, abs_tol)
        for case, est in zip(cases, ests)
    ]


def compare_estimates(e1: MCEstimate, e2: MCEstimate, z_threshold: float = Z_THRESHOLD) -> tuple[float, bool]:
    """Two-sample agreement test: z = |m1 - m2| / sqrt(se1^2 + se2^2)."""
    se = np.hypot(e1.std_error, e2.std_error)
    if se < DEGENERATE_SE:
        diff = abs(e1.mean - e2.mean)
        return (float("inf") if diff > DEGENERATE_ABS_TOL else 0.0), diff <= DEGENERATE_ABS_TOL
    z = abs(e1.mean - e2.mean) / se
    return float(z), z <= z_threshold
